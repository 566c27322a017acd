// Compiled with WSCD_REAL_DOUBLE: finite differences need the 64-bit model.
#include "selfcheck_cmd.hpp"

#include <ostream>

#include "wscd/numerics/checkpoint.hpp"
#include "wscd/numerics/ops.hpp"
#include "wscd/selfcheck.hpp"
#include "wscd/version.hpp"

namespace wscd::tools {

bool selfcheck(const SelfcheckOptions& o, std::ostream& msg) {
  msg << "wscd " << kVersion << "\n"
      << "numerics version " << kNumericsVersion << " (gradient checks in float64)\n"
      << "checkpoint format version " << int(f64::numerics::kCheckpointVersion) << "\n";

  bool ok = true;
  f64::numerics::testing::inject_gradient_fault(o.inject_fault);
  const auto grads = f64::selfcheck::gradient_suite(o.instances, o.seed);
  f64::numerics::testing::inject_gradient_fault(false);
  for (const auto& c : grads) {
    const bool pass = c.max_rel_error < o.tolerance;
    ok = ok && pass;
    msg << (pass ? "ok    " : "FAIL  ") << c.objective << ": " << c.instances << " instances, "
        << c.entries << " entries, max rel error " << c.max_rel_error;
    if (!pass) msg << " at " << c.worst_entry;
    msg << "\n";
  }

  const auto d = f64::selfcheck::distribution_suite(o.calls, o.seed);
  const bool rows = d.max_row_error <= 1e-6 && d.all_in_unit_interval;
  const bool kl = d.max_self_kl <= 1e-9;
  msg << (rows ? "ok    " : "FAIL  ") << "row sums over " << d.calls
      << " calls: max |sum - 1| = " << d.max_row_error << "\n"
      << (kl ? "ok    " : "FAIL  ") << "KL(P||P) max " << d.max_self_kl << "\n"
      << (d.fixed_point_exact ? "ok    " : "FAIL  ") << "single-sample target fixed point\n";
  ok = ok && rows && kl && d.fixed_point_exact;
  msg << (ok ? "selfcheck passed" : "selfcheck FAILED") << "\n";
  return ok;
}

}  // namespace wscd::tools
