#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "commands.hpp"
#include "selfcheck_cmd.hpp"
#include "wscd/error.hpp"
#include "wscd/version.hpp"

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kData = 3, kNumeric = 4 };

// Settings for one subcommand: defaults, then --config, then --set, then
// the dedicated flags.
struct Settings {
  std::string config_file;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flags;
  std::string out;

  wscd::tools::RunConfig resolve(const std::string& extra_file = "") const {
    wscd::tools::RunConfig rc;
    if (!config_file.empty()) rc.load(config_file);
    if (!extra_file.empty()) rc.load(extra_file);
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw wscd::ConfigError("--set expects key=value, got " + kv);
      auto trim = [](std::string s) {
        s.erase(0, s.find_first_not_of(' '));
        s.erase(s.find_last_not_of(' ') + 1);
        return s;
      };
      rc.set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
    }
    for (const auto& [k, v] : flags) rc.set(k, v);
    rc.apply_family_defaults();
    return rc;
  }
};

CLI::App* command(CLI::App& app, const std::string& name, const std::string& help, Settings& s) {
  auto* sub = app.add_subcommand(name, help);
  sub->add_option("--config", s.config_file, "key = value settings file")->check(CLI::ExistingFile);
  sub->add_option("--set", s.sets, "override one setting (key=value), repeatable");
  return sub;
}

void bind(CLI::App* sub, Settings& s, const std::string& flag, const std::string& key,
          const std::string& help) {
  sub->add_option_function<std::string>(
      flag, [&s, key](const std::string& v) { s.flags[key] = v; }, help);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weakly supervised cognate detection", "wscd"};
  app.set_version_flag("--version", std::string(wscd::kVersion));
  app.require_subcommand(1);

  Settings build, morph, detect, abl;
  wscd::tools::SelfcheckOptions check;

  auto* b = command(app, "build-dataset", "Build a labeled pair dataset and its manifest", build);
  bind(b, build, "--cognates", "cognates", "TSV of cognate pairs (negatives are generated)");
  bind(b, build, "--synthetic", "synthetic",
       "synthetic corpus: `default` or a settings file with synthetic.* keys");
  bind(b, build, "--neg-ratio", "neg_ratio", "cognate:non-cognate ratio, e.g. 50:50");
  bind(b, build, "--seed", "seed", "random seed");
  bind(b, build, "--lang-a", "lang_a", "first language name");
  bind(b, build, "--lang-b", "lang_b", "second language name");
  b->add_option("--out", build.out, "output directory")->required();

  auto* m = command(app, "train-morph", "Pretrain the encoder on morphology pairs", morph);
  bind(m, morph, "--unimorph", "unimorph", "UniMorph TSV (lemma, form, features)");
  bind(m, morph, "--language", "language", "language code recorded with the pairs");
  bind(m, morph, "--lr", "morph.lr", "learning rate");
  bind(m, morph, "--epochs", "morph.epochs", "training epochs");
  bind(m, morph, "--resample", "resample", "resize the pair set by this percentage, e.g. +30");
  bind(m, morph, "--family", "family", "indian, celtic or south-african (learning-rate defaults)");
  bind(m, morph, "--seed", "seed", "random seed");
  m->add_option("--out", morph.out, "checkpoint path")->required();

  auto* t = command(app, "train-detector", "Cross-validate the cognate detector", detect);
  bind(t, detect, "--mode", "mode", "supervised, weakly, unsupervised or baseline");
  bind(t, detect, "--data", "data", "dataset TSV from build-dataset");
  bind(t, detect, "--init", "init", "morphology checkpoint from train-morph");
  bind(t, detect, "--folds", "folds", "number of folds");
  bind(t, detect, "--family", "family", "indian, celtic or south-african (learning-rate defaults)");
  bind(t, detect, "--seed", "seed", "random seed");
  t->add_option("--out", detect.out, "output directory")->required();

  auto* a = command(app, "ablate", "F-score against morphology data size", abl);
  bind(a, abl, "--data", "data", "dataset TSV from build-dataset");
  bind(a, abl, "--unimorph", "unimorph", "morphology pairs to resample");
  bind(a, abl, "--mode", "mode", "weakly or supervised");
  bind(a, abl, "--from", "ablate.from", "first resample percentage (default -30)");
  bind(a, abl, "--to", "ablate.to", "last resample percentage (default +30)");
  bind(a, abl, "--step", "ablate.step", "grid step in percent (default 15)");
  bind(a, abl, "--seeds", "ablate.seeds", "comma-separated seeds, shared by every grid point");
  bind(a, abl, "--family", "family", "indian, celtic or south-african (learning-rate defaults)");
  a->add_option("--out", abl.out, "output directory")->required();

  auto* s = app.add_subcommand("selfcheck", "Gradient and distribution checks in double precision");
  s->add_option("--instances", check.instances, "random models per objective");
  s->add_option("--calls", check.calls, "randomized distribution calls");
  s->add_option("--seed", check.seed, "random seed");
  s->add_option("--tolerance", check.tolerance, "maximum relative gradient error");
  s->add_flag("--inject-fault", check.inject_fault)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (s->parsed()) return wscd::tools::selfcheck(check, std::cout) ? kOk : kNumeric;
    if (b->parsed()) {
      // A synthetic spec file sits between --config and the flags.
      auto rc = build.resolve();
      if (const std::string spec = rc.str("synthetic"); !spec.empty() && spec != "default")
        rc = build.resolve(spec);
      wscd::tools::build_dataset(rc, build.out, std::cout);
    } else if (m->parsed()) {
      auto rc = morph.resolve();
      wscd::tools::train_morph(rc, morph.out, std::cout);
    } else if (t->parsed()) {
      auto rc = detect.resolve();
      wscd::tools::train_detector(rc, detect.out, std::cout);
    } else if (a->parsed()) {
      auto rc = abl.resolve();
      wscd::tools::ablate(rc, abl.out, std::cout);
    }
  } catch (const wscd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const wscd::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kNumeric;
  } catch (const wscd::InputError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const wscd::DimensionError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const wscd::PreconditionError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}
