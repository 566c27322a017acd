#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "wscd/error.hpp"
#include "wscd/numerics/checkpoint.hpp"

namespace wscd::tools {

namespace fs = std::filesystem;
using pipeline::ExperimentConfig;
using pipeline::Mode;

namespace {

fs::path sidecar(const fs::path& path, const std::string& suffix) {
  return fs::path(path.string() + suffix);
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw InputError("failed writing " + path.string());
}

const std::string& required(const RunConfig& rc, const std::string& key, const char* flag) {
  const std::string& v = rc.str(key);
  if (v.empty()) throw ConfigError(std::string("missing ") + flag);
  return v;
}

void report_load(const data::LoadReport& r, const std::string& what, std::ostream& msg) {
  if (r.skipped_malformed)
    msg << "warning: " << what << ": skipped " << r.skipped_malformed << " malformed line(s)\n";
  if (r.duplicates) msg << "warning: " << what << ": dropped " << r.duplicates << " duplicate(s)\n";
  for (const auto& w : r.warnings) msg << "warning: " << what << ": " << w << "\n";
}

// build-dataset writes `<name>.manifest.json` next to `<name>.tsv`.
fs::path manifest_path(const fs::path& tsv) {
  fs::path p = tsv;
  p.replace_extension(".manifest.json");
  return p;
}

data::CognateDataset load_dataset(const RunConfig& rc, std::ostream& msg) {
  const fs::path path = required(rc, "data", "--data");
  std::optional<data::Manifest> manifest;
  if (fs::exists(manifest_path(path))) manifest = data::Manifest::load(manifest_path(path));
  data::LoadReport report;
  auto ds = data::load_cognates(path, &report, manifest);
  report_load(report, path.string(), msg);
  if (ds.size() == 0) throw DataError("no pairs in " + path.string());
  if (manifest) {
    ds.lang_a = manifest->lang_a;
    ds.lang_b = manifest->lang_b;
    ds.source = manifest->source;
  } else {
    ds.lang_a = rc.str("lang_a").empty() ? "a" : rc.str("lang_a");
    ds.lang_b = rc.str("lang_b").empty() ? "b" : rc.str("lang_b");
  }
  return ds;
}

// Reads a train-morph checkpoint with its vocabulary and architecture
// sidecars; the architecture replaces the `encoder.*` keys of `rc`.
pipeline::EncoderInit load_init(RunConfig& rc) {
  const fs::path path = rc.str("init");
  pipeline::EncoderInit init;
  init.weights = numerics::load_checkpoint(path);
  init.vocab = text::CharVocab::load(sidecar(path, ".vocab"));
  std::ifstream in(sidecar(path, ".encoder.json"));
  if (!in) throw InputError("missing encoder sidecar " + sidecar(path, ".encoder.json").string());
  std::stringstream text;
  text << in.rdbuf();
  pipeline::set_encoder_keys(rc, pipeline::encoder_config_from_json(text.str()));
  return init;
}

std::vector<data::MorphPair> load_morph(const RunConfig& rc, std::ostream& msg) {
  const std::string& path = required(rc, "unimorph", "--unimorph");
  data::LoadReport report;
  auto pairs = data::load_unimorph(path, rc.str("language"), &report);
  report_load(report, path, msg);
  if (pairs.empty()) throw DataError("no usable morphology pairs in " + path);
  return pairs;
}

void print_report(const eval::EvalReport& r, std::ostream& msg) {
  std::ios saved(nullptr);
  saved.copyfmt(msg);
  msg << std::fixed << std::setprecision(4);
  for (const auto& f : r.folds)
    msg << "fold " << f.fold << ": P " << f.scores.precision << "  R " << f.scores.recall << "  F "
        << f.scores.f << "\n";
  msg << r.method << " " << r.language_pair << ": mean F " << r.mean_f() << "\n";
  msg.copyfmt(saved);
  for (const auto& n : r.notes) msg << "note: " << n << "\n";
}

std::string signed_percent(long p) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%+ld", p);
  return buf;
}

}  // namespace

void build_dataset(RunConfig& rc, const fs::path& out, std::ostream& msg) {
  const bool synthetic = !rc.str("synthetic").empty();
  const bool cognates = !rc.str("cognates").empty();
  if (synthetic == cognates) throw ConfigError("give exactly one of --cognates or --synthetic");

  Rng rng(static_cast<std::uint64_t>(rc.integer("seed")));
  data::CognateDataset ds;
  std::vector<data::MorphPair> morph;
  if (synthetic) {
    const auto spec = pipeline::synthetic_spec(rc);
    auto corpus = data::gen_synthetic(spec, rng);
    ds = std::move(corpus.dataset);
    morph = std::move(corpus.morphology);
  } else {
    const std::string& path = rc.str("cognates");
    data::LoadReport report;
    const auto input = data::load_cognates(path, &report);
    report_load(report, path, msg);
    std::vector<data::WordPair> positives;
    std::size_t dropped = 0;
    for (const auto& p : input.pairs) {
      if (p.label == data::Label::non_cognate) ++dropped;
      else positives.push_back(p.words);
    }
    if (positives.empty()) throw DataError("no cognate pairs in " + path);
    if (dropped)
      msg << "note: ignored " << dropped << " supplied non-cognate row(s); negatives are rebuilt\n";
    auto negatives =
        data::build_negatives(positives, data::NegativeRatio::parse(rc.str("neg_ratio")), rng);
    for (const auto& w : negatives.warnings) msg << "warning: " << w << "\n";
    ds.pairs = std::move(negatives.pairs);
    ds.lang_a = rc.str("lang_a").empty() ? "a" : rc.str("lang_a");
    ds.lang_b = rc.str("lang_b").empty() ? "b" : rc.str("lang_b");
    ds.source = data::Source::real;
  }

  make_dir(out);
  data::save_cognates(out / "dataset.tsv", ds);
  data::Manifest::of(ds).save(out / "dataset.manifest.json");
  if (!morph.empty()) {
    auto m = open_out(out / "morphology.tsv");
    data::write_unimorph(m, morph);
  }
  const auto hash = rc.write_snapshot(out / "build.config");
  msg << "wrote " << ds.size() << " pairs (" << ds.count(data::Label::cognate) << " cognate, "
      << ds.count(data::Label::non_cognate) << " non-cognate)";
  if (!morph.empty()) msg << " and " << morph.size() << " morphology pairs";
  msg << " to " << out.string() << "\nconfig " << hash << "\n";
}

void train_morph(RunConfig& rc, const fs::path& out, std::ostream& msg) {
  auto pairs = load_morph(rc, msg);
  const auto seed = static_cast<std::uint64_t>(rc.integer("seed"));
  const auto percent = static_cast<int>(rc.integer("resample"));
  if (percent != 0) {
    Rng rng(seed);
    const std::size_t before = pairs.size();
    pairs = data::morph_resample(pairs, percent, rng);
    msg << "resampled " << before << " -> " << pairs.size() << " pairs ("
        << signed_percent(percent) << "%)\n";
  }
  const auto enc = pipeline::encoder_config(rc);
  const auto mc = pipeline::morph_config(rc);

  if (out.has_parent_path()) make_dir(out.parent_path());
  auto log = open_out(sidecar(out, ".log.jsonl"));
  morphology::MorphTrainResult result;
  auto init = pipeline::pretrain_encoder(pairs, enc, mc, seed, &result, &log);

  {
    auto ckpt = open_out(out);
    numerics::write_checkpoint(ckpt, init.weights);
  }
  init.vocab.save(sidecar(out, ".vocab"));
  write_text(sidecar(out, ".encoder.json"), pipeline::encoder_config_json(enc));
  const auto hash = rc.write_snapshot(sidecar(out, ".config"));

  const auto& first = result.curve.front();
  const auto& best = result.curve[result.best_epoch];
  msg << "morphology: " << result.train_pairs << " train / " << result.heldout_pairs
      << " held-out pairs, " << result.curve.size() - 1 << " epoch(s)"
      << (result.stopped_early ? " (early stop)" : "") << "\n"
      << "loss " << first.train_loss << " -> " << best.train_loss << ", held-out "
      << first.heldout_loss << " -> " << best.heldout_loss << " (best epoch " << result.best_epoch
      << ")\n";
  for (const auto& w : result.warnings) msg << "warning: " << w << "\n";
  msg << "wrote " << out.string() << "\nconfig " << hash << "\n";
}

void train_detector(RunConfig& rc, const fs::path& out, std::ostream& msg) {
  const Mode mode = pipeline::parse_mode(rc.str("mode"));
  const auto ds = load_dataset(rc, msg);
  std::optional<pipeline::EncoderInit> init;
  if (!rc.str("init").empty()) {
    if (mode == Mode::baseline || mode == Mode::unsupervised)
      msg << "note: --init is ignored in " << pipeline::mode_name(mode) << " mode\n";
    else
      init = load_init(rc);
  }
  if (mode == Mode::weakly && !init)
    throw ConfigError("weakly-supervised mode needs morphological knowledge: pass --init");
  const ExperimentConfig cfg = pipeline::experiment_config(rc);

  make_dir(out);
  const auto hash = rc.write_snapshot(out / "run.config");
  auto log = open_out(out / "train.log.jsonl");
  const pipeline::EncoderInit* ip = init ? &*init : nullptr;

  pipeline::RunOutput run;
  switch (mode) {
    case Mode::supervised: run = pipeline::run_supervised(ds, ip, cfg, &log); break;
    case Mode::weakly:
    case Mode::unsupervised: {
      const auto pairs = ds.word_pairs();
      run = pipeline::run_label_free(pairs, ip, cfg, &log);
      break;
    }
    case Mode::baseline: run = pipeline::run_baseline(ds, cfg); break;
  }

  {
    auto a = open_out(out / "assignments.tsv");
    a << "fold\tsplit\tindex\tid\n";
    for (const auto& f : run.folds) {
      for (std::size_t i = 0; i < f.train_indices.size(); ++i)
        a << f.fold << "\ttrain\t" << f.train_indices[i] << "\t" << f.train_ids[i] << "\n";
      for (std::size_t i = 0; i < f.test_indices.size(); ++i)
        a << f.fold << "\ttest\t" << f.test_indices[i] << "\t" << f.test_ids[i] << "\n";
    }
  }
  for (const auto& f : run.folds)
    if (f.params.size() > 0)
      numerics::save_checkpoint(out / ("fold" + std::to_string(f.fold) + ".ckpt"), f.params);

  if (ds.unlabeled() > 0) {
    msg << "note: " << ds.unlabeled() << " unlabeled pair(s); wrote assignments without scores\n";
  } else {
    auto report = pipeline::score(run, ds.labels(), ds.lang_a + "-" + ds.lang_b, cfg.seed);
    report.config_hash = hash;
    write_text(out / "report.json", report.to_json());
    print_report(report, msg);
  }
  msg << "config " << hash << "\n";
}

void ablate(RunConfig& rc, const fs::path& out, std::ostream& msg) {
  const Mode mode = pipeline::parse_mode(rc.str("mode"));
  if (mode != Mode::weakly && mode != Mode::supervised)
    throw ConfigError("ablate varies morphology data: mode must be weakly or supervised");
  const auto from = rc.integer("ablate.from");
  const auto to = rc.integer("ablate.to");
  const auto step = rc.integer("ablate.step");
  if (step <= 0) throw ConfigError("ablate.step must be positive");
  if (from > to) throw ConfigError("ablate.from must not exceed ablate.to");
  if (from <= -100) throw ConfigError("ablate.from must be above -100");
  const auto seeds = rc.counts("ablate.seeds");

  const auto ds = load_dataset(rc, msg);
  const auto morph = load_morph(rc, msg);
  const auto enc = pipeline::encoder_config(rc);
  const auto mc = pipeline::morph_config(rc);
  ExperimentConfig cfg = pipeline::experiment_config(rc);

  make_dir(out);
  const auto hash = rc.write_snapshot(out / "ablate.config");
  const auto labels = ds.labels();
  const auto pairs = ds.word_pairs();
  const std::string lp = ds.lang_a + "-" + ds.lang_b;

  std::ostringstream table;
  table << "resample\tmorph_pairs";
  for (auto s : seeds) table << "\tF_seed" << s;
  table << "\tmean_F\n";
  for (auto p = from; p <= to; p += step) {
    table << signed_percent(p) << "%";
    double sum = 0;
    std::size_t size = 0;
    std::ostringstream cells;
    cells << std::fixed << std::setprecision(4);
    for (auto s : seeds) {
      Rng rng(s);
      const auto subset = data::morph_resample(morph, static_cast<int>(p), rng);
      size = subset.size();
      const auto init = pipeline::pretrain_encoder(subset, enc, mc, s);
      cfg.seed = s;
      const auto run = mode == Mode::weakly ? pipeline::run_label_free(pairs, &init, cfg)
                                            : pipeline::run_supervised(ds, &init, cfg);
      auto report = pipeline::score(run, labels, lp, s);
      report.config_hash = hash;
      report.notes.push_back("morphology resample " + signed_percent(p) + "%");
      write_text(out / ("ablate_" + signed_percent(p) + "_seed" + std::to_string(s) + ".json"),
                 report.to_json());
      cells << "\t" << report.mean_f();
      sum += report.mean_f();
    }
    table << "\t" << size << cells.str() << "\t" << std::fixed << std::setprecision(4)
          << sum / double(seeds.size()) << std::defaultfloat << "\n";
    msg << "resample " << signed_percent(p) << "%: mean F " << std::fixed << std::setprecision(4)
        << sum / double(seeds.size()) << std::defaultfloat << "\n";
  }
  write_text(out / "ablation.tsv", table.str());
  msg << "\n" << table.str() << "config " << hash << "\n";
}

}  // namespace wscd::tools
