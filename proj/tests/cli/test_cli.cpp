#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const fs::path kWork = WSCD_CLI_WORKDIR;

struct Result {
  int code = -1;
  std::string out;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Result wscd(const std::string& args) {
  const fs::path log = kWork / "last.out";
  const std::string cmd = std::string("\"") + WSCD_BINARY + "\" " + args + " > \"" +
                          log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(log)};
}

std::string at(const std::string& name) { return "\"" + (kWork / name).string() + "\""; }

// Small architecture and short schedules so every command runs in seconds.
void write_small_config() {
  std::ofstream out(kWork / "small.conf");
  out << "# small model\n"
         "encoder.char_dim = 8\n"
         "encoder.filters = 8\n"
         "encoder.orders = 2,3\n"
         "encoder.max_len = 16\n"
         "sup.epochs = 3\n"
         "pretrain.epochs = 2\n"
         "self.max_epochs = 3\n"
         "morph.epochs = 2\n"
         "morph.proj_dim = 16\n"
         "synthetic.lexicon_size = 60\n"
         "synthetic.morph_stems = 60\n";
}

struct Workspace {
  Workspace() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
    write_small_config();
  }
};

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("version, help and argument errors") {
    Workspace ws;
    const auto v = wscd("--version");
    CHECK(v.code == 0);
    CHECK(v.out.find("0.1.0") != std::string::npos);
    CHECK(wscd("--help").code == 0);
    CHECK(wscd("").code == 2);
    CHECK(wscd("train-detector --mode weakly").code == 2);  // --out missing
    CHECK(wscd("frobnicate").code == 2);
  }

  TEST_CASE("selfcheck passes and detects an injected fault") {
    Workspace ws;
    const auto ok = wscd("selfcheck --instances 3 --calls 50");
    CHECK(ok.code == 0);
    CHECK(ok.out.find("selfcheck passed") != std::string::npos);
    const auto bad = wscd("selfcheck --instances 3 --calls 50 --inject-fault");
    CHECK(bad.code == 4);
    CHECK(bad.out.find("FAILED") != std::string::npos);
  }

  TEST_CASE("full workflow with replayable configs") {
    Workspace ws;
    const std::string conf = "--config " + at("small.conf");
    REQUIRE(wscd("build-dataset --synthetic default --seed 3 " + conf + " --out " + at("ds")).code ==
            0);
    CHECK(fs::exists(kWork / "ds" / "dataset.tsv"));
    CHECK(fs::exists(kWork / "ds" / "dataset.manifest.json"));
    CHECK(fs::exists(kWork / "ds" / "morphology.tsv"));

    const auto morph = wscd("train-morph --unimorph " + at("ds/morphology.tsv") +
                            " --family celtic --seed 3 " + conf + " --out " + at("m/enc.ckpt"));
    REQUIRE(morph.code == 0);
    CHECK(fs::exists(kWork / "m" / "enc.ckpt"));
    CHECK(fs::exists(kWork / "m" / "enc.ckpt.vocab"));
    CHECK(fs::exists(kWork / "m" / "enc.ckpt.encoder.json"));

    const auto weak = wscd("train-detector --mode weakly --data " + at("ds/dataset.tsv") +
                           " --init " + at("m/enc.ckpt") + " --folds 3 --seed 3 " + conf +
                           " --out " + at("weak"));
    REQUIRE(weak.code == 0);
    const auto report = nlohmann::json::parse(slurp(kWork / "weak" / "report.json"));
    CHECK(report["folds"].size() == 3);
    CHECK(fs::exists(kWork / "weak" / "assignments.tsv"));
    CHECK(fs::exists(kWork / "weak" / "fold0.ckpt"));
    CHECK(fs::exists(kWork / "weak" / "train.log.jsonl"));

    // Replaying the recorded settings reproduces the assignments exactly.
    const auto replay = wscd("train-detector --config " + at("weak/run.config") + " --out " +
                             at("weak2"));
    REQUIRE(replay.code == 0);
    CHECK(slurp(kWork / "weak" / "assignments.tsv") == slurp(kWork / "weak2" / "assignments.tsv"));
    CHECK(slurp(kWork / "weak" / "fold1.ckpt") == slurp(kWork / "weak2" / "fold1.ckpt"));

    for (const char* mode : {"baseline", "supervised"}) {
      const auto r = wscd(std::string("train-detector --mode ") + mode + " --data " +
                          at("ds/dataset.tsv") + " --folds 3 " + conf + " --out " +
                          at(std::string("run_") + mode));
      CHECK(r.code == 0);
      CHECK(fs::exists(kWork / (std::string("run_") + mode) / "report.json"));
    }
  }

  TEST_CASE("unsupervised output ignores the label column") {
    Workspace ws;
    const std::string conf = "--config " + at("small.conf");
    REQUIRE(wscd("build-dataset --synthetic default --seed 4 " + conf + " --out " + at("ds")).code ==
            0);
    // Same pairs with every label inverted, without a manifest.
    fs::create_directories(kWork / "flip");
    {
      std::ifstream in(kWork / "ds" / "dataset.tsv");
      std::ofstream out(kWork / "flip" / "dataset.tsv");
      std::string line;
      while (std::getline(in, line)) {
        line.back() = line.back() == '1' ? '0' : '1';
        out << line << '\n';
      }
    }
    const std::string common = " --mode unsupervised --folds 3 --seed 4 " + conf;
    REQUIRE(wscd("train-detector --data " + at("ds/dataset.tsv") + common + " --out " + at("a"))
                .code == 0);
    REQUIRE(wscd("train-detector --data " + at("flip/dataset.tsv") + common + " --out " + at("b"))
                .code == 0);
    CHECK(slurp(kWork / "a" / "assignments.tsv") == slurp(kWork / "b" / "assignments.tsv"));
    CHECK(slurp(kWork / "a" / "fold0.ckpt") == slurp(kWork / "b" / "fold0.ckpt"));
  }

  TEST_CASE("error exit codes") {
    Workspace ws;
    const std::string conf = "--config " + at("small.conf");
    REQUIRE(wscd("build-dataset --synthetic default " + conf + " --out " + at("ds")).code == 0);

    // weakly mode needs a morphology checkpoint
    CHECK(wscd("train-detector --mode weakly --data " + at("ds/dataset.tsv") + " " + conf +
               " --out " + at("x"))
              .code == 2);
    CHECK(wscd("train-detector --mode sideways --data " + at("ds/dataset.tsv") + " --out " +
               at("x"))
              .code == 2);
    CHECK(wscd("train-detector --set no.such.key=1 --data " + at("ds/dataset.tsv") + " --out " +
               at("x"))
              .code == 2);

    // manifest counts disagree with the file
    {
      std::ofstream out(kWork / "ds" / "dataset.tsv", std::ios::app);
      out << "zzzz\tqqqq\t1\n";
    }
    CHECK(wscd("train-detector --mode baseline --data " + at("ds/dataset.tsv") + " --out " +
               at("x"))
              .code == 3);
    CHECK(wscd("train-detector --mode baseline --data " + at("missing.tsv") + " --out " + at("x"))
              .code == 3);

    // an absurd learning rate diverges
    fs::remove(kWork / "ds" / "dataset.manifest.json");
    CHECK(wscd("train-detector --mode supervised --set sup.lr=1e30 --data " +
               at("ds/dataset.tsv") + " " + conf + " --out " + at("x"))
              .code == 4);
  }

  TEST_CASE("ablation grid shares seeds across points") {
    Workspace ws;
    const std::string conf = "--config " + at("small.conf");
    REQUIRE(wscd("build-dataset --synthetic default --seed 2 " + conf + " --out " + at("ds")).code ==
            0);
    const auto r = wscd("ablate --mode weakly --data " + at("ds/dataset.tsv") + " --unimorph " +
                        at("ds/morphology.tsv") + " --from -30 --to 30 --step 30 --seeds 1,2 " +
                        conf + " --set folds=2 --out " + at("abl"));
    REQUIRE(r.code == 0);
    const std::string table = slurp(kWork / "abl" / "ablation.tsv");
    std::size_t rows = 0;
    for (char c : table) rows += c == '\n';
    CHECK(rows == 1 + 3);  // header plus one row per grid point
    CHECK(fs::exists(kWork / "abl" / "ablate_-30_seed1.json"));
    CHECK(fs::exists(kWork / "abl" / "ablate_+30_seed2.json"));
    CHECK(wscd("ablate --mode baseline --data " + at("ds/dataset.tsv") + " --unimorph " +
               at("ds/morphology.tsv") + " --out " + at("abl2"))
              .code == 2);
  }
}
