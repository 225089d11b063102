#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <string>

#include "distreg/dataset.hpp"
#include "distreg/experiment.hpp"
#include "distreg/model_io.hpp"
#include "distreg/regress.hpp"
#include "test_support.hpp"

using namespace distreg;

namespace {

struct Outcome {
  int code = -1;
  std::string output;  // stdout and stderr interleaved
};

Outcome run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + DISTREG_CLI_PATH + "\" " + args + " 2>&1";
  Outcome o;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) o.output.append(buf.data(), n);
  const int status = pclose(pipe);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

std::string q(const std::filesystem::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST_CASE("cli: synth, run and rerun produce identical result files") {
  testing::TempDir dir;
  auto s = run_cli("synth variance-task --bags 30 --instances 10 --seed 3 --out " + q(dir.path()));
  REQUIRE(s.code == 0);
  const std::string x = testing::read_text(dir / "instances.csv");
  s = run_cli("synth variance-task --bags 30 --instances 10 --seed 3 --out " + q(dir / "again"));
  REQUIRE(s.code == 0);
  CHECK(testing::read_text(dir / "again" / "instances.csv") == x);

  testing::write_text(dir / "cfg.json", R"({
    "data": {"instances": "instances.csv", "targets": "targets.csv"},
    "grid": {"lambda": [0.001, 0.1], "sigma_scale": [0.5, 1], "features": [16]},
    "protocol": {"trials": 2, "folds": 3}
  })");
  const std::string common = "run --config " + q(dir / "cfg.json") + " --model lr,kdr --seed 5 ";
  auto r1 = run_cli(common + "--out " + q(dir / "r1"));
  CHECK_MESSAGE(r1.code == 0, r1.output);
  CHECK(r1.output.find("kdr") != std::string::npos);
  auto r2 = run_cli(common + "--out " + q(dir / "r2"));
  CHECK(r2.code == 0);
  for (const auto* f : {"results.csv", "trials.csv", "selections.json"}) {
    CAPTURE(f);
    CHECK(testing::read_text(dir / "r1" / f) == testing::read_text(dir / "r2" / f));
  }
  const auto resolved = nlohmann::json::parse(testing::read_text(dir / "r1" / "config.resolved.json"));
  CHECK(resolved["protocol"]["seed"] == 5);
  CHECK(resolved["models"].size() == 2);
}

TEST_CASE("cli: fit then predict matches the library and is repeatable") {
  testing::TempDir dir;
  REQUIRE(run_cli("synth variance-task --bags 25 --instances 8 --seed 1 --out " + q(dir.path())).code == 0);
  const auto f = run_cli("fit --instances " + q(dir / "instances.csv") + " --targets " +
                         q(dir / "targets.csv") + " --model rdr --lambda 0.01 --sigma 1.5 --features 32 --seed 4 --out " +
                         q(dir / "m.json"));
  REQUIRE_MESSAGE(f.code == 0, f.output);

  const auto p1 = run_cli("predict " + q(dir / "m.json") + " --instances " + q(dir / "instances.csv") +
                          " --out " + q(dir / "p1.csv"));
  REQUIRE_MESSAGE(p1.code == 0, p1.output);
  REQUIRE(run_cli("predict " + q(dir / "m.json") + " --instances " + q(dir / "instances.csv") + " --out " +
                  q(dir / "p2.csv")).code == 0);
  const std::string text = testing::read_text(dir / "p1.csv");
  CHECK(text == testing::read_text(dir / "p2.csv"));
  CHECK(run_cli("predict " + q(dir / "m.json") + " --instances " + q(dir / "instances.csv")).output == text);

  const auto data = load_bags(dir / "instances.csv", dir / "targets.csv");
  const auto model = fit(ModelSpec::parse("rdr"), data, Hyperparams{0.01, {1.5}, 32, 4});
  const Vector expected = predict(model, data);
  std::istringstream lines(text);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "bag_id,y_pred");
  for (std::size_t b = 0; b < data.size(); ++b) {
    REQUIRE(std::getline(lines, line));
    const auto comma = line.find(',');
    CHECK(line.substr(0, comma) == data.bag(b).id);
    CHECK(std::stod(line.substr(comma + 1)) == doctest::Approx(expected(static_cast<Eigen::Index>(b))).epsilon(1e-12));
  }

  const auto g = run_cli("fit --instances " + q(dir / "instances.csv") + " --targets " + q(dir / "targets.csv") +
                         " --model kdr --folds 3 --out " + q(dir / "g.json"));
  CHECK_MESSAGE(g.code == 0, g.output);
  CHECK(g.output.find("cv_rmse,") != std::string::npos);
}

TEST_CASE("cli: errors and exit codes") {
  testing::TempDir dir;
  REQUIRE(run_cli("synth variance-task --bags 12 --instances 5 --dim 3 --out " + q(dir.path())).code == 0);
  REQUIRE(run_cli("fit --instances " + q(dir / "instances.csv") + " --targets " + q(dir / "targets.csv") +
                  " --model kdr --lambda 0.1 --sigma 1 --out " + q(dir / "m.json")).code == 0);

  REQUIRE(run_cli("synth variance-task --bags 4 --instances 5 --dim 2 --out " + q(dir / "d2")).code == 0);
  const auto wrong = run_cli("predict " + q(dir / "m.json") + " --instances " + q(dir / "d2" / "instances.csv"));
  CHECK(wrong.code == 1);
  CHECK(wrong.output.find("error:") != std::string::npos);
  CHECK(wrong.output.find('3') != std::string::npos);
  CHECK(wrong.output.find('2') != std::string::npos);

  const auto missing = run_cli("run --instances " + q(dir / "nope.csv") + " --targets " + q(dir / "targets.csv") +
                               " --out " + q(dir / "o"));
  CHECK(missing.code == 1);
  CHECK(missing.output.find("nope.csv") != std::string::npos);

  CHECK(run_cli("").code == 2);
  CHECK(run_cli("run --bogus").code == 2);
  CHECK(run_cli("synth nonsense --out " + q(dir / "s")).code == 2);
  CHECK(run_cli("run --instances " + q(dir / "instances.csv")).code == 2);
  CHECK(run_cli("run --config " + q(dir / "absent.json")).code == 2);

  testing::write_text(dir / "bad.json", R"({"data": {"instances": "instances.csv", "targets": "targets.csv"}, "extra": 1})");
  const auto bad = run_cli("run --config " + q(dir / "bad.json"));
  CHECK(bad.code == 1);
  CHECK(bad.output.find("extra") != std::string::npos);

  const auto env = run_cli("synth variance-task --bags 4 --out " + q(dir / "e"));
  CHECK(env.code == 0);
  const std::string cmd = std::string("DISTREG_NUM_THREADS=abc \"") + DISTREG_CLI_PATH + "\" synth variance-task --bags 4 --out " +
                          q(dir / "e") + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  CHECK(WEXITSTATUS(status) == 1);
}

TEST_CASE("cli: mmd on a shifted and an identical pair") {
  testing::TempDir dir;
  REQUIRE(run_cli("synth two-sample-gallery --samples 300 --seed 2 --out " + q(dir.path())).code == 0);
  const auto shifted = run_cli("mmd " + q(dir / "a_x.csv") + " " + q(dir / "a_y.csv") + " --permutations 100");
  REQUIRE_MESSAGE(shifted.code == 0, shifted.output);
  CHECK(shifted.output.find("p_value,0.00990099") != std::string::npos);
  const auto same = run_cli("mmd " + q(dir / "a_x.csv") + " " + q(dir / "a_x.csv") + " --sigma 1 --permutations 50");
  REQUIRE(same.code == 0);
  CHECK(same.output.find("mmd2,0\n") != std::string::npos);
  CHECK(same.output.find("sigma,1\n") != std::string::npos);
}
