#include <doctest.h>

#include <cmath>
#include <random>

#include "distreg/error.hpp"
#include "distreg/experiment.hpp"
#include "distreg/model_io.hpp"
#include "distreg/report.hpp"
#include "distreg/synth.hpp"
#include "oracles.hpp"
#include "scenarios.hpp"
#include "test_support.hpp"

using namespace distreg;

TEST_CASE("synthetic generators are seed-deterministic") {
  const auto a = synth::variance_task({}, 3);
  const auto b = synth::variance_task({}, 3);
  CHECK(a.size() == 120);
  CHECK(a.dim() == 3);
  CHECK(a.bag(0).size() == 50);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.bag(i).instances == b.bag(i).instances);
  CHECK(a.targets() == b.targets());
  CHECK(a.targets() != synth::variance_task({}, 4).targets());
  CHECK(a.targets().minCoeff() >= 0.5);
  CHECK(a.targets().maxCoeff() <= 2.0);

  const auto m = synth::multisource_task({}, 1);
  CHECK(m.num_sources() == 2);
  CHECK(m.source(0).dim() == 2);
  CHECK(m.source(1).dim() == 3);
  for (std::size_t i = 0; i < m.size(); ++i) {
    CHECK(m.source(0).bag(i).size() >= 20);
    CHECK(m.source(0).bag(i).size() <= 40);
    CHECK(m.source(1).bag(i).size() >= 30);
    CHECK(m.source(1).bag(i).size() <= 50);
  }

  testing::TempDir dir;
  save_bags(a, dir / "x.csv", dir / "y.csv");
  const auto back = load_bags(dir / "x.csv", dir / "y.csv");
  CHECK(back.targets() == a.targets());
}

TEST_CASE("two-sample gallery moments") {
  const synth::GalleryParams p;
  const auto g = synth::two_sample_gallery(p, 5);
  REQUIRE(g.size() == 4);
  auto mean = [](const Matrix& m) { return m.mean(); };
  auto var = [](const Matrix& m) { return (m.array() - m.mean()).square().mean(); };
  CHECK(g[0].name == "a");
  CHECK(mean(g[0].y) - mean(g[0].x) == doctest::Approx(3.0).epsilon(0.05));
  CHECK(std::abs(mean(g[1].y) - mean(g[1].x)) < 0.1);
  CHECK(var(g[1].y) / var(g[1].x) == doctest::Approx(4.0).epsilon(0.1));
  CHECK(std::abs(mean(g[2].y) - mean(g[2].x)) < 0.1);
  CHECK(var(g[2].y) == doctest::Approx(1.0).epsilon(0.1));
  CHECK(g[3].x == g[1].x.array().square().matrix());
}

TEST_CASE("mean-task with zero noise is solved exactly by LR end to end") {
  synth::MeanTaskParams p;
  p.noise = 0.0;
  const auto data = MultiSourceDataset(synth::mean_task(p, 8).data);
  HyperGrid g{{1e-6, 1e-3}, {}, {}};
  const auto r = run_protocol(data, ModelSpec::parse("lr"), g, ProtocolOptions{0.33, 3, 5, 0});
  for (const auto& t : r.trials) CHECK(std::abs(t.test.r2 - 1.0) <= 1e-8);
}

TEST_CASE("number formatting") {
  CHECK(format_sig6(0.123456789) == "0.123457");
  CHECK(format_sig6(1234567.0) == "1.23457e+06");
  CHECK(format_sig6(0.0) == "0");
  CHECK(format_sig6(std::nan("")) == "nan");
  CHECK(format_sig6(-2.5) == "-2.5");
}

TEST_CASE("report rendering") {
  EvalReport r;
  r.model = ModelSpec::parse("kdr");
  for (int t = 0; t < 2; ++t) {
    TrialResult tr;
    tr.trial = static_cast<std::size_t>(t);
    tr.seed = static_cast<std::uint64_t>(t);
    tr.chosen = Hyperparams{0.01, {1.5}, 0, 0};
    tr.test = Metrics{0.001 * (t + 1), 0.08 + 0.01 * t, 0.85 + 0.02 * t};
    tr.cv_rmse = 0.09;
    r.trials.push_back(tr);
  }
  aggregate(r);
  const std::vector<EvalReport> reports{r};
  const auto csv = results_csv(reports);
  CHECK(csv.rfind("model,trials,me_x1000_mean,me_x1000_std,rmse_x100_mean,rmse_x100_std,r2_mean,r2_std\n", 0) == 0);
  CHECK(csv.find("kdr,2,1.5,0.707107,8.5,0.707107,0.86,0.0141421\n") != std::string::npos);
  const auto trials = trials_csv(reports);
  CHECK(trials.find("kdr,1,1,0.01,1.5,0,0,0.09,0.002,0.09,0.87\n") != std::string::npos);
  const auto table = results_table(reports, false);
  CHECK(table.find("ME×1000") != std::string::npos);
  CHECK(table.find("8.5 ± 0.707107") != std::string::npos);
  CHECK(table.find("grid") == std::string::npos);
  CHECK(results_table(reports, true).find("grid [s]") != std::string::npos);
  const auto sel = selections_json(reports);
  CHECK(sel[0]["model"] == "kdr");
  CHECK(sel[0]["trials"][1]["hyperparameters"]["lambda"] == 0.01);
  const auto h = hyperparams_from_json(hyperparams_to_json(Hyperparams{0.5, {1.0, 2.0}, 64, 123}));
  CHECK(h.sigmas == std::vector<double>{1.0, 2.0});
  CHECK(h.features == 64);
  CHECK(h.seed == 123);
}

TEST_CASE("model save/load reproduces predictions for every kind") {
  std::mt19937_64 gen(21);
  const auto train = scenario::random_multisource(gen, 12);
  const auto test = scenario::random_multisource(gen, 6);
  testing::TempDir dir;
  for (const auto kind : scenario::all_kinds()) {
    CAPTURE(std::string(model_kind_name(kind)));
    const ModelSpec spec{kind, 0};
    const auto model = fit(spec, train, scenario::default_hyper(kind));
    const auto path = dir / (std::string(model_kind_name(kind)) + ".json");
    save_model(model, path);
    const auto loaded = load_model(path);
    CHECK(loaded.kind == kind);
    const Vector a = predict(model, test), b = predict(loaded, test);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12);
    save_model(loaded, dir / "again.json");
    CHECK(testing::read_text(path) == testing::read_text(dir / "again.json"));
  }
  const auto single = fit(ModelSpec::parse("kdr:1"), train, scenario::default_hyper(ModelKind::kKDR));
  save_model(single, dir / "single.json");
  CHECK(load_model(dir / "single.json").source == 1);
}

TEST_CASE("corrupt or inconsistent model files are rejected") {
  testing::TempDir dir;
  testing::write_text(dir / "junk.json", "{ not json");
  CHECK_THROWS_AS(load_model(dir / "junk.json"), ConfigError);
  testing::write_text(dir / "other.json", "{\"format\": \"something\"}");
  CHECK_THROWS_AS(load_model(dir / "other.json"), ConfigError);
  CHECK_THROWS_AS(load_model(dir / "missing.json"), ConfigError);

  std::mt19937_64 gen(22);
  const auto d = oracle::random_dataset(gen, 5, 3, 2);
  auto j = model_to_json(fit(ModelSpec::parse("kdr"), d, Hyperparams{0.1, {1.0}, 0, 0}));
  j["solution"]["coefficients"].erase(0);
  CHECK_THROWS_AS(model_from_json(j), ConfigError);
  auto r = model_to_json(fit(ModelSpec::parse("rdr"), d, Hyperparams{0.1, {1.0}, 8, 1}));
  r["basis"]["frequencies"] = 9;
  CHECK_THROWS_AS(model_from_json(r), ConfigError);
  auto k = model_to_json(fit(ModelSpec::parse("lr"), d, Hyperparams{0.1, {}, 0, 0}));
  k["kind"] = "nonsense";
  CHECK_THROWS_AS(model_from_json(k), ConfigError);
}

TEST_CASE("experiment config parsing and serialization") {
  testing::TempDir dir;
  testing::write_text(dir / "cfg.json", R"({
    "data": {"instances": ["a.csv", "/abs/b.csv"], "targets": "t.csv"},
    "models": ["kdr", "stacked-lr", "kr:1"],
    "grid": {"lambda": [0.1, 1], "sigma_scale": [1], "features": [16]},
    "protocol": {"test_fraction": 0.25, "trials": 2, "folds": 3, "seed": 9},
    "output": "out"
  })");
  const auto c = ExperimentConfig::load(dir / "cfg.json");
  CHECK(c.instances[0] == dir / "a.csv");
  CHECK(c.instances[1] == "/abs/b.csv");
  CHECK(c.models.size() == 3);
  CHECK(c.models[2].source == 1);
  CHECK(c.grid.lambdas == std::vector<double>{0.1, 1.0});
  CHECK(c.protocol.folds == 3);
  CHECK(c.protocol.seed == 9);
  CHECK(c.output == dir / "out");
  const auto again = ExperimentConfig::from_json(c.to_json());
  CHECK(again.to_json() == c.to_json());

  testing::write_text(dir / "bad.json", R"({"modles": ["kdr"]})");
  CHECK_THROWS_AS(ExperimentConfig::load(dir / "bad.json"), ConfigError);
  testing::write_text(dir / "bad2.json", R"({"models": ["svm"]})");
  CHECK_THROWS_AS(ExperimentConfig::load(dir / "bad2.json"), ConfigError);
  const auto defaults = ExperimentConfig::from_json(nlohmann::json::object());
  CHECK(defaults.models.size() == 4);
  CHECK(defaults.protocol.test_fraction == 0.33);
}

TEST_CASE("run_experiment writes byte-identical machine-readable outputs") {
  testing::TempDir dir;
  save_bags(synth::variance_task({30, 8, 2}, 1), dir / "x.csv", dir / "y.csv");
  ExperimentConfig c;
  c.instances = {dir / "x.csv"};
  c.targets = dir / "y.csv";
  c.models = {ModelSpec::parse("lr"), ModelSpec::parse("kr"), ModelSpec::parse("rdr"), ModelSpec::parse("kdr")};
  c.grid = HyperGrid{{1e-3, 1e-1}, {0.5, 1.0}, {16}};
  c.protocol = ProtocolOptions{0.3, 2, 3, 4};
  c.output = dir / "run1";
  const auto reports = run_experiment(c);
  CHECK(reports.size() == 4);
  c.output = dir / "run2";
  run_experiment(c);
  for (const auto* f : {"results.csv", "trials.csv", "selections.json"}) {
    CAPTURE(f);
    CHECK(testing::read_text(dir / "run1" / f) == testing::read_text(dir / "run2" / f));
  }
  const auto results = testing::read_text(dir / "run1" / "results.csv");
  std::size_t lines = 0;
  for (const char ch : results) lines += ch == '\n';
  CHECK(lines == 5);
  CHECK(std::filesystem::exists(dir / "run1" / "report.txt"));
  CHECK(std::filesystem::exists(dir / "run1" / "config.resolved.json"));

  c.instances = {dir / "missing.csv"};
  try {
    run_experiment(c);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("missing.csv") != std::string::npos);
  }
}

TEST_CASE("write_predictions keeps input bag order") {
  testing::TempDir dir;
  std::mt19937_64 gen(2);
  const auto d = MultiSourceDataset(oracle::random_dataset(gen, 3, 2, 1));
  Vector y(3);
  y << 0.5, -1.25, 3.0;
  write_predictions(d, y, dir / "p.csv");
  CHECK(testing::read_text(dir / "p.csv") == "bag_id,y_pred\nb0,0.5\nb1,-1.25\nb2,3\n");
  CHECK_THROWS_AS(write_predictions(d, Vector::Zero(2), dir / "q.csv"), DimensionError);
}
