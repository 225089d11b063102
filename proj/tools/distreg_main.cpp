// distreg: experiment runner, synthetic data generator, MMD two-sample test,
// and model fit/predict front end.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "distreg/dataset.hpp"
#include "distreg/error.hpp"
#include "distreg/eval.hpp"
#include "distreg/experiment.hpp"
#include "distreg/kernel.hpp"
#include "distreg/model_io.hpp"
#include "distreg/parallel.hpp"
#include "distreg/regress.hpp"
#include "distreg/report.hpp"
#include "distreg/synth.hpp"

namespace fs = std::filesystem;
using namespace distreg;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<ModelSpec> parse_models(const std::vector<std::string>& names) {
  std::vector<ModelSpec> out;
  for (const auto& name : names) {
    std::size_t start = 0;
    while (start <= name.size()) {
      const auto comma = name.find(',', start);
      const auto piece = name.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (!piece.empty()) out.push_back(ModelSpec::parse(piece));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  return out;
}

// Flags shared by run and fit; unset values leave the config untouched.
struct CommonOptions {
  std::string config;
  std::vector<std::string> instances;
  std::string targets;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> models;
  std::optional<double> test_fraction;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> folds;
  std::string out;

  ExperimentConfig resolve() const {
    ExperimentConfig c = config.empty() ? ExperimentConfig::from_json(nlohmann::json::object())
                                        : ExperimentConfig::load(config);
    if (!instances.empty()) {
      c.instances.assign(instances.begin(), instances.end());
    }
    if (!targets.empty()) c.targets = targets;
    if (seed) c.protocol.seed = *seed;
    if (!models.empty()) c.models = parse_models(models);
    if (test_fraction) c.protocol.test_fraction = *test_fraction;
    if (trials) c.protocol.trials = *trials;
    if (folds) c.protocol.folds = *folds;
    if (!out.empty()) c.output = out;
    if (c.instances.empty()) throw UsageError("no instances files: pass --instances or a --config with data.instances");
    if (c.targets.empty()) throw UsageError("no targets file: pass --targets or a --config with data.targets");
    return c;
  }
};

void add_common(CLI::App* cmd, CommonOptions& o, bool protocol_flags) {
  cmd->add_option("--config", o.config, "JSON experiment configuration")->check(CLI::ExistingFile);
  cmd->add_option("--instances", o.instances, "instances CSV, one per source (repeatable)");
  cmd->add_option("--targets", o.targets, "targets CSV shared by all sources");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--model", o.models,
                  "model kind: lr, kr, kdr, rdr, mdr, stacked-{lr,kr,rdr,kdr}; kind:i picks source i");
  cmd->add_option("--folds", o.folds, "cross-validation folds");
  if (protocol_flags) {
    cmd->add_option("--test-fraction", o.test_fraction, "fraction of bags held out per trial");
    cmd->add_option("--trials", o.trials, "number of repeated train/test splits");
  }
}

int cmd_run(const CommonOptions& o) {
  const ExperimentConfig config = o.resolve();
  const auto reports = run_experiment(config);
  std::cout << results_table(reports, true);
  std::cout << "results written to " << config.output.string() << "\n";
  return 0;
}

struct SynthOptions {
  std::string kind;
  std::string out = ".";
  std::uint64_t seed = 0;
  std::optional<std::size_t> bags;
  std::optional<std::size_t> instances;
  std::optional<std::size_t> dim;
  std::optional<double> noise;
  std::optional<std::size_t> samples;
};

int cmd_synth(const SynthOptions& o) {
  const fs::path dir = o.out;
  fs::create_directories(dir);
  if (o.kind == "variance-task") {
    synth::VarianceTaskParams p;
    if (o.bags) p.bags = *o.bags;
    if (o.instances) p.instances = *o.instances;
    if (o.dim) p.dim = *o.dim;
    save_bags(synth::variance_task(p, o.seed), dir / "instances.csv", dir / "targets.csv");
  } else if (o.kind == "mean-task") {
    synth::MeanTaskParams p;
    if (o.bags) p.bags = *o.bags;
    if (o.instances) p.instances = *o.instances;
    if (o.dim) p.dim = *o.dim;
    if (o.noise) p.noise = *o.noise;
    save_bags(synth::mean_task(p, o.seed).data, dir / "instances.csv", dir / "targets.csv");
  } else if (o.kind == "multisource-task") {
    synth::MultiSourceTaskParams p;
    if (o.bags) p.bags = *o.bags;
    const auto data = synth::multisource_task(p, o.seed);
    save_bags(data.source(0), dir / "source1.csv", dir / "targets.csv");
    save_bags(data.source(1), dir / "source2.csv", dir / "targets.csv");
  } else if (o.kind == "two-sample-gallery") {
    synth::GalleryParams p;
    if (o.samples) p.samples = *o.samples;
    if (o.dim) p.dim = *o.dim;
    for (const auto& s : synth::two_sample_gallery(p, o.seed)) {
      save_matrix_csv(s.x, dir / (s.name + "_x.csv"));
      save_matrix_csv(s.y, dir / (s.name + "_y.csv"));
      std::cout << s.name << ": " << s.description << "\n";
    }
  } else {
    throw UsageError("unknown synth kind '" + o.kind + "'");
  }
  std::cout << o.kind << " written to " << dir.string() << "\n";
  return 0;
}

struct MmdOptions {
  std::string x;
  std::string y;
  std::optional<double> sigma;
  std::size_t permutations = 200;
  std::uint64_t seed = 0;
};

int cmd_mmd(const MmdOptions& o) {
  const Matrix x = load_matrix_csv(o.x);
  const Matrix y = load_matrix_csv(o.y);
  if (x.cols() != y.cols()) {
    throw DimensionError("samples differ in dimension: " + std::to_string(x.cols()) + " vs " +
                         std::to_string(y.cols()));
  }
  double sigma = 0.0;
  if (o.sigma) {
    sigma = *o.sigma;
  } else {
    Matrix pooled(x.rows() + y.rows(), x.cols());
    pooled << x, y;
    sigma = median_heuristic(pooled, 2000, o.seed);
  }
  const auto r = mmd_permutation_test(x, y, RbfParams(sigma), o.permutations, o.seed);
  std::cout << "sigma," << format_sig6(r.sigma) << "\n"
            << "mmd2," << format_sig6(r.statistic) << "\n"
            << "null_q95," << format_sig6(r.null_q95) << "\n"
            << "null_q99," << format_sig6(r.null_q99) << "\n"
            << "p_value," << format_sig6(r.p_value) << "\n";
  return 0;
}

struct FitOptions {
  CommonOptions common;
  std::optional<double> lambda;
  std::vector<double> sigmas;
  std::optional<std::size_t> features;
};

int cmd_fit(const FitOptions& o) {
  if (o.common.out.empty()) throw UsageError("fit needs --out MODEL_FILE");
  CommonOptions common = o.common;
  const std::string model_path = common.out;
  common.out.clear();
  const ExperimentConfig config = common.resolve();
  if (config.models.size() != 1) throw UsageError("fit needs exactly one --model");
  const ModelSpec spec = config.models.front();
  const MultiSourceDataset data = load_sources(config.instances, config.targets);

  Hyperparams hyper;
  if (o.lambda) {
    hyper.lambda = *o.lambda;
    hyper.sigmas = o.sigmas;
    hyper.features = o.features.value_or(0);
    hyper.seed = config.protocol.seed;
    if (uses_bandwidth(spec.kind) && hyper.sigmas.empty()) {
      hyper.sigmas = bandwidth_centers(spec, data, config.protocol.seed);
    }
  } else {
    const auto search = grid_search_cv(data, spec, config.grid, config.protocol.folds, config.protocol.seed);
    hyper = search.best;
    std::cout << "cv_rmse," << format_sig6(search.best_rmse) << "\n";
  }
  const FittedModel model = fit(spec, data, hyper);
  save_model(model, model_path);
  std::cout << "model," << spec.name() << "\n"
            << "hyperparameters," << hyperparams_to_json(hyper).dump() << "\n"
            << "written," << model_path << "\n";
  return 0;
}

struct PredictOptions {
  std::string model;
  std::vector<std::string> instances;
  std::string out;
};

int cmd_predict(const PredictOptions& o) {
  const FittedModel model = load_model(o.model);
  std::vector<BagDataset> sources;
  for (const auto& p : o.instances) sources.push_back(load_unlabeled_bags(p));
  const MultiSourceDataset data = align_sources(std::move(sources));
  const Vector y = (data.num_sources() == 1 && !is_multisource_kind(model.kind))
                       ? predict(model, data.source(0))
                       : predict(model, data);
  if (o.out.empty()) {
    std::cout << "bag_id,y_pred\n";
    for (std::size_t b = 0; b < data.size(); ++b) {
      std::cout << data.id(b) << ',' << format_double(y(static_cast<Eigen::Index>(b))) << '\n';
    }
  } else {
    write_predictions(data, y, o.out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel distribution regression: experiments, synthetic data, MMD tests"};
  app.require_subcommand(1);
  app.footer(std::string("Environment: ") + kThreadsEnvVar + " sets the worker thread count (0 = auto).");

  CommonOptions run_opts;
  auto* run = app.add_subcommand("run", "run the evaluation protocol for one or more models");
  add_common(run, run_opts, true);
  run->add_option("--out", run_opts.out, "output directory");

  SynthOptions synth_opts;
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->add_option("kind", synth_opts.kind, "variance-task, mean-task, multisource-task or two-sample-gallery")
      ->required()
      ->check(CLI::IsMember({"variance-task", "mean-task", "multisource-task", "two-sample-gallery"}));
  synth->add_option("--out", synth_opts.out, "output directory");
  synth->add_option("--seed", synth_opts.seed, "generator seed");
  synth->add_option("--bags", synth_opts.bags, "number of bags");
  synth->add_option("--instances", synth_opts.instances, "instances per bag");
  synth->add_option("--dim", synth_opts.dim, "feature dimension");
  synth->add_option("--noise", synth_opts.noise, "target noise (mean-task)");
  synth->add_option("--samples", synth_opts.samples, "samples per side (two-sample-gallery)");

  MmdOptions mmd_opts;
  auto* mmd = app.add_subcommand("mmd", "MMD two-sample permutation test on headerless CSV samples");
  mmd->add_option("x", mmd_opts.x, "first sample")->required()->check(CLI::ExistingFile);
  mmd->add_option("y", mmd_opts.y, "second sample")->required()->check(CLI::ExistingFile);
  mmd->add_option("--sigma", mmd_opts.sigma, "RBF length-scale (default: median heuristic)");
  mmd->add_option("--permutations", mmd_opts.permutations, "permutation resamples");
  mmd->add_option("--seed", mmd_opts.seed, "permutation seed");

  FitOptions fit_opts;
  auto* fitc = app.add_subcommand("fit", "fit one model and save it");
  add_common(fitc, fit_opts.common, false);
  fitc->add_option("--out", fit_opts.common.out, "model file to write")->required();
  fitc->add_option("--lambda", fit_opts.lambda, "ridge penalty (default: grid search)");
  fitc->add_option("--sigma", fit_opts.sigmas, "RBF length-scale per kernel (with --lambda)");
  fitc->add_option("--features", fit_opts.features, "random Fourier frequencies D (with --lambda)");

  PredictOptions predict_opts;
  auto* predictc = app.add_subcommand("predict", "predict bag targets with a saved model");
  predictc->add_option("model", predict_opts.model, "model file")->required()->check(CLI::ExistingFile);
  predictc->add_option("--instances", predict_opts.instances, "instances CSV, one per source")->required();
  predictc->add_option("--out", predict_opts.out, "predictions CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    configure_threads_from_env();
    if (*run) return cmd_run(run_opts);
    if (*synth) return cmd_synth(synth_opts);
    if (*mmd) return cmd_mmd(mmd_opts);
    if (*fitc) return cmd_fit(fit_opts);
    if (*predictc) return cmd_predict(predict_opts);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
