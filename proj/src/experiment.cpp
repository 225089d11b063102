#include "distreg/experiment.hpp"

#include <fstream>

#include "distreg/error.hpp"
#include "distreg/report.hpp"

namespace distreg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path resolve(const fs::path& base, const fs::path& p) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return (base / p).lexically_normal();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
  if (!out) throw ConfigError("failed writing " + path.string());
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed) known = known || item.key() == key;
    if (!known) throw ConfigError(where + ": unknown key '" + item.key() + "'");
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j, const fs::path& base_dir) {
  try {
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    check_keys(j, {"data", "models", "grid", "protocol", "output"}, "config");
    ExperimentConfig c;
    if (j.contains("data")) {
      const auto& d = j.at("data");
      check_keys(d, {"instances", "targets"}, "config.data");
      const auto& inst = d.at("instances");
      if (inst.is_string()) {
        c.instances.push_back(resolve(base_dir, inst.get<std::string>()));
      } else {
        for (const auto& p : inst) c.instances.push_back(resolve(base_dir, p.get<std::string>()));
      }
      c.targets = resolve(base_dir, d.at("targets").get<std::string>());
    }
    if (j.contains("models")) {
      for (const auto& m : j.at("models")) c.models.push_back(ModelSpec::parse(m.get<std::string>()));
    } else {
      for (const char* m : {"lr", "kr", "rdr", "kdr"}) c.models.push_back(ModelSpec::parse(m));
    }
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      check_keys(g, {"lambda", "sigma_scale", "features"}, "config.grid");
      if (g.contains("lambda")) c.grid.lambdas = g.at("lambda").get<std::vector<double>>();
      if (g.contains("sigma_scale")) c.grid.sigma_scales = g.at("sigma_scale").get<std::vector<double>>();
      if (g.contains("features")) c.grid.features = g.at("features").get<std::vector<std::size_t>>();
    }
    if (j.contains("protocol")) {
      const auto& p = j.at("protocol");
      check_keys(p, {"test_fraction", "trials", "folds", "seed"}, "config.protocol");
      c.protocol.test_fraction = p.value("test_fraction", c.protocol.test_fraction);
      c.protocol.trials = p.value("trials", c.protocol.trials);
      c.protocol.folds = p.value("folds", c.protocol.folds);
      c.protocol.seed = p.value("seed", c.protocol.seed);
    }
    if (j.contains("output")) c.output = resolve(base_dir, j.at("output").get<std::string>());
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
  return from_json(j, path.parent_path());
}

json ExperimentConfig::to_json() const {
  json j;
  json inst = json::array();
  for (const auto& p : instances) inst.push_back(p.generic_string());
  j["data"] = {{"instances", inst}, {"targets", targets.generic_string()}};
  j["models"] = json::array();
  for (const auto& m : models) j["models"].push_back(m.name());
  j["grid"] = {{"lambda", grid.lambdas}, {"sigma_scale", grid.sigma_scales}, {"features", grid.features}};
  j["protocol"] = {{"test_fraction", protocol.test_fraction},
                   {"trials", protocol.trials},
                   {"folds", protocol.folds},
                   {"seed", protocol.seed}};
  j["output"] = output.generic_string();
  return j;
}

MultiSourceDataset load_sources(const std::vector<fs::path>& instances, const fs::path& targets) {
  if (instances.empty()) throw ConfigError("no instances files given");
  std::vector<BagDataset> per_source;
  per_source.reserve(instances.size());
  for (const auto& p : instances) per_source.push_back(load_bags(p, targets));
  return align_sources(std::move(per_source));
}

std::vector<EvalReport> run_experiment(const ExperimentConfig& config) {
  if (config.models.empty()) throw ConfigError("no models configured");
  const MultiSourceDataset data = load_sources(config.instances, config.targets);

  std::vector<EvalReport> reports;
  reports.reserve(config.models.size());
  for (const auto& spec : config.models) {
    reports.push_back(run_protocol(data, spec, config.grid, config.protocol));
  }

  std::error_code ec;
  fs::create_directories(config.output, ec);
  if (ec) throw ConfigError("cannot create output directory " + config.output.string() + ": " + ec.message());
  write_file(config.output / "results.csv", results_csv(reports));
  write_file(config.output / "trials.csv", trials_csv(reports));
  write_file(config.output / "selections.json", selections_json(reports).dump(2) + "\n");
  write_file(config.output / "config.resolved.json", config.to_json().dump(2) + "\n");
  write_file(config.output / "report.txt", results_table(reports, true));
  return reports;
}

void write_predictions(const MultiSourceDataset& data, const Vector& predictions,
                       const fs::path& path) {
  if (static_cast<std::size_t>(predictions.size()) != data.size()) {
    throw DimensionError("write_predictions: " + std::to_string(predictions.size()) +
                         " predictions for " + std::to_string(data.size()) + " bags");
  }
  std::string out = "bag_id,y_pred\n";
  for (std::size_t b = 0; b < data.size(); ++b) {
    out += data.id(b) + "," + format_double(predictions(static_cast<Eigen::Index>(b))) + "\n";
  }
  write_file(path, out);
}

}  // namespace distreg
