#include "distreg/model_io.hpp"

#include <fstream>

#include "distreg/error.hpp"
#include "distreg/report.hpp"

namespace distreg {

namespace {

constexpr const char* kFormatName = "distreg-model";
constexpr int kFormatVersion = 1;

using nlohmann::json;

json vector_to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json dataset_to_json(const BagDataset& data) {
  json bags = json::array();
  for (const auto& bag : data.bags()) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < bag.instances.rows(); ++i) {
      const auto r = row_span(bag.instances, i);
      rows.push_back(std::vector<double>(r.begin(), r.end()));
    }
    bags.push_back({{"id", bag.id}, {"rows", std::move(rows)}});
  }
  return {{"dim", data.dim()}, {"bags", std::move(bags)}, {"targets", vector_to_json(data.targets())}};
}

BagDataset dataset_from_json(const json& j) {
  const auto dim = j.at("dim").get<std::size_t>();
  std::vector<Bag> bags;
  for (const auto& b : j.at("bags")) {
    const auto& rows = b.at("rows");
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto values = rows[i].get<std::vector<double>>();
      if (values.size() != dim) throw ConfigError("model file: support row has the wrong width");
      for (std::size_t c = 0; c < dim; ++c) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = values[c];
      }
    }
    bags.push_back(Bag{b.at("id").get<std::string>(), std::move(m)});
  }
  return BagDataset(std::move(bags), vector_from_json(j.at("targets")));
}

bool is_dual(ModelKind kind) {
  const ModelKind base = base_kind(kind);
  return kind == ModelKind::kMDR || base == ModelKind::kKDR || base == ModelKind::kKR;
}

void validate(const FittedModel& m) {
  const auto coef = static_cast<std::size_t>(m.solution.coefficients.size());
  if (is_dual(m.kind)) {
    if (m.support.empty()) throw ConfigError("model file: dual model without training bags");
    for (const auto& s : m.support) {
      if (s.size() != coef) throw ConfigError("model file: coefficient count does not match training bags");
    }
  }
  if (uses_fourier_features(m.kind)) {
    if (!m.basis) throw ConfigError("model file: missing Fourier basis");
    if (m.basis->feature_dim() != coef) {
      throw ConfigError("model file: coefficient count does not match the Fourier basis");
    }
  }
  if (m.input_dims.empty()) throw ConfigError("model file: missing input dimensions");
  if (!m.normalizers.empty()) {
    const std::size_t expected = is_multisource_kind(m.kind) ? m.input_dims.size() : 1;
    if (m.normalizers.size() != expected) throw ConfigError("model file: wrong number of normalizers");
  }
}

}  // namespace

nlohmann::json model_to_json(const FittedModel& model) {
  json j;
  j["format"] = kFormatName;
  j["version"] = kFormatVersion;
  j["kind"] = std::string(model_kind_name(model.kind));
  j["source"] = model.source;
  j["hyperparameters"] = hyperparams_to_json(model.hyper);
  j["input_dims"] = model.input_dims;
  j["normalizers"] = json::array();
  for (const auto& n : model.normalizers) {
    j["normalizers"].push_back({{"mean", vector_to_json(n.mean)}, {"scale", vector_to_json(n.scale)}});
  }
  j["solution"] = {{"coefficients", vector_to_json(model.solution.coefficients)},
                   {"intercept", model.solution.intercept},
                   {"lambda", model.solution.lambda},
                   {"jitter", model.solution.jitter}};
  if (model.basis) {
    j["basis"] = {{"input_dim", model.basis->input_dim()},
                  {"frequencies", model.basis->num_frequencies()},
                  {"sigma", model.basis->sigma()},
                  {"seed", model.basis->seed()}};
  }
  j["support"] = json::array();
  for (const auto& s : model.support) j["support"].push_back(dataset_to_json(s));
  return j;
}

FittedModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", std::string{}) != kFormatName) throw ConfigError("not a distreg model file");
    if (j.at("version").get<int>() != kFormatVersion) {
      throw ConfigError("unsupported model file version " + j.at("version").dump());
    }
    FittedModel m;
    m.kind = parse_model_kind(j.at("kind").get<std::string>());
    m.source = j.at("source").get<std::size_t>();
    m.hyper = hyperparams_from_json(j.at("hyperparameters"));
    m.input_dims = j.at("input_dims").get<std::vector<std::size_t>>();
    for (const auto& n : j.at("normalizers")) {
      AffineTransform t{vector_from_json(n.at("mean")), vector_from_json(n.at("scale"))};
      if (t.mean.size() != t.scale.size()) throw ConfigError("model file: malformed normalizer");
      m.normalizers.push_back(std::move(t));
    }
    const auto& sol = j.at("solution");
    m.solution.coefficients = vector_from_json(sol.at("coefficients"));
    m.solution.intercept = sol.at("intercept").get<double>();
    m.solution.lambda = sol.at("lambda").get<double>();
    m.solution.jitter = sol.at("jitter").get<double>();
    if (j.contains("basis")) {
      const auto& b = j.at("basis");
      m.basis = sample_basis(b.at("input_dim").get<std::size_t>(), b.at("frequencies").get<std::size_t>(),
                             b.at("sigma").get<double>(), b.at("seed").get<std::uint64_t>());
    }
    for (const auto& s : j.at("support")) m.support.push_back(dataset_from_json(s));
    validate(m);
    return m;
  } catch (const ConfigError&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("corrupt model file: ") + e.what());
  } catch (const Error& e) {
    throw ConfigError(std::string("corrupt model file: ") + e.what());
  }
}

void save_model(const FittedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write model file " + path.string());
  out << model_to_json(model).dump(1) << '\n';
  if (!out) throw ConfigError("failed writing model file " + path.string());
}

FittedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open model file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("corrupt model file " + path.string() + ": " + e.what());
  }
  try {
    return model_from_json(j);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace distreg
