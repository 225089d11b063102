#include "distreg/regress.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <string>

#include "distreg/error.hpp"

namespace distreg {

// --- kinds -----------------------------------------------------------------------

std::string_view model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLR: return "lr";
    case ModelKind::kKR: return "kr";
    case ModelKind::kKDR: return "kdr";
    case ModelKind::kRDR: return "rdr";
    case ModelKind::kMDR: return "mdr";
    case ModelKind::kStackedLR: return "stacked-lr";
    case ModelKind::kStackedKR: return "stacked-kr";
    case ModelKind::kStackedRDR: return "stacked-rdr";
    case ModelKind::kStackedKDR: return "stacked-kdr";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (const auto kind : {ModelKind::kLR, ModelKind::kKR, ModelKind::kKDR, ModelKind::kRDR,
                          ModelKind::kMDR, ModelKind::kStackedLR, ModelKind::kStackedKR,
                          ModelKind::kStackedRDR, ModelKind::kStackedKDR}) {
    if (lower == model_kind_name(kind)) return kind;
  }
  throw ConfigError("unknown model kind '" + std::string(name) +
                    "' (expected lr, kr, kdr, rdr, mdr, stacked-lr, stacked-kr, stacked-rdr or "
                    "stacked-kdr)");
}

bool is_multisource_kind(ModelKind kind) {
  return kind == ModelKind::kMDR || base_kind(kind) != kind;
}

ModelKind base_kind(ModelKind kind) {
  switch (kind) {
    case ModelKind::kStackedLR: return ModelKind::kLR;
    case ModelKind::kStackedKR: return ModelKind::kKR;
    case ModelKind::kStackedRDR: return ModelKind::kRDR;
    case ModelKind::kStackedKDR: return ModelKind::kKDR;
    default: return kind;
  }
}

bool uses_bandwidth(ModelKind kind) { return base_kind(kind) != ModelKind::kLR; }

bool uses_fourier_features(ModelKind kind) { return base_kind(kind) == ModelKind::kRDR; }

std::string ModelSpec::name() const {
  std::string out(model_kind_name(kind));
  if (!is_multisource_kind(kind) && source != 0) out += ":" + std::to_string(source);
  return out;
}

ModelSpec ModelSpec::parse(std::string_view text) {
  ModelSpec spec;
  const auto colon = text.find(':');
  spec.kind = parse_model_kind(text.substr(0, colon));
  if (colon != std::string_view::npos) {
    if (is_multisource_kind(spec.kind)) {
      throw ConfigError("model '" + std::string(text) + "': multisource kinds take no source index");
    }
    const auto digits = text.substr(colon + 1);
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), spec.source);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || digits.empty()) {
      throw ConfigError("model '" + std::string(text) + "': bad source index");
    }
  }
  return spec;
}

// --- building blocks ---------------------------------------------------------------

Matrix bag_mean_matrix(const BagDataset& data) {
  Matrix means(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(data.dim()));
  for (std::size_t b = 0; b < data.size(); ++b) {
    means.row(static_cast<Eigen::Index>(b)) = data.bag(b).instances.colwise().mean();
  }
  return means;
}

BagDataset bag_means_as_singletons(const BagDataset& data) {
  const Matrix means = bag_mean_matrix(data);
  std::vector<Bag> bags;
  bags.reserve(data.size());
  for (std::size_t b = 0; b < data.size(); ++b) {
    bags.push_back(Bag{data.bag(b).id, means.row(static_cast<Eigen::Index>(b))});
  }
  return BagDataset(std::move(bags), data.targets());
}

BagDataset stack_sources(const MultiSourceDataset& data) {
  const std::size_t sources = data.num_sources();
  std::vector<Eigen::Index> offset(sources + 1, 0);
  for (std::size_t f = 0; f < sources; ++f) {
    offset[f + 1] = offset[f] + static_cast<Eigen::Index>(data.source(f).dim());
  }
  const Eigen::Index width = offset[sources];

  std::vector<Bag> bags;
  bags.reserve(data.size());
  for (std::size_t b = 0; b < data.size(); ++b) {
    Eigen::RowVectorXd means(width);
    Eigen::Index rows = 0;
    for (std::size_t f = 0; f < sources; ++f) {
      const auto& inst = data.source(f).bag(b).instances;
      means.segment(offset[f], inst.cols()) = inst.colwise().mean();
      rows += inst.rows();
    }
    Matrix stacked(rows, width);
    Eigen::Index row = 0;
    for (std::size_t f = 0; f < sources; ++f) {
      const auto& inst = data.source(f).bag(b).instances;
      for (Eigen::Index i = 0; i < inst.rows(); ++i, ++row) {
        stacked.row(row) = means;
        stacked.row(row).segment(offset[f], inst.cols()) = inst.row(i);
      }
    }
    bags.push_back(Bag{data.id(b), std::move(stacked)});
  }
  return BagDataset(std::move(bags), data.targets());
}

// --- validation helpers --------------------------------------------------------------

namespace {

void check_input_dim(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) {
    throw DimensionError(std::string(what) + ": model expects d=" + std::to_string(expected) +
                         ", got d=" + std::to_string(got));
  }
}

double first_sigma(const Hyperparams& hyper, ModelKind kind) {
  if (hyper.sigmas.empty()) {
    throw ConfigError(std::string(model_kind_name(kind)) + " needs an RBF sigma");
  }
  return hyper.sigmas.front();
}

Vector apply_linear(const Matrix& x, const RidgeSolution& sol) {
  return (x * sol.coefficients).array() + sol.intercept;
}

std::vector<RbfParams> kernel_params(const std::vector<double>& sigmas) {
  std::vector<RbfParams> params;
  params.reserve(sigmas.size());
  for (const double s : sigmas) params.emplace_back(s);
  return params;
}

}  // namespace

// --- KDR ------------------------------------------------------------------------------

FittedModel fit_kdr(const BagDataset& train, const RbfParams& params, double lambda) {
  FittedModel model;
  model.kind = ModelKind::kKDR;
  model.hyper.lambda = lambda;
  model.hyper.sigmas = {params.sigma()};
  model.solution = fit_dual_centered(bag_gram(train, params), train.targets(), lambda);
  model.support = {train};
  model.input_dims = {train.dim()};
  return model;
}

Vector predict_kdr(const FittedModel& model, const BagDataset& test) {
  if (model.support.size() != 1) throw ConfigError("KDR model has no training support");
  check_input_dim(model.support.front().dim(), test.dim(), "predict_kdr");
  const RbfParams params(first_sigma(model.hyper, model.kind));
  return apply_linear(cross_bag_gram(test, model.support.front(), params), model.solution);
}

// --- RDR ------------------------------------------------------------------------------

FittedModel fit_rdr(const BagDataset& train, const FourierBasis& basis, double lambda) {
  FittedModel model;
  model.kind = ModelKind::kRDR;
  model.hyper.lambda = lambda;
  model.hyper.sigmas = {basis.sigma()};
  model.hyper.features = basis.num_frequencies();
  model.hyper.seed = basis.seed();
  model.solution =
      fit_primal_centered(bag_feature_matrix(train, basis), train.targets(), lambda, false);
  model.basis = basis;
  model.input_dims = {train.dim()};
  return model;
}

Vector predict_rdr(const FittedModel& model, const BagDataset& test) {
  if (!model.basis) throw ConfigError("RDR model has no Fourier basis");
  check_input_dim(model.basis->input_dim(), test.dim(), "predict_rdr");
  return apply_linear(bag_feature_matrix(test, *model.basis), model.solution);
}

// --- MDR ------------------------------------------------------------------------------

FittedModel fit_mdr(const MultiSourceDataset& train, std::span<const RbfParams> params,
                    double lambda) {
  FittedModel model;
  model.kind = ModelKind::kMDR;
  model.hyper.lambda = lambda;
  for (const auto& p : params) model.hyper.sigmas.push_back(p.sigma());
  model.solution = fit_dual_centered(multisource_bag_gram(train, params), train.targets(), lambda);
  model.support = train.sources();
  for (const auto& s : train.sources()) model.input_dims.push_back(s.dim());
  return model;
}

Vector predict_mdr(const FittedModel& model, const MultiSourceDataset& test) {
  if (test.num_sources() != model.support.size()) {
    throw DimensionError("MDR model has " + std::to_string(model.support.size()) +
                         " sources, data has " + std::to_string(test.num_sources()));
  }
  for (std::size_t f = 0; f < test.num_sources(); ++f) {
    check_input_dim(model.support[f].dim(), test.source(f).dim(), "predict_mdr");
  }
  const auto params = kernel_params(model.hyper.sigmas);
  const MultiSourceDataset train(model.support);
  return apply_linear(multisource_cross_bag_gram(test, train, params), model.solution);
}

// --- baselines ------------------------------------------------------------------------

FittedModel fit_baseline(const BagDataset& train, BaselineKind kind, const Hyperparams& hyper) {
  if (kind == BaselineKind::kKR) {
    FittedModel model =
        fit_kdr(bag_means_as_singletons(train), RbfParams(first_sigma(hyper, ModelKind::kKR)),
                hyper.lambda);
    model.kind = ModelKind::kKR;
    return model;
  }
  FittedModel model;
  model.kind = ModelKind::kLR;
  model.hyper.lambda = std::max(hyper.lambda, kLinearLambdaFloor);
  model.solution =
      fit_primal_centered(bag_mean_matrix(train), train.targets(), model.hyper.lambda, true);
  model.input_dims = {train.dim()};
  return model;
}

Vector predict_baseline(const FittedModel& model, const BagDataset& test) {
  if (base_kind(model.kind) == ModelKind::kKR) {
    return predict_kdr(model, bag_means_as_singletons(test));
  }
  check_input_dim(static_cast<std::size_t>(model.solution.coefficients.size()), test.dim(),
                  "predict_baseline");
  return apply_linear(bag_mean_matrix(test), model.solution);
}

// --- single-source dispatch -------------------------------------------------------------

namespace {

FittedModel fit_single(ModelKind base, const BagDataset& train, const Hyperparams& hyper) {
  switch (base) {
    case ModelKind::kLR: return fit_baseline(train, BaselineKind::kLR, hyper);
    case ModelKind::kKR: return fit_baseline(train, BaselineKind::kKR, hyper);
    case ModelKind::kKDR:
      return fit_kdr(train, RbfParams(first_sigma(hyper, base)), hyper.lambda);
    case ModelKind::kRDR: {
      if (hyper.features < 1) throw ConfigError("rdr needs features (D) >= 1");
      const auto basis =
          sample_basis(train.dim(), hyper.features, first_sigma(hyper, base), hyper.seed);
      return fit_rdr(train, basis, hyper.lambda);
    }
    default: break;
  }
  throw ConfigError("not a single-source model kind: " + std::string(model_kind_name(base)));
}

Vector predict_single(const FittedModel& model, const BagDataset& test) {
  switch (base_kind(model.kind)) {
    case ModelKind::kLR:
    case ModelKind::kKR: return predict_baseline(model, test);
    case ModelKind::kKDR: return predict_kdr(model, test);
    case ModelKind::kRDR: return predict_rdr(model, test);
    default: break;
  }
  throw ConfigError("not a single-source model kind: " + std::string(model_kind_name(model.kind)));
}

ModelKind stacked_kind(ModelKind inner) {
  switch (inner) {
    case ModelKind::kLR: return ModelKind::kStackedLR;
    case ModelKind::kKR: return ModelKind::kStackedKR;
    case ModelKind::kRDR: return ModelKind::kStackedRDR;
    case ModelKind::kKDR: return ModelKind::kStackedKDR;
    default: break;
  }
  throw ConfigError("stacking supports lr, kr, rdr and kdr, not " +
                    std::string(model_kind_name(inner)));
}

}  // namespace

// --- stacked ------------------------------------------------------------------------------

FittedModel fit_stacked(const MultiSourceDataset& train, ModelKind inner, const Hyperparams& hyper) {
  const ModelKind kind = stacked_kind(base_kind(inner));
  FittedModel model = fit_single(base_kind(inner), stack_sources(train), hyper);
  model.kind = kind;
  model.input_dims.clear();
  for (const auto& s : train.sources()) model.input_dims.push_back(s.dim());
  return model;
}

Vector predict_stacked(const FittedModel& model, const MultiSourceDataset& test) {
  if (test.num_sources() != model.input_dims.size()) {
    throw DimensionError("stacked model has " + std::to_string(model.input_dims.size()) +
                         " sources, data has " + std::to_string(test.num_sources()));
  }
  for (std::size_t f = 0; f < test.num_sources(); ++f) {
    check_input_dim(model.input_dims[f], test.source(f).dim(), "predict_stacked");
  }
  return predict_single(model, stack_sources(test));
}

// --- end-to-end -----------------------------------------------------------------------------

MultiSourceDataset select_inputs(const ModelSpec& spec, const MultiSourceDataset& data) {
  if (is_multisource_kind(spec.kind)) return data;
  if (spec.source >= data.num_sources()) {
    throw ConfigError("model " + spec.name() + " selects source " + std::to_string(spec.source) +
                      " but the data has " + std::to_string(data.num_sources()) + " source(s)");
  }
  return MultiSourceDataset(data.source(spec.source));
}

std::vector<AffineTransform> fit_normalizers(const MultiSourceDataset& selected) {
  std::vector<AffineTransform> out;
  out.reserve(selected.num_sources());
  for (const auto& s : selected.sources()) out.push_back(fit_normalizer(s));
  return out;
}

MultiSourceDataset apply_normalizers(const MultiSourceDataset& selected,
                                     std::span<const AffineTransform> normalizers) {
  if (normalizers.size() != selected.num_sources()) {
    throw DimensionError("have " + std::to_string(normalizers.size()) + " normalizers for " +
                         std::to_string(selected.num_sources()) + " sources");
  }
  std::vector<BagDataset> parts;
  parts.reserve(selected.num_sources());
  for (std::size_t f = 0; f < selected.num_sources(); ++f) {
    parts.push_back(apply_normalizer(selected.source(f), normalizers[f]));
  }
  return MultiSourceDataset(std::move(parts));
}

std::vector<Matrix> kernel_inputs(ModelKind kind, const MultiSourceDataset& normalized) {
  if (kind == ModelKind::kMDR) {
    std::vector<Matrix> out;
    for (const auto& s : normalized.sources()) out.push_back(s.pooled_instances());
    return out;
  }
  const ModelKind base = base_kind(kind);
  if (base == ModelKind::kLR) return {};
  const BagDataset view =
      kind == base ? normalized.source(0) : stack_sources(normalized);
  if (base == ModelKind::kKR) return {bag_mean_matrix(view)};
  return {view.pooled_instances()};
}

namespace {

FittedModel fit_normalized(ModelKind kind, const MultiSourceDataset& data, const Hyperparams& hyper) {
  if (kind == ModelKind::kMDR) {
    if (hyper.sigmas.size() != data.num_sources()) {
      throw ConfigError("mdr needs one sigma per source: " + std::to_string(data.num_sources()) +
                        " sources, " + std::to_string(hyper.sigmas.size()) + " sigmas");
    }
    return fit_mdr(data, kernel_params(hyper.sigmas), hyper.lambda);
  }
  if (is_multisource_kind(kind)) return fit_stacked(data, base_kind(kind), hyper);
  return fit_single(kind, data.source(0), hyper);
}

Vector predict_normalized(const FittedModel& model, const MultiSourceDataset& data) {
  if (model.kind == ModelKind::kMDR) return predict_mdr(model, data);
  if (is_multisource_kind(model.kind)) return predict_stacked(model, data);
  return predict_single(model, data.source(0));
}

}  // namespace

FittedModel fit(const ModelSpec& spec, const MultiSourceDataset& train, const Hyperparams& hyper) {
  const MultiSourceDataset selected = select_inputs(spec, train);
  auto normalizers = fit_normalizers(selected);
  FittedModel model = fit_normalized(spec.kind, apply_normalizers(selected, normalizers), hyper);
  model.normalizers = std::move(normalizers);
  model.source = is_multisource_kind(spec.kind) ? 0 : spec.source;
  return model;
}

FittedModel fit(const ModelSpec& spec, const BagDataset& train, const Hyperparams& hyper) {
  return fit(spec, MultiSourceDataset(train), hyper);
}

Vector predict(const FittedModel& model, const MultiSourceDataset& test) {
  const ModelSpec spec{model.kind, model.source};
  MultiSourceDataset selected = select_inputs(spec, test);
  if (!model.normalizers.empty()) {
    for (std::size_t f = 0; f < std::min(model.normalizers.size(), selected.num_sources()); ++f) {
      check_input_dim(model.normalizers[f].dim(), selected.source(f).dim(), "predict");
    }
    selected = apply_normalizers(selected, model.normalizers);
  }
  return predict_normalized(model, selected);
}

Vector predict(const FittedModel& model, const BagDataset& test) {
  // A single-source dataset stands for whichever source the model was fitted on.
  if (!is_multisource_kind(model.kind) && model.source != 0) {
    FittedModel local = model;
    local.source = 0;
    return predict(local, MultiSourceDataset(test));
  }
  return predict(model, MultiSourceDataset(test));
}

// --- shared design ----------------------------------------------------------------------------

RidgeDesign build_design(ModelKind kind, const Hyperparams& hyper,
                         const MultiSourceDataset& train, const MultiSourceDataset& test) {
  RidgeDesign design;
  if (kind == ModelKind::kMDR) {
    const auto params = kernel_params(hyper.sigmas);
    design.train = multisource_bag_gram(train, params);
    design.test = multisource_cross_bag_gram(test, train, params);
    return design;
  }
  const ModelKind base = base_kind(kind);
  const bool stacked = base != kind;
  const BagDataset tr = stacked ? stack_sources(train) : train.source(0);
  const BagDataset te = stacked ? stack_sources(test) : test.source(0);
  switch (base) {
    case ModelKind::kLR:
      design.dual = false;
      design.center_features = true;
      design.lambda_floor = kLinearLambdaFloor;
      design.train = bag_mean_matrix(tr);
      design.test = bag_mean_matrix(te);
      break;
    case ModelKind::kKR: {
      const RbfParams params(first_sigma(hyper, kind));
      const BagDataset tr_means = bag_means_as_singletons(tr);
      design.train = bag_gram(tr_means, params);
      design.test = cross_bag_gram(bag_means_as_singletons(te), tr_means, params);
      break;
    }
    case ModelKind::kKDR: {
      const RbfParams params(first_sigma(hyper, kind));
      design.train = bag_gram(tr, params);
      design.test = cross_bag_gram(te, tr, params);
      break;
    }
    case ModelKind::kRDR: {
      if (hyper.features < 1) throw ConfigError("rdr needs features (D) >= 1");
      const auto basis = sample_basis(tr.dim(), hyper.features, first_sigma(hyper, kind), hyper.seed);
      design.dual = false;
      design.train = bag_feature_matrix(tr, basis);
      design.test = bag_feature_matrix(te, basis);
      break;
    }
    default:
      throw ConfigError("cannot build a design for " + std::string(model_kind_name(kind)));
  }
  return design;
}

RidgeSolution solve_design(const RidgeDesign& design, const Vector& y, double lambda) {
  if (design.dual) return fit_dual_centered(design.train, y, lambda);
  return fit_primal_centered(design.train, y, std::max(lambda, design.lambda_floor),
                             design.center_features);
}

Vector predict_design(const RidgeDesign& design, const RidgeSolution& solution) {
  return apply_linear(design.test, solution);
}

}  // namespace distreg
