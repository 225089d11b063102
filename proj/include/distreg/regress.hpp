#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "distreg/dataset.hpp"
#include "distreg/kernel.hpp"
#include "distreg/linalg.hpp"
#include "distreg/rff.hpp"
#include "distreg/ridge.hpp"

namespace distreg {

enum class ModelKind {
  kLR,          // ridge on input-space bag means
  kKR,          // RBF kernel ridge on input-space bag means
  kKDR,         // kernel distribution regression (mean embeddings, dual)
  kRDR,         // random Fourier feature distribution regression (primal)
  kMDR,         // multisource KDR, sum of per-source bag kernels
  kStackedLR,
  kStackedKR,
  kStackedRDR,
  kStackedKDR,
};

std::string_view model_kind_name(ModelKind kind);
/// Accepts "lr", "kr", "kdr", "rdr", "mdr", "stacked-lr", ... (case-insensitive).
ModelKind parse_model_kind(std::string_view name);
bool is_multisource_kind(ModelKind kind);
/// Stacked kinds map to the single-source kind run on the stacked space.
ModelKind base_kind(ModelKind kind);
bool uses_bandwidth(ModelKind kind);
bool uses_fourier_features(ModelKind kind);

/// A model kind plus, for single-source kinds, which source of a multisource
/// dataset to use. Text form: "kdr" or "kdr:1".
struct ModelSpec {
  ModelKind kind = ModelKind::kKDR;
  std::size_t source = 0;

  std::string name() const;
  static ModelSpec parse(std::string_view text);
};

struct Hyperparams {
  double lambda = 1.0;
  std::vector<double> sigmas;  // one per kernel (per source for MDR); unused by LR
  std::size_t features = 0;    // number of random frequencies D (RDR kinds)
  std::uint64_t seed = 0;      // Fourier basis seed (RDR kinds)
};

/// LR ridge penalty never drops below this.
inline constexpr double kLinearLambdaFloor = 1e-8;

/// A trained regressor. Immutable once fitted; predictions are deterministic.
struct FittedModel {
  ModelKind kind = ModelKind::kKDR;
  std::size_t source = 0;  // selected source for single-source kinds
  Hyperparams hyper;
  /// Per-source input transforms; empty when the model was fitted on
  /// already-normalized data and expects the same at prediction time.
  std::vector<AffineTransform> normalizers;
  RidgeSolution solution;
  /// Dual kinds: normalized training bags per kernel (KR: one singleton bag
  /// per training bag mean). Empty for primal kinds.
  std::vector<BagDataset> support;
  std::optional<FourierBasis> basis;  // RDR kinds
  /// Input dimensionality per source, checked at prediction time.
  std::vector<std::size_t> input_dims;
};

// --- building blocks --------------------------------------------------------

/// Each bag replaced by a single instance: its input-space mean.
BagDataset bag_means_as_singletons(const BagDataset& data);
/// B x d matrix of input-space bag means.
Matrix bag_mean_matrix(const BagDataset& data);

/// Feature-stacked single-source view of a multisource dataset. Every instance
/// of source f becomes a (d_1 + ... + d_F)-vector: its own features in the
/// source-f block and the bag's mean from every other source in the other
/// blocks. The stacked bag therefore has n_b^1 + ... + n_b^F rows and its input
/// mean is the concatenation of the per-source means.
BagDataset stack_sources(const MultiSourceDataset& data);

// --- single-source and multisource regressors (normalized inputs) -----------

FittedModel fit_kdr(const BagDataset& train, const RbfParams& params, double lambda);
Vector predict_kdr(const FittedModel& model, const BagDataset& test);

FittedModel fit_rdr(const BagDataset& train, const FourierBasis& basis, double lambda);
Vector predict_rdr(const FittedModel& model, const BagDataset& test);

FittedModel fit_mdr(const MultiSourceDataset& train, std::span<const RbfParams> params,
                    double lambda);
Vector predict_mdr(const FittedModel& model, const MultiSourceDataset& test);

enum class BaselineKind { kLR, kKR };
FittedModel fit_baseline(const BagDataset& train, BaselineKind kind, const Hyperparams& hyper);
Vector predict_baseline(const FittedModel& model, const BagDataset& test);

/// Stacked-feature multisource baseline; `inner` is one of LR, KR, RDR, KDR.
FittedModel fit_stacked(const MultiSourceDataset& train, ModelKind inner, const Hyperparams& hyper);
Vector predict_stacked(const FittedModel& model, const MultiSourceDataset& test);

// --- end-to-end (raw inputs; normalization fitted on the training bags) -----

/// Picks the sources a model consumes: the selected one for single-source
/// kinds, all of them otherwise.
MultiSourceDataset select_inputs(const ModelSpec& spec, const MultiSourceDataset& data);
/// Per-source z-score transforms fitted on pooled training instances.
std::vector<AffineTransform> fit_normalizers(const MultiSourceDataset& selected);
MultiSourceDataset apply_normalizers(const MultiSourceDataset& selected,
                                     std::span<const AffineTransform> normalizers);

/// Pooled instances each RBF kernel of `kind` is evaluated on, one matrix per
/// kernel; used for median-heuristic bandwidths. Empty for LR kinds.
std::vector<Matrix> kernel_inputs(ModelKind kind, const MultiSourceDataset& normalized);

FittedModel fit(const ModelSpec& spec, const MultiSourceDataset& train, const Hyperparams& hyper);
FittedModel fit(const ModelSpec& spec, const BagDataset& train, const Hyperparams& hyper);
Vector predict(const FittedModel& model, const MultiSourceDataset& test);
Vector predict(const FittedModel& model, const BagDataset& test);

// --- shared-design path for hyperparameter search ---------------------------

/// Kernel (or feature) matrices for one bandwidth / feature configuration,
/// reusable across every lambda on the grid.
struct RidgeDesign {
  bool dual = true;  // train: Gram (B x B), test: cross (T x B); else features
  bool center_features = false;
  double lambda_floor = 0.0;
  Matrix train;
  Matrix test;
};

/// Inputs must already be source-selected and normalized.
RidgeDesign build_design(ModelKind kind, const Hyperparams& hyper,
                         const MultiSourceDataset& train, const MultiSourceDataset& test);
RidgeSolution solve_design(const RidgeDesign& design, const Vector& y, double lambda);
Vector predict_design(const RidgeDesign& design, const RidgeSolution& solution);

}  // namespace distreg
