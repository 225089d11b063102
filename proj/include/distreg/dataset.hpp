#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "distreg/linalg.hpp"

namespace distreg {

/// One group of instances sharing a single target. Rows are instances.
struct Bag {
  std::string id;
  Matrix instances;

  std::size_t size() const { return static_cast<std::size_t>(instances.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(instances.cols()); }
};

/// Per-feature z-score transform, x -> (x - mean) / scale.
struct AffineTransform {
  Vector mean;
  Vector scale;

  std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
  bool is_identity() const;
  static AffineTransform identity(std::size_t dim);
};

/// Ordered bags with aligned scalar targets.
///
/// Construction validates the invariants: at least one bag, every bag
/// non-empty, a shared dimensionality, finite instance values, and one target
/// per bag. Instances are immutable afterwards.
class BagDataset {
 public:
  BagDataset(std::vector<Bag> bags, Vector targets,
             std::optional<AffineTransform> normalization = std::nullopt);

  std::size_t size() const { return bags_.size(); }
  std::size_t dim() const { return dim_; }
  /// Total number of instances over all bags.
  std::size_t num_instances() const;

  const std::vector<Bag>& bags() const { return bags_; }
  const Bag& bag(std::size_t i) const { return bags_[i]; }
  const Vector& targets() const { return targets_; }
  const std::optional<AffineTransform>& normalization() const { return normalization_; }

  /// Copy holding only the bags at `indices`, in that order.
  BagDataset subset(std::span<const std::size_t> indices) const;
  BagDataset with_targets(Vector targets) const;
  /// All instances stacked into one matrix, bag by bag.
  Matrix pooled_instances() const;

 private:
  std::vector<Bag> bags_;
  Vector targets_;
  std::optional<AffineTransform> normalization_;
  std::size_t dim_ = 0;
};

/// Bags observed by F sources. Every source holds the same bag ids in the same
/// order and the same targets; each source may have its own n_b and d.
class MultiSourceDataset {
 public:
  explicit MultiSourceDataset(std::vector<BagDataset> sources);
  /// Single-source convenience wrapper.
  explicit MultiSourceDataset(BagDataset source);

  std::size_t num_sources() const { return sources_.size(); }
  std::size_t size() const { return sources_.front().size(); }
  const BagDataset& source(std::size_t f) const { return sources_.at(f); }
  const std::vector<BagDataset>& sources() const { return sources_; }
  const Vector& targets() const { return sources_.front().targets(); }
  const std::string& id(std::size_t b) const { return sources_.front().bag(b).id; }

  MultiSourceDataset subset(std::span<const std::size_t> indices) const;
  MultiSourceDataset with_targets(const Vector& targets) const;

 private:
  std::vector<BagDataset> sources_;
};

AffineTransform fit_normalizer(const BagDataset& train);
BagDataset apply_normalizer(const BagDataset& data, const AffineTransform& transform);

/// Intersects bag ids across sources, keeping the first source's order.
/// Throws DataError on empty intersection or conflicting targets.
MultiSourceDataset align_sources(std::vector<BagDataset> per_source);

/// Reads an instances CSV (`bag_id,f1,...,fd`) and a targets CSV (`bag_id,y`).
/// Bag order follows the first appearance of each id in the instances file.
BagDataset load_bags(const std::filesystem::path& instances_path,
                     const std::filesystem::path& targets_path);

/// Reads an instances CSV without targets; every target is NaN.
BagDataset load_unlabeled_bags(const std::filesystem::path& instances_path);

/// Writes both CSV files with shortest round-trip number formatting.
void save_bags(const BagDataset& data, const std::filesystem::path& instances_path,
               const std::filesystem::path& targets_path);

/// Headerless numeric CSV, one instance per row.
Matrix load_matrix_csv(const std::filesystem::path& path);
void save_matrix_csv(const Matrix& m, const std::filesystem::path& path);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

}  // namespace distreg
