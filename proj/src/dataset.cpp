#include "distreg/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <string_view>
#include <unordered_map>

#include "distreg/error.hpp"

namespace distreg {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

std::string_view unquote(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

std::string location(const std::filesystem::path& file, std::size_t line) {
  return file.string() + ":" + std::to_string(line);
}

bool parse_number(std::string_view field, double& out) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  if (field.empty()) return false;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  return ec == std::errc() && ptr == field.data() + field.size() && std::isfinite(out);
}

/// Reads every non-blank line; `on_line` receives (1-based line number, text).
template <typename F>
void for_each_line(const std::filesystem::path& path, F&& on_line) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    on_line(number, std::string_view(line));
  }
}

struct RawBag {
  std::string id;
  std::vector<double> values;
  std::size_t rows = 0;
};

std::vector<Bag> read_instances(const std::filesystem::path& path) {
  std::vector<RawBag> raw;
  std::unordered_map<std::string, std::size_t> index;
  std::size_t columns = 0;
  bool header = true;

  for_each_line(path, [&](std::size_t line_no, std::string_view line) {
    const auto fields = split_fields(line);
    if (header) {
      header = false;
      if (fields.size() < 2) {
        throw DataError(location(path, line_no) +
                        ": header must be bag_id followed by at least one feature column");
      }
      columns = fields.size();
      return;
    }
    const std::string id(unquote(fields.front()));
    if (fields.size() != columns) {
      throw DataError(location(path, line_no) + ": ragged row for bag '" + id + "': expected " +
                      std::to_string(columns) + " fields, got " + std::to_string(fields.size()));
    }
    if (id.empty()) throw DataError(location(path, line_no) + ": empty bag id");
    auto [it, inserted] = index.try_emplace(id, raw.size());
    if (inserted) raw.push_back(RawBag{id, {}, 0});
    RawBag& bag = raw[it->second];
    for (std::size_t c = 1; c < fields.size(); ++c) {
      double v = 0.0;
      if (!parse_number(fields[c], v)) {
        throw DataError(location(path, line_no) + ": non-numeric or non-finite value '" +
                        std::string(fields[c]) + "' in column " + std::to_string(c + 1) +
                        " for bag '" + id + "'");
      }
      bag.values.push_back(v);
    }
    ++bag.rows;
  });

  if (raw.empty()) throw DataError("'" + path.string() + "': no bags");

  const auto d = static_cast<Eigen::Index>(columns - 1);
  std::vector<Bag> bags;
  bags.reserve(raw.size());
  for (auto& r : raw) {
    Bag bag{std::move(r.id), Matrix(static_cast<Eigen::Index>(r.rows), d)};
    std::copy(r.values.begin(), r.values.end(), bag.instances.data());
    bags.push_back(std::move(bag));
  }
  return bags;
}

std::unordered_map<std::string, double> read_targets(const std::filesystem::path& path) {
  std::unordered_map<std::string, double> targets;
  bool header = true;
  for_each_line(path, [&](std::size_t line_no, std::string_view line) {
    const auto fields = split_fields(line);
    if (header) {
      header = false;
      if (fields.size() != 2) {
        throw DataError(location(path, line_no) + ": targets header must be bag_id,y");
      }
      return;
    }
    const std::string id(unquote(fields.front()));
    if (fields.size() != 2) {
      throw DataError(location(path, line_no) + ": ragged row for bag '" + id +
                      "': expected 2 fields, got " + std::to_string(fields.size()));
    }
    double y = 0.0;
    if (!parse_number(fields[1], y)) {
      throw DataError(location(path, line_no) + ": non-numeric or non-finite target '" +
                      std::string(fields[1]) + "' for bag '" + id + "'");
    }
    if (!targets.emplace(id, y).second) {
      throw DataError(location(path, line_no) + ": duplicate target for bag '" + id + "'");
    }
  });
  return targets;
}

}  // namespace

// --- AffineTransform ---------------------------------------------------------

bool AffineTransform::is_identity() const {
  return (mean.array() == 0.0).all() && (scale.array() == 1.0).all();
}

AffineTransform AffineTransform::identity(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  return {Vector::Zero(d), Vector::Ones(d)};
}

// --- BagDataset ----------------------------------------------------------------

BagDataset::BagDataset(std::vector<Bag> bags, Vector targets,
                       std::optional<AffineTransform> normalization)
    : bags_(std::move(bags)), targets_(std::move(targets)), normalization_(std::move(normalization)) {
  if (bags_.empty()) throw DataError("dataset has no bags");
  if (static_cast<std::size_t>(targets_.size()) != bags_.size()) {
    throw DataError("dataset has " + std::to_string(bags_.size()) + " bags but " +
                    std::to_string(targets_.size()) + " targets");
  }
  dim_ = bags_.front().dim();
  if (dim_ == 0) throw DataError("bag '" + bags_.front().id + "' has no features");
  for (const auto& bag : bags_) {
    if (bag.size() == 0) throw DataError("bag '" + bag.id + "' has no instances");
    if (bag.dim() != dim_) {
      throw DimensionError("bag '" + bag.id + "' has " + std::to_string(bag.dim()) +
                           " features, expected " + std::to_string(dim_));
    }
    if (!bag.instances.allFinite()) throw DataError("bag '" + bag.id + "' has non-finite values");
  }
}

std::size_t BagDataset::num_instances() const {
  std::size_t n = 0;
  for (const auto& bag : bags_) n += bag.size();
  return n;
}

BagDataset BagDataset::subset(std::span<const std::size_t> indices) const {
  std::vector<Bag> bags;
  bags.reserve(indices.size());
  Vector targets(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t i = 0; i < indices.size(); ++i) {
    bags.push_back(bags_.at(indices[i]));
    targets(static_cast<Eigen::Index>(i)) = targets_(static_cast<Eigen::Index>(indices[i]));
  }
  return BagDataset(std::move(bags), std::move(targets), normalization_);
}

BagDataset BagDataset::with_targets(Vector targets) const {
  return BagDataset(bags_, std::move(targets), normalization_);
}

Matrix BagDataset::pooled_instances() const {
  Matrix pooled(static_cast<Eigen::Index>(num_instances()), static_cast<Eigen::Index>(dim_));
  Eigen::Index row = 0;
  for (const auto& bag : bags_) {
    pooled.middleRows(row, bag.instances.rows()) = bag.instances;
    row += bag.instances.rows();
  }
  return pooled;
}

// --- MultiSourceDataset -------------------------------------------------------

MultiSourceDataset::MultiSourceDataset(std::vector<BagDataset> sources)
    : sources_(std::move(sources)) {
  if (sources_.empty()) throw DataError("multisource dataset needs at least one source");
  const auto& first = sources_.front();
  for (std::size_t f = 1; f < sources_.size(); ++f) {
    const auto& other = sources_[f];
    if (other.size() != first.size()) {
      throw DataError("source " + std::to_string(f) + " has " + std::to_string(other.size()) +
                      " bags, source 0 has " + std::to_string(first.size()));
    }
    for (std::size_t b = 0; b < first.size(); ++b) {
      if (other.bag(b).id != first.bag(b).id) {
        throw DataError("source " + std::to_string(f) + " bag " + std::to_string(b) + " is '" +
                        other.bag(b).id + "', source 0 has '" + first.bag(b).id + "'");
      }
      const auto i = static_cast<Eigen::Index>(b);
      const double a = first.targets()(i);
      const double c = other.targets()(i);
      if (!(a == c || (std::isnan(a) && std::isnan(c)))) {
        throw DataError("conflicting targets for bag '" + first.bag(b).id + "' across sources");
      }
    }
  }
}

MultiSourceDataset::MultiSourceDataset(BagDataset source)
    : MultiSourceDataset(std::vector<BagDataset>{std::move(source)}) {}

MultiSourceDataset MultiSourceDataset::subset(std::span<const std::size_t> indices) const {
  std::vector<BagDataset> parts;
  parts.reserve(sources_.size());
  for (const auto& s : sources_) parts.push_back(s.subset(indices));
  return MultiSourceDataset(std::move(parts));
}

MultiSourceDataset MultiSourceDataset::with_targets(const Vector& targets) const {
  std::vector<BagDataset> parts;
  parts.reserve(sources_.size());
  for (const auto& s : sources_) parts.push_back(s.with_targets(targets));
  return MultiSourceDataset(std::move(parts));
}

// --- normalization -------------------------------------------------------------

AffineTransform fit_normalizer(const BagDataset& train) {
  const auto d = static_cast<Eigen::Index>(train.dim());
  const double n = static_cast<double>(train.num_instances());
  Vector mean = Vector::Zero(d);
  for (const auto& bag : train.bags()) mean += bag.instances.colwise().sum().transpose();
  mean /= n;
  // Two-pass variance about the pooled mean (population convention).
  Vector var = Vector::Zero(d);
  for (const auto& bag : train.bags()) {
    var += (bag.instances.rowwise() - mean.transpose()).array().square().matrix().colwise().sum().transpose();
  }
  var /= n;
  Vector scale = var.cwiseSqrt();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (!(scale(j) > 0.0)) scale(j) = 1.0;
  }
  return {std::move(mean), std::move(scale)};
}

BagDataset apply_normalizer(const BagDataset& data, const AffineTransform& transform) {
  if (transform.dim() != data.dim()) {
    throw DimensionError("normalizer has " + std::to_string(transform.dim()) +
                         " features, data has " + std::to_string(data.dim()));
  }
  std::vector<Bag> bags;
  bags.reserve(data.size());
  const Eigen::RowVectorXd mean = transform.mean.transpose();
  const bool identity = transform.is_identity();
  for (const auto& bag : data.bags()) {
    Bag out{bag.id, bag.instances};
    if (!identity) {
      out.instances =
          ((bag.instances.rowwise() - mean).array().rowwise() / transform.scale.transpose().array())
              .matrix();
    }
    bags.push_back(std::move(out));
  }
  return BagDataset(std::move(bags), data.targets(), transform);
}

// --- alignment ----------------------------------------------------------------

MultiSourceDataset align_sources(std::vector<BagDataset> per_source) {
  if (per_source.empty()) throw DataError("no sources to align");
  std::vector<std::unordered_map<std::string, std::size_t>> lookup(per_source.size());
  for (std::size_t f = 0; f < per_source.size(); ++f) {
    for (std::size_t b = 0; b < per_source[f].size(); ++b) {
      lookup[f].emplace(per_source[f].bag(b).id, b);
    }
  }
  std::vector<std::vector<std::size_t>> keep(per_source.size());
  const auto& first = per_source.front();
  for (std::size_t b = 0; b < first.size(); ++b) {
    const auto& id = first.bag(b).id;
    std::vector<std::size_t> positions{b};
    bool everywhere = true;
    for (std::size_t f = 1; f < per_source.size() && everywhere; ++f) {
      const auto it = lookup[f].find(id);
      if (it == lookup[f].end()) {
        everywhere = false;
      } else {
        positions.push_back(it->second);
      }
    }
    if (!everywhere) continue;
    const double y = first.targets()(static_cast<Eigen::Index>(b));
    for (std::size_t f = 1; f < per_source.size(); ++f) {
      const double other = per_source[f].targets()(static_cast<Eigen::Index>(positions[f]));
      if (!(other == y || (std::isnan(other) && std::isnan(y)))) {
        throw DataError("conflicting targets for bag '" + id + "': source 0 has " +
                        format_double(y) + ", source " + std::to_string(f) + " has " +
                        format_double(other));
      }
    }
    for (std::size_t f = 0; f < per_source.size(); ++f) keep[f].push_back(positions[f]);
  }
  if (keep.front().empty()) throw DataError("sources share no bag ids (empty intersection)");

  std::vector<BagDataset> aligned;
  aligned.reserve(per_source.size());
  for (std::size_t f = 0; f < per_source.size(); ++f) {
    aligned.push_back(per_source[f].subset(keep[f]));
  }
  return MultiSourceDataset(std::move(aligned));
}

// --- CSV I/O ---------------------------------------------------------------------

BagDataset load_bags(const std::filesystem::path& instances_path,
                     const std::filesystem::path& targets_path) {
  auto bags = read_instances(instances_path);
  const auto targets = read_targets(targets_path);
  Vector y(static_cast<Eigen::Index>(bags.size()));
  for (std::size_t b = 0; b < bags.size(); ++b) {
    const auto it = targets.find(bags[b].id);
    if (it == targets.end()) {
      throw DataError("'" + targets_path.string() + "': missing target for bag '" + bags[b].id +
                      "' from '" + instances_path.string() + "'");
    }
    y(static_cast<Eigen::Index>(b)) = it->second;
  }
  return BagDataset(std::move(bags), std::move(y));
}

BagDataset load_unlabeled_bags(const std::filesystem::path& instances_path) {
  auto bags = read_instances(instances_path);
  Vector y = Vector::Constant(static_cast<Eigen::Index>(bags.size()),
                              std::numeric_limits<double>::quiet_NaN());
  return BagDataset(std::move(bags), std::move(y));
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

void append_row(std::string& out, std::span<const double> values) {
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (j > 0) out += ',';
    out += format_double(values[j]);
  }
  out += '\n';
}

}  // namespace

void save_bags(const BagDataset& data, const std::filesystem::path& instances_path,
               const std::filesystem::path& targets_path) {
  std::string inst = "bag_id";
  for (std::size_t j = 1; j <= data.dim(); ++j) inst += ",f" + std::to_string(j);
  inst += '\n';
  std::string targ = "bag_id,y\n";
  for (std::size_t b = 0; b < data.size(); ++b) {
    const auto& bag = data.bag(b);
    for (Eigen::Index i = 0; i < bag.instances.rows(); ++i) {
      inst += bag.id;
      inst += ',';
      append_row(inst, row_span(bag.instances, i));
    }
    targ += bag.id + "," + format_double(data.targets()(static_cast<Eigen::Index>(b))) + "\n";
  }
  write_file(instances_path, inst);
  write_file(targets_path, targ);
}

Matrix load_matrix_csv(const std::filesystem::path& path) {
  std::vector<double> values;
  std::size_t columns = 0;
  std::size_t rows = 0;
  for_each_line(path, [&](std::size_t line_no, std::string_view line) {
    const auto fields = split_fields(line);
    if (rows == 0) columns = fields.size();
    if (fields.size() != columns) {
      throw DataError(location(path, line_no) + ": ragged row: expected " +
                      std::to_string(columns) + " fields, got " + std::to_string(fields.size()));
    }
    for (const auto field : fields) {
      double v = 0.0;
      if (!parse_number(field, v)) {
        throw DataError(location(path, line_no) + ": non-numeric or non-finite value '" +
                        std::string(field) + "'");
      }
      values.push_back(v);
    }
    ++rows;
  });
  if (rows == 0) throw DataError("'" + path.string() + "': no rows");
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(columns));
  std::copy(values.begin(), values.end(), m.data());
  return m;
}

void save_matrix_csv(const Matrix& m, const std::filesystem::path& path) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) append_row(out, row_span(m, i));
  write_file(path, out);
}

}  // namespace distreg
