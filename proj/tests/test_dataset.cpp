#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include "distreg/dataset.hpp"
#include "distreg/error.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace distreg;

namespace {

Matrix rows(std::initializer_list<std::initializer_list<double>> values) {
  Matrix m(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(values.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : values) {
    Eigen::Index j = 0;
    for (const double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (const double x : values) v(i++) = x;
  return v;
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("load_bags parses the two-bag example") {
  testing::TempDir dir;
  testing::write_text(dir / "x.csv", "bag_id,f1,f2\na,1,2\na,3,4\nb,5,6\n");
  testing::write_text(dir / "y.csv", "bag_id,y\na,1.0\nb,2.0\n");
  const auto d = load_bags(dir / "x.csv", dir / "y.csv");
  CHECK(d.size() == 2);
  CHECK(d.dim() == 2);
  CHECK(d.bag(0).size() == 2);
  CHECK(d.bag(1).size() == 1);
  CHECK(d.bag(0).id == "a");
  CHECK(d.bag(0).instances(1, 0) == 3.0);
  CHECK(d.targets()(1) == 2.0);
  CHECK(d.num_instances() == 3);
}

TEST_CASE("bag order follows first appearance of each id") {
  testing::TempDir dir;
  testing::write_text(dir / "x.csv", "bag_id,f1\nz,1\na,2\nz,3\n");
  testing::write_text(dir / "y.csv", "bag_id,y\na,1\nz,2\n");
  const auto d = load_bags(dir / "x.csv", dir / "y.csv");
  CHECK(d.bag(0).id == "z");
  CHECK(d.bag(0).size() == 2);
  CHECK(d.targets()(0) == 2.0);
}

TEST_CASE("load_bags reports schema errors with file, line and bag id") {
  testing::TempDir dir;
  testing::write_text(dir / "y.csv", "bag_id,y\na,1\nb,2\n");

  testing::write_text(dir / "empty.csv", "");
  CHECK(error_of([&] { load_bags(dir / "empty.csv", dir / "y.csv"); }).find("no bags") != std::string::npos);

  testing::write_text(dir / "header_only.csv", "bag_id,f1\n");
  CHECK(error_of([&] { load_bags(dir / "header_only.csv", dir / "y.csv"); }).find("no bags") !=
        std::string::npos);

  testing::write_text(dir / "ragged.csv", "bag_id,f1,f2\na,1,2\nb,1,2,3\n");
  const auto ragged = error_of([&] { load_bags(dir / "ragged.csv", dir / "y.csv"); });
  CHECK(ragged.find("ragged.csv:3") != std::string::npos);
  CHECK(ragged.find("'b'") != std::string::npos);

  testing::write_text(dir / "nan.csv", "bag_id,f1\na,1\nb,abc\n");
  const auto bad = error_of([&] { load_bags(dir / "nan.csv", dir / "y.csv"); });
  CHECK(bad.find("nan.csv:3") != std::string::npos);
  CHECK(bad.find("'b'") != std::string::npos);

  testing::write_text(dir / "x.csv", "bag_id,f1\na,1\nc,2\n");
  const auto missing = error_of([&] { load_bags(dir / "x.csv", dir / "y.csv"); });
  CHECK(missing.find("'c'") != std::string::npos);

  testing::write_text(dir / "dup.csv", "bag_id,y\na,1\na,2\nc,3\n");
  const auto dup = error_of([&] { load_bags(dir / "x.csv", dir / "dup.csv"); });
  CHECK(dup.find("dup.csv:3") != std::string::npos);
  CHECK(dup.find("'a'") != std::string::npos);

  const auto absent = error_of([&] { load_bags(dir / "nope.csv", dir / "y.csv"); });
  CHECK(absent.find("nope.csv") != std::string::npos);
}

TEST_CASE("dataset invariants are validated at construction") {
  CHECK_THROWS_AS(BagDataset({}, Vector()), DataError);
  CHECK_THROWS_AS(BagDataset({Bag{"a", rows({{1.0}})}}, vec({1.0, 2.0})), DataError);
  CHECK_THROWS_AS(BagDataset({Bag{"a", rows({{1.0}})}, Bag{"b", rows({{1.0, 2.0}})}}, vec({1, 2})),
                  Error);
  CHECK_THROWS_AS(BagDataset({Bag{"a", Matrix(0, 2)}}, vec({1.0})), DataError);
  Matrix inf = rows({{1.0}});
  inf(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(BagDataset({Bag{"a", inf}}, vec({1.0})), DataError);
}

TEST_CASE("save_bags round-trips bags, order and values exactly") {
  std::mt19937_64 gen(11);
  const auto d = oracle::random_dataset(gen, 7, 5, 3);
  testing::TempDir dir;
  save_bags(d, dir / "x.csv", dir / "y.csv");
  const auto back = load_bags(dir / "x.csv", dir / "y.csv");
  REQUIRE(back.size() == d.size());
  for (std::size_t b = 0; b < d.size(); ++b) {
    CHECK(back.bag(b).id == d.bag(b).id);
    CHECK(back.bag(b).instances == d.bag(b).instances);
  }
  CHECK(back.targets() == d.targets());
}

TEST_CASE("fit_normalizer uses pooled population statistics") {
  SUBCASE("one bag [0],[2]") {
    const BagDataset d({Bag{"a", rows({{0.0}, {2.0}})}}, vec({1.0}));
    const auto t = fit_normalizer(d);
    CHECK(t.mean(0) == 1.0);
    CHECK(t.scale(0) == 1.0);
  }
  SUBCASE("two bags {[1]}, {[3]}") {
    const BagDataset d({Bag{"a", rows({{1.0}})}, Bag{"b", rows({{3.0}})}}, vec({1.0, 2.0}));
    const auto t = fit_normalizer(d);
    CHECK(t.mean(0) == 2.0);
    CHECK(t.scale(0) == 1.0);
  }
  SUBCASE("constant column gets scale 1") {
    const BagDataset d({Bag{"a", rows({{5.0, 1.0}, {5.0, 3.0}})}}, vec({1.0}));
    const auto t = fit_normalizer(d);
    CHECK(t.mean(0) == 5.0);
    CHECK(t.scale(0) == 1.0);
  }
}

TEST_CASE("normalized training data has zero mean and unit std") {
  std::mt19937_64 gen(5);
  for (int rep = 0; rep < 20; ++rep) {
    auto d = oracle::random_dataset(gen, 12, 9, 3, 4.0);
    // Add a constant column.
    std::vector<Bag> bags;
    for (const auto& b : d.bags()) {
      Matrix m(b.instances.rows(), 4);
      m.leftCols(3) = b.instances.array() * 3.0 + 7.0;
      m.col(3).setConstant(-2.5);
      bags.push_back(Bag{b.id, m});
    }
    const BagDataset wide(std::move(bags), d.targets());
    const auto t = fit_normalizer(wide);
    const auto n = apply_normalizer(wide, t);
    const auto [mean, sd] = oracle::pooled_moments(oracle::bags_of(n));
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(std::abs(mean[k]) <= 1e-12);
      CHECK(std::abs(sd[k] - 1.0) <= 1e-12);
    }
    CHECK(mean[3] == 0.0);
    CHECK(sd[3] == 0.0);
    CHECK(n.targets() == wide.targets());
    REQUIRE(n.normalization());
  }
}

TEST_CASE("apply_normalizer arithmetic, identity and dimension checks") {
  const BagDataset d({Bag{"a", rows({{4.0}})}}, vec({0.0}));
  const AffineTransform t{vec({2.0}), vec({2.0})};
  CHECK(apply_normalizer(d, t).bag(0).instances(0, 0) == 1.0);

  const BagDataset two({Bag{"a", rows({{0.0, 2.0}})}}, vec({0.0}));
  CHECK_THROWS_AS(apply_normalizer(two, AffineTransform{vec({1.0}), vec({1.0})}), DimensionError);

  std::mt19937_64 gen(3);
  const auto r = oracle::random_dataset(gen, 4, 4, 2);
  const auto same = apply_normalizer(r, AffineTransform::identity(2));
  for (std::size_t b = 0; b < r.size(); ++b) CHECK(same.bag(b).instances == r.bag(b).instances);
}

TEST_CASE("align_sources intersects ids in first-source order") {
  auto make = [](std::vector<std::string> ids, std::vector<double> ys) {
    std::vector<Bag> bags;
    Vector y(static_cast<Eigen::Index>(ys.size()));
    for (std::size_t i = 0; i < ids.size(); ++i) {
      bags.push_back(Bag{ids[i], rows({{static_cast<double>(i)}})});
      y(static_cast<Eigen::Index>(i)) = ys[i];
    }
    return BagDataset(std::move(bags), y);
  };
  SUBCASE("partial overlap") {
    const auto m = align_sources({make({"a", "b", "c", "d"}, {1, 2, 3, 4}), make({"d", "x", "b"}, {4, 9, 2})});
    REQUIRE(m.size() == 2);
    CHECK(m.id(0) == "b");
    CHECK(m.id(1) == "d");
    CHECK(m.source(1).bag(0).id == "b");
    CHECK(m.targets()(1) == 4.0);
  }
  SUBCASE("AOD-sized sources") {
    std::vector<std::string> ids1, ids2;
    std::vector<double> y1, y2;
    for (int i = 0; i < 800; ++i) {
      ids1.push_back("s" + std::to_string(i));
      y1.push_back(i);
    }
    for (int i = 0; i < 1364; ++i) {
      const int id = i < 289 ? i * 2 : 10000 + i;
      ids2.push_back("s" + std::to_string(id));
      y2.push_back(id);
    }
    const auto m = align_sources({make(ids1, y1), make(ids2, y2)});
    CHECK(m.size() == 289);
  }
  SUBCASE("single source keeps everything") {
    const auto m = align_sources({make({"q", "p"}, {1, 2})});
    CHECK(m.size() == 2);
    CHECK(m.id(0) == "q");
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(align_sources({make({"a"}, {1}), make({"b"}, {1})}), DataError);
    CHECK_THROWS_AS(align_sources({make({"a"}, {1}), make({"a"}, {2})}), DataError);
  }
}

TEST_CASE("subset and pooled instances") {
  std::mt19937_64 gen(8);
  const auto d = oracle::random_dataset(gen, 6, 4, 2);
  const std::vector<std::size_t> idx{4, 1};
  const auto s = d.subset(idx);
  CHECK(s.size() == 2);
  CHECK(s.bag(0).id == d.bag(4).id);
  CHECK(s.targets()(1) == d.targets()(1));
  const auto pooled = d.pooled_instances();
  CHECK(static_cast<std::size_t>(pooled.rows()) == d.num_instances());
}

TEST_CASE("format_double round-trips") {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(gen);
    CHECK(std::stod(format_double(v)) == v);
  }
}
