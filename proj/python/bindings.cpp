#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "distreg/dataset.hpp"
#include "distreg/error.hpp"
#include "distreg/eval.hpp"
#include "distreg/kernel.hpp"
#include "distreg/model_io.hpp"
#include "distreg/parallel.hpp"
#include "distreg/regress.hpp"
#include "distreg/rff.hpp"
#include "distreg/synth.hpp"

namespace py = pybind11;
using namespace distreg;

namespace {

BagDataset make_dataset(const std::vector<Matrix>& bags, const Vector& targets,
                        std::optional<std::vector<std::string>> ids) {
  if (ids && ids->size() != bags.size()) throw DataError("ids and bags differ in length");
  std::vector<Bag> out;
  out.reserve(bags.size());
  for (std::size_t b = 0; b < bags.size(); ++b) {
    out.push_back(Bag{ids ? (*ids)[b] : std::to_string(b), bags[b]});
  }
  return BagDataset(std::move(out), targets);
}

MultiSourceDataset as_multisource(const py::object& data) {
  if (py::isinstance<MultiSourceDataset>(data)) return data.cast<MultiSourceDataset>();
  return MultiSourceDataset(data.cast<BagDataset>());
}

py::dict report_dict(const EvalReport& r) {
  auto summary = [](const MetricSummary& s) {
    py::dict d;
    d["mean"] = s.mean;
    d["std"] = s.std;
    return d;
  };
  py::dict d;
  d["model"] = r.model.name();
  d["me"] = summary(r.me);
  d["rmse"] = summary(r.rmse);
  d["r2"] = summary(r.r2);
  d["cv_rmse"] = summary(r.cv_rmse);
  py::list trials;
  for (const auto& t : r.trials) {
    py::dict row;
    row["seed"] = t.seed;
    row["lambda"] = t.chosen.lambda;
    row["sigma"] = t.chosen.sigmas;
    row["features"] = t.chosen.features;
    row["me"] = t.test.me;
    row["rmse"] = t.test.rmse;
    row["r2"] = t.test.r2;
    row["test_bags"] = t.test_bags;
    trials.append(row);
  }
  d["trials"] = trials;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Kernel distribution regression on bags of feature vectors";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DataError>(m, "DataError", error.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", error.ptr());
  py::register_exception<IllConditionedError>(m, "IllConditionedError", error.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", error.ptr());

  py::class_<BagDataset>(m, "BagDataset")
      .def(py::init(&make_dataset), py::arg("bags"), py::arg("targets"), py::arg("ids") = py::none())
      .def_property_readonly("size", &BagDataset::size)
      .def_property_readonly("dim", &BagDataset::dim)
      .def_property_readonly("targets", &BagDataset::targets)
      .def_property_readonly("ids",
                             [](const BagDataset& d) {
                               std::vector<std::string> ids;
                               for (const auto& b : d.bags()) ids.push_back(b.id);
                               return ids;
                             })
      .def("bag", [](const BagDataset& d, std::size_t i) -> Matrix {
        if (i >= d.size()) throw py::index_error("bag index out of range");
        return d.bag(i).instances;
      })
      .def("__len__", &BagDataset::size);

  py::class_<MultiSourceDataset>(m, "MultiSourceDataset")
      .def(py::init<std::vector<BagDataset>>(), py::arg("sources"))
      .def_property_readonly("num_sources", &MultiSourceDataset::num_sources)
      .def_property_readonly("targets", &MultiSourceDataset::targets)
      .def("source", &MultiSourceDataset::source)
      .def("__len__", &MultiSourceDataset::size);

  m.def("load_bags", &load_bags, py::arg("instances_path"), py::arg("targets_path"));
  m.def("align_sources", &align_sources, py::arg("sources"));

  m.def("rbf_kernel",
        [](const Vector& x, const Vector& y, double sigma) {
          return rbf_kernel(as_span(x), as_span(y), RbfParams(sigma));
        },
        py::arg("x"), py::arg("x_prime"), py::arg("sigma"));
  m.def("bag_gram", [](const BagDataset& d, double sigma) { return bag_gram(d, RbfParams(sigma)); },
        py::arg("data"), py::arg("sigma"));
  m.def("cross_bag_gram",
        [](const BagDataset& test, const BagDataset& train, double sigma) {
          return cross_bag_gram(test, train, RbfParams(sigma));
        },
        py::arg("test"), py::arg("train"), py::arg("sigma"));
  m.def("mmd_squared",
        [](const Matrix& x, const Matrix& y, double sigma) { return mmd_squared(x, y, RbfParams(sigma)); },
        py::arg("x"), py::arg("y"), py::arg("sigma"));
  m.def("median_heuristic", &median_heuristic, py::arg("pooled"), py::arg("max_points") = 2000,
        py::arg("seed") = 0);
  m.def("mmd_permutation_test",
        [](const Matrix& x, const Matrix& y, double sigma, std::size_t permutations, std::uint64_t seed) {
          const auto r = mmd_permutation_test(x, y, RbfParams(sigma), permutations, seed);
          py::dict d;
          d["statistic"] = r.statistic;
          d["null_q95"] = r.null_q95;
          d["null_q99"] = r.null_q99;
          d["p_value"] = r.p_value;
          d["sigma"] = r.sigma;
          return d;
        },
        py::arg("x"), py::arg("y"), py::arg("sigma"), py::arg("permutations") = 200, py::arg("seed") = 0);

  m.def("sample_basis",
        [](std::size_t d, std::size_t frequencies, double sigma, std::uint64_t seed) {
          return sample_basis(d, frequencies, sigma, seed).weights();
        },
        py::arg("dim"), py::arg("frequencies"), py::arg("sigma"), py::arg("seed"));

  py::class_<FittedModel>(m, "FittedModel")
      .def_property_readonly("kind", [](const FittedModel& f) { return std::string(model_kind_name(f.kind)); })
      .def_property_readonly("coefficients", [](const FittedModel& f) { return f.solution.coefficients; })
      .def_property_readonly("intercept", [](const FittedModel& f) { return f.solution.intercept; })
      .def("predict", [](const FittedModel& f, const py::object& data) { return predict(f, as_multisource(data)); },
           py::arg("data"))
      .def("save", [](const FittedModel& f, const std::filesystem::path& p) { save_model(f, p); },
           py::arg("path"))
      .def_static("load", &load_model, py::arg("path"));

  m.def("fit",
        [](const std::string& kind, const py::object& data, double lambda, std::vector<double> sigma,
           std::size_t features, std::uint64_t seed) {
          Hyperparams h;
          h.lambda = lambda;
          h.sigmas = std::move(sigma);
          h.features = features;
          h.seed = seed;
          return fit(ModelSpec::parse(kind), as_multisource(data), h);
        },
        py::arg("kind"), py::arg("data"), py::arg("lam"), py::arg("sigma") = std::vector<double>{},
        py::arg("features") = 0, py::arg("seed") = 0);

  m.def("run_protocol",
        [](const py::object& data, const std::string& kind, double test_fraction, std::size_t trials,
           std::size_t folds, std::uint64_t seed, std::optional<std::vector<double>> lambdas,
           std::optional<std::vector<double>> sigma_scales, std::optional<std::vector<std::size_t>> features) {
          HyperGrid grid = HyperGrid::defaults();
          if (lambdas) grid.lambdas = *lambdas;
          if (sigma_scales) grid.sigma_scales = *sigma_scales;
          if (features) grid.features = *features;
          ProtocolOptions opt{test_fraction, trials, folds, seed};
          const MultiSourceDataset input = as_multisource(data);
          const ModelSpec spec = ModelSpec::parse(kind);
          EvalReport r;
          {
            py::gil_scoped_release release;
            r = run_protocol(input, spec, grid, opt);
          }
          return report_dict(r);
        },
        py::arg("data"), py::arg("kind"), py::arg("test_fraction") = 0.33, py::arg("trials") = 10,
        py::arg("folds") = 5, py::arg("seed") = 0, py::arg("lambdas") = py::none(),
        py::arg("sigma_scales") = py::none(), py::arg("features") = py::none());

  m.def("variance_task",
        [](std::size_t bags, std::size_t instances, std::size_t dim, std::uint64_t seed) {
          return synth::variance_task({bags, instances, dim}, seed);
        },
        py::arg("bags") = 120, py::arg("instances") = 50, py::arg("dim") = 3, py::arg("seed") = 0);
  m.def("mean_task",
        [](std::size_t bags, std::size_t instances, std::size_t dim, double noise, std::uint64_t seed) {
          return synth::mean_task({bags, instances, dim, noise}, seed).data;
        },
        py::arg("bags") = 100, py::arg("instances") = 30, py::arg("dim") = 3, py::arg("noise") = 0.1,
        py::arg("seed") = 0);
  m.def("multisource_task",
        [](std::size_t bags, std::uint64_t seed) {
          synth::MultiSourceTaskParams p;
          p.bags = bags;
          return synth::multisource_task(p, seed);
        },
        py::arg("bags") = 120, py::arg("seed") = 0);

  m.def("configure_threads_from_env", &configure_threads_from_env);
}
