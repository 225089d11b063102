#include "distreg/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <vector>

#include "distreg/dataset.hpp"
#include "distreg/error.hpp"

namespace distreg {

namespace {

// Display width of a UTF-8 string (one column per code point).
std::size_t display_width(const std::string& s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

std::string pad(const std::string& s, std::size_t width, bool right) {
  const std::size_t w = display_width(s);
  const std::string fill(width > w ? width - w : 0, ' ');
  return right ? fill + s : s + fill;
}

std::string pm(const MetricSummary& s, double factor) {
  return format_sig6(s.mean * factor) + " ± " + format_sig6(s.std * factor);
}

std::string join_sigmas(const std::vector<double>& sigmas) {
  std::string out;
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    if (i > 0) out += ';';
    out += format_double(sigmas[i]);
  }
  return out;
}

}  // namespace

std::string format_sig6(double value) {
  if (std::isnan(value)) return "nan";
  if (value == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

std::string results_csv(std::span<const EvalReport> reports) {
  std::ostringstream out;
  out << "model,trials,me_x1000_mean,me_x1000_std,rmse_x100_mean,rmse_x100_std,r2_mean,r2_std\n";
  for (const auto& r : reports) {
    out << r.model.name() << ',' << r.trials.size() << ',' << format_sig6(r.me.mean * 1000.0) << ','
        << format_sig6(r.me.std * 1000.0) << ',' << format_sig6(r.rmse.mean * 100.0) << ','
        << format_sig6(r.rmse.std * 100.0) << ',' << format_sig6(r.r2.mean) << ','
        << format_sig6(r.r2.std) << '\n';
  }
  return out.str();
}

std::string trials_csv(std::span<const EvalReport> reports) {
  std::ostringstream out;
  out << "model,trial,seed,lambda,sigma,features,basis_seed,cv_rmse,me,rmse,r2\n";
  for (const auto& r : reports) {
    for (const auto& t : r.trials) {
      out << r.model.name() << ',' << t.trial << ',' << t.seed << ','
          << format_double(t.chosen.lambda) << ',' << join_sigmas(t.chosen.sigmas) << ','
          << t.chosen.features << ',' << t.chosen.seed << ',' << format_sig6(t.cv_rmse) << ','
          << format_sig6(t.test.me) << ',' << format_sig6(t.test.rmse) << ','
          << format_sig6(t.test.r2) << '\n';
    }
  }
  return out.str();
}

std::string results_table(std::span<const EvalReport> reports, bool with_timings) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"Model", "ME×1000", "RMSE×100", "R²"});
  if (with_timings) {
    for (const char* h : {"grid [s]", "fit [s]", "eval [s]"}) rows.front().push_back(h);
  }
  for (const auto& r : reports) {
    std::vector<std::string> row{r.model.name(), pm(r.me, 1000.0), pm(r.rmse, 100.0), pm(r.r2, 1.0)};
    if (with_timings) {
      double grid = 0.0, fit = 0.0, eval = 0.0;
      for (const auto& t : r.trials) {
        grid += t.grid_seconds;
        fit += t.fit_seconds;
        eval += t.eval_seconds;
      }
      char buf[32];
      for (const double v : {grid, fit, eval}) {
        std::snprintf(buf, sizeof buf, "%.3f", v);
        row.emplace_back(buf);
      }
    }
    rows.push_back(std::move(row));
  }

  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], display_width(row[c]));
  }
  std::ostringstream out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      if (c > 0) out << "  ";
      out << pad(rows[i][c], width[c], c > 0);
    }
    out << '\n';
    if (i == 0) {
      std::size_t total = 0;
      for (const auto w : width) total += w;
      out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
    }
  }
  return out.str();
}

nlohmann::json hyperparams_to_json(const Hyperparams& hyper) {
  nlohmann::json j;
  j["lambda"] = hyper.lambda;
  j["sigma"] = hyper.sigmas;
  j["features"] = hyper.features;
  j["seed"] = hyper.seed;
  return j;
}

Hyperparams hyperparams_from_json(const nlohmann::json& j) {
  try {
    Hyperparams h;
    h.lambda = j.at("lambda").get<double>();
    h.sigmas = j.value("sigma", std::vector<double>{});
    h.features = j.value("features", std::size_t{0});
    h.seed = j.value("seed", std::uint64_t{0});
    return h;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("hyperparameters: ") + e.what());
  }
}

nlohmann::json selections_json(std::span<const EvalReport> reports) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json model;
    model["model"] = r.model.name();
    model["trials"] = nlohmann::json::array();
    for (const auto& t : r.trials) {
      model["trials"].push_back({{"trial", t.trial},
                                 {"seed", t.seed},
                                 {"hyperparameters", hyperparams_to_json(t.chosen)},
                                 {"cv_rmse", t.cv_rmse},
                                 {"test_bags", t.test_bags}});
    }
    out.push_back(std::move(model));
  }
  return out;
}

}  // namespace distreg
