#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "wigner/error.hpp"
#include "wigner/stats.hpp"
#include "wigner/version.hpp"

// Result documents. Every document is {meta, plan, ...}; fluctuation runs add
// summary and optionally per_trial, the other subcommands add result.
namespace wigner::report {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

class SchemaError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// Non-finite numbers become null; JSON has no NaN.
inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json numbers(std::span<const double> v) {
  Json a = Json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

inline Json matrix(const RealMatrix& m) {
  Json a = Json::array();
  for (std::size_t i = 0; i < m.size(); ++i) a.push_back(numbers(m.row(i)));
  return a;
}

inline Json to_json(const stats::Thresholds& t) {
  return Json{{"ks_max", t.ks_max},
              {"var_lo", t.var_lo},
              {"var_hi", t.var_hi},
              {"corr_tol", t.corr_tol},
              {"corr_tol_independent", t.corr_tol_independent},
              {"note", "engineering constants for n of a few hundred to a thousand; no finite-n rates are known"}};
}

inline Json to_json(const IndexSpec& s) {
  return Json{{"regime", s.regime == Regime::Bulk ? "bulk" : "edge"},
              {"k", s.k},
              {"theta", s.theta},
              {"gamma", s.regime == Regime::Edge ? Json(s.gamma) : Json(nullptr)}};
}

inline Json to_json(const stats::ExperimentPlan& p) {
  return Json{{"ensemble", std::string(to_string(p.ensemble.kind))},
              {"n", p.ensemble.n},
              {"beta", p.ensemble.beta},
              {"index", to_json(p.index)},
              {"trials", p.trials},
              {"master_seed", p.master_seed}};
}

inline Json to_json(const stats::Summary& s) {
  Json pass = Json::array();
  for (const auto& c : s.criteria)
    pass.push_back(Json{{"criterion", c.name},
                        {"coords", c.coords},
                        {"value", number(c.value)},
                        {"lo", c.lo},
                        {"hi", c.hi},
                        {"pass", c.pass}});
  return Json{{"mean", numbers(s.mean)},       {"var", numbers(s.var)},
              {"corr", matrix(s.corr)},        {"lambda_pred", matrix(s.lambda_pred)},
              {"ks", numbers(s.ks)},           {"pass", pass},
              {"all_pass", s.all_pass()}};
}

inline Json per_trial_json(std::span<const FluctuationVector> xs) {
  Json a = Json::array();
  for (const auto& f : xs) a.push_back(numbers(f.x));
  return a;
}

// meta block: everything needed to reproduce the run. The thread count is
// deliberately absent so documents do not depend on it.
inline Json make_meta(const std::string& subcommand, std::uint64_t seed, Json config,
                      std::optional<stats::Thresholds> thresholds = std::nullopt,
                      std::optional<std::string> timestamp = std::nullopt) {
  Json m{{"schema_version", kSchemaVersion},
         {"tool", "wigner-fluct"},
         {"code_version", kVersion},
         {"subcommand", subcommand},
         {"seed", seed},
         {"config", std::move(config)},
         {"thresholds", thresholds ? to_json(*thresholds) : Json(nullptr)}};
  if (timestamp) m["timestamp"] = *timestamp;
  return m;
}

inline Json experiment_document(Json meta, const stats::ExperimentResult& r, bool include_trials) {
  Json d{{"meta", std::move(meta)}, {"plan", to_json(r.plan)}, {"summary", to_json(r.summary)}};
  if (include_trials) d["per_trial"] = per_trial_json(r.per_trial);
  return d;
}

inline Json result_document(Json meta, Json plan, Json result) {
  return Json{{"meta", std::move(meta)}, {"plan", std::move(plan)}, {"result", std::move(result)}};
}

namespace detail {
inline void require(bool ok, const std::string& what) {
  if (!ok) throw SchemaError("schema violation: " + what);
}

inline bool is_number_or_null(const Json& v) { return v.is_number() || v.is_null(); }

inline void require_vector(const Json& s, const char* key, std::size_t m) {
  require(s.contains(key) && s[key].is_array() && s[key].size() == m, std::string("summary.") + key + " length m");
  for (const auto& v : s[key]) require(is_number_or_null(v), std::string("summary.") + key + " entries numeric");
}

inline void require_square(const Json& s, const char* key, std::size_t m) {
  require(s.contains(key) && s[key].is_array() && s[key].size() == m, std::string("summary.") + key + " is m x m");
  for (const auto& row : s[key]) {
    require(row.is_array() && row.size() == m, std::string("summary.") + key + " is m x m");
    for (const auto& v : row) require(is_number_or_null(v), std::string("summary.") + key + " entries numeric");
  }
}
}  // namespace detail

// Throws SchemaError naming the first violated rule.
inline void validate_document(const Json& d) {
  using detail::require;
  require(d.is_object(), "document is an object");
  require(d.contains("meta") && d["meta"].is_object(), "meta object");
  require(d.contains("plan") && d["plan"].is_object(), "plan object");
  const Json& meta = d["meta"];
  require(meta.contains("schema_version") && meta["schema_version"] == kSchemaVersion, "meta.schema_version");
  for (const char* k : {"tool", "code_version", "subcommand"})
    require(meta.contains(k) && meta[k].is_string(), std::string("meta.") + k);
  require(meta.contains("seed") && meta["seed"].is_number_unsigned(), "meta.seed");
  require(meta.contains("config") && meta["config"].is_object(), "meta.config");
  require(meta.contains("thresholds"), "meta.thresholds");
  require(!meta["config"].contains("threads"), "meta.config excludes threads");
  if (meta.contains("timestamp")) require(meta["timestamp"].is_string(), "meta.timestamp");

  const bool has_summary = d.contains("summary"), has_result = d.contains("result");
  require(has_summary != has_result, "exactly one of summary/result");
  if (has_result) {
    require(d["result"].is_object(), "result object");
    require(!d.contains("per_trial"), "per_trial only with summary");
    return;
  }
  const Json& s = d["summary"];
  require(s.is_object(), "summary object");
  require(s.contains("mean") && s["mean"].is_array(), "summary.mean");
  const std::size_t m = s["mean"].size();
  require(m >= 1, "summary.mean nonempty");
  detail::require_vector(s, "mean", m);
  detail::require_vector(s, "var", m);
  detail::require_vector(s, "ks", m);
  detail::require_square(s, "corr", m);
  detail::require_square(s, "lambda_pred", m);
  require(s.contains("pass") && s["pass"].is_array(), "summary.pass");
  for (const auto& c : s["pass"]) {
    require(c.is_object() && c.contains("criterion") && c["criterion"].is_string(), "pass[].criterion");
    require(c.contains("pass") && c["pass"].is_boolean(), "pass[].pass");
    require(c.contains("value") && detail::is_number_or_null(c["value"]), "pass[].value");
  }
  require(s.contains("all_pass") && s["all_pass"].is_boolean(), "summary.all_pass");
  if (d.contains("per_trial")) {
    require(d["per_trial"].is_array(), "per_trial array");
    for (const auto& row : d["per_trial"]) require(row.is_array() && row.size() == m, "per_trial rows of length m");
  }
}

// One row per trial, header X_1..X_m.
inline void write_csv(std::ostream& os, std::span<const FluctuationVector> xs) {
  if (xs.empty()) throw InvalidArgument("write_csv: no trials");
  const std::size_t m = xs.front().x.size();
  for (std::size_t i = 0; i < m; ++i) os << (i ? "," : "") << "X_" << (i + 1);
  os << '\n' << std::setprecision(17);
  for (const auto& f : xs) {
    if (f.x.size() != m) throw ShapeError("write_csv: fluctuation vectors of unequal length");
    for (std::size_t i = 0; i < m; ++i) os << (i ? "," : "") << f.x[i];
    os << '\n';
  }
}

// Density histogram of the samples with the N(0, 1) density drawn over it.
inline void write_svg_histogram(std::ostream& os, std::span<const double> samples, const std::string& title,
                                int bins = 40) {
  if (samples.empty()) throw InvalidArgument("write_svg_histogram: no samples");
  const double W = 640, H = 400, L = 50, R = 20, T = 40, B = 40;
  double lo = -4.0, hi = 4.0;
  for (double x : samples)
    if (std::isfinite(x)) lo = std::min(lo, x), hi = std::max(hi, x);
  const double bw = (hi - lo) / bins;
  std::vector<double> dens(static_cast<std::size_t>(bins), 0.0);
  for (double x : samples) {
    if (!std::isfinite(x)) continue;
    const int b = std::clamp(static_cast<int>((x - lo) / bw), 0, bins - 1);
    dens[static_cast<std::size_t>(b)] += 1.0;
  }
  for (double& d : dens) d /= static_cast<double>(samples.size()) * bw;
  const double ymax = std::max(*std::max_element(dens.begin(), dens.end()), stats::standard_normal_pdf(0.0)) * 1.1;
  auto px = [&](double x) { return L + (x - lo) / (hi - lo) * (W - L - R); };
  auto py = [&](double y) { return H - B - y / ymax * (H - T - B); };

  os << std::fixed << std::setprecision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
     << title << "</text>\n";
  for (int b = 0; b < bins; ++b) {
    const double x0 = px(lo + b * bw), x1 = px(lo + (b + 1) * bw), y = py(dens[static_cast<std::size_t>(b)]);
    os << "<rect x=\"" << x0 << "\" y=\"" << y << "\" width=\"" << std::max(0.0, x1 - x0 - 0.5) << "\" height=\""
       << (H - B - y) << "\" fill=\"#9bb7d4\"/>\n";
  }
  os << "<polyline fill=\"none\" stroke=\"#c0392b\" stroke-width=\"2\" points=\"";
  for (int i = 0; i <= 200; ++i) {
    const double x = lo + (hi - lo) * i / 200.0;
    os << px(x) << ',' << py(stats::standard_normal_pdf(x)) << ' ';
  }
  os << "\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int t = static_cast<int>(std::ceil(lo)); t <= static_cast<int>(std::floor(hi)); ++t)
    os << "<text x=\"" << px(t) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       << "font-size=\"11\">" << t << "</text>\n";
  os << "</svg>\n";
}

}  // namespace wigner::report
