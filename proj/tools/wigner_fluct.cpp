// wigner-fluct: command-line front end for the eigenvalue-fluctuation library.
//
// Exit codes: 0 success, 1 a checked criterion failed (--check), 2 usage or
// invalid value, 3 numerical failure, 4 output not writable.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wigner/wigner.hpp"

namespace {

using wigner::report::Json;

enum Exit : int { kOk = 0, kCheckFailed = 1, kUsage = 2, kNumeric = 3, kUnwritable = 4 };

struct OutputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::uint64_t seed = 1;
  std::string out = "-";
  bool no_timestamp = false;
  bool check = false;
  std::optional<int> threads;
};

struct FluctOptions {
  std::string ensemble = "tridiag";
  long n = 500;
  std::vector<long> k;
  std::vector<double> theta;
  std::optional<double> gamma;
  std::optional<int> beta;
  long trials = 1000;
  std::string regime = "bulk";
  std::string csv, svg;
  bool per_trial = false;
};

struct SampleOptions {
  std::string ensemble;
  long n = 10;
  std::optional<int> beta;
};

struct FrOptions {
  std::string mode = "superposition";
  long n = 8;
  std::vector<long> k;
  long trials = 5000;
  double alpha = 0.01;
};

struct KernelOptions {
  long n = 10;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  int order = 24;
  int lmax = 4;
};

struct SemicircleOptions {
  long n = 2000;
  double tol = 0.05;
};

const std::vector<std::string> kEnsembles{"goe", "gue", "gse", "wigner-real", "wigner-hermitian", "tridiag"};

int resolve_threads(const std::optional<int>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("WIGNER_FLUCT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 0 && v <= 1024) return static_cast<int>(v);
    throw wigner::InvalidArgument("WIGNER_FLUCT_THREADS must be an integer in [0, 1024]");
  }
  return 0;
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Output streams are opened before any computation so an unwritable path fails fast.
class Sink {
 public:
  explicit Sink(const std::string& path) : path_(path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
    if (!*file_) throw OutputError("cannot write to '" + path + "'");
  }
  std::ostream& stream() { return file_ ? static_cast<std::ostream&>(*file_) : std::cout; }
  void finish() {
    stream().flush();
    if (!stream()) throw OutputError("write to '" + path_ + "' failed");
  }

 private:
  std::string path_;
  std::unique_ptr<std::ofstream> file_;
};

void emit(Sink& sink, const Json& doc) {
  wigner::report::validate_document(doc);
  sink.stream() << doc.dump(2) << '\n';
  sink.finish();
}

Json meta(const Common& c, const std::string& sub, Json config,
          std::optional<wigner::stats::Thresholds> th = std::nullopt) {
  return wigner::report::make_meta(sub, c.seed, std::move(config), th,
                                   c.no_timestamp ? std::nullopt : std::optional<std::string>(utc_timestamp()));
}

wigner::EnsembleSpec ensemble_spec(const std::string& name, long n, std::optional<int> beta) {
  const auto kind = wigner::ensemble_kind_from_string(name);
  if (kind == wigner::EnsembleKind::TridiagBeta)
    return wigner::EnsembleSpec::make(kind, static_cast<std::size_t>(n), 0, beta.value_or(1));
  const int implied = wigner::implied_beta(kind, 0);
  if (beta && *beta != implied)
    throw wigner::InvalidArgument("--beta " + std::to_string(*beta) + " conflicts with --ensemble " + name +
                                  " (beta " + std::to_string(implied) + ")");
  return wigner::EnsembleSpec::make(kind, static_cast<std::size_t>(n), 0);
}

int run_fluct(const Common& c, const FluctOptions& o, const std::string& sub) {
  using namespace wigner;
  const Regime regime = o.regime == "edge" ? Regime::Edge : Regime::Bulk;
  if (o.k.empty()) throw InvalidArgument("--k is required");
  IndexSpec index;
  if (o.theta.empty() && !o.gamma) {
    index = IndexSpec::from_indices(regime, o.k, o.n);
  } else {
    index = IndexSpec{regime, o.k, o.theta, 0.0};
    if (regime == Regime::Edge)
      index.gamma = o.gamma.value_or(std::log(static_cast<double>(o.k.front())) / std::log(static_cast<double>(o.n)));
    index.validate_for(o.n);
  }
  stats::ExperimentPlan plan{ensemble_spec(o.ensemble, o.n, o.beta), index, o.trials, c.seed,
                             resolve_threads(c.threads), stats::Thresholds::for_regime(regime)};
  plan.validate();

  Sink out(c.out);
  std::optional<Sink> csv, svg;
  if (!o.csv.empty()) csv.emplace(o.csv);
  if (!o.svg.empty()) svg.emplace(o.svg);

  const auto result = stats::run_mc(plan);
  Json config{{"ensemble", o.ensemble}, {"n", o.n},           {"k", o.k},
              {"theta", index.theta},   {"gamma", regime == Regime::Edge ? Json(index.gamma) : Json(nullptr)},
              {"beta", plan.ensemble.beta}, {"trials", o.trials}, {"regime", o.regime},
              {"per_trial", o.per_trial}};
  emit(out, report::experiment_document(meta(c, sub, config, plan.thresholds), result, o.per_trial));
  if (csv) {
    report::write_csv(csv->stream(), result.per_trial);
    csv->finish();
  }
  if (svg) {
    report::write_svg_histogram(svg->stream(), stats::coordinate(result.per_trial, 0), sub + " X_1");
    svg->finish();
  }
  return c.check && !result.summary.all_pass() ? kCheckFailed : kOk;
}

int run_sample(const Common& c, const SampleOptions& o) {
  using namespace wigner;
  EnsembleSpec spec = ensemble_spec(o.ensemble, o.n, o.beta);
  spec.seed = c.seed;
  Sink out(c.out);
  const auto s = eigenvalues(sample(spec));
  Json config{{"ensemble", o.ensemble}, {"n", o.n}, {"beta", spec.beta}};
  Json plan{{"ensemble", o.ensemble}, {"n", o.n}, {"beta", spec.beta}, {"seed", c.seed}};
  emit(out, report::result_document(meta(c, "sample", config), plan,
                                    Json{{"eigenvalues", report::numbers(s.values)}}));
  return kOk;
}

int run_fr(const Common& c, const FrOptions& o) {
  using namespace wigner;
  Sink out(c.out);
  experiments::LawReport r;
  std::vector<long> ks = o.k;
  if (o.mode == "superposition") {
    if (ks.empty())
      for (long k = 1; k <= o.n; ++k) ks.push_back(k);
    r = experiments::superposition_check(o.n, ks, o.trials, c.seed, resolve_threads(c.threads));
  } else {
    if (!ks.empty()) throw InvalidArgument("--k is not used with --mode decimation (all indices are compared)");
    r = experiments::decimation_check(o.n, o.trials, c.seed, resolve_threads(c.threads));
  }
  Json per_k = Json::array();
  for (const auto& pk : r.per_k) per_k.push_back(Json{{"k", pk.k}, {"ks_d", pk.ks.statistic}, {"ks_p", pk.ks.p_value}});
  Json config{{"mode", o.mode}, {"n", o.n}, {"k", ks}, {"trials", o.trials}, {"alpha", o.alpha}};
  Json result{{"per_k", per_k}, {"ks_p", r.min_p()}, {"alpha", o.alpha}, {"pass", r.pass(o.alpha)}};
  emit(out, report::result_document(meta(c, "fr-check", config), config, result));
  return c.check && !r.pass(o.alpha) ? kCheckFailed : kOk;
}

Json interval_json(const wigner::Interval& iv) {
  return Json{{"lo", wigner::report::number(iv.lo)}, {"hi", wigner::report::number(iv.hi)}};
}

int run_kernel(const Common& c, const KernelOptions& o) {
  using namespace wigner;
  const Interval iv{o.lo, o.hi};
  if (!(iv.lo < iv.hi)) throw InvalidArgument("--lo must be below --hi");
  Sink out(c.out);
  const double e = kernel::expected_count(o.n, iv), v = kernel::variance_count(o.n, iv);
  Json config{{"n", o.n}, {"interval", interval_json(iv)}};
  emit(out, report::result_document(meta(c, "kernel", config), config,
                                    Json{{"expected_count", e}, {"variance_count", v}}));
  return kOk;
}

int run_cumulants(const Common& c, const KernelOptions& o) {
  using namespace wigner;
  const Interval iv{o.lo, o.hi};
  if (!(iv.lo < iv.hi)) throw InvalidArgument("--lo must be below --hi");
  Sink out(c.out);
  const auto op = kernel::discretize_operator(o.n, iv, o.order);
  const auto r = kernel::counting_cumulants(op, o.lmax);
  const double v = kernel::variance_count(o.n, iv);
  bool bounds = true;
  for (int l = 2; l <= o.lmax; ++l) bounds = bounds && kernel::trace_bound_holds(r, l);
  const bool agree = std::abs(r.c2 - v) <= 1e-5 * std::max(std::abs(v), 1e-300);
  Json traces = Json::array();
  for (int l = 1; l <= o.lmax; ++l) traces.push_back(r.traces[l]);
  Json config{{"n", o.n}, {"interval", interval_json(iv)}, {"order", o.order}, {"lmax", o.lmax}};
  Json result{{"nodes", op.nodes.size()},
              {"eigenvalue_min", op.eigenvalues.empty() ? 0.0 : op.eigenvalues.front()},
              {"eigenvalue_max", op.eigenvalues.empty() ? 0.0 : op.eigenvalues.back()},
              {"traces", traces},
              {"c2", r.c2},
              {"c3", report::number(r.c3)},
              {"c4", report::number(r.c4)},
              {"variance_count", v},
              {"c2_matches_variance", agree},
              {"trace_bounds_hold", bounds}};
  emit(out, report::result_document(meta(c, "cumulants", config), config, result));
  return c.check && !(agree && bounds) ? kCheckFailed : kOk;
}

int run_semicircle(const Common& c, const SemicircleOptions& o) {
  using namespace wigner;
  Sink out(c.out);
  const auto r = experiments::semicircle_check(o.n, c.seed);
  const bool pass = r.sup_distance <= o.tol;
  Json config{{"n", o.n}, {"tol", o.tol}};
  emit(out, report::result_document(meta(c, "semicircle-check", config), config,
                                    Json{{"sup_distance", r.sup_distance}, {"tol", o.tol}, {"pass", pass}}));
  return c.check && !pass ? kCheckFailed : kOk;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "master seed");
  app->add_option("--out", c.out, "JSON output path ('-' for stdout)");
  app->add_flag("--no-timestamp", c.no_timestamp, "omit meta.timestamp");
  app->add_flag("--check", c.check, "exit 1 when a checked criterion fails");
  app->add_option("--threads", c.threads, "worker threads, 0 = all cores (env WIGNER_FLUCT_THREADS)")
      ->check(CLI::Range(0, 1024));
}

void add_beta(CLI::App* app, std::optional<int>& beta) {
  app->add_option("--beta", beta, "Dyson index, one of {1,2,4}")->check(CLI::IsMember({1, 2, 4}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Eigenvalue fluctuation experiments for Gaussian and Wigner ensembles", "wigner-fluct"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", wigner::kVersion);

  Common common;
  FluctOptions bulk, edge, joint;
  SampleOptions sample;
  FrOptions fr;
  KernelOptions kern, cum;
  SemicircleOptions semi;
  bulk.regime = "bulk";
  edge.regime = "edge";

  auto* s_sample = app.add_subcommand("sample", "sample one matrix and print its spectrum");
  s_sample->add_option("--ensemble", sample.ensemble, "ensemble")->required()->check(CLI::IsMember(kEnsembles));
  s_sample->add_option("--n", sample.n, "matrix size")->check(CLI::Range(1L, 4000L));
  add_beta(s_sample, sample.beta);

  auto add_fluct = [&](CLI::App* sub, FluctOptions& o, bool joint_mode) {
    sub->add_option("--ensemble", o.ensemble, "ensemble")->check(CLI::IsMember(kEnsembles));
    sub->add_option("--n", o.n, "matrix size")->check(CLI::Range(4L, 100000L));
    sub->add_option("--k", o.k, "eigenvalue indices (edge: counted from the top)")
        ->required()
        ->delimiter(',')
        ->check(CLI::PositiveNumber);
    sub->add_option("--trials", o.trials, "Monte-Carlo trials")->check(CLI::Range(1L, 10000000L));
    add_beta(sub, o.beta);
    sub->add_option("--csv", o.csv, "per-trial CSV output path");
    sub->add_option("--svg", o.svg, "histogram SVG output path");
    sub->add_flag("--per-trial", o.per_trial, "include per-trial vectors in the JSON");
    if (joint_mode) {
      sub->add_option("--regime", o.regime, "bulk or edge")->check(CLI::IsMember({"bulk", "edge"}));
      sub->add_option("--theta", o.theta, "gap exponents (default: read off the indices)")
          ->delimiter(',')
          ->check(CLI::Range(0.0, 1.0));
      sub->add_option("--gamma", o.gamma, "edge exponent of k_1")->check(CLI::Range(0.0, 1.0));
    }
  };
  auto* s_bulk = app.add_subcommand("bulk-fluct", "one bulk eigenvalue, normalised");
  add_fluct(s_bulk, bulk, false);
  auto* s_edge = app.add_subcommand("edge-fluct", "one edge eigenvalue x_{n-k}, normalised");
  add_fluct(s_edge, edge, false);
  auto* s_joint = app.add_subcommand("joint-fluct", "several eigenvalues and their correlations");
  add_fluct(s_joint, joint, true);

  auto* s_fr = app.add_subcommand("fr-check", "superposition/decimation equality-in-law checks");
  s_fr->add_option("--mode", fr.mode, "superposition or decimation")
      ->check(CLI::IsMember({"superposition", "decimation"}));
  s_fr->add_option("--n", fr.n, "matrix size")->check(CLI::Range(1L, 200L));
  s_fr->add_option("--k", fr.k, "indices to compare (superposition)")->delimiter(',')->check(CLI::PositiveNumber);
  s_fr->add_option("--trials", fr.trials, "trials per side")->check(CLI::Range(2L, 10000000L));
  s_fr->add_option("--alpha", fr.alpha, "significance level")->check(CLI::Range(0.0, 1.0));

  auto add_kernel = [](CLI::App* sub, KernelOptions& o, bool nystrom) {
    sub->add_option("--n", o.n, "kernel size")->check(CLI::Range(1L, 10000L));
    sub->add_option("--lo", o.lo, "interval lower end (default -inf)");
    sub->add_option("--hi", o.hi, "interval upper end (default +inf)");
    if (nystrom) {
      sub->add_option("--order", o.order, "Gauss-Legendre nodes per panel")->check(CLI::Range(16, 128));
      sub->add_option("--lmax", o.lmax, "highest cumulant")->check(CLI::Range(2, 4));
    }
  };
  auto* s_kernel = app.add_subcommand("kernel", "GUE kernel mean and variance of #(I)");
  add_kernel(s_kernel, kern, false);
  auto* s_cum = app.add_subcommand("cumulants", "counting cumulants from the discretised kernel operator");
  add_kernel(s_cum, cum, true);

  auto* s_semi = app.add_subcommand("semicircle-check", "sup-distance of one GOE spectrum to the semicircle law");
  s_semi->add_option("--n", semi.n, "matrix size")->check(CLI::Range(2L, 4000L));
  s_semi->add_option("--tol", semi.tol, "acceptance threshold")->check(CLI::Range(0.0, 1.0));

  for (auto* sub : {s_sample, s_bulk, s_edge, s_joint, s_fr, s_kernel, s_cum, s_semi}) add_common(sub, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*s_sample) return run_sample(common, sample);
    if (*s_bulk) {
      if (bulk.k.size() != 1) throw wigner::InvalidArgument("--k: bulk-fluct takes exactly one index");
      return run_fluct(common, bulk, "bulk-fluct");
    }
    if (*s_edge) {
      if (edge.k.size() != 1) throw wigner::InvalidArgument("--k: edge-fluct takes exactly one index");
      return run_fluct(common, edge, "edge-fluct");
    }
    if (*s_joint) return run_fluct(common, joint, "joint-fluct");
    if (*s_fr) return run_fr(common, fr);
    if (*s_kernel) return run_kernel(common, kern);
    if (*s_cum) return run_cumulants(common, cum);
    if (*s_semi) return run_semicircle(common, semi);
  } catch (const OutputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUnwritable;
  } catch (const wigner::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const wigner::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const wigner::DegenerateInput& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumeric;
  }
  return kUsage;
}
