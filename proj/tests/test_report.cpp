#include <catch_amalgamated.hpp>

#include <sstream>

#include "wigner/report.hpp"

using namespace wigner;
using namespace wigner::report;

namespace {
stats::ExperimentResult small_run(long trials = 200) {
  stats::ExperimentPlan plan{EnsembleSpec::make(EnsembleKind::TridiagBeta, 120, 0, 2),
                             IndexSpec::bulk({50, 62}, {0.5}), trials, 31, 2, stats::Thresholds::bulk()};
  return stats::run_mc(plan);
}

Json config() { return Json{{"ensemble", "tridiag"}, {"n", 120}}; }
}  // namespace

TEST_CASE("experiment documents satisfy the schema", "[report]") {
  const auto r = small_run();
  const Json d = experiment_document(make_meta("joint-fluct", 31, config(), r.plan.thresholds), r, true);
  CHECK_NOTHROW(validate_document(d));
  CHECK(d["summary"]["mean"].size() == 2);
  CHECK(d["per_trial"].size() == 200);
  CHECK(d["summary"]["pass"].size() == r.summary.criteria.size());
  CHECK_FALSE(d["meta"].contains("timestamp"));
  CHECK(make_meta("x", 1, config(), std::nullopt, "2026-01-01T00:00:00Z")["timestamp"] == "2026-01-01T00:00:00Z");
  CHECK_NOTHROW(validate_document(result_document(make_meta("kernel", 0, config()), Json::object(), Json{{"v", 1}})));
}

TEST_CASE("schema violations are named", "[report]") {
  const auto r = small_run(20);
  const Json good = experiment_document(make_meta("joint-fluct", 31, config()), r, true);
  auto broken = [&](auto mutate) {
    Json d = good;
    mutate(d);
    return d;
  };
  CHECK_THROWS_AS(validate_document(broken([](Json& d) { d.erase("meta"); })), SchemaError);
  CHECK_THROWS_AS(validate_document(broken([](Json& d) { d["meta"]["schema_version"] = 99; })), SchemaError);
  CHECK_THROWS_AS(validate_document(broken([](Json& d) { d["meta"]["config"]["threads"] = 4; })), SchemaError);
  CHECK_THROWS_AS(validate_document(broken([](Json& d) { d["summary"]["var"].push_back(1.0); })), SchemaError);
  CHECK_THROWS_AS(validate_document(broken([](Json& d) { d["summary"]["corr"][0].erase(0); })), SchemaError);
  CHECK_THROWS_AS(validate_document(broken([](Json& d) { d["summary"]["pass"][0].erase("pass"); })), SchemaError);
  CHECK_THROWS_AS(validate_document(broken([](Json& d) { d["per_trial"][3] = Json::array({1.0}); })), SchemaError);
  CHECK_THROWS_AS(validate_document(broken([](Json& d) { d["result"] = Json::object(); })), SchemaError);
  CHECK_THROWS_AS(validate_document(Json::array()), SchemaError);
  try {
    validate_document(broken([](Json& d) { d["summary"]["ks"] = "x"; }));
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("summary.ks") != std::string::npos);
  }
}

TEST_CASE("summaries can be recomputed from serialised trials", "[report]") {
  const auto r = small_run();
  const Json d = Json::parse(experiment_document(make_meta("joint-fluct", 31, config()), r, true).dump());
  std::vector<FluctuationVector> xs;
  long t = 0;
  for (const auto& row : d["per_trial"]) xs.push_back({row.get<std::vector<double>>(), t++});
  const auto again = stats::summarize(xs, r.plan.index, r.plan.thresholds);
  CHECK(again == r.summary);
  CHECK(to_json(again) == d["summary"]);
}

TEST_CASE("non-finite values serialise as null", "[report]") {
  CHECK(number(std::nan("")).is_null());
  CHECK(number(1.5) == 1.5);
  const auto one = small_run(1);
  const Json d = experiment_document(make_meta("bulk-fluct", 31, config()), one, false);
  CHECK(d["summary"]["var"][0].is_null());
  CHECK_NOTHROW(validate_document(d));
}

TEST_CASE("CSV and SVG writers", "[report]") {
  const auto r = small_run(5);
  std::ostringstream csv;
  write_csv(csv, r.per_trial);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "X_1,X_2");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::stod(line.substr(0, line.find(','))) == r.per_trial[rows - 1].x[0]);
  }
  CHECK(rows == 5);
  CHECK_THROWS_AS(write_csv(csv, std::span<const FluctuationVector>{}), InvalidArgument);

  std::ostringstream svg;
  const auto xs = stats::coordinate(small_run().per_trial, 0);
  write_svg_histogram(svg, xs, "X_1");
  const std::string s = svg.str();
  CHECK(s.rfind("<svg", 0) == 0);
  CHECK(s.find("</svg>") != std::string::npos);
  CHECK(s.find("<polyline") != std::string::npos);
  CHECK_THROWS_AS(write_svg_histogram(svg, std::vector<double>{}, "t"), InvalidArgument);
}
