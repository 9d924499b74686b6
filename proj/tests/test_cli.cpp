#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"
#include "doctest.h"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

const fs::path kSamples = LIPFREE_SAMPLE_DIR;

std::string sample(const char* name) { return (kSamples / name).string(); }

struct Outcome {
  int code;
  json report;
  std::string err;
};

Outcome run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = lipfree::cli::run(args, out, err);
  json report;
  if (!out.str().empty()) report = json::parse(out.str());
  return {code, report, err.str()};
}

fs::path scratch(const char* name) {
  const auto dir = fs::temp_directory_path() / "lipfree_test_cli";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("validate") {
  const auto ok = run({"validate", sample("two_point.json")});
  CHECK(ok.code == 0);
  CHECK(ok.report["command"] == "validate");
  CHECK(ok.report["results"]["valid"] == true);
  CHECK(ok.report["results"]["points"] == 2);
  REQUIRE(ok.report["inputs"].size() == 1);
  CHECK(ok.report["inputs"][0]["sha256"].get<std::string>().size() == 64);
  CHECK(ok.report["tolerances"]["metric_relative"] == 1e-9);

  const auto bad = run({"validate", sample("triangle_violation.json")});
  CHECK(bad.code == 2);
  CHECK(bad.report["results"]["valid"] == false);
  CHECK(bad.report["results"]["error"]["code"] == "TriangleViolation");
  CHECK(bad.report["results"]["error"]["path"] == "/metric");

  const auto tripod = run({"validate", sample("tripod.json")});
  CHECK(tripod.report["results"]["paths"] == 3);
}

TEST_CASE("usage errors") {
  CHECK(run({"frobnicate"}).code == 2);
  const auto r = run({"freenorm", sample("molecule.json"), "--method", "simplex"});
  CHECK(r.code == 2);
  CHECK(r.err.rfind("UnknownCommand", 0) == 0);
  CHECK(run({"validate", sample("absent.json")}).code == 2);
}

TEST_CASE("norm and pointwise constants") {
  const auto r = run({"norm", sample("distance_to_base.json"), "--scale", "1"});
  CHECK(r.code == 0);
  CHECK(r.report["results"]["norm"]["value"] == 1.0);
  CHECK(r.report["results"]["pointwise"]["values"].size() == 3);
}

TEST_CASE("free norm by both methods") {
  const auto r = run({"freenorm", sample("molecule.json"), "--method", "both"});
  CHECK(r.code == 0);
  CHECK(r.report["results"]["flow"]["value"].get<double>() == doctest::Approx(1.0));
  CHECK(r.report["results"]["lp"]["value"].get<double>() == doctest::Approx(1.0));
  CHECK(r.report["results"]["agree"] == true);
}

TEST_CASE("extremes and norming") {
  const auto e = run({"extremes", sample("path3.json")});
  CHECK(e.code == 0);
  CHECK(e.report["results"]["extremes"] == json::parse("[[0,1],[1,2]]"));
  CHECK(e.report["results"]["predictor_agrees"] == true);

  const auto n = run({"norming", sample("path3.json"), "--pairs", "0-2"});
  CHECK(n.report["results"]["norming"] == false);
  CHECK(n.report["results"].contains("failing_vertex"));
  CHECK(run({"norming", sample("path3.json")}).report["results"]["norming"] == true);
}

TEST_CASE("isometry certification") {
  const auto id = run({"isometry", "--map", sample("identity_path3.json"), "--method", "both"});
  CHECK(id.code == 0);
  CHECK(id.report["results"]["isometry"]["verdict"] == "isometric");
  CHECK(id.report["results"]["isometry"]["methods_compared"] == true);

  const auto fold = run({"isometry", "--map", sample("fold_path3.json"), "--method", "dual"});
  CHECK(fold.code == 0);
  // values of f o phi are (0, f(1), 0), so no norm is lost
  CHECK(fold.report["results"]["isometry"]["verdict"] == "isometric");
  CHECK(fold.report["results"]["operator_norm"]["value"] == 1.0);

  const auto pairs = run({"isometry", "--map", sample("identity_path3.json"), "--method", "dual", "--pairs", "0-2"});
  CHECK(pairs.code == 2);
  CHECK(pairs.report["results"]["error"]["code"] == "NotNorming");
}

TEST_CASE("extension with a floor") {
  const auto r = run({"extend", sample("partial.json"), "--subset", "0,1", "--floor", sample("zero_floor.json")});
  CHECK(r.code == 0);
  CHECK(r.report["results"]["restricts_exactly"] == true);
  CHECK(r.report["results"]["floor_excess"].get<double>() <= 0.0);
  CHECK(r.report["results"]["lipschitz"] == 1.0);
}

TEST_CASE("reports go to --out") {
  const auto path = scratch("report.json");
  fs::remove(path);
  std::ostringstream out, err;
  CHECK(lipfree::cli::run({"validate", sample("path3.json"), "--out", path.string()}, out, err) == 0);
  CHECK(out.str().empty());
  std::ifstream f(path);
  CHECK(json::parse(f)["results"]["valid"] == true);
}

TEST_CASE("interval experiment") {
  const auto csv = scratch("fold.csv");
  fs::remove(csv);
  const auto r = run({"experiment", "interval", "--mesh", "16", "--map", "builtin:fold", "--csv", csv.string()});
  CHECK(r.code == 0);
  CHECK(r.report["command"] == "experiment interval");
  const auto& res = r.report["results"];
  CHECK(res["isometry"]["verdict"] == "isometric");
  CHECK(res["checks"]["sufficient_implies_isometric"] == true);
  CHECK(res["checks"]["isometric_implies_necessary"] == true);
  std::ifstream f(csv);
  std::string header;
  std::getline(f, header);
  CHECK(header == "t,best_ratio,defect");

  const auto halving = run({"experiment", "interval", "--mesh", "8", "--map", "builtin:halving"});
  CHECK(halving.report["results"]["isometry"]["verdict"] == "not_isometric");
  CHECK(halving.report["results"]["sufficient"]["dense"] == false);
  CHECK(run({"experiment", "interval", "--map", "builtin:nothing"}).code == 2);
}

TEST_CASE("geodesic experiment") {
  const auto r = run({"experiment", "geodesic", "--space", "builtin:circle:8"});
  CHECK(r.code == 0);
  CHECK(r.report["results"]["paths"].size() == 2);
  CHECK(r.report["results"]["isometry"]["verdict"] == "isometric");

  const auto file = run({"experiment", "geodesic", "--space", sample("tripod.json"), "--pair", "1-2"});
  CHECK(file.code == 0);
  CHECK(file.report["results"]["paths"][0]["inverse_projection"]["values"] == json::parse("[1.0, 0.0, 2.0, 2.0]"));

  const auto collapse = run({"experiment", "geodesic", "--space", sample("tripod.json"), "--map",
                             sample("collapse_tripod.json"), "--r-loc", "0.5", "--eps", "0.1"});
  CHECK(collapse.code == 0);
  CHECK(collapse.report["results"]["sufficient"]["passes"] == false);
  CHECK(collapse.report["results"]["isometry"]["verdict"] == "not_isometric");

  // mesh 1 makes the default thresholds 4, which every map passes; the report says so
  const auto coarse =
      run({"experiment", "geodesic", "--space", sample("tripod.json"), "--map", sample("collapse_tripod.json")});
  CHECK(coarse.report["tolerances"]["eps"] == 4.0);
  CHECK(coarse.report["results"]["sufficient"]["passes"] == true);
  CHECK(coarse.report["results"]["checks"]["sufficient_implies_isometric"] == false);
}

TEST_CASE("random experiment is reproducible") {
  const std::vector<std::string> args{"experiment", "random", "--seed", "7", "--count", "20", "--max-domain", "6",
                                      "--max-codomain", "5"};
  auto a = run(args), b = run(args);
  CHECK(a.code == 0);
  CHECK(a.report["results"]["samples"] == 20);
  CHECK(a.report["results"]["disagreements"] == 0);
  a.report.erase("timing");
  b.report.erase("timing");
  CHECK(a.report == b.report);
}
