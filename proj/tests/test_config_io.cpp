#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ngrhmc/report_io.hpp"
#include "ngrhmc/run_config.hpp"

using namespace ngrhmc;
using nlohmann::ordered_json;

namespace {

void expectConfigError(const ordered_json& j, const std::string& fragment) {
  try {
    parseRunConfig(j);
    FAIL("expected a config error mentioning '" + fragment + "'");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    INFO("message: " << msg);
    REQUIRE(msg.find(fragment) != std::string::npos);
  }
}

ordered_json minimalConfig() {
  return ordered_json{{"schema", 1}, {"model", "half-normal"}};
}

std::vector<std::string> readLines(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

TrajectoryOutput fakeChain(double base, double burnSec, double sampSec) {
  TrajectoryOutput t;
  t.samples.resize(20, 1);
  for (int i = 0; i < 20; ++i) t.samples(i, 0) = base + 0.1 * i;
  t.sampleTimes = Eigen::VectorXd::LinSpaced(20, 0.0, 19.0);
  t.timeAverages = Eigen::VectorXd::Constant(2, base);
  t.standardization = Standardization::identity(1);
  t.refreshCount = 7;
  t.collisionCount = 3;
  t.collisionsPerConstraint = {3};
  t.acceptedSteps = 40;
  t.rejectedSteps = 2;
  t.burnInSeconds = burnSec;
  t.samplingSeconds = sampSec;
  return t;
}

}  // namespace

TEST_CASE("a minimal config parses to the documented defaults") {
  const RunConfig cfg = parseRunConfig(minimalConfig());
  REQUIRE(cfg.modelName == "half-normal");
  REQUIRE_FALSE(cfg.inlineModel);
  REQUIRE(cfg.sampler.totalTime == 10000.0);
  REQUIRE(cfg.sampler.burnInFraction == 0.5);
  REQUIRE(cfg.sampler.sampleCount == 1000);
  REQUIRE(cfg.sampler.kernel == KernelType::SparseRandomized);
  REQUIRE(cfg.output.directory == "out");
  REQUIRE(cfg.output.csv);
  REQUIRE(cfg.output.json);
  REQUIRE_FALSE(cfg.sampler.recordEvents);
}

TEST_CASE("unknown and malformed fields are named with their path") {
  ordered_json j = minimalConfig();
  j["bogus"] = 1;
  expectConfigError(j, "config.bogus");

  j = minimalConfig();
  j["sampler"] = ordered_json{{"stepSize", 0.1}};
  expectConfigError(j, "sampler.stepSize");

  j = minimalConfig();
  j["sampler"] = ordered_json{{"totalTime", "long"}};
  expectConfigError(j, "sampler.totalTime");

  j = minimalConfig();
  j["sampler"] = ordered_json{{"seed", -4}};
  expectConfigError(j, "nonnegative");

  j = minimalConfig();
  j["sampler"] = ordered_json{{"kernel", "warp"}};
  expectConfigError(j, "sampler.kernel");

  j = minimalConfig();
  j["sampler"] = ordered_json{{"initial", 3.0}};
  expectConfigError(j, "sampler.initial");

  j = ordered_json{{"model", "half-normal"}};
  expectConfigError(j, "schema");
  j = ordered_json{{"schema", 2}, {"model", "half-normal"}};
  expectConfigError(j, "unsupported version");
  j = ordered_json{{"schema", 1}};
  expectConfigError(j, "model");
  j = ordered_json{{"schema", 1}, {"model", 7}};
  expectConfigError(j, "catalog name");

  // constraints travel with inline models only
  j = minimalConfig();
  j["constraints"] = ordered_json::array();
  expectConfigError(j, "inline");

  j = minimalConfig();
  j["formats"] = ordered_json::array({"yaml"});
  expectConfigError(j, "formats[0]");
}

TEST_CASE("inline gaussian models materialize with their constraints") {
  ordered_json j{{"schema", 1},
                 {"model",
                  {{"type", "gaussian"},
                   {"mean", {1.0, 2.0}},
                   {"cov", {{2.0, 0.5}, {0.5, 1.0}}}}},
                 {"constraints",
                  ordered_json::array(
                      {{{"type", "linear"}, {"a", {1.0, 0.0}}, {"b", 0.5}},
                       {{"type", "l2"}, {"A", {{1.0, 0.0}, {0.0, 1.0}}}, {"v", 3.0}}})}};

  const RunConfig cfg = parseRunConfig(j);
  REQUIRE(cfg.inlineModel);
  REQUIRE(cfg.modelName == "inline-gaussian");
  REQUIRE(cfg.inlineMean.size() == 2);
  REQUIRE(cfg.inlineCov(0, 1) == 0.5);

  const ExampleModel ex = materializeModel(cfg);
  REQUIRE(ex.model.dim == 2);
  REQUIRE(ex.constraints.size() == 2);
  REQUIRE(ex.feasiblePoint.size() == 2);  // the mean satisfies both constraints
  REQUIRE(ex.exactSampler);
  REQUIRE(ex.model.logDensity(cfg.inlineMean) == 0.0);

  // gradient of the quadratic form against finite differences
  Rng rng(11, 0);
  for (int t = 0; t < 5; ++t) {
    const Eigen::VectorXd q = cfg.inlineMean + rng.normalVector(2);
    const Eigen::VectorXd g = ex.model.gradLogDensity(q);
    const Eigen::VectorXd fd = finiteDifferenceGradient(ex.model.logDensity, q);
    REQUIRE((g - fd).cwiseAbs().maxCoeff() < 1e-5);
  }

  // the attached sampler really draws from that Gaussian
  const int N = 20000;
  Eigen::MatrixXd draws(N, 2);
  for (int i = 0; i < N; ++i) draws.row(i) = ex.exactSampler(rng).transpose();
  const Eigen::RowVectorXd mean = draws.colwise().mean();
  REQUIRE(std::abs(mean[0] - 1.0) < 0.04);
  REQUIRE(std::abs(mean[1] - 2.0) < 0.04);
  Eigen::MatrixXd centered = draws.rowwise() - mean;
  const Eigen::MatrixXd cov = centered.transpose() * centered / (N - 1);
  REQUIRE(std::abs(cov(0, 0) - 2.0) < 0.1);
  REQUIRE(std::abs(cov(1, 1) - 1.0) < 0.05);
  REQUIRE(std::abs(cov(0, 1) - 0.5) < 0.05);

  // constraint payloads are checked when the model is assembled
  const auto expectAssemblyError = [](const ordered_json& cj, const std::string& fragment) {
    try {
      materializeModel(parseRunConfig(cj));
      FAIL("expected an assembly error mentioning '" + fragment + "'");
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      INFO("message: " << msg);
      REQUIRE(msg.find(fragment) != std::string::npos);
    }
  };

  ordered_json bad = j;
  bad["constraints"][0]["type"] = "nonlinear";
  expectAssemblyError(bad, "catalog-only");
  bad = j;
  bad["constraints"][1]["A"] = ordered_json::array({{1.0, 0.0}, {0.0}});
  expectAssemblyError(bad, "inconsistent");
  bad = j;
  bad["constraints"][0]["a"] = ordered_json::array({1.0, 0.0, 0.0});
  expectAssemblyError(bad, "dimension");

  // the covariance shape is already a parse-time matter
  bad = j;
  bad["model"]["cov"] = ordered_json::array({{1.0, 0.0}});
  expectConfigError(bad, "square");

  RunConfig sick = cfg;
  sick.inlineCov << 1.0, 2.0, 2.0, 1.0;  // indefinite
  REQUIRE_THROWS_AS(materializeModel(sick), ConfigError);
}

TEST_CASE("parse and serialize are mutually stable") {
  ordered_json j{{"schema", 1},
                 {"model",
                  {{"type", "gaussian"}, {"mean", {0.0, 0.0}}, {"cov", {{1.0, 0.0}, {0.0, 1.0}}}}},
                 {"constraints",
                  ordered_json::array({{{"type", "linear"}, {"a", {1.0, 0.0}}, {"b", 0.0}}})},
                 {"sampler",
                  {{"totalTime", 500.0},
                   {"sampleCount", 64},
                   {"kernel", "deterministic"},
                   {"seed", 99},
                   {"initial", {0.5, 0.5}},
                   {"absTol", 1e-6}}},
                 {"output", "mydir"},
                 {"formats", ordered_json::array({"json"})},
                 {"emitEventLog", true}};

  const RunConfig a = parseRunConfig(j);
  REQUIRE(a.sampler.recordEvents);  // emitEventLog implies event recording
  REQUIRE(a.output.emitEventLog);
  REQUIRE_FALSE(a.output.csv);
  REQUIRE(a.output.json);
  REQUIRE(a.output.directory == "mydir");
  REQUIRE(a.sampler.kernel == KernelType::Deterministic);
  REQUIRE(a.sampler.control.absTol == 1e-6);

  const ordered_json echoA = serializeConfig(a);
  const RunConfig b = parseRunConfig(echoA);
  const ordered_json echoB = serializeConfig(b);
  REQUIRE(echoA.dump() == echoB.dump());
  REQUIRE(b.sampler.seed == 99);
  REQUIRE(b.sampler.initial.size() == 2);
}

TEST_CASE("doubles survive the decimal round trip") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-17, 1e300, 0.0, 123456789.123456789}) {
    const std::string s = formatDouble(x);
    REQUIRE(std::strtod(s.c_str(), nullptr) == x);
  }
  REQUIRE(formatDouble(std::numeric_limits<double>::quiet_NaN()) == "nan");
  REQUIRE(formatDouble(std::numeric_limits<double>::infinity()) == "inf");
  REQUIRE(formatDouble(-std::numeric_limits<double>::infinity()) == "-inf");

  REQUIRE(jsonNumber(2.5).is_number());
  REQUIRE(jsonNumber(std::numeric_limits<double>::infinity()).is_string());
  REQUIRE(jsonNumber(std::numeric_limits<double>::quiet_NaN()) == ordered_json("nan"));
}

TEST_CASE("csv writers emit the documented layouts") {
  std::vector<TrajectoryOutput> chains{fakeChain(0.0, 0.1, 0.2), fakeChain(5.0, 0.1, 0.2)};
  chains[0].events.push_back({1.25, EventKind::Refresh, -1, Eigen::VectorXd::Constant(1, 0.7)});
  chains[0].events.push_back({2.5, EventKind::Collision, 0, Eigen::VectorXd::Zero(1)});
  chains[1].trace.resize(1, 2);
  chains[1].trace << 0.5, 4.25;

  const std::string dir = "/tmp/ngrhmc-io-test";
  std::filesystem::create_directories(dir);

  writeSamplesCsv(dir + "/samples.csv", chains, 1);
  auto lines = readLines(dir + "/samples.csv");
  REQUIRE(lines.size() == 41);
  REQUIRE(lines[0] == "chain,index,q1");
  REQUIRE(lines[1] == "0,0,0");
  REQUIRE(lines[22] == "1,1," + formatDouble(5.1));

  writeEventsCsv(dir + "/events.csv", chains, 1);
  lines = readLines(dir + "/events.csv");
  REQUIRE(lines.size() == 3);
  REQUIRE(lines[0] == "chain,time,kind,constraint,q1");
  REQUIRE(lines[1] == "0,1.25,refresh,-1," + formatDouble(0.7));
  REQUIRE(lines[2] == "0,2.5,collision,0,0");

  writeTraceCsv(dir + "/trace.csv", chains, 1);
  lines = readLines(dir + "/trace.csv");
  REQUIRE(lines.size() == 2);
  REQUIRE(lines[0] == "chain,time,q1");
  REQUIRE(lines[1] == "1,0.5,4.25");

  writeDatasetCsv(dir + "/data.csv", (Eigen::MatrixXd(2, 2) << 1, 2, 3, 4).finished(),
                  {"alpha", "beta"});
  lines = readLines(dir + "/data.csv");
  REQUIRE(lines[0] == "alpha,beta");
  REQUIRE(lines[1] == "1,2");
  REQUIRE(lines[2] == "3,4");
}

TEST_CASE("reports quarantine wall-clock dependence under one key") {
  const RunConfig cfg = parseRunConfig(minimalConfig());
  const ExampleModel ex = buildExample("half-normal");

  std::vector<TrajectoryOutput> fast{fakeChain(0.0, 0.1, 0.2), fakeChain(5.0, 0.3, 0.4)};
  std::vector<TrajectoryOutput> slow{fakeChain(0.0, 9.9, 8.8), fakeChain(5.0, 7.7, 6.6)};

  ordered_json repFast =
      buildReport(cfg, ex, fast, summarizeRun(ex.model, fast), 0.9);
  ordered_json repSlow =
      buildReport(cfg, ex, slow, summarizeRun(ex.model, slow), 123.4);

  REQUIRE(repFast["schema"] == 1);
  REQUIRE(repFast["example"] == "half-normal");
  REQUIRE(repFast["dim"] == 1);
  REQUIRE(repFast["chains"].size() == 2);
  REQUIRE(repFast["chains"][0]["collisions"] == 3);
  REQUIRE(repFast["totals"]["refreshes"] == 14);
  REQUIRE(repFast["monitors"].contains("q1"));
  REQUIRE(repFast["monitors"]["q1"]["quantiles"].contains("q50"));
  REQUIRE(repFast["timing"].contains("totalWallSeconds"));
  REQUIRE(repFast["timing"].contains("essPerSecond"));

  // identical run data with different wall-clock readings: everything except
  // the timing subtree must agree byte for byte
  REQUIRE(repFast.dump() != repSlow.dump());
  repFast.erase("timing");
  repSlow.erase("timing");
  REQUIRE(repFast.dump() == repSlow.dump());
}
