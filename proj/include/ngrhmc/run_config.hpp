#pragma once

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "ngrhmc/boundary.hpp"
#include "ngrhmc/catalog.hpp"
#include "ngrhmc/errors.hpp"
#include "ngrhmc/oracles.hpp"
#include "ngrhmc/sampler.hpp"

namespace ngrhmc {

struct OutputOptions {
  std::string directory = "out";
  bool csv = true;
  bool json = true;
  bool emitEventLog = false;
  bool emitDenseTrace = false;
};

/* Parsed and validated run description. The model is either a catalog name
   or an inline Gaussian (mean + covariance) with optional linear / norm
   constraints; the general nonlinear constraint shape needs code and is only
   reachable through the catalog. */
struct RunConfig {
  std::string modelName;  // catalog name, or "inline-gaussian"
  bool inlineModel = false;
  Eigen::VectorXd inlineMean;
  Eigen::MatrixXd inlineCov;
  nlohmann::ordered_json modelJson;        // as given, for the echo
  nlohmann::ordered_json constraintsJson;  // as given, for the echo
  SamplerConfig sampler;
  OutputOptions output;
};

namespace config_detail {

using nlohmann::ordered_json;

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config field '" + path + "': " + what);
}

inline void requireKeys(const ordered_json& obj, const std::string& path,
                        const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) fail(path + "." + it.key(), "unknown field");
}

inline double asNumber(const ordered_json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

inline long asInteger(const ordered_json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<long>();
}

inline bool asBool(const ordered_json& v, const std::string& path) {
  if (!v.is_boolean()) fail(path, "expected a boolean");
  return v.get<bool>();
}

inline std::string asString(const ordered_json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

inline Eigen::VectorXd asVector(const ordered_json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  Eigen::VectorXd out(v.size());
  for (size_t i = 0; i < v.size(); ++i)
    out[static_cast<int>(i)] = asNumber(v[i], path + "[" + std::to_string(i) + "]");
  return out;
}

inline Eigen::MatrixXd asMatrix(const ordered_json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of rows");
  Eigen::MatrixXd out;
  for (size_t i = 0; i < v.size(); ++i) {
    const Eigen::VectorXd row = asVector(v[i], path + "[" + std::to_string(i) + "]");
    if (i == 0)
      out.resize(v.size(), row.size());
    else if (row.size() != out.cols())
      fail(path, "rows have inconsistent lengths");
    out.row(static_cast<int>(i)) = row.transpose();
  }
  return out;
}

inline void parseSampler(const ordered_json& j, const std::string& path, SamplerConfig* cfg) {
  requireKeys(j, path,
              {"totalTime", "burnInFraction", "sampleCount", "refreshRate", "kernel", "seed",
               "chains", "workers", "adaptStandardization", "initial", "initialMomentum",
               "absTol", "relTol", "hInit", "hMin", "hMax", "maxEventsPerUnitTime",
               "recordEvents", "recordTrace"});
  const auto has = [&](const char* k) { return j.contains(k); };
  if (has("totalTime")) cfg->totalTime = asNumber(j["totalTime"], path + ".totalTime");
  if (has("burnInFraction"))
    cfg->burnInFraction = asNumber(j["burnInFraction"], path + ".burnInFraction");
  if (has("sampleCount"))
    cfg->sampleCount = static_cast<int>(asInteger(j["sampleCount"], path + ".sampleCount"));
  if (has("refreshRate")) cfg->refreshRate = asNumber(j["refreshRate"], path + ".refreshRate");
  if (has("kernel")) {
    const std::string name = asString(j["kernel"], path + ".kernel");
    try {
      cfg->kernel = parseKernel(name);
    } catch (const Error& e) {
      fail(path + ".kernel", e.what());
    }
  }
  if (has("seed")) {
    const long s = asInteger(j["seed"], path + ".seed");
    if (s < 0) fail(path + ".seed", "must be nonnegative");
    cfg->seed = static_cast<std::uint64_t>(s);
  }
  if (has("chains")) cfg->chains = static_cast<int>(asInteger(j["chains"], path + ".chains"));
  if (has("workers")) cfg->workers = static_cast<int>(asInteger(j["workers"], path + ".workers"));
  if (has("adaptStandardization"))
    cfg->adaptStandardization = asBool(j["adaptStandardization"], path + ".adaptStandardization");
  if (has("initial")) cfg->initial = asVector(j["initial"], path + ".initial");
  if (has("initialMomentum"))
    cfg->initialMomentum = asVector(j["initialMomentum"], path + ".initialMomentum");
  if (has("absTol")) cfg->control.absTol = asNumber(j["absTol"], path + ".absTol");
  if (has("relTol")) cfg->control.relTol = asNumber(j["relTol"], path + ".relTol");
  if (has("hInit")) cfg->control.hInit = asNumber(j["hInit"], path + ".hInit");
  if (has("hMin")) cfg->control.hMin = asNumber(j["hMin"], path + ".hMin");
  if (has("hMax")) cfg->control.hMax = asNumber(j["hMax"], path + ".hMax");
  if (has("maxEventsPerUnitTime"))
    cfg->maxEventsPerUnitTime = asNumber(j["maxEventsPerUnitTime"], path + ".maxEventsPerUnitTime");
  if (has("recordEvents")) cfg->recordEvents = asBool(j["recordEvents"], path + ".recordEvents");
  if (has("recordTrace")) cfg->recordTrace = asBool(j["recordTrace"], path + ".recordTrace");
}

inline Constraint parseConstraint(const ordered_json& j, const std::string& path) {
  requireKeys(j, path, {"type", "a", "b", "A", "v"});
  if (!j.contains("type")) fail(path + ".type", "required");
  const std::string type = asString(j["type"], path + ".type");
  try {
    if (type == "linear") {
      if (!j.contains("a")) fail(path + ".a", "required for linear constraints");
      const double b = j.contains("b") ? asNumber(j["b"], path + ".b") : 0.0;
      return Constraint::linear(asVector(j["a"], path + ".a"), b);
    }
    if (type == "l1" || type == "l2") {
      if (!j.contains("A")) fail(path + ".A", "required for norm constraints");
      if (!j.contains("v")) fail(path + ".v", "required for norm constraints");
      const Eigen::MatrixXd A = asMatrix(j["A"], path + ".A");
      Eigen::VectorXd b = Eigen::VectorXd::Zero(A.rows());
      if (j.contains("b")) b = asVector(j["b"], path + ".b");
      if (b.size() != A.rows()) fail(path + ".b", "length must match the rows of A");
      const double v = asNumber(j["v"], path + ".v");
      Eigen::SparseMatrix<double> As = A.sparseView();
      return type == "l1" ? Constraint::l1Norm(As, b, v) : Constraint::l2Norm(As, b, v);
    }
  } catch (const ConfigError& e) {
    fail(path, e.what());
  }
  fail(path + ".type", "expected one of: linear, l1, l2 (nonlinear shapes are catalog-only)");
}

}  // namespace config_detail

inline RunConfig parseRunConfig(const nlohmann::ordered_json& j) {
  using namespace config_detail;
  RunConfig cfg;
  requireKeys(j, "config",
              {"schema", "model", "constraints", "sampler", "output", "formats", "emitEventLog",
               "emitDenseTrace"});
  if (!j.contains("schema")) fail("schema", "required");
  if (asInteger(j["schema"], "schema") != 1) fail("schema", "unsupported version (expected 1)");
  if (!j.contains("model")) fail("model", "required");

  const auto& model = j["model"];
  if (model.is_string()) {
    cfg.modelName = model.get<std::string>();
    cfg.inlineModel = false;
    if (j.contains("constraints"))
      fail("constraints", "only allowed with an inline model; catalog entries fix their own");
  } else if (model.is_object()) {
    requireKeys(model, "model", {"type", "mean", "cov"});
    if (!model.contains("type") || asString(model["type"], "model.type") != "gaussian")
      fail("model.type", "inline models must have type 'gaussian'");
    if (!model.contains("mean")) fail("model.mean", "required");
    cfg.inlineMean = asVector(model["mean"], "model.mean");
    const int d = static_cast<int>(cfg.inlineMean.size());
    if (d == 0) fail("model.mean", "must be non-empty");
    if (model.contains("cov")) {
      cfg.inlineCov = asMatrix(model["cov"], "model.cov");
      if (cfg.inlineCov.rows() != d || cfg.inlineCov.cols() != d)
        fail("model.cov", "must be square with the dimension of the mean");
    } else {
      cfg.inlineCov = Eigen::MatrixXd::Identity(d, d);
    }
    cfg.modelName = "inline-gaussian";
    cfg.inlineModel = true;
    if (j.contains("constraints")) {
      if (!j["constraints"].is_array()) fail("constraints", "expected an array");
      cfg.constraintsJson = j["constraints"];
    }
  } else {
    fail("model", "expected a catalog name or an inline model object");
  }
  cfg.modelJson = model;

  if (j.contains("sampler")) parseSampler(j["sampler"], "sampler", &cfg.sampler);
  if (j.contains("output")) cfg.output.directory = asString(j["output"], "output");
  if (j.contains("formats")) {
    if (!j["formats"].is_array()) fail("formats", "expected an array");
    cfg.output.csv = cfg.output.json = false;
    for (size_t i = 0; i < j["formats"].size(); ++i) {
      const std::string f =
          asString(j["formats"][i], "formats[" + std::to_string(i) + "]");
      if (f == "csv")
        cfg.output.csv = true;
      else if (f == "json")
        cfg.output.json = true;
      else
        fail("formats[" + std::to_string(i) + "]", "expected 'csv' or 'json'");
    }
  }
  if (j.contains("emitEventLog"))
    cfg.output.emitEventLog = asBool(j["emitEventLog"], "emitEventLog");
  if (j.contains("emitDenseTrace"))
    cfg.output.emitDenseTrace = asBool(j["emitDenseTrace"], "emitDenseTrace");
  cfg.sampler.recordEvents = cfg.sampler.recordEvents || cfg.output.emitEventLog;
  cfg.sampler.recordTrace = cfg.sampler.recordTrace || cfg.output.emitDenseTrace;
  return cfg;
}

inline RunConfig loadRunConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config parse error in '" + path + "': " + e.what());
  }
  return parseRunConfig(j);
}

/* The fully-specified echo of a parsed config: feeding it back through
   parseRunConfig reproduces the run. */
inline nlohmann::ordered_json serializeConfig(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["schema"] = 1;
  j["model"] = cfg.modelJson;
  if (cfg.inlineModel && !cfg.constraintsJson.is_null()) j["constraints"] = cfg.constraintsJson;
  nlohmann::ordered_json s;
  s["totalTime"] = cfg.sampler.totalTime;
  s["burnInFraction"] = cfg.sampler.burnInFraction;
  s["sampleCount"] = cfg.sampler.sampleCount;
  s["refreshRate"] = cfg.sampler.refreshRate;
  s["kernel"] = kernelName(cfg.sampler.kernel);
  s["seed"] = cfg.sampler.seed;
  s["chains"] = cfg.sampler.chains;
  s["workers"] = cfg.sampler.workers;
  s["adaptStandardization"] = cfg.sampler.adaptStandardization;
  if (cfg.sampler.initial.size() > 0)
    s["initial"] = std::vector<double>(cfg.sampler.initial.begin(), cfg.sampler.initial.end());
  if (cfg.sampler.initialMomentum.size() > 0)
    s["initialMomentum"] = std::vector<double>(cfg.sampler.initialMomentum.begin(),
                                               cfg.sampler.initialMomentum.end());
  s["absTol"] = cfg.sampler.control.absTol;
  s["relTol"] = cfg.sampler.control.relTol;
  s["hInit"] = cfg.sampler.control.hInit;
  s["hMin"] = cfg.sampler.control.hMin;
  s["hMax"] = cfg.sampler.control.hMax;
  s["maxEventsPerUnitTime"] = cfg.sampler.maxEventsPerUnitTime;
  j["sampler"] = s;
  j["output"] = cfg.output.directory;
  std::vector<std::string> formats;
  if (cfg.output.csv) formats.push_back("csv");
  if (cfg.output.json) formats.push_back("json");
  j["formats"] = formats;
  j["emitEventLog"] = cfg.output.emitEventLog;
  j["emitDenseTrace"] = cfg.output.emitDenseTrace;
  return j;
}

/* Catalog lookup, or an ExampleModel assembled from the inline Gaussian. */
inline ExampleModel materializeModel(const RunConfig& cfg) {
  if (!cfg.inlineModel) return buildExample(cfg.modelName);
  ExampleModel ex;
  ex.name = cfg.modelName;
  ex.description = "inline Gaussian model from the run config";
  const int d = static_cast<int>(cfg.inlineMean.size());
  Eigen::LLT<Eigen::MatrixXd> llt(cfg.inlineCov);
  if (llt.info() != Eigen::Success)
    throw ConfigError("config field 'model.cov': not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();
  const Eigen::VectorXd mean = cfg.inlineMean;
  const Eigen::MatrixXd cov = cfg.inlineCov;
  ex.model.dim = d;
  ex.model.logDensity = [mean, llt](const Eigen::VectorXd& q) {
    const Eigen::VectorXd r = q - mean;
    return -0.5 * r.dot(llt.solve(r));
  };
  ex.model.gradLogDensity = [mean, llt](const Eigen::VectorXd& q) {
    return Eigen::VectorXd(-llt.solve(q - mean));
  };
  catalog_detail::addCoordinateMonitors(ex.model, d, true, d == 2);
  if (!cfg.constraintsJson.is_null())
    for (size_t i = 0; i < cfg.constraintsJson.size(); ++i) {
      Constraint c = config_detail::parseConstraint(cfg.constraintsJson[i],
                                                    "constraints[" + std::to_string(i) + "]");
      if (c.inputDim() != d)
        config_detail::fail("constraints[" + std::to_string(i) + "]",
                            "dimension does not match the model");
      ex.constraints.push_back(std::move(c));
    }
  ex.exactSampler = [mean, L](Rng& rng) {
    return Eigen::VectorXd(mean + L * rng.normalVector(mean.size()));
  };
  if (satisfiesAll(ex.constraints, mean)) ex.feasiblePoint = mean;
  return ex;
}

}  // namespace ngrhmc
