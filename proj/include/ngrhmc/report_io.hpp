#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "ngrhmc/diagnostics.hpp"
#include "ngrhmc/errors.hpp"
#include "ngrhmc/oracles.hpp"
#include "ngrhmc/run_config.hpp"
#include "ngrhmc/sampler.hpp"

namespace ngrhmc {

// round-trip-safe decimal form; CSV cells and JSON sentinels share it
inline std::string formatDouble(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// JSON forbids bare non-finite literals, so those become strings
inline nlohmann::ordered_json jsonNumber(double x) {
  if (std::isfinite(x)) return x;
  return formatDouble(x);
}

inline std::ofstream openOutputFile(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open output file '" + path + "'");
  return out;
}

inline void writeSamplesCsv(const std::string& path,
                            const std::vector<TrajectoryOutput>& chains, int dim) {
  std::ofstream out = openOutputFile(path);
  out << "chain,index";
  for (int j = 0; j < dim; ++j) out << ",q" << j + 1;
  out << "\n";
  for (size_t c = 0; c < chains.size(); ++c)
    for (int i = 0; i < chains[c].samples.rows(); ++i) {
      out << c << "," << i;
      for (int j = 0; j < dim; ++j) out << "," << formatDouble(chains[c].samples(i, j));
      out << "\n";
    }
}

inline void writeEventsCsv(const std::string& path,
                           const std::vector<TrajectoryOutput>& chains, int dim) {
  std::ofstream out = openOutputFile(path);
  out << "chain,time,kind,constraint";
  for (int j = 0; j < dim; ++j) out << ",q" << j + 1;
  out << "\n";
  for (size_t c = 0; c < chains.size(); ++c)
    for (const EventRecord& e : chains[c].events) {
      out << c << "," << formatDouble(e.time) << ","
          << (e.kind == EventKind::Refresh ? "refresh" : "collision") << ","
          << e.constraintIndex;
      for (int j = 0; j < dim; ++j) out << "," << formatDouble(e.q[j]);
      out << "\n";
    }
}

inline void writeTraceCsv(const std::string& path,
                          const std::vector<TrajectoryOutput>& chains, int dim) {
  std::ofstream out = openOutputFile(path);
  out << "chain,time";
  for (int j = 0; j < dim; ++j) out << ",q" << j + 1;
  out << "\n";
  for (size_t c = 0; c < chains.size(); ++c)
    for (int i = 0; i < chains[c].trace.rows(); ++i) {
      out << c;
      for (int j = 0; j < chains[c].trace.cols(); ++j)
        out << "," << formatDouble(chains[c].trace(i, j));
      out << "\n";
    }
}

inline void writeDatasetCsv(const std::string& path, const Eigen::MatrixXd& data,
                            const std::vector<std::string>& columns) {
  std::ofstream out = openOutputFile(path);
  for (size_t j = 0; j < columns.size(); ++j) out << (j ? "," : "") << columns[j];
  out << "\n";
  for (int i = 0; i < data.rows(); ++i) {
    for (int j = 0; j < data.cols(); ++j) out << (j ? "," : "") << formatDouble(data(i, j));
    out << "\n";
  }
}

/* Per-monitor summaries across chains: per-chain series are the monitor
   evaluated on each discrete sample, per-chain scalars are the
   time-integrated averages. */
struct MonitorSummary {
  std::string name;
  ChainStats stats;
};

inline std::vector<MonitorSummary> summarizeRun(const TargetModel& model,
                                                const std::vector<TrajectoryOutput>& chains) {
  std::vector<MonitorSummary> out;
  double totalSampling = 0.0;
  for (const auto& c : chains) totalSampling += c.samplingSeconds;
  for (int k = 0; k < model.monitorCount(); ++k) {
    std::vector<Eigen::VectorXd> series(chains.size());
    std::vector<double> timeAvgs(chains.size());
    for (size_t c = 0; c < chains.size(); ++c) {
      const auto& S = chains[c].samples;
      Eigen::VectorXd v(S.rows());
      for (int i = 0; i < S.rows(); ++i) v[i] = model.monitors[k](S.row(i).transpose());
      series[c] = std::move(v);
      timeAvgs[c] = chains[c].timeAverages[k];
    }
    MonitorSummary ms;
    ms.name = model.monitorNames[k];
    ms.stats = summarizeMonitor(series, timeAvgs, totalSampling);
    out.push_back(std::move(ms));
  }
  return out;
}

/* The run report. Everything derived from wall-clock time lives under the
   single "timing" key so determinism checks can delete that one subtree and
   byte-compare the rest. */
inline nlohmann::ordered_json buildReport(const RunConfig& cfg, const ExampleModel& example,
                                          const std::vector<TrajectoryOutput>& chains,
                                          const std::vector<MonitorSummary>& summaries,
                                          double totalWallSeconds) {
  using nlohmann::ordered_json;
  ordered_json rep;
  rep["schema"] = 1;
  rep["example"] = example.name;
  rep["dim"] = example.model.dim;
  rep["seed"] = cfg.sampler.seed;
  rep["config"] = serializeConfig(cfg);

  ordered_json chainArr = ordered_json::array();
  long totalRefresh = 0, totalCollision = 0, totalAccepted = 0, totalRejected = 0;
  for (size_t c = 0; c < chains.size(); ++c) {
    const auto& t = chains[c];
    ordered_json jc;
    jc["chain"] = c;
    jc["refreshes"] = t.refreshCount;
    jc["collisions"] = t.collisionCount;
    jc["collisionsPerConstraint"] = t.collisionsPerConstraint;
    jc["acceptedSteps"] = t.acceptedSteps;
    jc["rejectedSteps"] = t.rejectedSteps;
    jc["cornerRetries"] = t.cornerRetries;
    std::vector<double> ta(t.timeAverages.begin(), t.timeAverages.end());
    jc["timeAverages"] = ta;
    jc["standardization"] = {
        {"location", std::vector<double>(t.standardization.location.begin(),
                                         t.standardization.location.end())},
        {"scale", std::vector<double>(t.standardization.scale.begin(),
                                      t.standardization.scale.end())}};
    chainArr.push_back(std::move(jc));
    totalRefresh += t.refreshCount;
    totalCollision += t.collisionCount;
    totalAccepted += t.acceptedSteps;
    totalRejected += t.rejectedSteps;
  }
  rep["chains"] = std::move(chainArr);
  rep["totals"] = {{"refreshes", totalRefresh},
                   {"collisions", totalCollision},
                   {"acceptedSteps", totalAccepted},
                   {"rejectedSteps", totalRejected}};

  ordered_json monitors;
  for (const auto& ms : summaries) {
    ordered_json m;
    m["meanDiscrete"] = jsonNumber(ms.stats.discreteMean);
    m["meanTimeAverage"] = jsonNumber(ms.stats.timeAverage);
    m["ess"] = jsonNumber(ms.stats.ess);
    m["rhat"] = jsonNumber(ms.stats.rhat);
    m["mcsdDiscrete"] = jsonNumber(ms.stats.mcsdDiscrete);
    m["mcsdTimeAverage"] = jsonNumber(ms.stats.mcsdContinuous);
    ordered_json q;
    for (const auto& [level, value] : ms.stats.quantiles) {
      char key[16];
      std::snprintf(key, sizeof(key), "q%02d", static_cast<int>(std::lround(level * 100.0)));
      q[key] = jsonNumber(value);
    }
    m["quantiles"] = std::move(q);
    monitors[ms.name] = std::move(m);
  }
  rep["monitors"] = std::move(monitors);

  ordered_json timing;
  std::vector<double> burn, samp;
  for (const auto& t : chains) {
    burn.push_back(t.burnInSeconds);
    samp.push_back(t.samplingSeconds);
  }
  timing["burnInSeconds"] = burn;
  timing["samplingSeconds"] = samp;
  timing["totalWallSeconds"] = totalWallSeconds;
  ordered_json essRate;
  for (const auto& ms : summaries) essRate[ms.name] = jsonNumber(ms.stats.essPerSecond);
  timing["essPerSecond"] = std::move(essRate);
  rep["timing"] = std::move(timing);
  return rep;
}

inline void writeReport(const std::string& path, const nlohmann::ordered_json& report) {
  std::ofstream out = openOutputFile(path);
  out << report.dump(2) << "\n";
}

}  // namespace ngrhmc
