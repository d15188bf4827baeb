#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "ngrhmc/errors.hpp"

namespace ngrhmc {

/* Effective sample size of one series by Geyer's initial monotone positive
   sequence: autocorrelations summed in consecutive pairs until a pair goes
   nonpositive, each pair capped by its predecessor. The result is clamped to
   (0, N]; antithetic series whose raw estimate exceeds N report N. */
inline double essGeyer(const Eigen::VectorXd& x) {
  const long n = x.size();
  if (n < 10) throw Error("essGeyer needs at least 10 samples, got " + std::to_string(n));
  const Eigen::VectorXd c = x.array() - x.mean();
  const double g0 = c.squaredNorm() / static_cast<double>(n);
  if (g0 <= 0.0) return static_cast<double>(n);  // constant series

  const auto gamma = [&](long k) {
    double s = 0.0;
    for (long i = 0; i + k < n; ++i) s += c[i] * c[i + k];
    return s / static_cast<double>(n);
  };

  double pairSum = 0.0;
  double prevPair = std::numeric_limits<double>::infinity();
  for (long m = 0; 2 * m + 1 < n; ++m) {
    double pair = (gamma(2 * m) + gamma(2 * m + 1)) / g0;
    if (pair <= 0.0) break;
    pair = std::min(pair, prevPair);
    prevPair = pair;
    pairSum += pair;
  }
  const double tau = -1.0 + 2.0 * pairSum;
  if (tau <= 0.0) return static_cast<double>(n);
  return std::min(static_cast<double>(n), static_cast<double>(n) / tau);
}

/* Split-Rhat: each chain halved, classic between/within variance ratio on
   the half-sequences. 1 means mixed; identical constant chains are defined
   as 1, distinct constant chains as +infinity. */
inline double splitRhat(const std::vector<Eigen::VectorXd>& chains) {
  if (chains.empty()) throw Error("splitRhat needs at least one chain");
  std::vector<Eigen::VectorXd> halves;
  for (const auto& ch : chains) {
    const long n = ch.size() / 2;
    if (n < 2) throw Error("splitRhat needs chains of length >= 4");
    halves.push_back(ch.head(n));
    halves.push_back(ch.tail(n));
  }
  const double m = static_cast<double>(halves.size());
  const double n = static_cast<double>(halves.front().size());

  double meanOfMeans = 0.0;
  std::vector<double> means;
  for (const auto& h : halves) {
    means.push_back(h.mean());
    meanOfMeans += means.back();
  }
  meanOfMeans /= m;

  double between = 0.0, within = 0.0;
  for (std::size_t j = 0; j < halves.size(); ++j) {
    between += (means[j] - meanOfMeans) * (means[j] - meanOfMeans);
    within += (halves[j].array() - means[j]).square().sum() / (n - 1.0);
  }
  between *= n / (m - 1.0);
  within /= m;

  if (within <= 0.0) return between <= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  const double varPlus = (n - 1.0) / n * within + between / n;
  return std::sqrt(varPlus / within);
}

// Monte Carlo standard deviation: sample sd across per-chain estimates
inline double mcsd(const std::vector<double>& estimates) {
  const std::size_t m = estimates.size();
  if (m < 2) return 0.0;
  double mean = 0.0;
  for (double e : estimates) mean += e;
  mean /= static_cast<double>(m);
  double acc = 0.0;
  for (double e : estimates) acc += (e - mean) * (e - mean);
  return std::sqrt(acc / static_cast<double>(m - 1));
}

// linear-interpolation quantile of an unsorted series (the common "type 7")
inline double quantile(Eigen::VectorXd series, double level) {
  std::sort(series.data(), series.data() + series.size());
  const double h = level * static_cast<double>(series.size() - 1);
  const long lo = static_cast<long>(std::floor(h));
  const long hi = std::min<long>(lo + 1, series.size() - 1);
  return series[lo] + (h - static_cast<double>(lo)) * (series[hi] - series[lo]);
}

struct ChainStats {
  double discreteMean = 0.0;   // pooled mean of the discrete samples
  double timeAverage = 0.0;    // pooled continuous-time estimate
  double ess = 0.0;            // summed over chains
  double essPerSecond = 0.0;
  double rhat = 1.0;
  double mcsdDiscrete = 0.0;   // spread of per-chain discrete means
  double mcsdContinuous = 0.0; // spread of per-chain time averages
  std::vector<std::pair<double, double>> quantiles;
};

inline ChainStats summarizeMonitor(const std::vector<Eigen::VectorXd>& chainSeries,
                                   const std::vector<double>& chainTimeAverages,
                                   double totalSamplingSeconds,
                                   const std::vector<double>& quantileLevels = {0.05, 0.25, 0.5,
                                                                                0.75, 0.95}) {
  ChainStats st;
  const std::size_t m = chainSeries.size();
  std::vector<double> discreteMeans;
  long total = 0;
  for (const auto& s : chainSeries) {
    discreteMeans.push_back(s.mean());
    st.discreteMean += s.sum();
    st.ess += essGeyer(s);
    total += s.size();
  }
  st.discreteMean /= static_cast<double>(total);
  for (double v : chainTimeAverages) st.timeAverage += v;
  st.timeAverage /= static_cast<double>(chainTimeAverages.size());
  st.essPerSecond = totalSamplingSeconds > 0.0 ? st.ess / totalSamplingSeconds : 0.0;
  st.rhat = m >= 1 ? splitRhat(chainSeries) : 1.0;
  st.mcsdDiscrete = mcsd(discreteMeans);
  st.mcsdContinuous = mcsd(chainTimeAverages);

  Eigen::VectorXd pooled(total);
  long at = 0;
  for (const auto& s : chainSeries) {
    pooled.segment(at, s.size()) = s;
    at += s.size();
  }
  for (double level : quantileLevels) st.quantiles.emplace_back(level, quantile(pooled, level));
  return st;
}

}  // namespace ngrhmc
