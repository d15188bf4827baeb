#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ngrhmc/constraints.hpp"
#include "ngrhmc/errors.hpp"
#include "ngrhmc/rng.hpp"
#include "ngrhmc/sampler.hpp"
#include "ngrhmc/target.hpp"

namespace ngrhmc {

/* Reference moments with a note saying where they come from. Only attached
   to catalog entries whose moments follow from a closed form or a documented
   oracle run. */
struct KnownMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  std::string provenance;
};

/* A ready-to-run model: target, constraints, a strictly feasible start, and
   optional verification hooks (exact unconstrained sampler, reference
   moments, an unconstrained reparametrized twin, embedded synthetic data). */
struct ExampleModel {
  std::string name;
  std::string description;
  TargetModel model;
  std::vector<Constraint> constraints;
  Eigen::VectorXd feasiblePoint;
  std::function<Eigen::VectorXd(Rng&)> exactSampler;  // unconstrained draw; may be empty
  std::optional<KnownMoments> knownMoments;
  std::shared_ptr<ExampleModel> transformedTwin;  // unconstrained change of variables
  Eigen::MatrixXd dataset;                        // rows = observations; 0x0 when none
  std::vector<std::string> datasetColumns;
};

/* Mean and variance of a normal truncated to [lo, inf). Uses the hazard
   function h = phi(a)/(1 - Phi(a)) at the standardized cut a = (lo-mu)/sigma;
   far in the upper tail both phi and 1-Phi underflow, so beyond a = 8 the
   hazard is evaluated through the asymptotic series of the Mills ratio
   1/h ~ (1/a)(1 - 1/a^2 + 3/a^4 - 15/a^6 + 105/a^8). Pass lo = -infinity for
   the untruncated moments. */
inline std::pair<double, double> truncatedNormalMoments(double mu, double sigma, double lo) {
  if (!(sigma > 0.0)) throw Error("truncatedNormalMoments: sigma must be positive");
  if (std::isinf(lo) && lo < 0.0) return {mu, sigma * sigma};
  if (!std::isfinite(lo) || !std::isfinite(mu)) throw Error("truncatedNormalMoments: non-finite bound");
  const double a = (lo - mu) / sigma;
  double h;
  if (a <= 8.0) {
    const double kInvSqrt2Pi = 0.3989422804014327;
    const double phi = kInvSqrt2Pi * std::exp(-0.5 * a * a);
    const double tail = 0.5 * std::erfc(a / std::sqrt(2.0));
    h = phi / tail;
  } else {
    const double a2 = a * a;
    const double mills = (1.0 / a) * (1.0 - 1.0 / a2 + 3.0 / (a2 * a2) - 15.0 / (a2 * a2 * a2) +
                                      105.0 / (a2 * a2 * a2 * a2));
    h = 1.0 / mills;
  }
  const double mean = mu + sigma * h;
  const double var = sigma * sigma * (1.0 + a * h - h * h);
  return {mean, var};
}

struct RejectionResult {
  Eigen::MatrixXd samples;  // accepted x dim
  double acceptanceRate = 0.0;
  long proposals = 0;
};

inline bool satisfiesAll(const std::vector<Constraint>& constraints, const Eigen::VectorXd& q) {
  for (const auto& c : constraints)
    if (!(c.evaluate(q) > 0.0)) return false;
  return true;
}

/* Brute-force ground truth: draw from the unconstrained model and keep the
   draws inside the feasible region. Exact-sampler entries propose iid draws;
   everything else falls back to discrete samples from an unconstrained
   sampler run, which are correlated but leave the accepted distribution
   untouched. Refuses (rather than misleads) when almost nothing lands inside. */
inline RejectionResult rejectionSample(const ExampleModel& example, long proposalCount, Rng& rng) {
  if (proposalCount <= 0) throw Error("rejectionSample: proposalCount must be positive");
  const int d = example.model.dim;
  std::vector<Eigen::VectorXd> kept;
  long made = 0;
  if (example.exactSampler) {
    for (long i = 0; i < proposalCount; ++i) {
      Eigen::VectorXd q = example.exactSampler(rng);
      ++made;
      if (satisfiesAll(example.constraints, q)) kept.push_back(std::move(q));
    }
  } else {
    SamplerConfig cfg;
    cfg.totalTime = 2000.0;
    cfg.burnInFraction = 0.25;
    cfg.sampleCount = static_cast<int>(std::min<long>(proposalCount, 2000000L));
    cfg.chains = 1;
    cfg.seed = rng.nextU64() | 1ull;
    cfg.initial = example.feasiblePoint;
    TrajectoryOutput out = runTrajectory(example.model, {}, cfg, 0);
    for (int i = 0; i < out.samples.rows(); ++i) {
      Eigen::VectorXd q = out.samples.row(i).transpose();
      ++made;
      if (satisfiesAll(example.constraints, q)) kept.push_back(std::move(q));
    }
  }
  const double rate = made > 0 ? static_cast<double>(kept.size()) / static_cast<double>(made) : 0.0;
  if (rate < 1e-5)
    throw OracleInfeasible("rejection oracle for '" + example.name +
                           "': acceptance rate " + std::to_string(rate) + " below 1e-5");
  RejectionResult res;
  res.samples.resize(static_cast<int>(kept.size()), d);
  for (int i = 0; i < static_cast<int>(kept.size()); ++i) res.samples.row(i) = kept[i].transpose();
  res.acceptanceRate = rate;
  res.proposals = made;
  return res;
}

}  // namespace ngrhmc
