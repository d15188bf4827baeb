#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ngrhmc/errors.hpp"

namespace ngrhmc {

using LogDensityFn = std::function<double(const Eigen::VectorXd&)>;
using GradientFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using MonitorFn = std::function<double(const Eigen::VectorXd&)>;

/* Unnormalized log target with gradient, plus the monitor functions whose
   time integrals the sampler accumulates. Monitors are always evaluated in
   original (unstandardized) coordinates. */
struct TargetModel {
  int dim = 0;
  LogDensityFn logDensity;
  GradientFn gradLogDensity;  // empty: fall back to finite differences
  std::vector<MonitorFn> monitors;
  std::vector<std::string> monitorNames;

  int monitorCount() const { return static_cast<int>(monitors.size()); }
};

/* Affine change of coordinates q = m + S qbar with diagonal positive S.
   The dynamics run in qbar; models and monitors see q. */
struct Standardization {
  Eigen::VectorXd location;  // m
  Eigen::VectorXd scale;     // diagonal of S, all > 0

  static Standardization identity(int dim) {
    return {Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim)};
  }

  int dim() const { return static_cast<int>(location.size()); }

  Eigen::VectorXd map(const Eigen::VectorXd& qbar) const {
    return location + scale.cwiseProduct(qbar);
  }

  Eigen::VectorXd unmap(const Eigen::VectorXd& q) const {
    return (q - location).cwiseQuotient(scale);
  }
};

// central differences, step tuned per coordinate; meant for tests and as a
// fallback when a model supplies no analytic gradient
inline Eigen::VectorXd finiteDifferenceGradient(const LogDensityFn& f,
                                                const Eigen::VectorXd& q) {
  const int d = static_cast<int>(q.size());
  Eigen::VectorXd g(d), x = q;
  for (int i = 0; i < d; ++i) {
    const double h = std::cbrt(2.2e-16) * std::max(1.0, std::abs(q[i]));
    x[i] = q[i] + h;
    const double fp = f(x);
    x[i] = q[i] - h;
    const double fm = f(x);
    x[i] = q[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

/* Log density and gradient of the standardized target at qbar. The Jacobian
   of q = m + S qbar is constant, so it shifts the log density by a constant
   we can drop and leaves the chain rule as a plain componentwise scaling:
   grad_qbar = S * grad_q. */
inline std::pair<double, Eigen::VectorXd> standardizedLogGrad(
    const TargetModel& model, const Standardization& s, const Eigen::VectorXd& qbar) {
  const Eigen::VectorXd q = s.map(qbar);
  const double value = model.logDensity(q);
  Eigen::VectorXd g =
      model.gradLogDensity ? model.gradLogDensity(q) : finiteDifferenceGradient(model.logDensity, q);
  g = s.scale.cwiseProduct(g);
  if (!std::isfinite(value) || !g.allFinite()) {
    std::string where = "(";
    for (int i = 0; i < q.size(); ++i)
      where += (i ? ", " : "") + std::to_string(q[i]);
    throw NonFiniteEvaluation("log density or gradient non-finite at q = " + where + ")");
  }
  return {value, std::move(g)};
}

/* Welford accumulator for the burn-in re-standardization: one pass over the
   burn-in samples, then (m, S) = (mean, sd) with the scale floored. */
class RunningMoments {
 public:
  explicit RunningMoments(int dim)
      : mean_(Eigen::VectorXd::Zero(dim)), m2_(Eigen::VectorXd::Zero(dim)) {}

  void update(const Eigen::VectorXd& q) {
    ++count_;
    const Eigen::VectorXd delta = q - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta.cwiseProduct(q - mean_);
  }

  long count() const { return count_; }
  const Eigen::VectorXd& mean() const { return mean_; }

  Eigen::VectorXd sampleVariance() const {
    if (count_ < 2) return Eigen::VectorXd::Zero(mean_.size());
    return m2_ / static_cast<double>(count_ - 1);
  }

  Standardization toStandardization(double scaleFloor = 1e-8) const {
    Standardization s{mean_, sampleVariance().cwiseSqrt()};
    for (int i = 0; i < s.scale.size(); ++i) s.scale[i] = std::max(s.scale[i], scaleFloor);
    return s;
  }

 private:
  long count_ = 0;
  Eigen::VectorXd mean_, m2_;
};

}  // namespace ngrhmc
