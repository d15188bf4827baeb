#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "ngrhmc/errors.hpp"
#include "ngrhmc/polysolve.hpp"
#include "ngrhmc/target.hpp"

namespace ngrhmc {

/* The ODE state is one flat vector: positions, momenta, the running refresh
   integral, then one slot per monitor integral. */
struct StateLayout {
  int dim = 0;
  int monitorCount = 0;

  int size() const { return 2 * dim + 1 + monitorCount; }
  int positionStart() const { return 0; }
  int momentumStart() const { return dim; }
  int refreshIndex() const { return 2 * dim; }
  int monitorStart() const { return 2 * dim + 1; }
};

struct StepControl {
  double absTol = 1e-4;
  double relTol = 1e-4;
  double hInit = 0.1;
  double hMin = 1e-10;
  double hMax = 10.0;
  double safety = 0.9;
};

/* One accepted step: endpoint states and derivatives, evaluated anywhere
   inside via the cubic Hermite interpolant. Factored basis polynomials make
   eval() reproduce the stored endpoints bitwise. */
struct DenseStep {
  double t0 = 0.0, t1 = 0.0;
  Eigen::VectorXd y0, y1, f0, f1;

  double width() const { return t1 - t0; }

  Eigen::VectorXd eval(double t) const {
    checkRange(t);
    if (t == t0) return y0;
    if (t == t1) return y1;
    const double h = width();
    const double th = (t - t0) / h;
    const double om = (t1 - t) / h;
    return (om * om * (1.0 + 2.0 * th)) * y0 + (h * th * om * om) * f0 +
           (th * th * (1.0 + 2.0 * om)) * y1 - (h * th * th * om) * f1;
  }

  double evalComponent(int i, double t) const {
    checkRange(t);
    if (t == t0) return y0[i];
    if (t == t1) return y1[i];
    const double h = width();
    const double th = (t - t0) / h;
    const double om = (t1 - t) / h;
    return om * om * (1.0 + 2.0 * th) * y0[i] + h * th * om * om * f0[i] +
           th * th * (1.0 + 2.0 * om) * y1[i] - h * th * th * om * f1[i];
  }

  /* The interpolant of any fixed linear functional of the state is a cubic in
     the step-local coordinate theta in [0,1]. Returned in monomial form for
     the event root searches. */
  Poly componentCubic(int i) const {
    return hermiteCubic(y0[i], y1[i], width() * f0[i], width() * f1[i], 0.0);
  }

  Poly functionalCubic(const std::vector<int>& idx, const std::vector<double>& w,
                       double offset) const {
    double v0 = 0.0, v1 = 0.0, d0 = 0.0, d1 = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      v0 += w[k] * y0[idx[k]];
      v1 += w[k] * y1[idx[k]];
      d0 += w[k] * f0[idx[k]];
      d1 += w[k] * f1[idx[k]];
    }
    const double h = width();
    return hermiteCubic(v0, v1, h * d0, h * d1, offset);
  }

 private:
  static Poly hermiteCubic(double v0, double v1, double s0, double s1, double offset) {
    // value/scaled-slope data at theta = 0, 1
    return Poly({v0 + offset, s0, 3.0 * (v1 - v0) - 2.0 * s0 - s1,
                 2.0 * (v0 - v1) + s0 + s1});
  }

  void checkRange(double t) const {
    if (t < t0 || t > t1)
      throw OutOfStepRange("dense evaluation at t = " + std::to_string(t) +
                           " outside [" + std::to_string(t0) + ", " + std::to_string(t1) + "]");
  }
};

/* Hamiltonian flow of the standardized target, with the refresh intensity and
   monitor integrands carried as extra quadrature components so truncation at
   events can reuse the same dense output. */
class HamiltonianSystem {
 public:
  HamiltonianSystem(const TargetModel& model, const Standardization& s, double refreshRate)
      : model_(&model), std_(&s), rate_(refreshRate), layout_{model.dim, model.monitorCount()} {}

  const StateLayout& layout() const { return layout_; }
  void setStandardization(const Standardization& s) { std_ = &s; }
  long gradientEvals() const { return evals_; }

  bool rhs(const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    ++evals_;
    const int d = layout_.dim;
    const Eigen::VectorXd q = std_->map(y.head(d));
    Eigen::VectorXd g = model_->gradLogDensity
                            ? model_->gradLogDensity(q)
                            : finiteDifferenceGradient(model_->logDensity, q);
    dy.resize(layout_.size());
    dy.head(d) = y.segment(d, d);
    dy.segment(d, d) = std_->scale.cwiseProduct(g);
    dy[layout_.refreshIndex()] = rate_;
    for (int k = 0; k < layout_.monitorCount; ++k)
      dy[layout_.monitorStart() + k] = model_->monitors[k](q);
    return dy.allFinite();
  }

 private:
  const TargetModel* model_;
  const Standardization* std_;
  double rate_;
  StateLayout layout_;
  long evals_ = 0;
};

struct StepAttempt {
  bool accepted = false;
  bool finite = true;
  double errorNorm = 0.0;
  double hNext = 0.0;
};

/* Bogacki-Shampine 3(2) embedded pair, first-same-as-last. One call is one
   attempt at the proposed step; the caller owns the retry loop, so event
   handling can also feed back truncated step sizes. */
template <class System>
class BS32Stepper {
 public:
  BS32Stepper(System& sys, const StepControl& ctrl, int stateSize)
      : sys_(&sys), ctrl_(ctrl) {
    k1_.resize(stateSize);
    k2_.resize(stateSize);
    k3_.resize(stateSize);
    k4_.resize(stateSize);
    ytmp_.resize(stateSize);
  }

  const StepControl& control() const { return ctrl_; }

  // call after any discontinuous state change (events, phase boundaries)
  void invalidateDerivative() { fsalValid_ = false; }

  StepAttempt attemptStep(const Eigen::VectorXd& y, double t, double h, DenseStep& out) {
    StepAttempt res;
    if (!fsalValid_) {
      if (!sys_->rhs(y, k1_)) {
        res.finite = false;
        res.hNext = nextAfterFailure(h);
        return res;
      }
      fsalValid_ = true;
    }

    ytmp_ = y + (0.5 * h) * k1_;
    if (!sys_->rhs(ytmp_, k2_)) return failNonFinite(res, h);
    ytmp_ = y + (0.75 * h) * k2_;
    if (!sys_->rhs(ytmp_, k3_)) return failNonFinite(res, h);
    ytmp_ = y + h * ((2.0 / 9.0) * k1_ + (1.0 / 3.0) * k2_ + (4.0 / 9.0) * k3_);
    if (!sys_->rhs(ytmp_, k4_)) return failNonFinite(res, h);

    // third-order solution minus the embedded second-order one
    double err = 0.0;
    for (int i = 0; i < y.size(); ++i) {
      const double e = h * ((-5.0 / 72.0) * k1_[i] + (1.0 / 12.0) * k2_[i] +
                            (1.0 / 9.0) * k3_[i] - (1.0 / 8.0) * k4_[i]);
      const double scale =
          ctrl_.absTol + ctrl_.relTol * std::max(std::abs(y[i]), std::abs(ytmp_[i]));
      err = std::max(err, std::abs(e) / scale);
    }
    res.errorNorm = err;
    res.accepted = err <= 1.0;

    double factor = (err > 0.0) ? ctrl_.safety * std::pow(err, -1.0 / 3.0) : 5.0;
    factor = std::clamp(factor, 0.2, 5.0);
    res.hNext = std::min(h * factor, ctrl_.hMax);

    if (res.accepted) {
      out.t0 = t;
      out.t1 = t + h;
      out.y0 = y;
      out.y1 = ytmp_;
      out.f0 = k1_;
      out.f1 = k4_;
      k1_.swap(k4_);  // first-same-as-last: k4 of this step is k1 of the next
    } else if (h <= ctrl_.hMin * (1.0 + 1e-12)) {
      throw StepSizeUnderflow("step error " + std::to_string(err) +
                              " > 1 at the minimum step size, t = " + std::to_string(t));
    }
    return res;
  }

 private:
  StepAttempt failNonFinite(StepAttempt& res, double h) const {
    res.finite = false;
    res.hNext = nextAfterFailure(h);
    return res;
  }

  double nextAfterFailure(double h) const { return std::max(0.5 * h, ctrl_.hMin); }

  System* sys_;
  StepControl ctrl_;
  Eigen::VectorXd k1_, k2_, k3_, k4_, ytmp_;
  bool fsalValid_ = false;
};

}  // namespace ngrhmc
