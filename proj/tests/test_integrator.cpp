#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "ngrhmc/integrator.hpp"

using namespace ngrhmc;

namespace {

TargetModel standardNormal1d() {
  TargetModel m;
  m.dim = 1;
  m.logDensity = [](const Eigen::VectorXd& q) { return -0.5 * q.squaredNorm(); };
  m.gradLogDensity = [](const Eigen::VectorXd& q) { return Eigen::VectorXd(-q); };
  m.monitors.push_back([](const Eigen::VectorXd& q) { return q[0]; });
  m.monitors.push_back([](const Eigen::VectorXd& q) { return q[0] * q[0]; });
  m.monitorNames = {"q1", "q1_sq"};
  return m;
}

// hands out a scripted sequence of k vectors, one per rhs call
struct ScriptedSystem {
  std::vector<Eigen::VectorXd> script;
  std::vector<bool> finite;
  int calls = 0;

  bool rhs(const Eigen::VectorXd&, Eigen::VectorXd& dy) {
    const int i = std::min<int>(calls, static_cast<int>(script.size()) - 1);
    ++calls;
    dy = script[i];
    return finite.empty() ? true : finite[std::min<int>(i, static_cast<int>(finite.size()) - 1)];
  }
};

// integrate the standard-normal Hamiltonian flow to exactly T, adaptive steps
Eigen::VectorXd integrateTo(HamiltonianSystem& sys, const StepControl& ctrl, Eigen::VectorXd y,
                            double T) {
  BS32Stepper<HamiltonianSystem> stepper(sys, ctrl, static_cast<int>(y.size()));
  DenseStep dense;
  double t = 0.0, h = ctrl.hInit;
  while (T - t > 1e-13) {
    const double hTry = std::min(h, T - t);
    const auto att = stepper.attemptStep(y, t, hTry, dense);
    REQUIRE(att.finite);
    h = att.hNext;
    if (!att.accepted) continue;
    y = dense.y1;
    t = dense.t1;
  }
  return y;
}

}  // namespace

TEST_CASE("state layout indexes positions, momenta, refresh, monitors") {
  const StateLayout layout{3, 2};
  REQUIRE(layout.size() == 9);
  REQUIRE(layout.positionStart() == 0);
  REQUIRE(layout.momentumStart() == 3);
  REQUIRE(layout.refreshIndex() == 6);
  REQUIRE(layout.monitorStart() == 7);
}

TEST_CASE("hamiltonian right-hand side carries flow, refresh rate, monitors") {
  const TargetModel m = standardNormal1d();
  const Standardization id = Standardization::identity(1);
  HamiltonianSystem sys(m, id, 1.0);
  REQUIRE(sys.layout().size() == 5);

  Eigen::VectorXd y(5), dy;
  y << 1.0, 0.0, 0.0, 0.0, 0.0;  // q = 1 at rest
  REQUIRE(sys.rhs(y, dy));
  REQUIRE(dy[0] == 0.0);   // dq = p
  REQUIRE(dy[1] == -1.0);  // dp = grad log density
  REQUIRE(dy[2] == 1.0);   // refresh integral grows at the refresh rate
  REQUIRE(dy[3] == 1.0);   // monitor q
  REQUIRE(dy[4] == 1.0);   // monitor q^2
  REQUIRE(sys.gradientEvals() == 1);

  // a non-identity scale enters both the flow and the monitor arguments
  Standardization s{Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, 2.0)};
  HamiltonianSystem scaled(m, s, 0.5);
  REQUIRE(scaled.rhs(y, dy));
  REQUIRE(dy[1] == -4.0);  // S * gradLog(S q) = 2 * (-2)
  REQUIRE(dy[3] == 2.0);   // monitors see original coordinates
  REQUIRE(dy[4] == 4.0);
}

TEST_CASE("error control follows the embedded-pair formula") {
  StepControl ctrl;
  ctrl.absTol = 1.0;
  ctrl.relTol = 0.0;
  ctrl.hMax = 100.0;

  // k1 = k2 = k3 = 0, k4 = -64: the embedded difference is h * (-1/8) * k4,
  // so with h = 1 the scaled error norm is exactly 8
  ScriptedSystem sys;
  sys.script = {Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1),
                Eigen::VectorXd::Constant(1, -64.0)};
  BS32Stepper<ScriptedSystem> stepper(sys, ctrl, 1);
  DenseStep dense;
  const auto att = stepper.attemptStep(Eigen::VectorXd::Zero(1), 0.0, 1.0, dense);
  REQUIRE(att.finite);
  REQUIRE_FALSE(att.accepted);
  REQUIRE(att.errorNorm == Catch::Approx(8.0).margin(1e-12));
  // hNext = h * safety * err^(-1/3) = 0.9 * 0.5
  REQUIRE(att.hNext == Catch::Approx(0.45).margin(1e-12));
}

TEST_CASE("zero error grows the step by the clamped maximum factor") {
  StepControl ctrl;
  ctrl.hMax = 3.0;
  ScriptedSystem sys;
  sys.script = {Eigen::VectorXd::Constant(2, 1.5)};  // constant slope: exact for the pair
  BS32Stepper<ScriptedSystem> stepper(sys, ctrl, 2);
  DenseStep dense;
  const auto att = stepper.attemptStep(Eigen::VectorXd::Zero(2), 0.0, 1.0, dense);
  REQUIRE(att.accepted);
  REQUIRE(att.errorNorm == 0.0);
  REQUIRE(att.hNext == 3.0);  // 5x growth capped by hMax
}

TEST_CASE("non-finite evaluations halve the step without committing") {
  StepControl ctrl;
  ScriptedSystem sys;
  sys.script = {Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)};
  sys.finite = {true, false};
  BS32Stepper<ScriptedSystem> stepper(sys, ctrl, 1);
  DenseStep dense;
  const auto att = stepper.attemptStep(Eigen::VectorXd::Zero(1), 0.0, 0.8, dense);
  REQUIRE_FALSE(att.finite);
  REQUIRE_FALSE(att.accepted);
  REQUIRE(att.hNext == Catch::Approx(0.4));
}

TEST_CASE("first-same-as-last is reused and invalidated") {
  const TargetModel m = standardNormal1d();
  const Standardization id = Standardization::identity(1);
  HamiltonianSystem sys(m, id, 0.5);
  BS32Stepper<HamiltonianSystem> stepper(sys, StepControl{}, sys.layout().size());

  Eigen::VectorXd y = Eigen::VectorXd::Zero(5);
  y[0] = 1.0;
  DenseStep dense;
  REQUIRE(stepper.attemptStep(y, 0.0, 0.01, dense).accepted);
  REQUIRE(sys.gradientEvals() == 4);

  y = dense.y1;
  REQUIRE(stepper.attemptStep(y, dense.t1, 0.01, dense).accepted);
  REQUIRE(sys.gradientEvals() == 7);  // k1 recycled from the previous k4

  y = dense.y1;
  stepper.invalidateDerivative();
  REQUIRE(stepper.attemptStep(y, dense.t1, 0.01, dense).accepted);
  REQUIRE(sys.gradientEvals() == 11);
}

TEST_CASE("dense output hits the endpoints bitwise and stays on the flow inside") {
  const TargetModel m = standardNormal1d();
  const Standardization id = Standardization::identity(1);
  HamiltonianSystem sys(m, id, 0.5);
  BS32Stepper<HamiltonianSystem> stepper(sys, StepControl{}, sys.layout().size());

  Eigen::VectorXd y = Eigen::VectorXd::Zero(5);
  y[0] = 1.0;
  DenseStep dense;
  double h = 0.2;
  for (;;) {
    const auto att = stepper.attemptStep(y, 0.0, h, dense);
    if (att.accepted) break;
    h = att.hNext;
  }

  REQUIRE((dense.eval(dense.t0) - dense.y0).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((dense.eval(dense.t1) - dense.y1).cwiseAbs().maxCoeff() == 0.0);

  // interior: cubic Hermite of an accepted step tracks cos(t) to O(h^4)
  const double tm = dense.t0 + 0.37 * dense.width();
  const Eigen::VectorXd ym = dense.eval(tm);
  REQUIRE(std::abs(ym[0] - std::cos(tm)) < 5.0 * std::pow(dense.width(), 4));
  REQUIRE(std::abs(ym[1] + std::sin(tm)) < 5.0 * std::pow(dense.width(), 4));
  for (int i = 0; i < 5; ++i) REQUIRE(ym[i] == dense.evalComponent(i, tm));

  // the monomial form of a component agrees with the factored evaluation
  const Poly c0 = dense.componentCubic(0);
  for (double th : {0.0, 0.25, 0.6, 1.0}) {
    const double direct = dense.evalComponent(0, dense.t0 + th * dense.width());
    REQUIRE(c0(th) == Catch::Approx(direct).margin(1e-12));
  }

  const Poly lin = dense.functionalCubic({0, 1}, {2.0, -1.0}, 0.3);
  for (double th : {0.1, 0.5, 0.9}) {
    const Eigen::VectorXd yt = dense.eval(dense.t0 + th * dense.width());
    REQUIRE(lin(th) == Catch::Approx(2.0 * yt[0] - yt[1] + 0.3).margin(1e-10));
  }

  REQUIRE_THROWS_AS(dense.eval(dense.t1 + 1e-6), OutOfStepRange);
  REQUIRE_THROWS_AS(dense.eval(dense.t0 - 1e-6), OutOfStepRange);
}

TEST_CASE("adaptive integration of the oscillator returns home") {
  const TargetModel m = standardNormal1d();
  const Standardization id = Standardization::identity(1);
  HamiltonianSystem sys(m, id, 0.5);
  StepControl ctrl;
  ctrl.absTol = ctrl.relTol = 1e-8;

  Eigen::VectorXd y0 = Eigen::VectorXd::Zero(5);
  y0[0] = 1.0;
  const Eigen::VectorXd yT = integrateTo(sys, ctrl, y0, 2.0 * M_PI);
  REQUIRE(std::abs(yT[0] - 1.0) < 1e-5);
  REQUIRE(std::abs(yT[1]) < 1e-5);
  // quadrature components ride along: refresh integral = rate * T and
  // integral of cos^2 over a full period is pi
  REQUIRE(yT[2] == Catch::Approx(M_PI).epsilon(1e-6));
  REQUIRE(std::abs(yT[3]) < 1e-5);
  REQUIRE(yT[4] == Catch::Approx(M_PI).epsilon(1e-4));
}

TEST_CASE("fixed-step error contracts at third order") {
  const TargetModel m = standardNormal1d();
  const Standardization id = Standardization::identity(1);
  StepControl loose;
  loose.absTol = 1e9;  // force acceptance so h is whatever the caller asks
  loose.hMax = 10.0;

  const auto globalError = [&](double h) {
    HamiltonianSystem sys(m, id, 0.5);
    BS32Stepper<HamiltonianSystem> stepper(sys, loose, sys.layout().size());
    Eigen::VectorXd y = Eigen::VectorXd::Zero(5);
    y[0] = 1.0;
    DenseStep dense;
    const int n = static_cast<int>(std::lround(1.0 / h));
    for (int k = 0; k < n; ++k) {
      REQUIRE(stepper.attemptStep(y, k * h, h, dense).accepted);
      y = dense.y1;
    }
    return std::abs(y[0] - std::cos(1.0));
  };

  const double e1 = globalError(0.02);
  const double e2 = globalError(0.01);
  REQUIRE(e1 / e2 > 5.5);
  REQUIRE(e1 / e2 < 11.5);
}
