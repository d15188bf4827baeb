#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <Eigen/Dense>

#include "ngrhmc/target.hpp"

using namespace ngrhmc;

namespace {

TargetModel skewedGaussian() {
  TargetModel m;
  m.dim = 3;
  Eigen::Matrix3d P;
  P << 2.0, 0.3, 0.0, 0.3, 1.0, -0.2, 0.0, -0.2, 0.5;
  m.logDensity = [P](const Eigen::VectorXd& q) {
    return -0.5 * q.dot(P * q) + 0.1 * q[0] * q[1] * q[2];
  };
  m.gradLogDensity = [P](const Eigen::VectorXd& q) {
    Eigen::VectorXd g = -(P * q);
    g[0] += 0.1 * q[1] * q[2];
    g[1] += 0.1 * q[0] * q[2];
    g[2] += 0.1 * q[0] * q[1];
    return g;
  };
  return m;
}

}  // namespace

TEST_CASE("standardization maps round-trip") {
  Standardization s{(Eigen::VectorXd(2) << 1.5, -2.0).finished(),
                    (Eigen::VectorXd(2) << 0.5, 3.0).finished()};
  const Eigen::VectorXd qbar = (Eigen::VectorXd(2) << 0.2, -0.4).finished();
  const Eigen::VectorXd q = s.map(qbar);
  REQUIRE(q[0] == Catch::Approx(1.6));
  REQUIRE(q[1] == Catch::Approx(-3.2));
  REQUIRE((s.unmap(q) - qbar).cwiseAbs().maxCoeff() < 1e-15);

  const Standardization id = Standardization::identity(3);
  const Eigen::VectorXd v = Eigen::VectorXd::Random(3);
  REQUIRE((id.map(v) - v).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("finite differences match an analytic gradient") {
  const TargetModel m = skewedGaussian();
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd q = Eigen::VectorXd::Random(3) * 2.0;
    const Eigen::VectorXd fd = finiteDifferenceGradient(m.logDensity, q);
    const Eigen::VectorXd an = m.gradLogDensity(q);
    REQUIRE((fd - an).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("standardized log density applies the chain rule exactly") {
  const TargetModel m = skewedGaussian();
  Standardization s{(Eigen::VectorXd(3) << 0.3, -1.0, 2.0).finished(),
                    (Eigen::VectorXd(3) << 2.0, 0.25, 1.5).finished()};
  const Eigen::VectorXd qbar = (Eigen::VectorXd(3) << 0.4, 0.9, -0.3).finished();

  const auto [value, grad] = standardizedLogGrad(m, s, qbar);
  const Eigen::VectorXd q = s.map(qbar);
  REQUIRE(value == m.logDensity(q));
  const Eigen::VectorXd expected = s.scale.cwiseProduct(m.gradLogDensity(q));
  REQUIRE((grad - expected).cwiseAbs().maxCoeff() == 0.0);

  // analytic gradient absent: falls back to finite differences
  TargetModel noGrad = m;
  noGrad.gradLogDensity = nullptr;
  const auto [v2, g2] = standardizedLogGrad(noGrad, s, qbar);
  REQUIRE(v2 == value);
  REQUIRE((g2 - expected).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("non-finite evaluations are reported with the offending point") {
  TargetModel m;
  m.dim = 1;
  m.logDensity = [](const Eigen::VectorXd& q) { return std::log(q[0]); };
  m.gradLogDensity = [](const Eigen::VectorXd& q) {
    return Eigen::VectorXd::Constant(1, 1.0 / q[0]);
  };
  const Standardization id = Standardization::identity(1);
  REQUIRE_THROWS_AS(standardizedLogGrad(m, id, Eigen::VectorXd::Constant(1, -1.0)),
                    NonFiniteEvaluation);
  REQUIRE_NOTHROW(standardizedLogGrad(m, id, Eigen::VectorXd::Constant(1, 2.0)));
}

TEST_CASE("running moments reproduce mean and standard deviation") {
  RunningMoments acc(2);
  acc.update((Eigen::VectorXd(2) << 1.0, 2.0).finished());
  acc.update((Eigen::VectorXd(2) << 3.0, 4.0).finished());
  acc.update((Eigen::VectorXd(2) << 5.0, 6.0).finished());
  REQUIRE(acc.count() == 3);
  REQUIRE(acc.mean()[0] == Catch::Approx(3.0));
  REQUIRE(acc.mean()[1] == Catch::Approx(4.0));
  REQUIRE(acc.sampleVariance()[0] == Catch::Approx(4.0));
  REQUIRE(acc.sampleVariance()[1] == Catch::Approx(4.0));

  const Standardization s = acc.toStandardization();
  REQUIRE(s.location[0] == Catch::Approx(3.0));
  REQUIRE(s.scale[0] == Catch::Approx(2.0));
  REQUIRE(s.scale[1] == Catch::Approx(2.0));
}

TEST_CASE("degenerate moment accumulators floor the scale") {
  RunningMoments acc(1);
  acc.update(Eigen::VectorXd::Constant(1, 7.0));
  acc.update(Eigen::VectorXd::Constant(1, 7.0));
  const Standardization s = acc.toStandardization();
  REQUIRE(s.location[0] == Catch::Approx(7.0));
  REQUIRE(s.scale[0] == 1e-8);  // flat burn-in must not produce a zero scale

  RunningMoments single(1);
  single.update(Eigen::VectorXd::Constant(1, 2.0));
  REQUIRE(single.sampleVariance()[0] == 0.0);
}
