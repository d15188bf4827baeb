#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

#include "ngrhmc/constraints.hpp"
#include "ngrhmc/errors.hpp"
#include "ngrhmc/oracles.hpp"
#include "ngrhmc/rng.hpp"
#include "ngrhmc/target.hpp"

namespace ngrhmc {
namespace catalog_detail {

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double spectralRadius(const Eigen::MatrixXd& B) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(B, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// rows pick q[start..start+count-1]
inline Eigen::SparseMatrix<double> selector(int dim, int start, int count) {
  Eigen::SparseMatrix<double> A(count, dim);
  A.reserve(Eigen::VectorXi::Constant(count, 1));
  for (int i = 0; i < count; ++i) A.insert(i, start + i) = 1.0;
  A.makeCompressed();
  return A;
}

/* Precision matrix from log-Cholesky coordinates: P = C C^T where
   C = L diag(exp(z_0/2), ..., exp(z_{m-1}/2)), L unit lower triangular with
   its strictly-lower entries taken from z[m..] in column-major order. The
   map z -> P is a bijection onto the positive definite matrices, and its
   log-Jacobian is sum_j (m-j) z_j over the diagonal coordinates (0-based j):
   column j of C carries the factor exp(z_j/2), appears in m-j entries of C,
   and P = C C^T doubles the exponent. */
struct PrecisionChol {
  Eigen::MatrixXd C;  // lower triangular Cholesky factor
  Eigen::MatrixXd P;  // C * C^T
};

inline int lowerIndex(int m, int i, int j) {  // i > j, both 0-based
  // strictly-lower entries, column-major: offset of column j plus row gap
  int idx = m;
  for (int c = 0; c < j; ++c) idx += m - 1 - c;
  return idx + (i - j - 1);
}

inline PrecisionChol buildPrecision(const Eigen::VectorXd& z, int m) {
  PrecisionChol out;
  out.C = Eigen::MatrixXd::Zero(m, m);
  for (int j = 0; j < m; ++j) {
    const double s = std::exp(0.5 * z[j]);
    out.C(j, j) = s;
    for (int i = j + 1; i < m; ++i) out.C(i, j) = z[lowerIndex(m, i, j)] * s;
  }
  out.P = out.C * out.C.transpose();
  return out;
}

/* Shared log-density kernel of the two precision-matrix models: the z-block
   contributes sum_j kappa_j z_j - (1/2) tr(M P(z)), where kappa_j collects
   the Gaussian log-determinant count, the Wishart exponent and the
   log-Jacobian of the log-Cholesky map, and M collects the data scatter and
   the Wishart scale inverse. Returns the value and appends the z-gradient. */
inline double precisionLogKernel(const Eigen::VectorXd& z, int m,
                                 const Eigen::VectorXd& kappa, const Eigen::MatrixXd& M,
                                 Eigen::VectorXd* gradZ) {
  const PrecisionChol pc = buildPrecision(z, m);
  double value = -0.5 * (M * pc.P).trace();
  for (int j = 0; j < m; ++j) value += kappa[j] * z[j];
  if (gradZ) {
    const Eigen::MatrixXd H = M * pc.C;
    gradZ->resize(z.size());
    for (int j = 0; j < m; ++j) {
      double acc = 0.0;
      for (int k = j; k < m; ++k) acc += H(k, j) * pc.C(k, j);
      (*gradZ)[j] = kappa[j] - 0.5 * acc;
    }
    for (int j = 0; j < m; ++j) {
      const double s = std::exp(0.5 * z[j]);
      for (int i = j + 1; i < m; ++i) (*gradZ)[lowerIndex(m, i, j)] = -H(i, j) * s;
    }
  }
  return value;
}

// central finite differences of a scalar function of the constraint input w
inline ConstraintGradFn fdGrad(ConstraintFn F, double step = 1e-7) {
  return [F = std::move(F), step](const Eigen::VectorXd& w) {
    Eigen::VectorXd g(w.size()), x = w;
    for (int i = 0; i < w.size(); ++i) {
      x[i] = w[i] + step;
      const double fp = F(x);
      x[i] = w[i] - step;
      const double fm = F(x);
      x[i] = w[i];
      g[i] = (fp - fm) / (2.0 * step);
    }
    return g;
  };
}

inline void addCoordinateMonitors(TargetModel& model, int dim, bool squares, bool cross) {
  for (int i = 0; i < dim; ++i) {
    model.monitors.push_back([i](const Eigen::VectorXd& q) { return q[i]; });
    model.monitorNames.push_back("q" + std::to_string(i + 1));
  }
  if (squares)
    for (int i = 0; i < dim; ++i) {
      model.monitors.push_back([i](const Eigen::VectorXd& q) { return q[i] * q[i]; });
      model.monitorNames.push_back("q" + std::to_string(i + 1) + "_sq");
    }
  if (cross && dim == 2) {
    model.monitors.push_back([](const Eigen::VectorXd& q) { return q[0] * q[1]; });
    model.monitorNames.push_back("q1q2");
  }
}

// ---------------------------------------------------------------------------
// standard normal truncated to the positive half line

inline ExampleModel buildHalfNormal() {
  ExampleModel ex;
  ex.name = "half-normal";
  ex.description = "standard normal restricted to q >= 0; closed-form reference moments";
  ex.model.dim = 1;
  ex.model.logDensity = [](const Eigen::VectorXd& q) { return -0.5 * q[0] * q[0]; };
  ex.model.gradLogDensity = [](const Eigen::VectorXd& q) {
    return Eigen::VectorXd(-q);
  };
  addCoordinateMonitors(ex.model, 1, true, false);
  ex.constraints.push_back(Constraint::linear(Eigen::VectorXd::Ones(1), 0.0));
  ex.feasiblePoint = Eigen::VectorXd::Constant(1, 0.5);
  ex.exactSampler = [](Rng& rng) { return rng.normalVector(1); };
  const auto [mean, var] = truncatedNormalMoments(0.0, 1.0, 0.0);
  KnownMoments km;
  km.mean = Eigen::VectorXd::Constant(1, mean);
  km.cov = Eigen::MatrixXd::Constant(1, 1, var);
  km.provenance = "closed-form lower-truncated normal moments";
  ex.knownMoments = km;
  return ex;
}

// ---------------------------------------------------------------------------
// bivariate normal (unit variances, correlation 0.75) under four constraint
// shapes: one half plane, an l1 ball and an l2 ball on an affine image, and
// a spectral-radius bound on a matrix with two free entries

inline TargetModel gauss2dTarget() {
  TargetModel model;
  model.dim = 2;
  const double rho = 0.75;
  const double det = 1.0 - rho * rho;
  Eigen::Matrix2d prec;
  prec << 1.0 / det, -rho / det, -rho / det, 1.0 / det;
  model.logDensity = [prec](const Eigen::VectorXd& q) {
    return -0.5 * q.dot(prec * q);
  };
  model.gradLogDensity = [prec](const Eigen::VectorXd& q) {
    return Eigen::VectorXd(-(prec * q));
  };
  addCoordinateMonitors(model, 2, true, true);
  return model;
}

inline std::function<Eigen::VectorXd(Rng&)> gauss2dSampler() {
  const double rho = 0.75;
  const double tail = std::sqrt(1.0 - rho * rho);
  return [rho, tail](Rng& rng) {
    const Eigen::VectorXd z = rng.normalVector(2);
    Eigen::VectorXd q(2);
    q[0] = z[0];
    q[1] = rho * z[0] + tail * z[1];
    return q;
  };
}

inline ExampleModel buildGauss2dLinear() {
  ExampleModel ex;
  ex.name = "gauss2d-linear";
  ex.description = "correlated bivariate normal with the half-plane constraint q1 - 2 q2 + 1 >= 0";
  ex.model = gauss2dTarget();
  Eigen::VectorXd a(2);
  a << 1.0, -2.0;
  ex.constraints.push_back(Constraint::linear(a, 1.0));
  ex.feasiblePoint = Eigen::VectorXd::Zero(2);
  ex.exactSampler = gauss2dSampler();
  return ex;
}

inline Eigen::SparseMatrix<double> gauss2dNormMap(Eigen::VectorXd* b) {
  Eigen::MatrixXd A(2, 2);
  A << 1.0, 0.0, 1.0, -0.5;
  b->resize(2);
  (*b) << -0.5, 0.1;
  return A.sparseView();
}

inline ExampleModel buildGauss2dL1() {
  ExampleModel ex;
  ex.name = "gauss2d-l1";
  ex.description = "correlated bivariate normal with |A q + b|_1 <= 2 on an affine image";
  ex.model = gauss2dTarget();
  Eigen::VectorXd b;
  auto A = gauss2dNormMap(&b);
  ex.constraints.push_back(Constraint::l1Norm(A, b, 2.0));
  ex.feasiblePoint = Eigen::VectorXd::Zero(2);
  ex.exactSampler = gauss2dSampler();
  return ex;
}

inline ExampleModel buildGauss2dL2() {
  ExampleModel ex;
  ex.name = "gauss2d-l2";
  ex.description = "correlated bivariate normal with |A q + b|_2 <= 2 on an affine image";
  ex.model = gauss2dTarget();
  Eigen::VectorXd b;
  auto A = gauss2dNormMap(&b);
  ex.constraints.push_back(Constraint::l2Norm(A, b, 2.0));
  ex.feasiblePoint = Eigen::VectorXd::Zero(2);
  ex.exactSampler = gauss2dSampler();
  return ex;
}

inline ExampleModel buildGauss2dSpectral() {
  ExampleModel ex;
  ex.name = "gauss2d-spectral";
  ex.description =
      "correlated bivariate normal where [[0.8, q2], [q1, 0.9]] must keep spectral radius < 1";
  ex.model = gauss2dTarget();
  ConstraintFn F = [](const Eigen::VectorXd& w) {
    Eigen::MatrixXd B(2, 2);
    B << 0.8, w[1], w[0], 0.9;
    return 1.0 - spectralRadius(B);
  };
  auto A = selector(2, 0, 2);
  ex.constraints.push_back(
      Constraint::nonlinearAffine(A, Eigen::VectorXd::Zero(2), F, fdGrad(F)));
  ex.feasiblePoint = Eigen::VectorXd::Zero(2);
  ex.exactSampler = gauss2dSampler();
  return ex;
}

// ---------------------------------------------------------------------------
// isotropic normal confined to the interior of a small ellipse; the pinched
// geometry makes kernel differences at the boundary easy to see

inline ExampleModel buildEllipse() {
  ExampleModel ex;
  ex.name = "fig1-ellipse";
  ex.description = "standard bivariate normal confined to 0.55 - 0.5 q1^2 - q2^2 >= 0";
  ex.model.dim = 2;
  ex.model.logDensity = [](const Eigen::VectorXd& q) { return -0.5 * q.squaredNorm(); };
  ex.model.gradLogDensity = [](const Eigen::VectorXd& q) { return Eigen::VectorXd(-q); };
  addCoordinateMonitors(ex.model, 2, true, false);
  ConstraintFn F = [](const Eigen::VectorXd& w) {
    return 0.55 - 0.5 * w[0] * w[0] - w[1] * w[1];
  };
  ConstraintGradFn gradF = [](const Eigen::VectorXd& w) {
    Eigen::VectorXd g(2);
    g << -w[0], -2.0 * w[1];
    return g;
  };
  // grazing orbits can re-cross this boundary very shallowly; a fine scan
  // grid keeps those events from slipping between step endpoints
  ex.constraints.push_back(
      Constraint::nonlinearAffine(selector(2, 0, 2), Eigen::VectorXd::Zero(2), F, gradF, 64));
  ex.feasiblePoint = Eigen::VectorXd::Zero(2);
  ex.exactSampler = [](Rng& rng) { return rng.normalVector(2); };
  return ex;
}

// ---------------------------------------------------------------------------
// three small posteriors where a positivity / ordering restriction can either
// be enforced directly or removed by a change of variables; each entry
// carries its unconstrained twin so the two routes can be compared on the
// same natural-parameter monitors

inline ExampleModel buildToyGauss() {
  // iid N(mu, sigma^2) with mu restricted positive, flat prior on mu and a
  // unit-rate exponential prior on sigma; state q = (mu, log sigma)
  ExampleModel ex;
  ex.name = "toy-gauss";
  ex.description = "iid normal posterior with mu >= 0; twin uses log(mu)";
  const Eigen::Vector4d y(-1.0, -0.3, 0.3, 1.2);
  const int n = 4;
  ex.model.dim = 2;
  ex.model.logDensity = [y, n](const Eigen::VectorXd& q) {
    const double mu = q[0], s = q[1];
    const double sse = (y.array() - mu).square().sum();
    return -n * s - 0.5 * sse * std::exp(-2.0 * s) - std::exp(s) + s;
  };
  ex.model.gradLogDensity = [y, n](const Eigen::VectorXd& q) {
    const double mu = q[0], s = q[1];
    const double inv2 = std::exp(-2.0 * s);
    const double sse = (y.array() - mu).square().sum();
    Eigen::VectorXd g(2);
    g[0] = (y.array() - mu).sum() * inv2;
    g[1] = -n + sse * inv2 - std::exp(s) + 1.0;
    return g;
  };
  ex.model.monitors = {[](const Eigen::VectorXd& q) { return q[0]; },
                       [](const Eigen::VectorXd& q) { return std::exp(q[1]); }};
  ex.model.monitorNames = {"mu", "sigma"};
  ex.constraints.push_back(Constraint::linear((Eigen::VectorXd(2) << 1.0, 0.0).finished(), 0.0));
  ex.feasiblePoint = (Eigen::VectorXd(2) << 0.5, 0.0).finished();
  ex.dataset = y;
  ex.datasetColumns = {"y"};

  auto twin = std::make_shared<ExampleModel>();
  twin->name = "toy-gauss-twin";
  twin->description = "unconstrained twin of toy-gauss in (log mu, log sigma)";
  twin->model.dim = 2;
  twin->model.logDensity = [y, n](const Eigen::VectorXd& q) {
    const double mu = std::exp(q[0]), s = q[1];
    const double sse = (y.array() - mu).square().sum();
    return -n * s - 0.5 * sse * std::exp(-2.0 * s) - std::exp(s) + s + q[0];
  };
  twin->model.gradLogDensity = [y, n](const Eigen::VectorXd& q) {
    const double mu = std::exp(q[0]), s = q[1];
    const double inv2 = std::exp(-2.0 * s);
    const double sse = (y.array() - mu).square().sum();
    Eigen::VectorXd g(2);
    g[0] = (y.array() - mu).sum() * inv2 * mu + 1.0;
    g[1] = -n + sse * inv2 - std::exp(s) + 1.0;
    return g;
  };
  twin->model.monitors = {[](const Eigen::VectorXd& q) { return std::exp(q[0]); },
                          [](const Eigen::VectorXd& q) { return std::exp(q[1]); }};
  twin->model.monitorNames = {"mu", "sigma"};
  twin->feasiblePoint = (Eigen::VectorXd(2) << std::log(0.5), 0.0).finished();
  ex.transformedTwin = twin;
  return ex;
}

inline Eigen::VectorXd simulateAr1(int n, double phi, double sigma, uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd y(n);
  y[0] = sigma / std::sqrt(1.0 - phi * phi) * rng.normal();
  for (int t = 1; t < n; ++t) y[t] = phi * y[t - 1] + sigma * rng.normal();
  return y;
}

inline ExampleModel buildToyAr1() {
  // first-order autoregression, conditional likelihood on the first value;
  // uniform prior keeps phi in (0,1), exponential prior on sigma;
  // state q = (phi, log sigma); data simulated from phi=0.99, sigma=0.1
  ExampleModel ex;
  ex.name = "toy-ar1";
  ex.description = "AR(1) posterior with 0 < phi < 1; twin uses logit(phi)";
  const int n = 100;
  const Eigen::VectorXd y = simulateAr1(n, 0.99, 0.1, 1001);
  ex.model.dim = 2;
  auto sseFn = [y, n](double phi) {
    double sse = 0.0;
    for (int t = 1; t < n; ++t) {
      const double r = y[t] - phi * y[t - 1];
      sse += r * r;
    }
    return sse;
  };
  auto crossFn = [y, n](double phi) {
    double acc = 0.0;
    for (int t = 1; t < n; ++t) acc += (y[t] - phi * y[t - 1]) * y[t - 1];
    return acc;
  };
  ex.model.logDensity = [sseFn, n](const Eigen::VectorXd& q) {
    const double phi = q[0], s = q[1];
    return -(n - 1) * s - 0.5 * sseFn(phi) * std::exp(-2.0 * s) - std::exp(s) + s;
  };
  ex.model.gradLogDensity = [sseFn, crossFn, n](const Eigen::VectorXd& q) {
    const double phi = q[0], s = q[1];
    const double inv2 = std::exp(-2.0 * s);
    Eigen::VectorXd g(2);
    g[0] = crossFn(phi) * inv2;
    g[1] = -(n - 1) + sseFn(phi) * inv2 - std::exp(s) + 1.0;
    return g;
  };
  ex.model.monitors = {[](const Eigen::VectorXd& q) { return q[0]; },
                       [](const Eigen::VectorXd& q) { return std::exp(q[1]); }};
  ex.model.monitorNames = {"phi", "sigma"};
  ex.constraints.push_back(Constraint::linear((Eigen::VectorXd(2) << 1.0, 0.0).finished(), 0.0));
  ex.constraints.push_back(Constraint::linear((Eigen::VectorXd(2) << -1.0, 0.0).finished(), 1.0));
  ex.feasiblePoint = (Eigen::VectorXd(2) << 0.9, std::log(0.1)).finished();
  ex.dataset = y;
  ex.datasetColumns = {"y"};

  auto twin = std::make_shared<ExampleModel>();
  twin->name = "toy-ar1-twin";
  twin->description = "unconstrained twin of toy-ar1 in (logit phi, log sigma)";
  twin->model.dim = 2;
  twin->model.logDensity = [sseFn, n](const Eigen::VectorXd& q) {
    const double phi = sigmoid(q[0]), s = q[1];
    return -(n - 1) * s - 0.5 * sseFn(phi) * std::exp(-2.0 * s) - std::exp(s) + s +
           std::log(phi) + std::log(1.0 - phi);
  };
  twin->model.gradLogDensity = [sseFn, crossFn, n](const Eigen::VectorXd& q) {
    const double phi = sigmoid(q[0]), s = q[1];
    const double inv2 = std::exp(-2.0 * s);
    Eigen::VectorXd g(2);
    g[0] = crossFn(phi) * inv2 * phi * (1.0 - phi) + 1.0 - 2.0 * phi;
    g[1] = -(n - 1) + sseFn(phi) * inv2 - std::exp(s) + 1.0;
    return g;
  };
  twin->model.monitors = {[](const Eigen::VectorXd& q) { return sigmoid(q[0]); },
                          [](const Eigen::VectorXd& q) { return std::exp(q[1]); }};
  twin->model.monitorNames = {"phi", "sigma"};
  twin->feasiblePoint = (Eigen::VectorXd(2) << std::log(0.9 / 0.1), std::log(0.1)).finished();
  ex.transformedTwin = twin;
  return ex;
}

inline Eigen::VectorXd simulateMixture(int n, double mu1, double mu2, double sigma,
                                       uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i)
    y[i] = (rng.uniform() < 0.5 ? mu1 : mu2) + sigma * rng.normal();
  return y;
}

inline ExampleModel buildToyMixture() {
  // equal-weight two-component normal mixture with common sigma and the
  // ordering mu1 <= mu2; flat priors on the locations, exponential on sigma;
  // state q = (mu1, mu2, log sigma); data simulated from (-0.5, 0.5, 1)
  ExampleModel ex;
  ex.name = "toy-mixture";
  ex.description = "two-component normal mixture with mu1 <= mu2; twin uses log(mu2 - mu1)";
  const int n = 200;
  const Eigen::VectorXd y = simulateMixture(n, -0.5, 0.5, 1.0, 1002);

  // shared likelihood core: log density and the three partials at (mu1, mu2, s)
  auto core = [y, n](double mu1, double mu2, double s, Eigen::Vector3d* grad) {
    const double inv = std::exp(-s);
    double value = -n * s;
    if (grad) grad->setZero();
    for (int i = 0; i < n; ++i) {
      const double d1 = (y[i] - mu1) * inv, d2 = (y[i] - mu2) * inv;
      const double a1 = -0.5 * d1 * d1, a2 = -0.5 * d2 * d2;
      const double m = std::max(a1, a2);
      const double e1 = std::exp(a1 - m), e2 = std::exp(a2 - m);
      value += m + std::log(0.5 * (e1 + e2));
      if (grad) {
        const double r1 = e1 / (e1 + e2), r2 = 1.0 - r1;
        (*grad)[0] += r1 * d1 * inv;
        (*grad)[1] += r2 * d2 * inv;
        (*grad)[2] += -1.0 + r1 * d1 * d1 + r2 * d2 * d2;
      }
    }
    return value;
  };
  ex.model.dim = 3;
  ex.model.logDensity = [core](const Eigen::VectorXd& q) {
    return core(q[0], q[1], q[2], nullptr) - std::exp(q[2]) + q[2];
  };
  ex.model.gradLogDensity = [core](const Eigen::VectorXd& q) {
    Eigen::Vector3d g;
    core(q[0], q[1], q[2], &g);
    g[2] += -std::exp(q[2]) + 1.0;
    return Eigen::VectorXd(g);
  };
  ex.model.monitors = {[](const Eigen::VectorXd& q) { return q[0]; },
                       [](const Eigen::VectorXd& q) { return q[1]; },
                       [](const Eigen::VectorXd& q) { return std::exp(q[2]); }};
  ex.model.monitorNames = {"mu1", "mu2", "sigma"};
  ex.constraints.push_back(
      Constraint::linear((Eigen::VectorXd(3) << -1.0, 1.0, 0.0).finished(), 0.0));
  ex.feasiblePoint = (Eigen::VectorXd(3) << -0.5, 0.5, 0.0).finished();
  ex.dataset = y;
  ex.datasetColumns = {"y"};

  auto twin = std::make_shared<ExampleModel>();
  twin->name = "toy-mixture-twin";
  twin->description = "unconstrained twin of toy-mixture in (mu1, log(mu2 - mu1), log sigma)";
  twin->model.dim = 3;
  twin->model.logDensity = [core](const Eigen::VectorXd& q) {
    const double mu1 = q[0], mu2 = q[0] + std::exp(q[1]);
    return core(mu1, mu2, q[2], nullptr) - std::exp(q[2]) + q[2] + q[1];
  };
  twin->model.gradLogDensity = [core](const Eigen::VectorXd& q) {
    const double gap = std::exp(q[1]);
    Eigen::Vector3d g;
    core(q[0], q[0] + gap, q[2], &g);
    Eigen::VectorXd out(3);
    out[0] = g[0] + g[1];
    out[1] = g[1] * gap + 1.0;
    out[2] = g[2] - std::exp(q[2]) + 1.0;
    return out;
  };
  twin->model.monitors = {[](const Eigen::VectorXd& q) { return q[0]; },
                          [](const Eigen::VectorXd& q) { return q[0] + std::exp(q[1]); },
                          [](const Eigen::VectorXd& q) { return std::exp(q[2]); }};
  twin->model.monitorNames = {"mu1", "mu2", "sigma"};
  twin->feasiblePoint = (Eigen::VectorXd(3) << -0.5, 0.0, 0.0).finished();
  ex.transformedTwin = twin;
  return ex;
}

// ---------------------------------------------------------------------------
// logistic regression with a norm budget on the coefficient block, sized
// relative to the unpenalized maximum likelihood fit

struct LogisticData {
  Eigen::MatrixXd X;  // n x p
  Eigen::VectorXd y;  // 0/1
};

inline LogisticData simulateLogistic(int n, int p, uint64_t seed) {
  Rng rng(seed);
  LogisticData d;
  d.X.resize(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) d.X(i, j) = rng.normal();
  Eigen::VectorXd beta0(p);
  beta0 << 1.2, -0.8, 0.5, 0.0, 0.0, 0.9, -0.4, 0.0;
  const double delta0 = 0.3;
  d.y.resize(n);
  for (int i = 0; i < n; ++i) {
    const double pr = sigmoid(delta0 + d.X.row(i).dot(beta0));
    d.y[i] = rng.uniform() < pr ? 1.0 : 0.0;
  }
  return d;
}

// Newton iteration for the unpenalized fit; a tiny ridge keeps the Hessian
// invertible if the simulated classes happen to separate
inline Eigen::VectorXd logisticMaxLikelihood(const LogisticData& d) {
  const int n = static_cast<int>(d.X.rows()), p = static_cast<int>(d.X.cols());
  Eigen::MatrixXd Z(n, p + 1);
  Z.col(0).setOnes();
  Z.rightCols(p) = d.X;
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(p + 1);
  for (int it = 0; it < 100; ++it) {
    Eigen::VectorXd eta = Z * theta;
    Eigen::VectorXd prob(n), w(n);
    for (int i = 0; i < n; ++i) {
      prob[i] = sigmoid(eta[i]);
      w[i] = std::max(prob[i] * (1.0 - prob[i]), 1e-10);
    }
    Eigen::VectorXd grad = Z.transpose() * (d.y - prob);
    if (grad.norm() < 1e-10) break;
    Eigen::MatrixXd H = Z.transpose() * w.asDiagonal() * Z;
    H.diagonal().array() += 1e-8;
    theta += H.ldlt().solve(grad);
  }
  return theta.tail(p);
}

inline ExampleModel buildLogistic(bool l1) {
  ExampleModel ex;
  ex.name = l1 ? "logistic-l1" : "logistic-l2";
  ex.description = std::string("Bayesian logistic regression, coefficient ") +
                   (l1 ? "l1" : "l2") + " norm capped at half the maximum likelihood norm";
  const int n = 100, p = 8;
  const LogisticData data = simulateLogistic(n, p, 1003);
  const Eigen::VectorXd betaHat = logisticMaxLikelihood(data);
  const double budget = 0.5 * (l1 ? betaHat.lpNorm<1>() : betaHat.norm());

  ex.model.dim = 1 + p;  // (delta, beta)
  const double priorVar = 100.0;
  ex.model.logDensity = [data, priorVar](const Eigen::VectorXd& q) {
    const double delta = q[0];
    const Eigen::VectorXd beta = q.tail(q.size() - 1);
    Eigen::VectorXd eta = data.X * beta;
    eta.array() += delta;
    double ll = 0.0;
    for (int i = 0; i < eta.size(); ++i) {
      const double e = eta[i];
      // y*eta - log(1 + exp(eta)) without overflow
      ll += data.y[i] * e - (e > 0.0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e)));
    }
    return ll - 0.5 * (delta * delta + beta.squaredNorm()) / priorVar;
  };
  ex.model.gradLogDensity = [data, priorVar](const Eigen::VectorXd& q) {
    const double delta = q[0];
    const Eigen::VectorXd beta = q.tail(q.size() - 1);
    Eigen::VectorXd eta = data.X * beta;
    eta.array() += delta;
    Eigen::VectorXd resid(eta.size());
    for (int i = 0; i < eta.size(); ++i) resid[i] = data.y[i] - sigmoid(eta[i]);
    Eigen::VectorXd g(q.size());
    g[0] = resid.sum() - delta / priorVar;
    g.tail(q.size() - 1) = data.X.transpose() * resid - beta / priorVar;
    return g;
  };
  ex.model.monitors.push_back([](const Eigen::VectorXd& q) { return q[0]; });
  ex.model.monitorNames.push_back("delta");
  for (int j = 0; j < p; ++j) {
    ex.model.monitors.push_back([j](const Eigen::VectorXd& q) { return q[j + 1]; });
    ex.model.monitorNames.push_back("beta" + std::to_string(j + 1));
  }
  ex.model.monitors.push_back([l1](const Eigen::VectorXd& q) {
    const Eigen::VectorXd beta = q.tail(q.size() - 1);
    return l1 ? beta.lpNorm<1>() : beta.norm();
  });
  ex.model.monitorNames.push_back("beta_norm");

  auto A = selector(1 + p, 1, p);
  if (l1)
    ex.constraints.push_back(Constraint::l1Norm(A, Eigen::VectorXd::Zero(p), budget));
  else
    ex.constraints.push_back(Constraint::l2Norm(A, Eigen::VectorXd::Zero(p), budget));
  ex.feasiblePoint = Eigen::VectorXd::Zero(1 + p);
  ex.dataset.resize(n, 1 + p);
  ex.dataset.col(0) = data.y;
  ex.dataset.rightCols(p) = data.X;
  ex.datasetColumns = {"y"};
  for (int j = 0; j < p; ++j) ex.datasetColumns.push_back("x" + std::to_string(j + 1));
  return ex;
}

// ---------------------------------------------------------------------------
// single-hidden-layer regression network; sign and ordering restrictions on
// the hidden units remove the posterior's relabeling symmetry

struct NeuralData {
  Eigen::MatrixXd X;  // n x p
  Eigen::VectorXd y;
};

inline NeuralData simulateNeural(int n, int p, uint64_t seed) {
  Rng rng(seed);
  NeuralData d;
  d.X.resize(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) d.X(i, j) = rng.normal();
  // generating values: alpha=0, delta=(0.5,-0.5), beta1=(1,0), beta2=(-0.1,1),
  // w=(1,1), sigma=0.1
  const double wTrue[2] = {1.0, 1.0}, deltaTrue[2] = {0.5, -0.5};
  const Eigen::Vector2d beta1(1.0, 0.0), beta2(-0.1, 1.0);
  d.y.resize(n);
  for (int i = 0; i < n; ++i) {
    auto g = [](double x) { return 2.0 * sigmoid(x) - 1.0; };
    const double mu = wTrue[0] * g(deltaTrue[0] + d.X.row(i).dot(beta1)) +
                      wTrue[1] * g(deltaTrue[1] + d.X.row(i).dot(beta2));
    d.y[i] = mu + 0.1 * rng.normal();
  }
  return d;
}

inline ExampleModel buildNeuralNet() {
  // state q = (alpha, w_1..w_J, delta_1..delta_J, beta_1, ..., beta_J, log sigma)
  // with standard normal priors on everything but sigma, which gets Exp(1)
  ExampleModel ex;
  ex.name = "neural-net";
  ex.description =
      "one-hidden-layer regression network with w_j >= 0 and ascending delta_j restrictions";
  const int n = 200, J = 2, p = 2;
  const NeuralData data = simulateNeural(n, p, 1004);
  const int iW = 1, iDelta = 1 + J, iBeta = 1 + 2 * J, iS = 1 + 2 * J + J * p;
  const int dim = iS + 1;

  auto core = [data, n, J, p, iW, iDelta, iBeta, iS](const Eigen::VectorXd& q,
                                                     Eigen::VectorXd* grad) {
    const double alpha = q[0], s = q[iS];
    const double inv2 = std::exp(-2.0 * s);
    double sse = 0.0;
    if (grad) grad->setZero(q.size());
    for (int i = 0; i < n; ++i) {
      double mu = alpha;
      double gAct[8], gSlope[8], eta[8];
      for (int j = 0; j < J; ++j) {
        eta[j] = q[iDelta + j] + data.X.row(i).dot(q.segment(iBeta + j * p, p));
        const double sig = sigmoid(eta[j]);
        gAct[j] = 2.0 * sig - 1.0;
        gSlope[j] = 2.0 * sig * (1.0 - sig);
        mu += q[iW + j] * gAct[j];
      }
      const double r = data.y[i] - mu;
      sse += r * r;
      if (grad) {
        const double rs = r * inv2;
        (*grad)[0] += rs;
        for (int j = 0; j < J; ++j) {
          (*grad)[iW + j] += rs * gAct[j];
          const double back = rs * q[iW + j] * gSlope[j];
          (*grad)[iDelta + j] += back;
          for (int k = 0; k < p; ++k) (*grad)[iBeta + j * p + k] += back * data.X(i, k);
        }
      }
    }
    const double value = -n * s - 0.5 * sse * inv2 -
                         0.5 * q.head(iS).squaredNorm() - std::exp(s) + s;
    if (grad) {
      grad->head(iS) -= q.head(iS);
      (*grad)[iS] = -n + sse * inv2 - std::exp(s) + 1.0;
    }
    return value;
  };
  ex.model.dim = dim;
  ex.model.logDensity = [core](const Eigen::VectorXd& q) { return core(q, nullptr); };
  ex.model.gradLogDensity = [core](const Eigen::VectorXd& q) {
    Eigen::VectorXd g;
    core(q, &g);
    return g;
  };
  ex.model.monitors = {
      [](const Eigen::VectorXd& q) { return q[0]; },
      [iW](const Eigen::VectorXd& q) { return q[iW]; },
      [iW](const Eigen::VectorXd& q) { return q[iW + 1]; },
      [iDelta](const Eigen::VectorXd& q) { return q[iDelta]; },
      [iDelta](const Eigen::VectorXd& q) { return q[iDelta + 1]; },
      [iS](const Eigen::VectorXd& q) { return std::exp(q[iS]); }};
  ex.model.monitorNames = {"alpha", "w1", "w2", "delta1", "delta2", "sigma"};
  for (int j = 0; j < J; ++j) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(dim);
    a[iW + j] = 1.0;
    ex.constraints.push_back(Constraint::linear(a, 0.0));
  }
  for (int j = 1; j < J; ++j) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(dim);
    a[iDelta + j] = 1.0;
    a[iDelta + j - 1] = -1.0;
    ex.constraints.push_back(Constraint::linear(a, 0.0));
  }
  // the generating values with the two hidden units swapped, which is the
  // representative the restrictions select
  Eigen::VectorXd start = Eigen::VectorXd::Zero(dim);
  start[iW] = 1.0;
  start[iW + 1] = 1.0;
  start[iDelta] = -0.5;
  start[iDelta + 1] = 0.5;
  start.segment(iBeta, p) << -0.1, 1.0;
  start.segment(iBeta + p, p) << 1.0, 0.0;
  start[iS] = std::log(0.1);
  ex.feasiblePoint = start;
  ex.dataset.resize(n, 1 + p);
  ex.dataset.col(0) = data.y;
  ex.dataset.rightCols(p) = data.X;
  ex.datasetColumns = {"y", "x1", "x2"};
  return ex;
}

// ---------------------------------------------------------------------------
// Gaussian precision matrix restricted to nonpositive off-diagonal entries,
// in log-Cholesky coordinates with a Wishart prior whose mean is the identity

inline Eigen::MatrixXd simulatePrecisionData(const Eigen::MatrixXd& Ptrue, int n,
                                             uint64_t seed) {
  Rng rng(seed);
  const int m = static_cast<int>(Ptrue.rows());
  const Eigen::MatrixXd cov = Ptrue.inverse();
  const Eigen::MatrixXd L = Eigen::LLT<Eigen::MatrixXd>(cov).matrixL();
  Eigen::MatrixXd Y(n, m);
  for (int t = 0; t < n; ++t) Y.row(t) = (L * rng.normalVector(m)).transpose();
  return Y;
}

inline ExampleModel buildMtp2() {
  ExampleModel ex;
  ex.name = "mtp2";
  ex.description =
      "zero-mean Gaussian precision matrix with nonpositive off-diagonals, log-Cholesky coordinates";
  const int m = 4, n = 150;
  const int d = m * (m + 1) / 2;
  Eigen::MatrixXd Ptrue = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    Ptrue(i, i) = 2.0;
    if (i + 1 < m) Ptrue(i, i + 1) = Ptrue(i + 1, i) = -0.5;
  }
  const Eigen::MatrixXd Y = simulatePrecisionData(Ptrue, n, 1005);
  const Eigen::MatrixXd S = Y.transpose() * Y;
  const double nu = m + 10;  // Wishart with mean I: scale I/nu, so scale inverse nu*I
  Eigen::MatrixXd M = S + nu * Eigen::MatrixXd::Identity(m, m);
  Eigen::VectorXd kappa(m);
  for (int j = 0; j < m; ++j) kappa[j] = 0.5 * n + 0.5 * (nu - m - 1) + (m - j);

  ex.model.dim = d;
  ex.model.logDensity = [m, kappa, M](const Eigen::VectorXd& z) {
    return precisionLogKernel(z, m, kappa, M, nullptr);
  };
  ex.model.gradLogDensity = [m, kappa, M](const Eigen::VectorXd& z) {
    Eigen::VectorXd g;
    precisionLogKernel(z, m, kappa, M, &g);
    return g;
  };
  for (int i = 0; i < m; ++i) {
    ex.model.monitors.push_back([i, m](const Eigen::VectorXd& z) {
      return buildPrecision(z, m).P(i, i);
    });
    ex.model.monitorNames.push_back("P" + std::to_string(i + 1) + std::to_string(i + 1));
  }
  for (int j = 0; j < m; ++j)
    for (int i = j + 1; i < m; ++i) {
      ex.model.monitors.push_back([i, j, m](const Eigen::VectorXd& z) {
        return buildPrecision(z, m).P(i, j);
      });
      ex.model.monitorNames.push_back("P" + std::to_string(i + 1) + std::to_string(j + 1));
    }

  // one restriction per strictly-lower entry of P; the state itself is the
  // constraint input, so the affine map is the identity
  for (int j = 0; j < m; ++j)
    for (int i = j + 1; i < m; ++i) {
      ConstraintFn F = [i, j, m](const Eigen::VectorXd& z) {
        return -buildPrecision(z, m).P(i, j);
      };
      ConstraintGradFn gradF = [i, j, m](const Eigen::VectorXd& z) {
        const PrecisionChol pc = buildPrecision(z, m);
        Eigen::VectorXd g = Eigen::VectorXd::Zero(z.size());
        for (int k = 0; k <= j; ++k) g[k] = -pc.C(i, k) * pc.C(j, k);
        for (int b = 0; b < m; ++b) {
          const double sc = std::exp(0.5 * z[b]);
          for (int a = b + 1; a < m; ++a) {
            double dP = 0.0;
            if (a == i && b <= j) dP += pc.C(j, b);
            if (a == j) dP += pc.C(i, b);
            if (dP != 0.0) g[lowerIndex(m, a, b)] = -dP * sc;
          }
        }
        return g;
      };
      ex.constraints.push_back(Constraint::nonlinearAffine(
          selector(d, 0, d), Eigen::VectorXd::Zero(d), F, gradF));
    }

  Eigen::VectorXd z0 = Eigen::VectorXd::Zero(d);
  for (int k = m; k < d; ++k) z0[k] = -0.1;  // strictly negative off-diagonals
  ex.feasiblePoint = z0;
  ex.dataset = Y;
  for (int i = 0; i < m; ++i) ex.datasetColumns.push_back("y" + std::to_string(i + 1));
  return ex;
}

// ---------------------------------------------------------------------------
// first-order vector autoregression whose coefficient matrix is confined to
// the stationary region (spectral radius below one); noise precision in the
// same log-Cholesky coordinates as above

inline ExampleModel buildVarStationary() {
  ExampleModel ex;
  ex.name = "var-stationary";
  ex.description =
      "VAR(1) with intercept, spectral radius of the coefficient matrix kept below one";
  const int m = 3, n = 200;
  const int dB = m * m, dz = m * (m + 1) / 2;
  const int iAlpha = 0, iB = m, iZ = m + dB;
  const int d = iZ + dz;

  Eigen::VectorXd alphaTrue(m);
  alphaTrue << 0.3, -0.2, 0.1;
  Eigen::MatrixXd Btrue(m, m);
  Btrue << 0.5, 0.1, 0.0, -0.1, 0.4, 0.1, 0.0, 0.1, 0.3;
  Eigen::MatrixXd Ptrue(m, m);
  Ptrue << 1.2, -0.3, 0.0, -0.3, 1.2, -0.3, 0.0, -0.3, 1.2;

  Rng rng(1006);
  const Eigen::MatrixXd L =
      Eigen::LLT<Eigen::MatrixXd>(Eigen::MatrixXd(Ptrue.inverse())).matrixL();
  Eigen::VectorXd state =
      (Eigen::MatrixXd::Identity(m, m) - Btrue).inverse() * alphaTrue;
  for (int t = 0; t < 50; ++t) state = alphaTrue + Btrue * state + L * rng.normalVector(m);
  Eigen::MatrixXd Y(n, m);
  for (int t = 0; t < n; ++t) {
    state = alphaTrue + Btrue * state + L * rng.normalVector(m);
    Y.row(t) = state.transpose();
  }

  const double nu = m + 10;  // Wishart scale I, so scale inverse is I
  const double priorVar = 16.0;
  Eigen::VectorXd kappa(m);
  for (int j = 0; j < m; ++j) kappa[j] = 0.5 * (n - 1) + 0.5 * (nu - m - 1) + (m - j);

  auto core = [Y, m, n, iAlpha, iB, iZ, dB, dz, kappa, priorVar](const Eigen::VectorXd& q,
                                                                 Eigen::VectorXd* grad) {
    const Eigen::VectorXd alpha = q.segment(iAlpha, m);
    const Eigen::MatrixXd B =
        Eigen::Map<const Eigen::MatrixXd>(q.data() + iB, m, m);
    const Eigen::VectorXd z = q.segment(iZ, dz);
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd residSum = Eigen::VectorXd::Zero(m);
    Eigen::MatrixXd residLag = Eigen::MatrixXd::Zero(m, m);
    const PrecisionChol pc = buildPrecision(z, m);
    for (int t = 1; t < n; ++t) {
      const Eigen::VectorXd prev = Y.row(t - 1).transpose();
      const Eigen::VectorXd eps = Y.row(t).transpose() - alpha - B * prev;
      S += eps * eps.transpose();
      if (grad) {
        residSum += eps;
        residLag += eps * prev.transpose();
      }
    }
    const Eigen::MatrixXd M = S + Eigen::MatrixXd::Identity(m, m);
    Eigen::VectorXd gz;
    double value = precisionLogKernel(z, m, kappa, M, grad ? &gz : nullptr);
    value -= 0.5 * (alpha.squaredNorm() + B.squaredNorm()) / priorVar;
    if (grad) {
      grad->resize(q.size());
      grad->segment(iAlpha, m) = pc.P * residSum - alpha / priorVar;
      Eigen::MatrixXd gB = pc.P * residLag - B / priorVar;
      Eigen::Map<Eigen::MatrixXd>(grad->data() + iB, m, m) = gB;
      grad->segment(iZ, dz) = gz;
    }
    return value;
  };
  ex.model.dim = d;
  ex.model.logDensity = [core](const Eigen::VectorXd& q) { return core(q, nullptr); };
  ex.model.gradLogDensity = [core](const Eigen::VectorXd& q) {
    Eigen::VectorXd g;
    core(q, &g);
    return g;
  };
  ex.model.monitors.push_back([m, iB](const Eigen::VectorXd& q) {
    return spectralRadius(Eigen::Map<const Eigen::MatrixXd>(q.data() + iB, m, m));
  });
  ex.model.monitorNames.push_back("rho");
  for (int i = 0; i < m; ++i) {
    ex.model.monitors.push_back([i](const Eigen::VectorXd& q) { return q[i]; });
    ex.model.monitorNames.push_back("alpha" + std::to_string(i + 1));
  }
  for (int i = 0; i < m; ++i) {
    const int idx = iB + i * m + i;  // column-major diagonal entry
    ex.model.monitors.push_back([idx](const Eigen::VectorXd& q) { return q[idx]; });
    ex.model.monitorNames.push_back("B" + std::to_string(i + 1) + std::to_string(i + 1));
  }
  for (int i = 0; i < m; ++i) {
    ex.model.monitors.push_back([i, m, iZ, dz](const Eigen::VectorXd& q) {
      return buildPrecision(q.segment(iZ, dz), m).P(i, i);
    });
    ex.model.monitorNames.push_back("P" + std::to_string(i + 1) + std::to_string(i + 1));
  }

  ConstraintFn F = [m](const Eigen::VectorXd& w) {
    return 1.0 - spectralRadius(Eigen::Map<const Eigen::MatrixXd>(w.data(), m, m));
  };
  ex.constraints.push_back(Constraint::nonlinearAffine(
      selector(d, iB, dB), Eigen::VectorXd::Zero(dB), F, fdGrad(F)));
  ex.feasiblePoint = Eigen::VectorXd::Zero(d);
  ex.dataset = Y;
  for (int i = 0; i < m; ++i) ex.datasetColumns.push_back("y" + std::to_string(i + 1));
  return ex;
}

struct CatalogEntry {
  const char* name;
  ExampleModel (*build)();
};

inline const std::vector<CatalogEntry>& catalogEntries() {
  static const std::vector<CatalogEntry> entries = {
      {"half-normal", buildHalfNormal},
      {"gauss2d-linear", buildGauss2dLinear},
      {"gauss2d-l1", buildGauss2dL1},
      {"gauss2d-l2", buildGauss2dL2},
      {"gauss2d-spectral", buildGauss2dSpectral},
      {"fig1-ellipse", buildEllipse},
      {"toy-gauss", buildToyGauss},
      {"toy-ar1", buildToyAr1},
      {"toy-mixture", buildToyMixture},
      {"logistic-l1", []() { return buildLogistic(true); }},
      {"logistic-l2", []() { return buildLogistic(false); }},
      {"neural-net", buildNeuralNet},
      {"mtp2", buildMtp2},
      {"var-stationary", buildVarStationary},
  };
  return entries;
}

}  // namespace catalog_detail

inline std::vector<std::string> exampleNames() {
  std::vector<std::string> names;
  for (const auto& e : catalog_detail::catalogEntries()) names.emplace_back(e.name);
  return names;
}

inline ExampleModel buildExample(const std::string& name) {
  for (const auto& e : catalog_detail::catalogEntries())
    if (name == e.name) return e.build();
  std::string msg = "unknown example '" + name + "'; available:";
  for (const auto& e : catalog_detail::catalogEntries()) msg += std::string(" ") + e.name;
  throw UnknownExample(msg);
}

}  // namespace ngrhmc
