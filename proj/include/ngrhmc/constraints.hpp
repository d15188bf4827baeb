#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "ngrhmc/errors.hpp"
#include "ngrhmc/integrator.hpp"
#include "ngrhmc/polysolve.hpp"
#include "ngrhmc/target.hpp"

namespace ngrhmc {

/* Inward normal at a boundary point, in standardized coordinates, together
   with the constraint's structurally active coordinate set (the only indices
   the sparse boundary kernel touches). */
struct NormalVector {
  Eigen::VectorXd vec;
  std::vector<int> activeSet;
};

using ConstraintFn = std::function<double(const Eigen::VectorXd&)>;
using ConstraintGradFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/* One feasibility restriction c(q) >= 0 in original coordinates. Four
   shapes:

     Linear            c = a.q + b
     L1Norm            c = v - |A q + b|_1
     L2Norm            c = v^2 - |A q + b|_2^2
     NonlinearAffine   c = F(A q + b), smooth user F

   Collision times along an accepted integrator step are found on the cubic
   Hermite interpolant of the position path: affine functions of the state
   interpolate to exact cubics in the step-local coordinate, so the linear
   and l1 cases reduce to closed-form cubic roots, the l2 case to a degree-6
   Sturm isolation, and only the general nonlinear case needs a sampled grid.
*/
class Constraint {
 public:
  using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  enum class Kind { Linear, L1Norm, L2Norm, NonlinearAffine };

  // roots at or below this step fraction are ignored: a step that starts on
  // the boundary it just collided with must not immediately re-fire
  static constexpr double kMinEventFraction = 1e-10;
  static constexpr double kSignTol = 1e-12;
  static constexpr double kNormalTol = 1e-12;

  static Constraint linear(Eigen::VectorXd a, double b) {
    Constraint c;
    c.kind_ = Kind::Linear;
    c.a_ = std::move(a);
    c.bScalar_ = b;
    if (c.a_.size() == 0 || !c.a_.allFinite())
      throw ConfigError("linear constraint: coefficient vector empty or non-finite");
    for (int i = 0; i < c.a_.size(); ++i)
      if (c.a_[i] != 0.0) c.active_.push_back(i);
    if (c.active_.empty()) throw ConfigError("linear constraint: all coefficients zero");
    return c;
  }

  static Constraint l1Norm(Eigen::SparseMatrix<double> A, Eigen::VectorXd b, double v) {
    Constraint c = normBase(Kind::L1Norm, std::move(A), std::move(b), v);
    return c;
  }

  static Constraint l2Norm(Eigen::SparseMatrix<double> A, Eigen::VectorXd b, double v) {
    Constraint c = normBase(Kind::L2Norm, std::move(A), std::move(b), v);
    return c;
  }

  static Constraint nonlinearAffine(Eigen::SparseMatrix<double> A, Eigen::VectorXd b,
                                    ConstraintFn F, ConstraintGradFn gradF,
                                    int gridPoints = 8) {
    Constraint c = normBase(Kind::NonlinearAffine, std::move(A), std::move(b), 1.0);
    c.kind_ = Kind::NonlinearAffine;
    if (!F || !gradF) throw ConfigError("nonlinear constraint: F and gradF are required");
    if (gridPoints < 2) throw ConfigError("nonlinear constraint: gridPoints must be >= 2");
    c.F_ = std::move(F);
    c.gradF_ = std::move(gradF);
    c.gridPoints_ = gridPoints;
    return c;
  }

  Kind kind() const { return kind_; }
  const std::vector<int>& activeIndices() const { return active_; }
  int inputDim() const {
    return kind_ == Kind::Linear ? static_cast<int>(a_.size()) : static_cast<int>(A_.cols());
  }

  double evaluate(const Eigen::VectorXd& q) const {
    switch (kind_) {
      case Kind::Linear:
        return a_.dot(q) + bScalar_;
      case Kind::L1Norm:
        return v_ - (A_ * q + bVec_).lpNorm<1>();
      case Kind::L2Norm:
        return v_ * v_ - (A_ * q + bVec_).squaredNorm();
      case Kind::NonlinearAffine:
        return F_(A_ * q + bVec_);
    }
    return 0.0;
  }

  NormalVector inwardNormal(const Standardization& s, const Eigen::VectorXd& qbar) const {
    const Eigen::VectorXd q = s.map(qbar);
    Eigen::VectorXd n = Eigen::VectorXd::Zero(q.size());
    switch (kind_) {
      case Kind::Linear:
        n = s.scale.cwiseProduct(a_);
        break;
      case Kind::L1Norm: {
        const Eigen::VectorXd w = A_ * q + bVec_;
        for (int i = 0; i < w.size(); ++i)
          if (std::abs(w[i]) < kSignTol)
            throw AmbiguousSign("l1 constraint: component " + std::to_string(i) +
                                " is on a corner (|w_i| < sign tolerance)");
        n = -s.scale.cwiseProduct(transposeApply(w.array().sign().matrix()));
        break;
      }
      case Kind::L2Norm: {
        const Eigen::VectorXd w = A_ * q + bVec_;
        n = -2.0 * s.scale.cwiseProduct(transposeApply(w));
        break;
      }
      case Kind::NonlinearAffine: {
        const Eigen::VectorXd w = A_ * q + bVec_;
        n = s.scale.cwiseProduct(transposeApply(gradF_(w)));
        break;
      }
    }
    if (n.norm() < kNormalTol)
      throw DegenerateNormal("constraint normal vanishes at the collision point");
    return {std::move(n), active_};
  }

  /* Smallest step fraction h in (kMinEventFraction, 1) where the Hermite
     path crosses the boundary outward (c decreasing through zero), or
     nothing. Only exits are events: inward crossings and tangential touches
     are skipped. */
  std::optional<double> locateCollision(const DenseStep& step, const Standardization& s) const {
    switch (kind_) {
      case Kind::Linear: {
        Poly c = affineCubic(step, s, a_, bScalar_);
        try {
          auto roots = rootsIn01(c);
          return firstDownwardCrossing(roots, [&](double t) { return c(t); });
        } catch (const DegeneratePoly&) {
          return std::nullopt;  // path slides exactly along the boundary
        }
      }
      case Kind::L1Norm:
        return locateL1(step, s);
      case Kind::L2Norm:
        return locateL2(step, s);
      case Kind::NonlinearAffine:
        return locateNonlinear(step, s);
    }
    return std::nullopt;
  }

 private:
  static Constraint normBase(Kind k, Eigen::SparseMatrix<double> A, Eigen::VectorXd b,
                             double v) {
    Constraint c;
    c.kind_ = k;
    c.A_ = std::move(A);
    c.A_.makeCompressed();
    c.bVec_ = std::move(b);
    c.v_ = v;
    if (k != Kind::NonlinearAffine && !(v > 0.0))
      throw ConfigError("norm constraint: bound v must be positive");
    if (c.A_.rows() == 0) throw ConfigError("constraint matrix has no rows");
    if (c.bVec_.size() != c.A_.rows())
      throw ConfigError("constraint offset length does not match the matrix row count");
    std::vector<bool> rowHit(c.A_.rows(), false), colHit(c.A_.cols(), false);
    for (int outer = 0; outer < c.A_.outerSize(); ++outer)
      for (SparseRowMatrix::InnerIterator it(c.A_, outer); it; ++it)
        if (it.value() != 0.0) {
          rowHit[it.row()] = true;
          colHit[it.col()] = true;
        }
    for (int r = 0; r < c.A_.rows(); ++r)
      if (!rowHit[r])
        throw ConfigError("constraint matrix row " + std::to_string(r) + " is all zero");
    for (int j = 0; j < c.A_.cols(); ++j)
      if (colHit[j]) c.active_.push_back(j);
    if (c.active_.empty()) throw ConfigError("constraint has an empty active coordinate set");
    return c;
  }

  // A^T x for the sparse matrix, dense result
  Eigen::VectorXd transposeApply(const Eigen::VectorXd& x) const {
    return Eigen::VectorXd(A_.transpose() * x);
  }

  /* Cubic (in step fraction) of a.q(t) + b along the step: with q = m + S
     qbar the standardized weights are a_j S_j and the offset picks up a.m. */
  static Poly affineCubic(const DenseStep& step, const Standardization& s,
                          const Eigen::VectorXd& a, double b) {
    std::vector<int> idx;
    std::vector<double> w;
    double offset = b;
    for (int j = 0; j < a.size(); ++j)
      if (a[j] != 0.0) {
        idx.push_back(j);  // position block leads the state vector
        w.push_back(a[j] * s.scale[j]);
        offset += a[j] * s.location[j];
      }
    return step.functionalCubic(idx, w, offset);
  }

  Poly rowCubic(const DenseStep& step, const Standardization& s, int row) const {
    std::vector<int> idx;
    std::vector<double> w;
    double offset = bVec_[row];
    for (SparseRowMatrix::InnerIterator it(A_, row); it; ++it)
      if (it.value() != 0.0) {
        idx.push_back(static_cast<int>(it.col()));
        w.push_back(it.value() * s.scale[it.col()]);
        offset += it.value() * s.location[it.col()];
      }
    return step.functionalCubic(idx, w, offset);
  }

  // real roots of c inside (kMinEventFraction, 1), ascending
  static std::vector<double> rootsIn01(const Poly& c) {
    std::vector<double> out;
    for (double r : cubicRoots(c))
      if (r > kMinEventFraction && r < 1.0) out.push_back(r);
    return out;
  }

  /* Scan the sign of c on the midpoints between consecutive candidate roots;
     the first +,- pair brackets the first outward crossing. A start sign
     that is already negative (a post-collision point a hair outside) is not
     an event, and an even-multiplicity touch changes no sign. */
  template <class EvalFn>
  static std::optional<double> firstDownwardCrossing(const std::vector<double>& roots,
                                                     EvalFn&& c) {
    if (roots.empty()) return std::nullopt;
    std::vector<double> pts;
    pts.push_back(kMinEventFraction);
    pts.insert(pts.end(), roots.begin(), roots.end());
    pts.push_back(1.0);
    int prevSign = detail::signOf(c(0.5 * (pts[0] + pts[1])));
    for (std::size_t k = 1; k + 1 < pts.size(); ++k) {
      const int sign = detail::signOf(c(0.5 * (pts[k] + pts[k + 1])));
      if (prevSign > 0 && sign < 0) return pts[k];
      if (sign != 0) prevSign = sign;
    }
    return std::nullopt;
  }

  std::optional<double> locateL1(const DenseStep& step, const Standardization& s) const {
    const int p = static_cast<int>(A_.rows());
    std::vector<Poly> wc(p);
    for (int i = 0; i < p; ++i) wc[i] = rowCubic(step, s, i);

    // breakpoints: times where any component may change sign
    std::vector<double> breaks{0.0, 1.0};
    for (const auto& c : wc) {
      try {
        for (double r : cubicRoots(c))
          if (r > 0.0 && r < 1.0) breaks.push_back(r);
      } catch (const DegeneratePoly&) {
        // component identically zero: a standing corner; flagged below if hit
      }
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end(),
                             [](double a, double b) { return std::abs(a - b) < 1e-15; }),
                 breaks.end());

    const auto cEval = [&](double t) {
      double acc = v_;
      for (const auto& c : wc) acc -= std::abs(c(t));
      return acc;
    };

    // on each sign-constant piece the constraint is the cubic v - sum s_i w_i
    std::vector<double> candidates;
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
      const double lo = breaks[k], hi = breaks[k + 1];
      const double mid = 0.5 * (lo + hi);
      Poly g = Poly::constant(v_);
      for (const auto& c : wc) g = g - c * (c(mid) >= 0.0 ? 1.0 : -1.0);
      try {
        for (double r : cubicRoots(g))
          if (r > std::max(lo, kMinEventFraction) && r < hi) candidates.push_back(r);
      } catch (const DegeneratePoly&) {
      }
    }
    std::sort(candidates.begin(), candidates.end());

    const auto hit = firstDownwardCrossing(candidates, cEval);
    if (!hit) return std::nullopt;
    for (int i = 0; i < p; ++i)
      if (std::abs(wc[i](*hit)) < kSignTol)
        throw AmbiguousSign("l1 collision lands on a corner of component " + std::to_string(i));
    return hit;
  }

  std::optional<double> locateL2(const DenseStep& step, const Standardization& s) const {
    Poly g = Poly::constant(v_ * v_);
    for (int i = 0; i < A_.rows(); ++i) {
      const Poly c = rowCubic(step, s, i);
      g = g - c * c;
    }
    g = g.pruned();
    if (g.isZero()) return std::nullopt;
    const Poly dg = g.derivative();

    double lo = kMinEventFraction;
    for (int guard = 0; guard < 8; ++guard) {
      std::optional<double> r;
      try {
        r = firstRoot(g, lo, 1.0);
      } catch (const DegeneratePoly&) {
        return std::nullopt;
      }
      if (!r) return std::nullopt;
      const double slope = dg(*r);
      if (slope < -1e-12 * std::max(1.0, dg.maxAbsCoeff())) return r;  // outward
      if (std::abs(slope) <= 1e-12 * std::max(1.0, dg.maxAbsCoeff()) &&
          *r + 1e-6 < 1.0 && g(*r + 1e-6) < 0.0)
        return r;  // degenerate pass-through
      lo = *r + 1e-9;  // inward or touch: keep looking
      if (lo >= 1.0) return std::nullopt;
    }
    return std::nullopt;
  }

  std::optional<double> locateNonlinear(const DenseStep& step, const Standardization& s) const {
    const int p = static_cast<int>(A_.rows());
    std::vector<Poly> wc(p);
    for (int i = 0; i < p; ++i) wc[i] = rowCubic(step, s, i);
    Eigen::VectorXd w(p);
    const auto cEval = [&](double t) {
      for (int i = 0; i < p; ++i) w[i] = wc[i](t);
      return F_(w);
    };

    const int G = gridPoints_;
    double prevT = 0.0, prevV = cEval(0.0);
    for (int k = 1; k < G; ++k) {
      const double t = static_cast<double>(k) / (G - 1);
      const double v = cEval(t);
      if (prevV > 0.0 && v < 0.0) {
        // bisect keeping f(a) > 0 > f(b)
        double a = prevT, b = t;
        while (b - a > 1e-12) {
          const double mid = 0.5 * (a + b);
          if (cEval(mid) > 0.0)
            a = mid;
          else
            b = mid;
        }
        const double root = 0.5 * (a + b);
        if (root > kMinEventFraction) return root;
      }
      prevT = t;
      prevV = v;
    }
    return std::nullopt;
  }

  Kind kind_ = Kind::Linear;
  Eigen::VectorXd a_;
  double bScalar_ = 0.0;
  SparseRowMatrix A_;
  Eigen::VectorXd bVec_;
  double v_ = 0.0;
  ConstraintFn F_;
  ConstraintGradFn gradF_;
  int gridPoints_ = 8;
  std::vector<int> active_;
};

}  // namespace ngrhmc
