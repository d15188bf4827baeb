#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "ngrhmc/errors.hpp"

namespace ngrhmc {

/* Dense univariate polynomial, coefficients ascending: c[0] + c[1]x + ...
   Degrees stay tiny here (Hermite cubics and their squares, degree <= 6),
   so everything is plain loops over std::vector. */
class Poly {
 public:
  Poly() = default;
  explicit Poly(std::vector<double> coeffs) : c_(std::move(coeffs)) { stripLeadingZeros(); }

  static Poly constant(double v) { return Poly({v}); }

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool isZero() const { return c_.empty(); }
  const std::vector<double>& coeffs() const { return c_; }
  double leading() const { return c_.empty() ? 0.0 : c_.back(); }

  double operator()(double x) const {
    double acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
    return acc;
  }

  double maxAbsCoeff() const {
    double m = 0.0;
    for (double v : c_) m = std::max(m, std::abs(v));
    return m;
  }

  Poly derivative() const {
    if (c_.size() <= 1) return Poly();
    std::vector<double> d(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * static_cast<double>(i);
    return Poly(std::move(d));
  }

  /* Zero out coefficients below relTol * max|c_i| and drop the leading ones.
     Keeps near-degenerate cubics (e.g. straight-line position paths) from
     feeding spurious high-degree terms into the root searches. */
  Poly pruned(double relTol = 1e-14) const {
    if (c_.empty()) return Poly();
    const double cut = relTol * maxAbsCoeff();
    std::vector<double> out(c_);
    for (double& v : out)
      if (std::abs(v) <= cut) v = 0.0;
    return Poly(std::move(out));
  }

  Poly operator+(const Poly& o) const {
    std::vector<double> out(std::max(c_.size(), o.c_.size()), 0.0);
    for (std::size_t i = 0; i < c_.size(); ++i) out[i] += c_[i];
    for (std::size_t i = 0; i < o.c_.size(); ++i) out[i] += o.c_[i];
    return Poly(std::move(out));
  }

  Poly operator-(const Poly& o) const { return *this + (o * -1.0); }

  Poly operator*(double s) const {
    std::vector<double> out(c_);
    for (double& v : out) v *= s;
    return Poly(std::move(out));
  }

  Poly operator*(const Poly& o) const {
    if (c_.empty() || o.c_.empty()) return Poly();
    std::vector<double> out(c_.size() + o.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < c_.size(); ++i)
      for (std::size_t j = 0; j < o.c_.size(); ++j) out[i + j] += c_[i] * o.c_[j];
    return Poly(std::move(out));
  }

 private:
  void stripLeadingZeros() {
    while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
  }

  std::vector<double> c_;
};

namespace detail {

// remainder of a / b, coefficients ascending; b must be nonzero
inline Poly polyRemainder(const Poly& a, const Poly& b) {
  std::vector<double> r(a.coeffs());
  const auto& d = b.coeffs();
  const double lead = d.back();
  int rd = static_cast<int>(r.size()) - 1;
  const int bd = b.degree();
  while (rd >= bd) {
    const double f = r[rd] / lead;
    for (int i = 0; i <= bd; ++i) r[rd - bd + i] -= f * d[i];
    r[rd] = 0.0;  // cancel exactly
    --rd;
  }
  r.resize(bd > 0 ? bd : 0);
  return Poly(std::move(r));
}

inline int signOf(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

/* Sturm chain of p: p0 = p, p1 = p', p_{k+1} = -rem(p_{k-1}, p_k), each
   member pruned and normalized by |leading| (a positive scalar, so sign
   patterns survive). Terminates at the gcd for non-square-free input, which
   still counts distinct roots. */
inline std::vector<Poly> sturmChain(const Poly& p) {
  std::vector<Poly> chain;
  Poly p0 = p.pruned();
  if (p0.isZero()) throw DegeneratePoly("sturm chain of the zero polynomial");
  chain.push_back(p0);
  if (p0.degree() == 0) return chain;
  Poly p1 = p0.derivative().pruned();
  while (!p1.isZero()) {
    chain.push_back(p1 * (1.0 / std::abs(p1.leading())));
    if (p1.degree() == 0) break;
    Poly r = (polyRemainder(chain[chain.size() - 2], chain.back()) * -1.0).pruned();
    p1 = r;
  }
  return chain;
}

inline int signVariations(const std::vector<Poly>& chain, double x) {
  int variations = 0, last = 0;
  for (const auto& q : chain) {
    const int s = signOf(q(x));
    if (s != 0) {
      if (last != 0 && s != last) ++variations;
      last = s;
    }
  }
  return variations;
}

}  // namespace detail

/* All real roots of a polynomial of degree <= 3 (after pruning), ascending,
   multiple roots reported once. Closed form (trigonometric for the
   three-real-root case, Cardano otherwise) plus one round of Newton polish
   against the original coefficients. */
inline std::vector<double> cubicRoots(const Poly& pIn) {
  const Poly p = pIn.pruned();
  if (p.isZero()) throw DegeneratePoly("cubicRoots of the zero polynomial");
  const int deg = p.degree();
  if (deg > 3) throw DegeneratePoly("cubicRoots called with degree > 3");
  const auto& c = p.coeffs();

  std::vector<double> roots;
  if (deg == 0) {
    return roots;  // nonzero constant: no roots
  } else if (deg == 1) {
    roots.push_back(-c[0] / c[1]);
  } else if (deg == 2) {
    const double a = c[2], b = c[1], c0 = c[0];
    const double disc = b * b - 4.0 * a * c0;
    if (disc < 0.0) return roots;
    const double sq = std::sqrt(disc);
    // Citardauq form on one side to avoid cancellation
    const double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
    roots.push_back(q / a);
    if (q != 0.0)
      roots.push_back(c0 / q);
    else
      roots.push_back(-b / (2.0 * a));  // b == 0 and disc == 0
  } else {
    const double a = c[2] / c[3], b = c[1] / c[3], d = c[0] / c[3];
    // depressed form t^3 + pt + q with x = t - a/3
    const double pp = b - a * a / 3.0;
    const double qq = 2.0 * a * a * a / 27.0 - a * b / 3.0 + d;
    const double shift = -a / 3.0;
    const double disc = 0.25 * qq * qq + pp * pp * pp / 27.0;
    if (disc <= 0.0) {
      // three real roots: trigonometric method
      const double m = 2.0 * std::sqrt(std::max(-pp / 3.0, 0.0));
      double arg = (m > 0.0) ? 3.0 * qq / (pp * m) : 0.0;
      arg = std::clamp(arg, -1.0, 1.0);
      const double theta = std::acos(arg) / 3.0;
      for (int k = 0; k < 3; ++k)
        roots.push_back(shift + m * std::cos(theta - 2.0 * M_PI * k / 3.0));
    } else {
      const double w = -0.5 * qq;
      const double s = std::sqrt(disc);
      const double u3 = w + (w >= 0.0 ? s : -s);  // same-sign add: no cancellation
      const double u = std::cbrt(u3);
      const double v = (u != 0.0) ? -pp / (3.0 * u) : 0.0;
      roots.push_back(shift + u + v);
    }
  }

  // one Newton step each (skipped where the derivative is tiny)
  const Poly dp = p.derivative();
  for (double& r : roots) {
    const double der = dp(r);
    if (std::abs(der) > 1e-300) {
      const double r2 = r - p(r) / der;
      if (std::abs(p(r2)) <= std::abs(p(r))) r = r2;
    }
  }

  std::sort(roots.begin(), roots.end());
  std::vector<double> unique;
  for (double r : roots)
    if (unique.empty() || std::abs(r - unique.back()) > 4e-8 * std::max(1.0, std::abs(r)))
      unique.push_back(r);
  return unique;
}

/* Number of distinct real roots in (lo, hi]; endpoints that are exact roots
   get nudged inward by 1e-14 first. */
inline int sturmCount(const Poly& pIn, double lo, double hi) {
  const Poly p = pIn.pruned();
  if (p.isZero()) throw DegeneratePoly("sturmCount of the zero polynomial");
  if (p.degree() == 0) return 0;
  if (p(lo) == 0.0) lo += 1e-14 * std::max(1.0, std::abs(lo));
  if (p(hi) == 0.0) hi -= 1e-14 * std::max(1.0, std::abs(hi));
  if (!(lo < hi)) return 0;
  const auto chain = detail::sturmChain(p);
  return detail::signVariations(chain, lo) - detail::signVariations(chain, hi);
}

/* Smallest root in (lo, hi), located to width <= tol. Sturm bisection
   isolates the leftmost root to a 1e-3 bracket, Newton polishes from its
   midpoint; if Newton stalls (multiple roots, flat spots) bisection carries
   on alone. Returns nothing when the interval holds no root. */
inline std::optional<double> firstRoot(const Poly& pIn, double lo, double hi,
                                       double tol = 1e-12) {
  const Poly p = pIn.pruned();
  if (p.isZero()) throw DegeneratePoly("firstRoot of the zero polynomial");
  if (p.degree() == 0) return std::nullopt;
  double a = lo, b = hi;
  if (p(a) == 0.0) a += 1e-14 * std::max(1.0, std::abs(a));
  if (p(b) == 0.0) b -= 1e-14 * std::max(1.0, std::abs(b));
  if (!(a < b)) return std::nullopt;

  const auto chain = detail::sturmChain(p);
  const auto countIn = [&](double x, double y) {
    return detail::signVariations(chain, x) - detail::signVariations(chain, y);
  };
  if (countIn(a, b) <= 0) return std::nullopt;

  const double coarse = std::max(tol, 1e-3);
  while (b - a > coarse) {
    const double mid = 0.5 * (a + b);
    if (countIn(a, mid) >= 1)
      b = mid;
    else
      a = mid;
  }

  // Newton from the bracket midpoint, confined to a slightly padded bracket
  const Poly dp = p.derivative();
  const double pad = (b - a);
  double x = 0.5 * (a + b);
  for (int it = 0; it < 50; ++it) {
    const double der = dp(x);
    if (std::abs(der) < 1e-300) break;
    const double step = p(x) / der;
    const double xn = x - step;
    if (xn < a - pad || xn > b + pad) break;
    x = xn;
    if (std::abs(step) <= 0.5 * tol) return std::clamp(x, lo, hi);
  }

  // fallback: keep bisecting on Sturm counts down to tol
  while (b - a > tol) {
    const double mid = 0.5 * (a + b);
    if (countIn(a, mid) >= 1)
      b = mid;
    else
      a = mid;
  }
  return 0.5 * (a + b);
}

}  // namespace ngrhmc
