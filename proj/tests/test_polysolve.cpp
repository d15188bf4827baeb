#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <optional>
#include <vector>

#include "ngrhmc/polysolve.hpp"
#include "ngrhmc/rng.hpp"

using namespace ngrhmc;

namespace {

Poly fromRoots(const std::vector<double>& roots, double leading = 1.0) {
  Poly p = Poly::constant(leading);
  for (double r : roots) p = p * Poly({-r, 1.0});
  return p;
}

// grid-scan oracle: distinct sign changes of p on (lo, hi) at 1e5 points,
// each bracketed crossing bisected; tangential touches are not counted,
// matching what a sign-based count can see
std::vector<double> gridCrossings(const Poly& p, double lo, double hi) {
  const int G = 100000;
  std::vector<double> found;
  double prevT = lo, prevV = p(lo);
  for (int k = 1; k <= G; ++k) {
    const double t = lo + (hi - lo) * static_cast<double>(k) / G;
    const double v = p(t);
    if ((prevV > 0.0 && v < 0.0) || (prevV < 0.0 && v > 0.0)) {
      double a = prevT, b = t, fa = prevV;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (a + b), fm = p(mid);
        if ((fa > 0.0) == (fm > 0.0)) {
          a = mid;
          fa = fm;
        } else {
          b = mid;
        }
      }
      found.push_back(0.5 * (a + b));
    }
    prevT = t;
    prevV = v;
  }
  return found;
}

}  // namespace

TEST_CASE("poly evaluation and arithmetic") {
  const Poly p({1.0, -2.0, 3.0});  // 1 - 2x + 3x^2
  REQUIRE(p(0.0) == 1.0);
  REQUIRE(p(2.0) == 9.0);
  REQUIRE(p.degree() == 2);

  const Poly q({0.0, 1.0});
  const Poly prod = p * q;
  REQUIRE(prod.degree() == 3);
  for (double x : {-1.3, 0.0, 0.7, 2.5}) REQUIRE(prod(x) == Catch::Approx(p(x) * x));

  const Poly sum = p + q;
  for (double x : {-1.3, 0.0, 0.7, 2.5}) REQUIRE(sum(x) == Catch::Approx(p(x) + q(x)));

  const Poly d = p.derivative();
  REQUIRE(d.coeffs() == std::vector<double>{-2.0, 6.0});

  REQUIRE(Poly({0.0, 0.0}).isZero());
  REQUIRE(Poly({1e-20, 1.0}).pruned().coeffs() == std::vector<double>{0.0, 1.0});
}

TEST_CASE("cubic roots: planted triples recovered to 1e-9") {
  const Poly p = fromRoots({0.2, 0.5, 0.9}, 2.0);
  const auto roots = cubicRoots(p);
  REQUIRE(roots.size() == 3);
  REQUIRE(std::abs(roots[0] - 0.2) < 1e-9);
  REQUIRE(std::abs(roots[1] - 0.5) < 1e-9);
  REQUIRE(std::abs(roots[2] - 0.9) < 1e-9);
}

TEST_CASE("cubic roots: low degrees and edge cases") {
  REQUIRE(cubicRoots(Poly({6.0, -3.0})) == std::vector<double>{2.0});

  // quadratic with catastrophic-cancellation bait: x^2 - 1e8 x + 1
  const auto q = cubicRoots(Poly({1.0, -1e8, 1.0}));
  REQUIRE(q.size() == 2);
  REQUIRE(std::abs(q[0] - 1e-8) < 1e-16);
  REQUIRE(std::abs(q[1] - 1e8) < 1e-4);

  REQUIRE(cubicRoots(Poly({1.0, 0.0, 1.0})).empty());  // x^2 + 1
  REQUIRE(cubicRoots(Poly::constant(3.0)).empty());

  // double root reported once
  const auto dbl = cubicRoots(fromRoots({0.4, 0.4, 0.8}));
  REQUIRE(dbl.size() == 2);
  REQUIRE(std::abs(dbl[0] - 0.4) < 1e-6);
  REQUIRE(std::abs(dbl[1] - 0.8) < 1e-9);

  // single real root of an irreducible-over-R cubic
  const auto one = cubicRoots(Poly({-2.0, 0.0, 0.0, 1.0}));  // x^3 = 2
  REQUIRE(one.size() == 1);
  REQUIRE(std::abs(one[0] - std::cbrt(2.0)) < 1e-12);

  REQUIRE_THROWS_AS(cubicRoots(Poly()), DegeneratePoly);
  REQUIRE_THROWS_AS(cubicRoots(fromRoots({0.1, 0.2, 0.3, 0.4})), DegeneratePoly);
}

TEST_CASE("sturm count on a planted degree-6 polynomial") {
  // roots 0.3, 0.6, 0.9 inside (0,1); 2 outside; one complex pair
  const Poly p = fromRoots({0.3, 0.6, 0.9, 2.0}) * Poly({1.0, 0.0, 1.0});
  REQUIRE(sturmCount(p, 0.0, 1.0) == 3);
  REQUIRE(sturmCount(p, 0.0, 0.5) == 1);
  REQUIRE(sturmCount(p, 0.5, 1.0) == 2);
  REQUIRE(sturmCount(p, 1.0, 3.0) == 1);
  REQUIRE(sturmCount(p, 0.31, 0.59) == 0);

  // non-square-free input still counts distinct roots
  const Poly sq = fromRoots({0.5, 0.5});
  REQUIRE(sturmCount(sq, 0.0, 1.0) == 1);

  REQUIRE_THROWS_AS(sturmCount(Poly(), 0.0, 1.0), DegeneratePoly);
}

TEST_CASE("first root: bracketing and polish") {
  const auto r = firstRoot(Poly({-2.0, 0.0, 1.0}), 0.0, 2.0);  // x^2 - 2
  REQUIRE(r.has_value());
  REQUIRE(std::abs(*r - std::sqrt(2.0)) < 1e-10);

  REQUIRE_FALSE(firstRoot(Poly({1.0, 0.0, 1.0}), 0.0, 2.0).has_value());
  REQUIRE_FALSE(firstRoot(Poly({-2.0, 0.0, 1.0}), 0.0, 1.0).has_value());

  // picks the smallest of several roots
  const Poly multi = fromRoots({0.25, 0.5, 0.75, 1.5, 3.0});
  const auto f = firstRoot(multi, 0.0, 1.0);
  REQUIRE(f.has_value());
  REQUIRE(std::abs(*f - 0.25) < 1e-10);
}

TEST_CASE("random polynomials agree with a 1e5-point grid oracle") {
  Rng rng(20240803);
  int nontrivial = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    // planted real roots with >= 1e-3 separation, plus optional complex pairs
    const int nReal = 1 + static_cast<int>(rng.nextU64() % 4);
    const bool addComplex = (rng.nextU64() % 3) == 0;
    std::vector<double> roots;
    for (int k = 0; k < nReal; ++k) {
      for (int tries = 0; tries < 100; ++tries) {
        const double cand = -0.5 + 2.0 * rng.uniform();
        bool ok = true;
        for (double r : roots) ok = ok && std::abs(cand - r) > 1e-3;
        if (ok) {
          roots.push_back(cand);
          break;
        }
      }
    }
    Poly p = fromRoots(roots, 0.5 + rng.uniform());
    if (addComplex) {
      const double re = rng.normal(), im = 0.3 + rng.uniform();
      p = p * Poly({re * re + im * im, -2.0 * re, 1.0});
    }
    if (p.degree() > 6) continue;

    const auto oracle = gridCrossings(p, 0.0, 1.0);
    const int inCount = sturmCount(p, 0.0, 1.0);
    // sturm counts distinct roots; the grid sees sign changes only, so it can
    // never see more than sturm does
    REQUIRE(inCount >= static_cast<int>(oracle.size()));

    const auto first = firstRoot(p, 0.0, 1.0);
    if (!oracle.empty()) {
      REQUIRE(first.has_value());
      REQUIRE(std::abs(*first - oracle.front()) < 1e-8);
      ++nontrivial;
    }
    if (first && !oracle.empty()) REQUIRE(*first <= oracle.front() + 1e-8);

    if (p.degree() <= 3) {
      const auto cr = cubicRoots(p);
      for (double expectedRoot : roots)
        if (expectedRoot > 0.0 && expectedRoot < 1.0) {
          bool matched = false;
          for (double r : cr) matched = matched || std::abs(r - expectedRoot) < 1e-7;
          REQUIRE(matched);
        }
    }
  }
  REQUIRE(nontrivial > 300);  // the trial mix actually exercised the hit path
}
