#pragma once

#include <string>

#include <Eigen/Dense>

#include "ngrhmc/constraints.hpp"
#include "ngrhmc/errors.hpp"
#include "ngrhmc/rng.hpp"

namespace ngrhmc {

struct CollisionEvent {
  double time = 0.0;
  int constraintIndex = -1;
  Eigen::VectorXd qbar;       // standardized position on the boundary
  Eigen::VectorXd pIncoming;  // momentum just before impact
  NormalVector normal;
};

enum class KernelType { Deterministic, Randomized, SparseRandomized };

inline const char* kernelName(KernelType k) {
  switch (k) {
    case KernelType::Deterministic: return "deterministic";
    case KernelType::Randomized: return "randomized";
    case KernelType::SparseRandomized: return "sparse-randomized";
  }
  return "?";
}

inline KernelType parseKernel(const std::string& name) {
  if (name == "deterministic") return KernelType::Deterministic;
  if (name == "randomized") return KernelType::Randomized;
  if (name == "sparse-randomized") return KernelType::SparseRandomized;
  throw ConfigError("unknown boundary kernel '" + name +
                    "' (expected deterministic | randomized | sparse-randomized)");
}

/* All three kernels flip the sign of the momentum's component along the
   normal (p_out.n = -p_in.n exactly, in exact arithmetic) while preserving
   the standard-normal momentum law. Inner products are accumulated with
   plain ascending-index loops so the dense and sparse randomized kernels
   produce bit-identical results when the active set covers every
   coordinate. */

inline Eigen::VectorXd reflectDeterministic(const Eigen::VectorXd& p, const NormalVector& n) {
  double dot = 0.0, sq = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    dot += p[i] * n.vec[i];
    sq += n.vec[i] * n.vec[i];
  }
  if (sq <= 0.0) throw DegenerateNormal("reflection against a zero normal");
  return p - (2.0 * dot / sq) * n.vec;
}

// full momentum refresh z ~ N(0,I) with the component along n forced to
// reverse the incoming normal velocity
inline Eigen::VectorXd reflectRandomized(const Eigen::VectorXd& p, const NormalVector& n,
                                         Rng& rng) {
  const int d = static_cast<int>(p.size());
  Eigen::VectorXd z(d);
  for (int i = 0; i < d; ++i) z[i] = rng.normal();
  double dot = 0.0, sq = 0.0;
  for (int i = 0; i < d; ++i) {
    dot += (p[i] + z[i]) * n.vec[i];
    sq += n.vec[i] * n.vec[i];
  }
  if (sq <= 0.0) throw DegenerateNormal("reflection against a zero normal");
  const double theta = dot / sq;
  Eigen::VectorXd out(d);
  for (int i = 0; i < d; ++i) out[i] = z[i] - theta * n.vec[i];
  return out;
}

// same construction restricted to the constraint's active coordinates; the
// complement of the active set passes through bitwise untouched
inline Eigen::VectorXd reflectSparseRandomized(const Eigen::VectorXd& p, const NormalVector& n,
                                               Rng& rng) {
  Eigen::VectorXd out = p;
  const auto& act = n.activeSet;
  Eigen::VectorXd z(act.size());
  for (std::size_t k = 0; k < act.size(); ++k) z[k] = rng.normal();
  double dot = 0.0, sq = 0.0;
  for (std::size_t k = 0; k < act.size(); ++k) {
    const int i = act[k];
    dot += (p[i] + z[k]) * n.vec[i];
    sq += n.vec[i] * n.vec[i];
  }
  if (sq <= 0.0) throw DegenerateNormal("reflection against a zero normal");
  const double theta = dot / sq;
  for (std::size_t k = 0; k < act.size(); ++k) {
    const int i = act[k];
    out[i] = z[k] - theta * n.vec[i];
  }
  return out;
}

inline Eigen::VectorXd applyKernel(KernelType kernel, const Eigen::VectorXd& p,
                                   const NormalVector& n, Rng& rng) {
  switch (kernel) {
    case KernelType::Deterministic: return reflectDeterministic(p, n);
    case KernelType::Randomized: return reflectRandomized(p, n, rng);
    case KernelType::SparseRandomized: return reflectSparseRandomized(p, n, rng);
  }
  throw Error("unreachable kernel type");
}

}  // namespace ngrhmc
