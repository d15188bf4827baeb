#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <deque>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "ngrhmc/boundary.hpp"
#include "ngrhmc/constraints.hpp"
#include "ngrhmc/errors.hpp"
#include "ngrhmc/integrator.hpp"
#include "ngrhmc/rng.hpp"
#include "ngrhmc/target.hpp"

namespace ngrhmc {

struct SamplerConfig {
  double totalTime = 10000.0;     // process time including burn-in
  double burnInFraction = 0.5;    // 0 disables burn-in entirely
  int sampleCount = 1000;         // discrete samples per chain, evenly spaced
  double refreshRate = 0.5;       // constant momentum-refresh intensity
  KernelType kernel = KernelType::SparseRandomized;
  StepControl control;
  std::uint64_t seed = 1;
  int chains = 4;
  int workers = 0;  // 0: NGRHMC_WORKERS env var, else hardware concurrency

  /* false freezes (m, S) at initialStandardization for the whole run: the
     fixed-tuning mode used by the kernel-comparison demo and fidelity
     tests. */
  bool adaptStandardization = true;

  Eigen::VectorXd initial;             // original coordinates; empty: feasible search
  Eigen::VectorXd initialMomentum;     // standardized; empty: N(0, I) draw
  std::optional<Standardization> initialStandardization;

  double maxEventsPerUnitTime = 1e4;
  long feasibleSearchTries = 100000;
  bool recordEvents = false;
  bool recordTrace = false;
};

inline void validateConfig(const SamplerConfig& cfg, int dim) {
  const auto fail = [](const std::string& m) { throw ConfigError("sampler config: " + m); };
  if (!(cfg.totalTime > 0.0)) fail("totalTime must be positive");
  if (!(cfg.burnInFraction >= 0.0 && cfg.burnInFraction < 1.0))
    fail("burnInFraction must lie in [0, 1)");
  if (cfg.sampleCount < 2) fail("sampleCount must be at least 2");
  if (!(cfg.refreshRate > 0.0)) fail("refreshRate must be positive");
  if (cfg.chains < 1) fail("chains must be at least 1");
  if (!(cfg.control.absTol > 0.0) || !(cfg.control.relTol > 0.0))
    fail("step tolerances must be positive");
  if (!(cfg.control.hMin > 0.0) || !(cfg.control.hMin < cfg.control.hMax))
    fail("step bounds must satisfy 0 < hMin < hMax");
  if (cfg.initial.size() != 0 && cfg.initial.size() != dim)
    fail("initial point has dimension " + std::to_string(cfg.initial.size()) +
         ", model has " + std::to_string(dim));
  if (cfg.initialMomentum.size() != 0 && cfg.initialMomentum.size() != dim)
    fail("initial momentum has the wrong dimension");
  if (cfg.initialStandardization &&
      (cfg.initialStandardization->dim() != dim ||
       (cfg.initialStandardization->scale.array() <= 0.0).any()))
    fail("initial standardization must have positive scales of model dimension");
  if (!(cfg.maxEventsPerUnitTime > 0.0)) fail("maxEventsPerUnitTime must be positive");
}

enum class EventKind { Refresh, Collision };

struct EventRecord {
  double time = 0.0;  // phase-local clock
  EventKind kind = EventKind::Refresh;
  int constraintIndex = -1;
  Eigen::VectorXd q;  // original coordinates
};

struct TrajectoryOutput {
  Eigen::MatrixXd samples;       // sampleCount x dim, original coordinates
  Eigen::VectorXd sampleTimes;   // sampling-phase clock
  Eigen::VectorXd timeAverages;  // one per monitor: R_k(T)/T
  Standardization standardization{Eigen::VectorXd(), Eigen::VectorXd()};
  std::vector<EventRecord> events;  // sampling phase, when recorded
  Eigen::MatrixXd trace;            // committed step endpoints (t, q...), when recorded
  long refreshCount = 0;
  long collisionCount = 0;
  std::vector<long> collisionsPerConstraint;
  long acceptedSteps = 0;
  long rejectedSteps = 0;
  long cornerRetries = 0;
  double burnInSeconds = 0.0;
  double samplingSeconds = 0.0;
};

/* First step fraction where the refresh integral reaches the exponential
   threshold, from the Hermite cubic of the integral component. */
inline std::optional<double> refreshEventTime(const DenseStep& step, const StateLayout& layout,
                                              double threshold) {
  Poly c = step.componentCubic(layout.refreshIndex()) + Poly::constant(-threshold);
  try {
    for (double r : cubicRoots(c))
      if (r > 0.0 && r < 1.0) return r;
  } catch (const DegeneratePoly&) {
  }
  return std::nullopt;
}

namespace detail {

struct PhaseCounters {
  long accepted = 0, rejected = 0, corners = 0, refreshes = 0, collisions = 0;
  std::vector<long> perConstraint;
};

/* One phase of the process on [0, horizon]: adaptive steps, event location,
   kernel application, and harvesting of the evenly spaced discrete samples.
   The state vector layout is the integrator's, standardization fixed for the
   phase. Returns the final ODE state. */
inline Eigen::VectorXd runPhase(const TargetModel& model,
                                const std::vector<Constraint>& constraints,
                                const SamplerConfig& cfg, const Standardization& st,
                                double horizon, Eigen::VectorXd y, Rng& rng,
                                Eigen::MatrixXd* samplesOut, Eigen::VectorXd* sampleTimesOut,
                                PhaseCounters& counters, std::vector<EventRecord>* eventsOut,
                                std::vector<Eigen::VectorXd>* traceOut) {
  HamiltonianSystem sys(model, st, cfg.refreshRate);
  const StateLayout layout = sys.layout();
  const int d = layout.dim;
  BS32Stepper<HamiltonianSystem> stepper(sys, cfg.control, layout.size());
  counters.perConstraint.assign(constraints.size(), 0);

  const int N = cfg.sampleCount;
  const auto sampleTime = [&](int s) {
    return horizon * static_cast<double>(s) / static_cast<double>(N - 1);
  };
  int nextSample = 0;

  // feasibility of the phase's start point (post-collision states sit on the
  // boundary, so only clear violations count)
  {
    const Eigen::VectorXd q0 = st.map(y.head(d));
    for (std::size_t r = 0; r < constraints.size(); ++r)
      if (constraints[r].evaluate(q0) < -1e-8)
        throw InfeasibleStart("phase start violates constraint " + std::to_string(r));
  }

  double t = 0.0;
  double h = std::clamp(cfg.control.hInit, cfg.control.hMin, cfg.control.hMax);
  double threshold = rng.exponential();
  std::deque<std::pair<double, int>> recentCollisions;
  DenseStep dense;
  const double endTol = 1e-12 * std::max(1.0, horizon);

  while (horizon - t > endTol) {
    const double hTry = std::max(std::min(h, horizon - t), cfg.control.hMin);
    const auto att = stepper.attemptStep(y, t, hTry, dense);
    if (!att.finite) {
      if (hTry <= cfg.control.hMin * (1.0 + 1e-12))
        throw NonFiniteEvaluation("dynamics non-finite at the minimum step size, t = " +
                                  std::to_string(t));
      ++counters.rejected;
      h = att.hNext;
      continue;
    }
    if (!att.accepted) {
      ++counters.rejected;
      h = att.hNext;
      continue;
    }

    const double eps = dense.width();
    const auto hRefresh = refreshEventTime(dense, layout, threshold);
    double hCollision = 2.0;
    int hitIndex = -1;
    bool corner = false;
    for (std::size_t r = 0; r < constraints.size(); ++r) {
      try {
        const auto hr = constraints[r].locateCollision(dense, st);
        if (hr && *hr < hCollision) {
          hCollision = *hr;
          hitIndex = static_cast<int>(r);
        }
      } catch (const AmbiguousSign&) {
        corner = true;
        break;
      }
    }
    if (corner) {
      if (eps <= 4.0 * cfg.control.hMin)
        throw AmbiguousSign("persistent l1 corner near t = " + std::to_string(t));
      ++counters.corners;
      h = std::max(0.5 * eps, cfg.control.hMin);
      stepper.invalidateDerivative();  // the accepted attempt advanced the FSAL cache
      continue;
    }

    // a refresh only wins a tie-free race; exact ties go to the collision
    const bool haveRefresh = hRefresh.has_value();
    const bool haveCollision = hitIndex >= 0;
    const bool isEvent = haveRefresh || haveCollision;
    const bool isRefresh = haveRefresh && (!haveCollision || *hRefresh < hCollision);
    const double hEvent = isEvent ? (isRefresh ? *hRefresh : hCollision) : 1.0;
    const double tCommit = isEvent ? t + hEvent * eps : dense.t1;
    Eigen::VectorXd yCommit = isEvent ? dense.eval(tCommit) : dense.y1;

    // resolve the collision before harvesting so a corner can still retry
    Eigen::VectorXd pNew;
    if (isEvent && !isRefresh) {
      NormalVector normal;
      try {
        normal = constraints[hitIndex].inwardNormal(st, yCommit.head(d));
      } catch (const AmbiguousSign&) {
        if (hEvent * eps <= 4.0 * cfg.control.hMin)
          throw AmbiguousSign("persistent l1 corner near t = " + std::to_string(tCommit));
        ++counters.corners;
        h = std::max(0.5 * hEvent * eps, cfg.control.hMin);
        stepper.invalidateDerivative();
        continue;
      }
      pNew = applyKernel(cfg.kernel, yCommit.segment(d, d), normal, rng);
    }

    while (nextSample < N && sampleTime(nextSample) < tCommit) {
      const double ts = sampleTime(nextSample);
      const Eigen::VectorXd ys = dense.eval(ts);
      if (samplesOut) samplesOut->row(nextSample) = st.map(ys.head(d));
      if (sampleTimesOut) (*sampleTimesOut)[nextSample] = ts;
      ++nextSample;
    }
    ++counters.accepted;

    if (!isEvent) {
      y = dense.y1;
      t = dense.t1;
      h = att.hNext;
    } else {
      y = std::move(yCommit);
      t = tCommit;
      if (isRefresh) {
        for (int i = 0; i < d; ++i) y[d + i] = rng.normal();
        y[layout.refreshIndex()] = 0.0;
        threshold = rng.exponential();
        ++counters.refreshes;
        if (eventsOut)
          eventsOut->push_back({t, EventKind::Refresh, -1, st.map(y.head(d))});
      } else {
        y.segment(d, d) = pNew;
        ++counters.collisions;
        ++counters.perConstraint[hitIndex];
        if (eventsOut)
          eventsOut->push_back({t, EventKind::Collision, hitIndex, st.map(y.head(d))});
        recentCollisions.emplace_back(t, hitIndex);
        while (!recentCollisions.empty() && recentCollisions.front().first < t - 1.0)
          recentCollisions.pop_front();
        if (static_cast<double>(recentCollisions.size()) > cfg.maxEventsPerUnitTime) {
          std::vector<long> tally(constraints.size(), 0);
          for (const auto& [tc, idx] : recentCollisions) ++tally[idx];
          const int worst = static_cast<int>(
              std::max_element(tally.begin(), tally.end()) - tally.begin());
          throw EventStorm("constraint " + std::to_string(worst) + " fired " +
                           std::to_string(tally[worst]) +
                           " collisions within one time unit near t = " + std::to_string(t));
        }
      }
      stepper.invalidateDerivative();
      h = std::max(eps * (1.0 - hEvent), cfg.control.hMin);
    }

    if (traceOut) {
      Eigen::VectorXd row(1 + d);
      row[0] = t;
      row.tail(d) = st.map(y.head(d));
      traceOut->push_back(std::move(row));
    }
  }

  // remaining sample slots (times at or within rounding of the horizon) take
  // the final state
  while (nextSample < N) {
    if (samplesOut) samplesOut->row(nextSample) = st.map(y.head(d));
    if (sampleTimesOut) (*sampleTimesOut)[nextSample] = sampleTime(nextSample);
    ++nextSample;
  }
  return y;
}

}  // namespace detail

/* One chain of the process: optional burn-in phase under the initial
   standardization, a one-shot re-standardization from the burn-in samples,
   then the sampling phase that produces the discrete samples and the
   time-integrated monitor averages. */
inline TrajectoryOutput runTrajectory(const TargetModel& model,
                                      const std::vector<Constraint>& constraints,
                                      const SamplerConfig& cfg, int chainIndex) {
  validateConfig(cfg, model.dim);
  for (const auto& c : constraints)
    if (c.inputDim() != model.dim)
      throw ConfigError("constraint dimension does not match the model");

  Rng rng(cfg.seed, static_cast<std::uint64_t>(chainIndex));
  const int d = model.dim;
  const Standardization st0 =
      cfg.initialStandardization ? *cfg.initialStandardization : Standardization::identity(d);

  // starting point, strictly feasible
  Eigen::VectorXd q0;
  if (cfg.initial.size() == d) {
    q0 = cfg.initial;
    for (std::size_t r = 0; r < constraints.size(); ++r)
      if (!(constraints[r].evaluate(q0) > 0.0))
        throw InfeasibleStart("initial point violates constraint " + std::to_string(r));
  } else {
    bool found = false;
    for (long k = 0; k < cfg.feasibleSearchTries && !found; ++k) {
      q0 = st0.map(rng.normalVector(d));
      found = true;
      for (const auto& c : constraints)
        if (!(c.evaluate(q0) > 0.0)) {
          found = false;
          break;
        }
    }
    if (!found)
      throw InfeasibleStart("no strictly feasible start found in " +
                            std::to_string(cfg.feasibleSearchTries) + " proposals");
  }

  TrajectoryOutput out;
  out.collisionsPerConstraint.assign(constraints.size(), 0);
  const StateLayout layout{d, model.monitorCount()};

  Eigen::VectorXd y = Eigen::VectorXd::Zero(layout.size());
  y.head(d) = st0.unmap(q0);
  if (cfg.initialMomentum.size() == d)
    y.segment(d, d) = cfg.initialMomentum;
  else
    y.segment(d, d) = rng.normalVector(d);

  const double burnTime = cfg.totalTime * cfg.burnInFraction;
  const double sampleTimeSpan = cfg.totalTime - burnTime;
  Standardization st = st0;

  if (burnTime > 0.0) {
    const auto t0 = std::chrono::steady_clock::now();
    Eigen::MatrixXd burnSamples(cfg.sampleCount, d);
    detail::PhaseCounters burnCounters;
    y = detail::runPhase(model, constraints, cfg, st0, burnTime, std::move(y), rng,
                         &burnSamples, nullptr, burnCounters, nullptr, nullptr);
    out.acceptedSteps += burnCounters.accepted;
    out.rejectedSteps += burnCounters.rejected;
    out.cornerRetries += burnCounters.corners;
    out.burnInSeconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (cfg.adaptStandardization) {
      RunningMoments moments(d);
      for (int i = 0; i < burnSamples.rows(); ++i)
        moments.update(burnSamples.row(i).transpose());
      st = moments.toStandardization();
    }

    // relaunch at the burn-in endpoint: same position, fresh momentum,
    // refresh clock and monitor integrals reset
    const Eigen::VectorXd qEnd = st0.map(y.head(d));
    y.setZero();
    y.head(d) = st.unmap(qEnd);
    y.segment(d, d) = rng.normalVector(d);
  }

  out.samples.resize(cfg.sampleCount, d);
  out.sampleTimes.resize(cfg.sampleCount);
  detail::PhaseCounters counters;
  std::vector<EventRecord> events;
  std::vector<Eigen::VectorXd> trace;
  const auto t1 = std::chrono::steady_clock::now();
  y = detail::runPhase(model, constraints, cfg, st, sampleTimeSpan, std::move(y), rng,
                       &out.samples, &out.sampleTimes, counters,
                       cfg.recordEvents ? &events : nullptr,
                       cfg.recordTrace ? &trace : nullptr);
  out.samplingSeconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();

  out.acceptedSteps += counters.accepted;
  out.rejectedSteps += counters.rejected;
  out.cornerRetries += counters.corners;
  out.refreshCount = counters.refreshes;
  out.collisionCount = counters.collisions;
  out.collisionsPerConstraint = counters.perConstraint;
  out.events = std::move(events);
  if (!trace.empty()) {
    out.trace.resize(static_cast<int>(trace.size()), 1 + d);
    for (std::size_t i = 0; i < trace.size(); ++i) out.trace.row(static_cast<int>(i)) = trace[i];
  }
  out.timeAverages = y.tail(model.monitorCount()) / sampleTimeSpan;
  out.standardization = st;
  return out;
}

inline int resolveWorkerCount(const SamplerConfig& cfg) {
  if (const char* env = std::getenv("NGRHMC_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return std::min(w, cfg.chains);
  }
  if (cfg.workers > 0) return std::min(cfg.workers, cfg.chains);
  const unsigned hw = std::thread::hardware_concurrency();
  return std::min<int>(hw > 0 ? static_cast<int>(hw) : 1, cfg.chains);
}

/* All chains, worker-pool parallel. Each chain's randomness comes only from
   (seed, chain index), and results land in slots indexed by chain, so the
   output is bit-identical for any worker count. */
inline std::vector<TrajectoryOutput> runChains(const TargetModel& model,
                                               const std::vector<Constraint>& constraints,
                                               const SamplerConfig& cfg) {
  validateConfig(cfg, model.dim);
  const int workers = resolveWorkerCount(cfg);
  std::vector<TrajectoryOutput> outputs(cfg.chains);

  if (workers <= 1) {
    for (int c = 0; c < cfg.chains; ++c)
      outputs[c] = runTrajectory(model, constraints, cfg, c);
    return outputs;
  }

  std::atomic<int> nextChain{0};
  std::exception_ptr firstError;
  std::mutex errorMutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const int c = nextChain.fetch_add(1);
        if (c >= cfg.chains) return;
        try {
          outputs[c] = runTrajectory(model, constraints, cfg, c);
        } catch (...) {
          std::lock_guard<std::mutex> lock(errorMutex);
          if (!firstError) firstError = std::current_exception();
          return;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (firstError) std::rethrow_exception(firstError);
  return outputs;
}

}  // namespace ngrhmc
