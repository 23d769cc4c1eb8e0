#pragma once

// Exponential-race simulation of any GeneratorView, occupation measures and
// their comparison with analytic laws, plus regenerative ratio estimators
// for chains modified by acceptance probabilities.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

#include "renvnet/chain_core.hpp"
#include "renvnet/errors.hpp"
#include "renvnet/generator.hpp"
#include "renvnet/randomization.hpp"
#include "renvnet/rng.hpp"

namespace renvnet {

struct Budget {
  std::optional<std::uint64_t> events;
  std::optional<double> time;

  static Budget of_events(std::uint64_t n) { return {n, std::nullopt}; }
  static Budget of_time(double t) { return {std::nullopt, t}; }
};

struct RunSummary {
  std::uint64_t events = 0;
  double total_time = 0.0;
  bool absorbed = false;
};

template <class State>
struct Trajectory {
  State initial;
  std::vector<std::pair<double, State>> events;  // (jump time, new state)
  double total_time = 0.0;
  bool absorbed = false;
};

template <class State>
struct OccupationMeasure {
  std::map<State, double> fractions;
  double total_time = 0.0;

  double operator()(const State& s) const {
    const auto it = fractions.find(s);
    return it == fractions.end() ? 0.0 : it->second;
  }
};

/// Core simulation loop. `on_sojourn(state, duration)` is called for every
/// completed sojourn, including the final one cut at the time horizon.
/// `on_jump(time, state)` is called after every jump. All randomness comes
/// from substream (seed, 0).
template <class State, class OnSojourn, class OnJump>
RunSummary run_ctmc(const GeneratorView<State>& gen, State state, const Budget& budget,
                    std::uint64_t seed, OnSojourn&& on_sojourn, OnJump&& on_jump) {
  if (!budget.events && !budget.time)
    throw Error(ErrorCode::InvalidArgument, "simulation budget is empty");
  if ((budget.events && *budget.events == 0) || (budget.time && !(*budget.time > 0.0)))
    throw Error(ErrorCode::InvalidArgument, "simulation budget must be positive");
  CounterRng rng(seed, 0);
  RunSummary summary;
  for (;;) {
    if (budget.events && summary.events >= *budget.events) break;
    const TransitionList<State> out = gen.outgoing(state);
    double total = 0.0;
    for (const auto& t : out) total += t.rate;
    if (!(total > 0.0)) {
      summary.absorbed = true;
      if (budget.time) {
        on_sojourn(state, *budget.time - summary.total_time);
        summary.total_time = *budget.time;
      }
      break;
    }
    const double hold = rng.exponential(total);
    if (budget.time && summary.total_time + hold >= *budget.time) {
      on_sojourn(state, *budget.time - summary.total_time);
      summary.total_time = *budget.time;
      break;
    }
    on_sojourn(state, hold);
    summary.total_time += hold;
    const double pick = rng.uniform() * total;
    std::size_t chosen = out.size() - 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      acc += out[i].rate;
      if (pick < acc) {
        chosen = i;
        break;
      }
    }
    state = out[chosen].state;
    ++summary.events;
    on_jump(summary.total_time, state);
  }
  return summary;
}

template <class State>
Trajectory<State> simulate_ctmc(const GeneratorView<State>& gen, const State& init,
                                const Budget& budget, std::uint64_t seed) {
  Trajectory<State> traj;
  traj.initial = init;
  const RunSummary s = run_ctmc(
      gen, init, budget, seed, [](const State&, double) {},
      [&](double t, const State& st) { traj.events.emplace_back(t, st); });
  traj.total_time = s.total_time;
  traj.absorbed = s.absorbed;
  return traj;
}

template <class State>
OccupationMeasure<State> occupation(const Trajectory<State>& traj) {
  OccupationMeasure<State> occ;
  occ.total_time = traj.total_time;
  if (!(traj.total_time > 0.0)) return occ;
  double last = 0.0;
  const State* current = &traj.initial;
  for (const auto& [t, s] : traj.events) {
    occ.fractions[*current] += t - last;
    last = t;
    current = &s;
  }
  if (traj.total_time > last) occ.fractions[*current] += traj.total_time - last;
  for (auto& [s, v] : occ.fractions) v /= traj.total_time;
  return occ;
}

/// Time-weighted occupation of proj(state), accumulated on the fly.
template <class State, class Projection>
auto simulate_occupation(const GeneratorView<State>& gen, const State& init,
                         const Budget& budget, std::uint64_t seed, Projection&& proj) {
  using Key = std::decay_t<decltype(proj(init))>;
  OccupationMeasure<Key> occ;
  const RunSummary s = run_ctmc(
      gen, init, budget, seed,
      [&](const State& st, double dt) { occ.fractions[proj(st)] += dt; },
      [](double, const State&) {});
  occ.total_time = s.total_time;
  if (s.total_time > 0.0)
    for (auto& [k, v] : occ.fractions) v /= s.total_time;
  return occ;
}

/// 1/2 sum_{s in support} |occ(s) - pmf(s)| + 1/2 |occ outside - pmf outside|
template <class State, class Pmf>
double empirical_compare(const OccupationMeasure<State>& occ, const Pmf& pmf,
                         std::span<const std::type_identity_t<State>> support) {
  double tv = 0.0, occ_in = 0.0, pmf_in = 0.0;
  for (const State& s : support) {
    const double o = occ(s), p = pmf(s);
    tv += std::abs(o - p);
    occ_in += o;
    pmf_in += p;
  }
  tv += std::abs((1.0 - occ_in) - (1.0 - pmf_in));
  return 0.5 * tv;
}

struct RegenerativeEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::uint64_t replications = 0;
};

using StateFunction = std::function<double(std::size_t)>;

/// Ratio estimator of sum_x f(x) eta_x from `cycles` regeneration cycles of
/// the modified chain X^(alpha) started at `anchor`:
///   sum_cycles sum f(X)/alpha(X)  /  sum_cycles sum 1/alpha(X).
/// Cycle c uses substream (seed, c). Requires every alpha_j > 0.
RegenerativeEstimate regenerative_estimate(const RoutingMatrix& r,
                                           const AcceptanceVector& alpha,
                                           const StateFunction& f, std::size_t anchor,
                                           std::uint64_t cycles, std::uint64_t seed,
                                           RerouteMode mode = RerouteMode::skipping);

/// Same target, estimated from the non-absorbing auxiliary chain (X, Y):
/// every step draws a candidate from r and accepts it (Y = 1) with
/// probability alpha. Cycles run from (anchor, 1) back to (anchor, 1) and
/// accumulate f(X) Y / alpha(X) and Y / alpha(X), with 0/0 := 0. Only the
/// anchor needs positive acceptance.
RegenerativeEstimate simulate_augmented_chain(const RoutingMatrix& r,
                                              const AcceptanceVector& alpha,
                                              std::size_t anchor, std::uint64_t cycles,
                                              std::uint64_t seed, const StateFunction& f);

}  // namespace renvnet
