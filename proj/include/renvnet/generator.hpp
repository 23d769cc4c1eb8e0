#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <type_traits>
#include <vector>

namespace renvnet {

/// Queue-length vector; entry j-1 holds the number of customers at node j.
using QueueVector = std::vector<int>;

template <class State>
struct Transition {
  State state;  // target for outgoing lists, source for incoming lists
  double rate;
};

template <class State>
using TransitionList = std::vector<Transition<State>>;

/// Lazily evaluated CTMC generator. `outgoing(s)` lists every positive-rate
/// jump out of s (no self-loops). `incoming(s)` lists every (source, rate)
/// pair with a jump into s; it is built by inverting the same rules, so a
/// balance check over a finite probe set involves no truncation.
template <class State>
struct GeneratorView {
  std::function<TransitionList<State>(const State&)> outgoing;
  std::function<TransitionList<State>(const State&)> incoming;
};

/// max over probe states s of |pmf(s) * sum_out rate - sum_in pmf(m) * rate|
template <class State, class Pmf, class InFlows>
double verify_global_balance(const Pmf& pmf, const GeneratorView<State>& gen,
                             const InFlows& in_flows,
                             std::span<const std::type_identity_t<State>> states) {
  double worst = 0.0;
  for (const State& s : states) {
    double out_rate = 0.0;
    for (const auto& t : gen.outgoing(s)) out_rate += t.rate;
    double inflow = 0.0;
    for (const auto& t : in_flows(s)) inflow += pmf(t.state) * t.rate;
    worst = std::max(worst, std::abs(pmf(s) * out_rate - inflow));
  }
  return worst;
}

template <class State, class Pmf>
double verify_global_balance(const Pmf& pmf, const GeneratorView<State>& gen,
                             std::span<const std::type_identity_t<State>> states) {
  return verify_global_balance(pmf, gen, gen.incoming, states);
}

/// All vectors in {0..bound}^nodes, last coordinate varying fastest.
inline std::vector<QueueVector> box_states(std::size_t nodes, int bound) {
  std::vector<QueueVector> out;
  QueueVector n(nodes, 0);
  for (;;) {
    out.push_back(n);
    std::size_t pos = nodes;
    while (pos > 0) {
      --pos;
      if (n[pos] < bound) {
        ++n[pos];
        break;
      }
      n[pos] = 0;
      if (pos == 0) return out;
    }
    if (nodes == 0) return out;
  }
}

}  // namespace renvnet
