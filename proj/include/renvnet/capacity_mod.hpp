#pragma once

// Jackson networks whose service capacities are scaled by factors gamma_j,
// with routing rerouted by acceptance probabilities alpha(gamma) and external
// input scaled by beta(gamma) so that every node keeps its utilization.

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "renvnet/chain_core.hpp"
#include "renvnet/generator.hpp"
#include "renvnet/jackson.hpp"
#include "renvnet/randomization.hpp"

namespace renvnet {

class CapacityFactors {
 public:
  explicit CapacityFactors(std::vector<double> gamma);

  std::size_t size() const { return gamma_.size(); }
  /// gamma_j for node j in 1..J
  double operator[](std::size_t j) const { return gamma_[j - 1]; }
  const std::vector<double>& values() const { return gamma_; }
  double max_norm() const;

 private:
  std::vector<double> gamma_;
};

struct ControlPair {
  AcceptanceVector alpha;  // indexed 0..J, alpha_0 = 1
  double beta;
  bool all_blocked;        // every gamma_j is zero
};

ControlPair derive_controls(const CapacityFactors& gamma);

struct NodePartition {
  std::vector<std::size_t> blocked;  // gamma_j == 0
  std::vector<std::size_t> working;  // gamma_j > 0
};

NodePartition partition_nodes(const CapacityFactors& gamma);

/// Network after a capacity change: controls plus the rerouted kernel.
class ModifiedNetwork {
 public:
  ModifiedNetwork(NetworkSpec spec, CapacityFactors gamma, ControlPair controls,
                  ModifiedChain chain);

  const NetworkSpec& spec() const { return spec_; }
  const CapacityFactors& gamma() const { return gamma_; }
  const ControlPair& controls() const { return controls_; }
  const ModifiedChain& chain() const { return chain_; }
  const RoutingMatrix& kernel() const { return chain_.kernel; }

 private:
  NetworkSpec spec_;
  CapacityFactors gamma_;
  ControlPair controls_;
  ModifiedChain chain_;
};

/// Reflection mode requires the extended routing matrix to be reversible for
/// the normalized traffic solution (NotReversible otherwise).
ModifiedNetwork modify_network(const NetworkSpec& spec, const CapacityFactors& gamma,
                               RerouteMode mode);

/// Arbitrary rerouting kernel; it must leave (alpha_j eta_j)_j invariant
/// within `tol` (HypothesisViolated otherwise).
ModifiedNetwork modify_network(const NetworkSpec& spec, const CapacityFactors& gamma,
                               const RoutingMatrix& kernel, double tol = kNumericTol);

GeneratorView<QueueVector> modified_generator(const ModifiedNetwork& net);

GeneratorView<QueueVector> modified_generator(const NetworkSpec& spec,
                                              const CapacityFactors& gamma, RerouteMode mode);

/// Law of the frozen queue lengths at blocked nodes. Either a finitely
/// supported table keyed by the blocked coordinates (in increasing node
/// order), or the product of the unmodified network's marginals.
class FrozenLaw {
 public:
  static FrozenLaw finite(std::map<QueueVector, double> table);
  static FrozenLaw point_mass(QueueVector blocked_values);
  static FrozenLaw product_form_marginals();

  bool is_finite() const { return table_.has_value(); }
  const std::map<QueueVector, double>& table() const { return *table_; }

 private:
  std::optional<std::map<QueueVector, double>> table_;
};

class StationaryFamily {
 public:
  StationaryFamily(ProductFormDistribution base, NodePartition partition, FrozenLaw law);

  const NodePartition& partition() const { return partition_; }
  const ProductFormDistribution& base() const { return base_; }

  double frozen(const QueueVector& n) const;
  double operator()(const QueueVector& n) const;

 private:
  ProductFormDistribution base_;
  NodePartition partition_;
  FrozenLaw law_;
};

StationaryFamily stationary_family(const NetworkSpec& spec, const CapacityFactors& gamma,
                                   FrozenLaw law);

/// beta * lambda * (1 - r_alpha(0,0))
double effective_arrival_rate(double lambda, double beta, const RoutingMatrix& r_alpha);

}  // namespace renvnet
