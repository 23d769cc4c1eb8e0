#pragma once

// Jackson network coupled with a finite random environment. The environment
// status k scales service capacities by gamma(k) (routing is rerouted per
// status) and jumps by itself with rates V, or immediately after a customer
// leaves the network from node j with probabilities R_j(k, .).

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "renvnet/capacity_mod.hpp"
#include "renvnet/chain_core.hpp"
#include "renvnet/generator.hpp"
#include "renvnet/jackson.hpp"
#include "renvnet/randomization.hpp"

namespace renvnet {

class EnvironmentSpec {
 public:
  /// `departure_jumps` holds R_1..R_J, `gamma` one factor vector per status.
  /// `user_kernels` (one per status) is required iff mode == user_supplied.
  EnvironmentSpec(Matrix generator, std::vector<RoutingMatrix> departure_jumps,
                  std::vector<CapacityFactors> gamma, RerouteMode mode,
                  std::vector<RoutingMatrix> user_kernels = {},
                  std::vector<std::string> status_names = {});

  std::size_t statuses() const { return static_cast<std::size_t>(v_.rows()); }
  std::size_t nodes() const { return r_.size(); }
  const Matrix& generator() const { return v_; }
  /// R_j for node j in 1..J
  const RoutingMatrix& departure_jump(std::size_t j) const { return r_[j - 1]; }
  const CapacityFactors& gamma(std::size_t k) const { return gamma_[k]; }
  RerouteMode mode() const { return mode_; }
  const std::vector<RoutingMatrix>& user_kernels() const { return user_kernels_; }
  const std::vector<std::string>& status_names() const { return names_; }

 private:
  Matrix v_;
  std::vector<RoutingMatrix> r_;
  std::vector<CapacityFactors> gamma_;
  RerouteMode mode_;
  std::vector<RoutingMatrix> user_kernels_;
  std::vector<std::string> names_;
};

struct CoupledState {
  QueueVector n;
  std::size_t k = 0;

  auto operator<=>(const CoupledState&) const = default;
};

struct StatusControls {
  ControlPair controls;
  ModifiedChain chain;
};

/// alpha(k), beta(k) from gamma(k) and the rerouted kernel for status k.
StatusControls per_status_controls(const NetworkSpec& spec, const EnvironmentSpec& env,
                                   std::size_t k);

/// Network plus environment with every per-status quantity computed up front;
/// read-only afterwards.
class EnvironmentModel {
 public:
  EnvironmentModel(NetworkSpec spec, EnvironmentSpec env);

  const NetworkSpec& spec() const { return spec_; }
  const EnvironmentSpec& env() const { return env_; }
  const TrafficSolution& traffic() const { return traffic_; }
  const StatusControls& status(std::size_t k) const { return per_status_[k]; }
  std::size_t statuses() const { return env_.statuses(); }

  /// Reason why the product-form hypothesis of the rerouting mode fails
  /// (reflection needs reversible routing, user kernels need the invariant
  /// measure alpha(k) eta); nullopt when it holds.
  std::optional<std::string> hypothesis_violation(double tol = kNumericTol) const;

 private:
  NetworkSpec spec_;
  EnvironmentSpec env_;
  TrafficSolution traffic_;
  std::vector<StatusControls> per_status_;
};

GeneratorView<CoupledState> coupled_generator(const EnvironmentModel& model);

struct ReducedGenerator {
  Matrix matrix;
};

/// Q_red = V + sum_j eta_j diag_k(gamma_j(k) r^(alpha(k))(j,0)) (R_j - I)
ReducedGenerator reduced_generator(const EnvironmentModel& model);

ProbabilityVector solve_theta(const ReducedGenerator& q_red);

double coupled_product_pmf(const ProductFormDistribution& xi, const ProbabilityVector& theta,
                           const CoupledState& s);

/// Max balance residual of pi = xi (x) theta over the probe states. Throws
/// HypothesisViolated if the rerouting mode's precondition fails.
double verify_coupled_balance(const EnvironmentModel& model, const ProbabilityVector& theta,
                              std::span<const CoupledState> probes);

/// {0..bound}^J x K
std::vector<CoupledState> coupled_box(std::size_t nodes, int bound, std::size_t statuses);

}  // namespace renvnet
