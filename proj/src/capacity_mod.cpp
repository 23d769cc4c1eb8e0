#include "renvnet/capacity_mod.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "renvnet/errors.hpp"

namespace renvnet {

CapacityFactors::CapacityFactors(std::vector<double> gamma) : gamma_(std::move(gamma)) {
  if (gamma_.empty()) throw Error(ErrorCode::DimensionMismatch, "no capacity factors");
  for (std::size_t j = 0; j < gamma_.size(); ++j)
    if (!std::isfinite(gamma_[j]) || gamma_[j] < 0.0)
      throw Error(ErrorCode::InvalidArgument,
                  "gamma_" + std::to_string(j + 1) + " must be finite and nonnegative");
}

double CapacityFactors::max_norm() const {
  return *std::max_element(gamma_.begin(), gamma_.end());
}

ControlPair derive_controls(const CapacityFactors& gamma) {
  const std::size_t j_count = gamma.size();
  const double norm = gamma.max_norm();
  Vector alpha(static_cast<Eigen::Index>(j_count + 1));
  alpha(0) = 1.0;
  double beta = 1.0;
  if (norm <= 1.0) {
    for (std::size_t j = 1; j <= j_count; ++j) alpha(static_cast<Eigen::Index>(j)) = gamma[j];
  } else {
    beta = norm;
    for (std::size_t j = 1; j <= j_count; ++j)
      alpha(static_cast<Eigen::Index>(j)) = gamma[j] / norm;
  }
  return ControlPair{AcceptanceVector(std::move(alpha)), beta, norm == 0.0};
}

NodePartition partition_nodes(const CapacityFactors& gamma) {
  NodePartition p;
  for (std::size_t j = 1; j <= gamma.size(); ++j)
    (gamma[j] == 0.0 ? p.blocked : p.working).push_back(j);
  return p;
}

ModifiedNetwork::ModifiedNetwork(NetworkSpec spec, CapacityFactors gamma, ControlPair controls,
                                 ModifiedChain chain)
    : spec_(std::move(spec)), gamma_(std::move(gamma)), controls_(std::move(controls)),
      chain_(std::move(chain)) {
  if (gamma_.size() != spec_.nodes())
    throw Error(ErrorCode::DimensionMismatch, "need one capacity factor per node");
  if (chain_.kernel.dim() != spec_.routing().dim())
    throw Error(ErrorCode::DimensionMismatch, "rerouting kernel has wrong dimension");
}

ModifiedNetwork modify_network(const NetworkSpec& spec, const CapacityFactors& gamma,
                               RerouteMode mode) {
  if (gamma.size() != spec.nodes())
    throw Error(ErrorCode::DimensionMismatch, "need one capacity factor per node");
  if (mode == RerouteMode::reflection) {
    const ProbabilityVector eta = solve_traffic(spec).normalized();
    if (!check_reversible(spec.routing(), eta))
      throw Error(ErrorCode::NotReversible,
                  "reflection rerouting requires a reversible extended routing matrix");
  }
  ControlPair controls = derive_controls(gamma);
  ModifiedChain chain = modify(spec.routing(), controls.alpha, mode);
  return ModifiedNetwork(spec, gamma, std::move(controls), std::move(chain));
}

ModifiedNetwork modify_network(const NetworkSpec& spec, const CapacityFactors& gamma,
                               const RoutingMatrix& kernel, double tol) {
  if (gamma.size() != spec.nodes())
    throw Error(ErrorCode::DimensionMismatch, "need one capacity factor per node");
  if (kernel.dim() != spec.routing().dim())
    throw Error(ErrorCode::DimensionMismatch, "rerouting kernel has wrong dimension");
  ControlPair controls = derive_controls(gamma);
  const Vector y = solve_traffic(spec).eta.cwiseProduct(controls.alpha.vector());
  const double residual = invariant_residual(y, kernel);
  if (residual > tol) {
    std::ostringstream os;
    os << "kernel does not leave (alpha_j eta_j) invariant, residual " << residual;
    throw Error(ErrorCode::HypothesisViolated, os.str());
  }
  ModifiedChain chain{kernel, RerouteMode::user_supplied, controls.alpha.taboo(),
                      spec.routing(), controls.alpha};
  return ModifiedNetwork(spec, gamma, std::move(controls), std::move(chain));
}

GeneratorView<QueueVector> modified_generator(const ModifiedNetwork& net) {
  return detail::network_generator(net.spec(), net.controls().beta, net.gamma().values(),
                                   net.kernel().matrix());
}

GeneratorView<QueueVector> modified_generator(const NetworkSpec& spec,
                                              const CapacityFactors& gamma, RerouteMode mode) {
  return modified_generator(modify_network(spec, gamma, mode));
}

FrozenLaw FrozenLaw::finite(std::map<QueueVector, double> table) {
  double total = 0.0;
  for (const auto& [state, p] : table) {
    if (!(p >= 0.0) || !std::isfinite(p))
      throw Error(ErrorCode::InvalidFrozenLaw, "frozen law has a negative probability");
    for (int v : state)
      if (v < 0) throw Error(ErrorCode::InvalidFrozenLaw, "frozen queue length is negative");
    total += p;
  }
  if (std::abs(total - 1.0) > kValidationTol) {
    std::ostringstream os;
    os.precision(17);
    os << "frozen law sums to " << total;
    throw Error(ErrorCode::InvalidFrozenLaw, os.str());
  }
  FrozenLaw law;
  law.table_ = std::move(table);
  return law;
}

FrozenLaw FrozenLaw::point_mass(QueueVector blocked_values) {
  return finite({{std::move(blocked_values), 1.0}});
}

FrozenLaw FrozenLaw::product_form_marginals() { return FrozenLaw{}; }

StationaryFamily::StationaryFamily(ProductFormDistribution base, NodePartition partition,
                                   FrozenLaw law)
    : base_(std::move(base)), partition_(std::move(partition)), law_(std::move(law)) {
  if (law_.is_finite()) {
    for (const auto& [state, p] : law_.table())
      if (state.size() != partition_.blocked.size())
        throw Error(ErrorCode::InvalidFrozenLaw,
                    "frozen law keys must have one entry per blocked node");
  }
}

double StationaryFamily::frozen(const QueueVector& n) const {
  if (!law_.is_finite()) {
    double p = 1.0;
    for (std::size_t j : partition_.blocked) p *= base_.marginal(j, n[j - 1]);
    return p;
  }
  QueueVector key;
  key.reserve(partition_.blocked.size());
  for (std::size_t j : partition_.blocked) key.push_back(n[j - 1]);
  const auto it = law_.table().find(key);
  return it == law_.table().end() ? 0.0 : it->second;
}

double StationaryFamily::operator()(const QueueVector& n) const {
  if (n.size() != base_.nodes())
    throw Error(ErrorCode::DimensionMismatch, "queue vector has wrong length");
  for (int v : n)
    if (v < 0) return 0.0;
  double p = frozen(n);
  for (std::size_t j : partition_.working) p *= base_.marginal(j, n[j - 1]);
  return p;
}

StationaryFamily stationary_family(const NetworkSpec& spec, const CapacityFactors& gamma,
                                   FrozenLaw law) {
  if (gamma.size() != spec.nodes())
    throw Error(ErrorCode::DimensionMismatch, "need one capacity factor per node");
  return StationaryFamily(make_product_form(spec), partition_nodes(gamma), std::move(law));
}

double effective_arrival_rate(double lambda, double beta, const RoutingMatrix& r_alpha) {
  return beta * lambda * (1.0 - r_alpha(0, 0));
}

}  // namespace renvnet
