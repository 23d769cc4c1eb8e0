#pragma once

// Open Jackson networks with state-dependent service rates: traffic
// equations, the product-form stationary law and the queue-length generator.
//
// Node indices follow the extended routing matrix: 0 is the exterior, nodes
// are 1..J. Queue vectors are 0-based (entry j-1 belongs to node j).

#include <cstddef>
#include <vector>

#include "renvnet/chain_core.hpp"
#include "renvnet/generator.hpp"

namespace renvnet {

/// mu(n) for n >= 1: table[n-1] while n <= table.size(), `tail` afterwards.
class ServiceRateFunction {
 public:
  ServiceRateFunction(std::vector<double> table, double tail);

  static ServiceRateFunction constant(double rate) { return {{}, rate}; }

  double operator()(int n) const {
    return static_cast<std::size_t>(n) <= table_.size() ? table_[n - 1] : tail_;
  }
  const std::vector<double>& table() const { return table_; }
  double tail() const { return tail_; }

 private:
  std::vector<double> table_;
  double tail_;
};

class NetworkSpec {
 public:
  /// `routing` is the extended (J+1)x(J+1) matrix; its row 0 must equal
  /// (0, lambda_1/lambda, ..., lambda_J/lambda) and it must be irreducible.
  NetworkSpec(std::vector<double> lambda, RoutingMatrix routing,
              std::vector<ServiceRateFunction> service);

  /// Builds the extended matrix from a JxJ substochastic internal routing
  /// matrix; exit probabilities take the row deficit.
  static NetworkSpec from_internal(std::vector<double> lambda, const Matrix& internal,
                                   std::vector<ServiceRateFunction> service);

  std::size_t nodes() const { return lambda_.size(); }
  double total_arrival() const { return total_; }
  double lambda(std::size_t j) const { return lambda_[j - 1]; }
  const std::vector<double>& lambdas() const { return lambda_; }
  const RoutingMatrix& routing() const { return routing_; }
  const ServiceRateFunction& service(std::size_t j) const { return service_[j - 1]; }
  const std::vector<ServiceRateFunction>& services() const { return service_; }

 private:
  std::vector<double> lambda_;
  double total_;
  RoutingMatrix routing_;
  std::vector<ServiceRateFunction> service_;
};

/// Extended traffic solution, eta(0) = lambda.
struct TrafficSolution {
  Vector eta;

  /// eta / sum(eta), the stationary vector of the routing chain.
  ProbabilityVector normalized() const { return ProbabilityVector(eta / eta.sum()); }
};

TrafficSolution solve_traffic(const NetworkSpec& spec);

/// C = 1 + sum_{n>=1} prod_{k<=n} eta_j / mu(k), with the constant tail
/// summed in closed form. Throws NotErgodic when eta_j >= mu.tail().
double node_normalizer(double eta_j, const ServiceRateFunction& mu);

class ProductFormDistribution {
 public:
  ProductFormDistribution(TrafficSolution traffic, std::vector<ServiceRateFunction> service);

  std::size_t nodes() const { return service_.size(); }
  const TrafficSolution& traffic() const { return traffic_; }
  double eta(std::size_t j) const { return traffic_.eta(static_cast<Eigen::Index>(j)); }
  /// C(j), node j in 1..J
  double normalizer(std::size_t j) const { return normalizers_[j - 1]; }
  const std::vector<ServiceRateFunction>& services() const { return service_; }

  /// prod_{k<=n} eta_j / mu_j(k)
  double weight(std::size_t j, int n) const;
  /// weight(j, n) / C(j)
  double marginal(std::size_t j, int n) const { return weight(j, n) / normalizer(j); }

  double operator()(const QueueVector& n) const;

 private:
  TrafficSolution traffic_;
  std::vector<ServiceRateFunction> service_;
  std::vector<double> normalizers_;
};

ProductFormDistribution make_product_form(const NetworkSpec& spec);

double product_form_pmf(const ProductFormDistribution& dist, const QueueVector& n);

GeneratorView<QueueVector> jackson_generator(const NetworkSpec& spec);

}  // namespace renvnet

namespace renvnet::detail {

/// Queue-length generator with arrivals (arrival_factor * lambda) * kernel(0,i),
/// transfers (gamma_j * mu_j(n_j)) * kernel(j,i) and departures
/// (gamma_j * mu_j(n_j)) * kernel(j,0). Jumps j -> j are dropped.
GeneratorView<QueueVector> network_generator(const NetworkSpec& spec, double arrival_factor,
                                             std::vector<double> gamma, Matrix kernel);

}  // namespace renvnet::detail
