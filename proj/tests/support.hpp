#pragma once

// Fixtures and random corpora shared by the unit tests and the acceptance
// runner. Corpora are drawn from fixed seeds so every run sees the same cases.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "renvnet/capacity_mod.hpp"
#include "renvnet/chain_core.hpp"
#include "renvnet/environment.hpp"
#include "renvnet/jackson.hpp"
#include "renvnet/randomization.hpp"

namespace renvnet::testing {

inline std::string source_path(const std::string& rel) {
#ifdef RENVNET_SOURCE_DIR
  return std::string(RENVNET_SOURCE_DIR) + "/" + rel;
#else
  return rel;
#endif
}

inline Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double x : row) m(i, j++) = x;
    ++i;
  }
  return m;
}

inline Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

/// The extended routing matrix on {0,...,4} used throughout the worked examples.
inline RoutingMatrix example_routing() {
  return RoutingMatrix(from_rows({{0, 1, 0, 0, 0},
                                  {0, 0, 1, 0, 0},
                                  {0, 0, 0, 0.6, 0.4},
                                  {1, 0, 0, 0, 0},
                                  {0, 0, 0, 1, 0}}));
}

/// Four-node network on example_routing() with lambda = 1 entering node 1;
/// nodes 2 and 3 have load-dependent rates.
inline NetworkSpec example_network() {
  return NetworkSpec({1.0, 0.0, 0.0, 0.0}, example_routing(),
                     {ServiceRateFunction::constant(2.0), ServiceRateFunction({1.5, 2.5}, 3.0),
                      ServiceRateFunction({1.5}, 3.0), ServiceRateFunction::constant(1.0)});
}

/// Two nodes with symmetric routing; the extended matrix is reversible for
/// the uniform traffic vector (1, 1, 1).
inline NetworkSpec reversible_network() {
  return NetworkSpec({0.5, 0.5},
                     RoutingMatrix(from_rows({{0, 0.5, 0.5}, {0.5, 0, 0.5}, {0.5, 0.5, 0}})),
                     {ServiceRateFunction::constant(4.0), ServiceRateFunction({2.0}, 5.0)});
}

inline NetworkSpec mm1(double lambda, double mu) {
  return NetworkSpec::from_internal({lambda}, Matrix::Zero(1, 1),
                                    {ServiceRateFunction::constant(mu)});
}

inline NetworkSpec tandem(double lambda, double mu1, double mu2) {
  return NetworkSpec::from_internal({lambda, 0.0}, from_rows({{0, 1}, {0, 0}}),
                                    {ServiceRateFunction::constant(mu1),
                                     ServiceRateFunction::constant(mu2)});
}

class Corpus {
 public:
  explicit Corpus(std::uint64_t seed) : gen_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
  bool coin(double p) { return uniform() < p; }

  /// Irreducible chain: a Hamiltonian cycle plus random extra edges.
  RoutingMatrix irreducible_chain(int dim) {
    Matrix w = Matrix::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
      w(i, (i + 1) % dim) = uniform(0.1, 1.0);
      for (int j = 0; j < dim; ++j)
        if (coin(0.4)) w(i, j) += uniform(0.0, 1.0);
    }
    return normalize(w);
  }

  /// Reversible chain from symmetric weights on a connected graph.
  RoutingMatrix reversible_chain(int dim) {
    Matrix w = Matrix::Zero(dim, dim);
    for (int i = 0; i + 1 < dim; ++i) w(i, i + 1) = w(i + 1, i) = uniform(0.1, 1.0);
    for (int i = 0; i < dim; ++i)
      for (int j = i; j < dim; ++j)
        if (coin(0.4)) {
          const double x = uniform(0.0, 1.0);
          w(i, j) += x;
          if (j != i) w(j, i) += x;
        }
    return normalize(w);
  }

  /// Acceptance vector with mixed entries: some ones, some zeros (never all),
  /// the rest uniform on (0, 1).
  AcceptanceVector acceptance(int dim, bool allow_zero = true) {
    Vector a(dim);
    for (int i = 0; i < dim; ++i) {
      const double u = uniform();
      a(i) = u < 0.2 ? 1.0 : (allow_zero && u < 0.3 ? 0.0 : uniform(0.05, 1.0));
    }
    if (a.maxCoeff() <= 0.0) a(integer(0, dim - 1)) = uniform(0.05, 1.0);
    return AcceptanceVector(a);
  }

  /// Open network with J nodes, every node reachable from the exterior and
  /// able to leave; `load_dependent` adds service tables. Tails keep every
  /// node ergodic.
  NetworkSpec network(int nodes, bool load_dependent) {
    std::vector<double> lambda(nodes, 0.0);
    lambda[0] = uniform(0.5, 2.0);
    for (int j = 1; j < nodes; ++j)
      if (coin(0.5)) lambda[j] = uniform(0.1, 1.0);
    Matrix internal = Matrix::Zero(nodes, nodes);
    for (int i = 0; i < nodes; ++i) {
      Vector w = Vector::Zero(nodes + 1);
      w(0) = uniform(0.2, 1.0);  // exit weight
      if (i + 1 < nodes) w(i + 2) = uniform(0.2, 1.0);
      for (int j = 0; j < nodes; ++j)
        if (coin(0.35)) w(j + 1) += uniform(0.0, 0.6);
      w /= w.sum();
      for (int j = 0; j < nodes; ++j) internal(i, j) = w(j + 1);
    }
    std::vector<ServiceRateFunction> placeholder(nodes, ServiceRateFunction::constant(1.0));
    const NetworkSpec shape = NetworkSpec::from_internal(lambda, internal, placeholder);
    const TrafficSolution t = solve_traffic(shape);
    std::vector<ServiceRateFunction> services;
    for (int j = 1; j <= nodes; ++j) {
      const double eta = t.eta(j);
      std::vector<double> table;
      if (load_dependent) {
        const int len = integer(1, 3);
        for (int k = 0; k < len; ++k) table.push_back(eta * uniform(0.4, 2.5));
      }
      services.emplace_back(std::move(table), eta * uniform(1.3, 3.0));
    }
    return NetworkSpec::from_internal(lambda, internal, services);
  }

  /// Random generator on `dim` states with an irreducible cycle.
  Matrix environment_generator(int dim) {
    Matrix v = Matrix::Zero(dim, dim);
    if (dim == 1) return v;
    for (int k = 0; k < dim; ++k) {
      v(k, (k + 1) % dim) = uniform(0.1, 1.0);
      for (int m = 0; m < dim; ++m)
        if (m != k && coin(0.3)) v(k, m) += uniform(0.0, 0.5);
      v(k, k) = -(v.row(k).sum() - v(k, k));
    }
    return v;
  }

  /// Random K-status environment for `spec`: every node gets a random
  /// status jump matrix on departure (identity with probability `keep`),
  /// factors mix degrading, upgrading and occasionally blocked nodes.
  EnvironmentSpec environment(const NetworkSpec& spec, int statuses, RerouteMode mode,
                              double keep = 0.3) {
    std::vector<RoutingMatrix> jumps;
    for (std::size_t j = 0; j < spec.nodes(); ++j) {
      // the last node always interacts when all others kept the identity
      const bool last_chance = j + 1 == spec.nodes() && jumps.size() == j &&
                               std::all_of(jumps.begin(), jumps.end(), [](const RoutingMatrix& r) {
                                 return r.matrix().isIdentity();
                               });
      if (statuses > 1 && !last_chance && coin(keep)) {
        jumps.push_back(RoutingMatrix::identity(statuses));
        continue;
      }
      Matrix w(statuses, statuses);
      for (int k = 0; k < statuses; ++k)
        for (int m = 0; m < statuses; ++m) w(k, m) = coin(0.6) ? uniform(0.05, 1.0) : 0.0;
      for (int k = 0; k < statuses; ++k) {
        w(k, k) += 0.1;
        w.row(k) /= w.row(k).sum();
      }
      jumps.push_back(normalize(w));
    }
    std::vector<CapacityFactors> gamma;
    for (int k = 0; k < statuses; ++k) {
      std::vector<double> g(spec.nodes());
      for (double& x : g) x = coin(0.1) ? 0.0 : uniform(0.2, coin(0.4) ? 3.0 : 1.0);
      gamma.emplace_back(g);
    }
    return EnvironmentSpec(environment_generator(statuses), std::move(jumps), std::move(gamma),
                           mode);
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  static RoutingMatrix normalize(Matrix w) {
    for (Eigen::Index i = 0; i < w.rows(); ++i) w.row(i) /= w.row(i).sum();
    // force exact row sums so validation at 1e-12 never trips on rounding
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      Eigen::Index big = 0;
      w.row(i).maxCoeff(&big);
      w(i, big) += 1.0 - w.row(i).sum();
    }
    return RoutingMatrix(w);
  }

  std::mt19937_64 gen_;
};

}  // namespace renvnet::testing
