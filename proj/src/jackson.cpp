#include "renvnet/jackson.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "renvnet/errors.hpp"

namespace renvnet {

ServiceRateFunction::ServiceRateFunction(std::vector<double> table, double tail)
    : table_(std::move(table)), tail_(tail) {
  for (std::size_t k = 0; k < table_.size(); ++k) {
    if (!(table_[k] > 0.0) || !std::isfinite(table_[k]))
      throw Error(ErrorCode::InvalidArgument,
                  "service rate mu(" + std::to_string(k + 1) + ") must be positive");
  }
  if (!(tail_ > 0.0) || !std::isfinite(tail_))
    throw Error(ErrorCode::InvalidArgument, "tail service rate must be positive");
}

NetworkSpec::NetworkSpec(std::vector<double> lambda, RoutingMatrix routing,
                         std::vector<ServiceRateFunction> service)
    : lambda_(std::move(lambda)), total_(0.0), routing_(std::move(routing)),
      service_(std::move(service)) {
  const std::size_t j_count = lambda_.size();
  if (j_count == 0) throw Error(ErrorCode::DimensionMismatch, "network has no nodes");
  if (static_cast<std::size_t>(routing_.dim()) != j_count + 1) {
    std::ostringstream os;
    os << "extended routing matrix must be " << j_count + 1 << "x" << j_count + 1
       << ", got dimension " << routing_.dim();
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }
  if (service_.size() != j_count)
    throw Error(ErrorCode::DimensionMismatch, "need one service rate function per node");
  for (std::size_t j = 0; j < j_count; ++j) {
    if (!(lambda_[j] >= 0.0) || !std::isfinite(lambda_[j]))
      throw Error(ErrorCode::InvalidArgument,
                  "lambda_" + std::to_string(j + 1) + " must be nonnegative");
    total_ += lambda_[j];
  }
  if (!(total_ > 0.0))
    throw Error(ErrorCode::InvalidArgument, "total external arrival rate must be positive");
  if (routing_(0, 0) != 0.0)
    throw Error(ErrorCode::InvalidArgument, "routing(0,0) must be 0");
  for (std::size_t j = 1; j <= j_count; ++j) {
    const auto idx = static_cast<Eigen::Index>(j);
    if (std::abs(routing_(0, idx) - lambda_[j - 1] / total_) > kValidationTol) {
      std::ostringstream os;
      os << "routing(0," << j << ") = " << routing_(0, idx) << " but lambda_" << j
         << "/lambda = " << lambda_[j - 1] / total_;
      throw Error(ErrorCode::InvalidArgument, os.str());
    }
  }
  if (!check_irreducible(routing_).irreducible())
    throw Error(ErrorCode::NotIrreducible, "extended routing matrix is not irreducible");
}

NetworkSpec NetworkSpec::from_internal(std::vector<double> lambda, const Matrix& internal,
                                       std::vector<ServiceRateFunction> service) {
  const auto j_count = static_cast<Eigen::Index>(lambda.size());
  if (internal.rows() != j_count || internal.cols() != j_count)
    throw Error(ErrorCode::DimensionMismatch, "internal routing must be JxJ");
  const double total = std::accumulate(lambda.begin(), lambda.end(), 0.0);
  if (!(total > 0.0))
    throw Error(ErrorCode::InvalidArgument, "total external arrival rate must be positive");
  Matrix ext = Matrix::Zero(j_count + 1, j_count + 1);
  for (Eigen::Index j = 1; j <= j_count; ++j) ext(0, j) = lambda[j - 1] / total;
  ext.bottomRightCorner(j_count, j_count) = internal;
  for (Eigen::Index j = 1; j <= j_count; ++j) {
    const double exit = 1.0 - internal.row(j - 1).sum();
    ext(j, 0) = std::abs(exit) < 1e-15 ? 0.0 : exit;
  }
  return NetworkSpec(std::move(lambda), RoutingMatrix(std::move(ext)), std::move(service));
}

TrafficSolution solve_traffic(const NetworkSpec& spec) {
  const auto j_count = static_cast<Eigen::Index>(spec.nodes());
  const Matrix& r = spec.routing().matrix();
  // eta (I - R) = lambda  <=>  (I - R)^T eta^T = lambda^T
  const Matrix a = Matrix::Identity(j_count, j_count) -
                   r.bottomRightCorner(j_count, j_count).transpose();
  Vector lam(j_count);
  for (Eigen::Index j = 0; j < j_count; ++j) lam(j) = spec.lambdas()[j];

  Eigen::PartialPivLU<Matrix> lu(a);
  if (!(lu.rcond() > 1e-13))
    throw Error(ErrorCode::SingularTraffic, "traffic equations are singular");
  Vector x = lu.solve(lam);
  x += lu.solve(lam - a * x);

  TrafficSolution out;
  out.eta.resize(j_count + 1);
  out.eta(0) = spec.total_arrival();
  out.eta.tail(j_count) = x;
  for (Eigen::Index j = 1; j <= j_count; ++j)
    if (!(out.eta(j) > 0.0))
      throw Error(ErrorCode::SingularTraffic,
                  "traffic solution is not positive at node " + std::to_string(j));
  return out;
}

double node_normalizer(double eta_j, const ServiceRateFunction& mu) {
  if (!(eta_j > 0.0)) throw Error(ErrorCode::InvalidArgument, "eta_j must be positive");
  const double tail_ratio = eta_j / mu.tail();
  if (tail_ratio >= 1.0) {
    std::ostringstream os;
    os << "eta_j = " << eta_j << " >= tail service rate " << mu.tail();
    throw Error(ErrorCode::NotErgodic, os.str());
  }
  double sum = 1.0;
  double weight = 1.0;
  for (double rate : mu.table()) {
    weight *= eta_j / rate;
    sum += weight;
  }
  return sum + weight * tail_ratio / (1.0 - tail_ratio);
}

ProductFormDistribution::ProductFormDistribution(TrafficSolution traffic,
                                                 std::vector<ServiceRateFunction> service)
    : traffic_(std::move(traffic)), service_(std::move(service)) {
  if (static_cast<std::size_t>(traffic_.eta.size()) != service_.size() + 1)
    throw Error(ErrorCode::DimensionMismatch, "traffic solution and node count differ");
  normalizers_.reserve(service_.size());
  for (std::size_t j = 1; j <= service_.size(); ++j)
    normalizers_.push_back(node_normalizer(eta(j), service_[j - 1]));
}

double ProductFormDistribution::weight(std::size_t j, int n) const {
  const double e = eta(j);
  const ServiceRateFunction& mu = service_[j - 1];
  double w = 1.0;
  for (int k = 1; k <= n; ++k) w *= e / mu(k);
  return w;
}

double ProductFormDistribution::operator()(const QueueVector& n) const {
  if (n.size() != nodes())
    throw Error(ErrorCode::DimensionMismatch, "queue vector has wrong length");
  double p = 1.0;
  for (std::size_t j = 1; j <= nodes(); ++j) {
    if (n[j - 1] < 0) return 0.0;
    p *= marginal(j, n[j - 1]);
  }
  return p;
}

ProductFormDistribution make_product_form(const NetworkSpec& spec) {
  return ProductFormDistribution(solve_traffic(spec), spec.services());
}

double product_form_pmf(const ProductFormDistribution& dist, const QueueVector& n) {
  return dist(n);
}

GeneratorView<QueueVector> jackson_generator(const NetworkSpec& spec) {
  return detail::network_generator(spec, 1.0, std::vector<double>(spec.nodes(), 1.0),
                                   spec.routing().matrix());
}

namespace detail {

GeneratorView<QueueVector> network_generator(const NetworkSpec& spec, double arrival_factor,
                                             std::vector<double> gamma, Matrix kernel) {
  const std::size_t j_count = spec.nodes();
  if (gamma.size() != j_count)
    throw Error(ErrorCode::DimensionMismatch, "need one capacity factor per node");
  if (static_cast<std::size_t>(kernel.rows()) != j_count + 1)
    throw Error(ErrorCode::DimensionMismatch, "kernel must be (J+1)x(J+1)");
  const double arrival_rate = arrival_factor * spec.total_arrival();
  auto services = spec.services();

  GeneratorView<QueueVector> gen;
  gen.outgoing = [=](const QueueVector& n) {
    TransitionList<QueueVector> out;
    for (std::size_t i = 1; i <= j_count; ++i) {
      const double rate = arrival_rate * kernel(0, static_cast<Eigen::Index>(i));
      if (rate > 0.0) {
        QueueVector m = n;
        ++m[i - 1];
        out.push_back({std::move(m), rate});
      }
    }
    for (std::size_t j = 1; j <= j_count; ++j) {
      if (n[j - 1] <= 0) continue;
      const double service = gamma[j - 1] * services[j - 1](n[j - 1]);
      const auto row = static_cast<Eigen::Index>(j);
      for (std::size_t i = 1; i <= j_count; ++i) {
        if (i == j) continue;
        const double rate = service * kernel(row, static_cast<Eigen::Index>(i));
        if (rate > 0.0) {
          QueueVector m = n;
          --m[j - 1];
          ++m[i - 1];
          out.push_back({std::move(m), rate});
        }
      }
      const double rate = service * kernel(row, 0);
      if (rate > 0.0) {
        QueueVector m = n;
        --m[j - 1];
        out.push_back({std::move(m), rate});
      }
    }
    return out;
  };
  gen.incoming = [=](const QueueVector& n) {
    TransitionList<QueueVector> in;
    for (std::size_t i = 1; i <= j_count; ++i) {
      if (n[i - 1] <= 0) continue;
      const double rate = arrival_rate * kernel(0, static_cast<Eigen::Index>(i));
      if (rate > 0.0) {
        QueueVector m = n;
        --m[i - 1];
        in.push_back({std::move(m), rate});
      }
    }
    for (std::size_t j = 1; j <= j_count; ++j) {
      const double service = gamma[j - 1] * services[j - 1](n[j - 1] + 1);
      const auto row = static_cast<Eigen::Index>(j);
      for (std::size_t i = 1; i <= j_count; ++i) {
        if (i == j || n[i - 1] <= 0) continue;
        const double rate = service * kernel(row, static_cast<Eigen::Index>(i));
        if (rate > 0.0) {
          QueueVector m = n;
          ++m[j - 1];
          --m[i - 1];
          in.push_back({std::move(m), rate});
        }
      }
      const double rate = service * kernel(row, 0);
      if (rate > 0.0) {
        QueueVector m = n;
        ++m[j - 1];
        in.push_back({std::move(m), rate});
      }
    }
    return in;
  };
  return gen;
}

}  // namespace detail
}  // namespace renvnet
