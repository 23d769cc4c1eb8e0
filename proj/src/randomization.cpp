#include "renvnet/randomization.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <sstream>
#include <string>
#include <thread>

#include "renvnet/detail/sampling.hpp"
#include "renvnet/errors.hpp"
#include "renvnet/rng.hpp"

namespace renvnet {

namespace {

void require_same_size(const RoutingMatrix& r, const AcceptanceVector& alpha) {
  if (r.dim() != alpha.size()) {
    std::ostringstream os;
    os << "acceptance vector has " << alpha.size() << " entries, matrix has dimension "
       << r.dim();
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }
}

// Computed kernels can carry rounding noise of either sign around exact zeros.
Matrix clean_kernel(Matrix k) {
  for (Eigen::Index i = 0; i < k.rows(); ++i)
    for (Eigen::Index j = 0; j < k.cols(); ++j)
      if (k(i, j) < 0.0 && k(i, j) > -kValidationTol) k(i, j) = 0.0;
  return k;
}

}  // namespace

std::string_view to_string(RerouteMode mode) {
  switch (mode) {
    case RerouteMode::skipping: return "skipping";
    case RerouteMode::reflection: return "reflection";
    case RerouteMode::user_supplied: return "user_supplied";
  }
  return "unknown";
}

RerouteMode parse_reroute_mode(std::string_view text) {
  if (text == "skipping") return RerouteMode::skipping;
  if (text == "reflection") return RerouteMode::reflection;
  if (text == "user_supplied") return RerouteMode::user_supplied;
  throw Error(ErrorCode::InvalidArgument,
              "unknown rerouting mode '" + std::string(text) + "'");
}

std::string_view to_string(PeskunRelation rel) {
  switch (rel) {
    case PeskunRelation::less: return "less";
    case PeskunRelation::greater: return "greater";
    case PeskunRelation::equal: return "equal";
    case PeskunRelation::incomparable: return "incomparable";
  }
  return "unknown";
}

AcceptanceVector::AcceptanceVector(Vector alphas) : a_(std::move(alphas)) {
  if (a_.size() == 0)
    throw Error(ErrorCode::DimensionMismatch, "acceptance vector is empty");
  for (Eigen::Index i = 0; i < a_.size(); ++i) {
    if (!(a_(i) >= 0.0 && a_(i) <= 1.0)) {
      std::ostringstream os;
      os << "acceptance probability " << i << " = " << a_(i) << " is outside [0,1]";
      throw Error(ErrorCode::InvalidArgument, os.str());
    }
  }
  if ((a_.array() == 0.0).all())
    throw Error(ErrorCode::AllRejecting, "all acceptance probabilities are zero");
}

AcceptanceVector AcceptanceVector::ones(Eigen::Index n) {
  return AcceptanceVector(Vector::Ones(n));
}

std::vector<std::size_t> AcceptanceVector::taboo() const {
  std::vector<std::size_t> out;
  for (Eigen::Index i = 0; i < a_.size(); ++i)
    if (a_(i) == 0.0) out.push_back(static_cast<std::size_t>(i));
  return out;
}

bool AcceptanceVector::all_positive() const { return (a_.array() > 0.0).all(); }

ModifiedChain skip_modify(const RoutingMatrix& r, const AcceptanceVector& alpha) {
  require_same_size(r, alpha);
  const ClassDecomposition dec = check_irreducible(r);
  if (!dec.irreducible())
    throw Error(ErrorCode::NotIrreducible, "skipping requires an irreducible routing matrix");

  const Eigen::Index n = r.dim();
  const Vector& a = alpha.vector();
  const Matrix pass = r.matrix() * (Vector::Ones(n) - a).asDiagonal();
  const Matrix accept = r.matrix() * a.asDiagonal();

  Eigen::PartialPivLU<Matrix> lu(Matrix::Identity(n, n) - pass);
  if (!(lu.rcond() > 1e-13))
    throw Error(ErrorCode::SingularSystem, "I - r I_(1-alpha) is numerically singular");
  Matrix kernel(n, n);
  for (Eigen::Index j = 0; j < n; ++j) kernel.col(j) = lu.solve(accept.col(j));

  return ModifiedChain{RoutingMatrix(clean_kernel(std::move(kernel))), RerouteMode::skipping,
                       alpha.taboo(), r, alpha};
}

Matrix skip_oracle(const RoutingMatrix& r, const AcceptanceVector& alpha, int terms) {
  require_same_size(r, alpha);
  if (terms < 1) throw Error(ErrorCode::InvalidArgument, "terms must be at least 1");
  const Eigen::Index n = r.dim();
  const Vector& a = alpha.vector();
  const Matrix pass = r.matrix() * (Vector::Ones(n) - a).asDiagonal();
  Matrix term = r.matrix() * a.asDiagonal();
  Matrix sum = term;
  for (int k = 1; k < terms; ++k) {
    term = pass * term;
    sum += term;
  }
  return sum;
}

Vector EmpiricalRow::standard_errors(const Vector& p) const {
  const double n = static_cast<double>(samples);
  return (p.array() * (1.0 - p.array()) / n).sqrt().matrix();
}

EmpiricalRow skip_absorbing_oracle(const RoutingMatrix& r, const AcceptanceVector& alpha,
                                   std::size_t start, std::uint64_t seed,
                                   std::uint64_t samples, unsigned workers) {
  require_same_size(r, alpha);
  const Eigen::Index n = r.dim();
  if (start >= static_cast<std::size_t>(n))
    throw Error(ErrorCode::InvalidArgument, "start state out of range");
  if (samples == 0) throw Error(ErrorCode::InvalidArgument, "samples must be positive");
  workers = std::max(1u, workers);

  const auto width = static_cast<std::size_t>(n);
  const std::vector<double> cumulative = detail::cumulative_rows(r);
  const Vector& a = alpha.vector();

  auto run_range = [&](std::uint64_t begin, std::uint64_t end,
                       std::vector<std::uint64_t>& counts) {
    for (std::uint64_t s = begin; s < end; ++s) {
      CounterRng rng(seed, s);
      std::size_t state = start;
      for (;;) {
        const std::span<const double> row(cumulative.data() + state * width, width);
        const std::size_t candidate = detail::sample_row(row, rng.uniform());
        if (rng.bernoulli(a(static_cast<Eigen::Index>(candidate)))) {
          ++counts[candidate];
          break;
        }
        state = candidate;
      }
    }
  };

  std::vector<std::vector<std::uint64_t>> partial(workers,
                                                  std::vector<std::uint64_t>(n, 0));
  if (workers == 1) {
    run_range(0, samples, partial[0]);
  } else {
    std::vector<std::thread> pool;
    const std::uint64_t chunk = (samples + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::uint64_t b = std::min<std::uint64_t>(samples, w * chunk);
      const std::uint64_t e = std::min<std::uint64_t>(samples, b + chunk);
      pool.emplace_back(run_range, b, e, std::ref(partial[w]));
    }
    for (auto& t : pool) t.join();
  }

  EmpiricalRow out;
  out.samples = samples;
  out.counts.assign(n, 0);
  for (const auto& part : partial)
    for (Eigen::Index j = 0; j < n; ++j) out.counts[j] += part[j];
  out.frequencies.resize(n);
  for (Eigen::Index j = 0; j < n; ++j)
    out.frequencies(j) = static_cast<double>(out.counts[j]) / static_cast<double>(samples);
  return out;
}

ModifiedChain reflect_modify(const RoutingMatrix& r, const AcceptanceVector& alpha) {
  require_same_size(r, alpha);
  const Eigen::Index n = r.dim();
  Matrix kernel(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double off = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      kernel(i, j) = r(i, j) * alpha[j];
      off += kernel(i, j);
    }
    kernel(i, i) = std::max(0.0, 1.0 - off);
  }
  return ModifiedChain{RoutingMatrix(std::move(kernel)), RerouteMode::reflection,
                       alpha.taboo(), r, alpha};
}

ModifiedChain modify(const RoutingMatrix& r, const AcceptanceVector& alpha, RerouteMode mode) {
  switch (mode) {
    case RerouteMode::skipping: return skip_modify(r, alpha);
    case RerouteMode::reflection: return reflect_modify(r, alpha);
    case RerouteMode::user_supplied: break;
  }
  throw Error(ErrorCode::InvalidArgument,
              "user-supplied kernels cannot be derived from (r, alpha)");
}

ProbabilityVector modified_stationary(const ProbabilityVector& eta,
                                      const AcceptanceVector& alpha) {
  if (eta.size() != alpha.size())
    throw Error(ErrorCode::DimensionMismatch, "eta and alpha differ in size");
  const Vector weighted = eta.vector().cwiseProduct(alpha.vector());
  const double normalizer = weighted.sum();
  if (!(normalizer > 0.0))
    throw Error(ErrorCode::ZeroNormalizer, "<eta, alpha> = 0");
  return ProbabilityVector(weighted / normalizer);
}

PeskunVerdict peskun_compare(const RoutingMatrix& a, const RoutingMatrix& b, double tol) {
  if (a.dim() != b.dim())
    throw Error(ErrorCode::DimensionMismatch, "kernels differ in dimension");
  bool some_less = false, some_greater = false;
  std::optional<std::pair<std::size_t, std::size_t>> first_greater;
  const Eigen::Index n = a.dim();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = a(i, j) - b(i, j);
      if (d < -tol) some_less = true;
      if (d > tol) {
        some_greater = true;
        if (!first_greater)
          first_greater = {static_cast<std::size_t>(i), static_cast<std::size_t>(j)};
      }
    }
  }
  if (some_less && some_greater) return {PeskunRelation::incomparable, first_greater};
  if (some_less) return {PeskunRelation::less, std::nullopt};
  if (some_greater) return {PeskunRelation::greater, std::nullopt};
  return {PeskunRelation::equal, std::nullopt};
}

}  // namespace renvnet
