#pragma once

// Kernel modifications of a Markov routing chain by per-state acceptance
// probabilities: randomized skipping (rejected candidates are passed through
// instantaneously) and randomized reflection (rejected candidates leave the
// walker where it is), plus the induced stationary transform and the
// off-diagonal (Peskun) comparison of kernels.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "renvnet/chain_core.hpp"

namespace renvnet {

enum class RerouteMode { skipping, reflection, user_supplied };

std::string_view to_string(RerouteMode mode);
RerouteMode parse_reroute_mode(std::string_view text);

/// Per-state acceptance probabilities alpha in [0,1]^F, not all zero.
class AcceptanceVector {
 public:
  explicit AcceptanceVector(Vector alphas);

  static AcceptanceVector ones(Eigen::Index n);

  Eigen::Index size() const { return a_.size(); }
  double operator[](Eigen::Index i) const { return a_(i); }
  const Vector& vector() const { return a_; }

  /// B(alpha) = {j : alpha_j = 0}
  std::vector<std::size_t> taboo() const;
  bool all_positive() const;

 private:
  Vector a_;
};

struct ModifiedChain {
  RoutingMatrix kernel;
  RerouteMode mode;
  std::vector<std::size_t> taboo;
  RoutingMatrix source;
  AcceptanceVector alpha;
};

/// r^(alpha) = (I - r I_{1-alpha})^{-1} r I_alpha. Taboo states stay in the
/// index set with identically zero columns.
ModifiedChain skip_modify(const RoutingMatrix& r, const AcceptanceVector& alpha);

/// Partial sum of the geometric series sum_{k<terms} (r I_{1-alpha})^k r I_alpha.
Matrix skip_oracle(const RoutingMatrix& r, const AcceptanceVector& alpha, int terms);

struct EmpiricalRow {
  Vector frequencies;
  std::vector<std::uint64_t> counts;
  std::uint64_t samples = 0;

  /// Binomial standard error of each frequency, evaluated at `p`.
  Vector standard_errors(const Vector& p) const;
};

/// Monte-Carlo estimate of r^(alpha)(start, .) obtained by running the
/// auxiliary absorbing chain until its first acceptance. Sample s always uses
/// substream (seed, s), so the result does not depend on `workers`.
EmpiricalRow skip_absorbing_oracle(const RoutingMatrix& r, const AcceptanceVector& alpha,
                                   std::size_t start, std::uint64_t seed,
                                   std::uint64_t samples, unsigned workers = 1);

/// kernel(i,j) = r(i,j) alpha_j off the diagonal; the diagonal takes the
/// remaining mass so every row sums to one.
ModifiedChain reflect_modify(const RoutingMatrix& r, const AcceptanceVector& alpha);

/// Dispatches to skip_modify or reflect_modify.
ModifiedChain modify(const RoutingMatrix& r, const AcceptanceVector& alpha, RerouteMode mode);

/// (eta_j alpha_j / <eta, alpha>)_j
ProbabilityVector modified_stationary(const ProbabilityVector& eta,
                                      const AcceptanceVector& alpha);

enum class PeskunRelation { less, greater, equal, incomparable };

std::string_view to_string(PeskunRelation rel);

struct PeskunVerdict {
  PeskunRelation relation;
  // For `incomparable`: an off-diagonal pair with a(i,j) > b(i,j).
  std::optional<std::pair<std::size_t, std::size_t>> witness;
};

/// Off-diagonal elementwise comparison of `a` against `b`; entries closer
/// than `tol` count as equal. Whether both kernels share a stationary vector
/// is left to the caller.
PeskunVerdict peskun_compare(const RoutingMatrix& a, const RoutingMatrix& b,
                             double tol = kValidationTol);

}  // namespace renvnet
