#include "renvnet/simulate.hpp"

#include <cmath>
#include <sstream>

#include "renvnet/detail/sampling.hpp"

namespace renvnet {

namespace {

void require_inputs(const RoutingMatrix& r, const AcceptanceVector& alpha, std::size_t anchor,
                    std::uint64_t cycles) {
  if (r.dim() != alpha.size())
    throw Error(ErrorCode::DimensionMismatch, "acceptance vector and matrix differ in size");
  if (anchor >= static_cast<std::size_t>(r.dim()))
    throw Error(ErrorCode::InvalidArgument, "anchor state out of range");
  if (cycles < 2) throw Error(ErrorCode::InvalidArgument, "need at least two cycles");
  if (!(alpha[static_cast<Eigen::Index>(anchor)] > 0.0))
    throw Error(ErrorCode::ZeroAcceptance, "the anchor state must have positive acceptance");
}

void require_positive_alpha(const RoutingMatrix& r, const AcceptanceVector& alpha,
                            std::size_t anchor, std::uint64_t cycles) {
  require_inputs(r, alpha, anchor, cycles);
  for (Eigen::Index j = 0; j < alpha.size(); ++j) {
    if (!(alpha[j] > 0.0)) {
      std::ostringstream os;
      os << "alpha(" << j << ") = 0; the 1/alpha weights are undefined";
      throw Error(ErrorCode::ZeroAcceptance, os.str());
    }
  }
}

// Ratio estimate of sum(a)/sum(b) with a delta-method standard error.
RegenerativeEstimate ratio_estimate(const std::vector<double>& a,
                                    const std::vector<double>& b) {
  const auto k = static_cast<double>(a.size());
  double sa = 0.0, sb = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    sa += a[c];
    sb += b[c];
  }
  RegenerativeEstimate out;
  out.replications = a.size();
  out.estimate = sa / sb;
  double ss = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    const double z = a[c] - out.estimate * b[c];
    ss += z * z;
  }
  const double var = ss / (k - 1.0);
  out.standard_error = std::sqrt(var / k) / (sb / k);
  return out;
}

}  // namespace

RegenerativeEstimate regenerative_estimate(const RoutingMatrix& r,
                                           const AcceptanceVector& alpha,
                                           const StateFunction& f, std::size_t anchor,
                                           std::uint64_t cycles, std::uint64_t seed,
                                           RerouteMode mode) {
  require_positive_alpha(r, alpha, anchor, cycles);
  const ModifiedChain chain = modify(r, alpha, mode);
  const auto width = static_cast<std::size_t>(r.dim());
  const std::vector<double> cumulative = detail::cumulative_rows(chain.kernel);
  const Vector& a = alpha.vector();

  std::vector<double> num(cycles), den(cycles);
  for (std::uint64_t c = 0; c < cycles; ++c) {
    CounterRng rng(seed, c);
    std::size_t x = anchor;
    double sf = 0.0, s1 = 0.0;
    do {
      const double w = 1.0 / a(static_cast<Eigen::Index>(x));
      sf += f(x) * w;
      s1 += w;
      x = detail::sample_row({cumulative.data() + x * width, width}, rng.uniform());
    } while (x != anchor);
    num[c] = sf;
    den[c] = s1;
  }
  return ratio_estimate(num, den);
}

RegenerativeEstimate simulate_augmented_chain(const RoutingMatrix& r,
                                              const AcceptanceVector& alpha,
                                              std::size_t anchor, std::uint64_t cycles,
                                              std::uint64_t seed, const StateFunction& f) {
  require_inputs(r, alpha, anchor, cycles);
  const auto width = static_cast<std::size_t>(r.dim());
  const std::vector<double> cumulative = detail::cumulative_rows(r);
  const Vector& a = alpha.vector();

  std::vector<double> num(cycles), den(cycles);
  for (std::uint64_t c = 0; c < cycles; ++c) {
    CounterRng rng(seed, c);
    std::size_t x = anchor;
    bool y = true;
    double sf = 0.0, s1 = 0.0;
    for (;;) {
      if (y) {
        const double w = guarded_div(1.0, a(static_cast<Eigen::Index>(x)));
        sf += f(x) * w;
        s1 += w;
      }
      x = detail::sample_row({cumulative.data() + x * width, width}, rng.uniform());
      y = rng.bernoulli(a(static_cast<Eigen::Index>(x)));
      if (y && x == anchor) break;
    }
    num[c] = sf;
    den[c] = s1;
  }
  return ratio_estimate(num, den);
}

}  // namespace renvnet
