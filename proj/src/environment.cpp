#include "renvnet/environment.hpp"

#include <cmath>
#include <sstream>

#include "renvnet/errors.hpp"

namespace renvnet {

EnvironmentSpec::EnvironmentSpec(Matrix generator, std::vector<RoutingMatrix> departure_jumps,
                                 std::vector<CapacityFactors> gamma, RerouteMode mode,
                                 std::vector<RoutingMatrix> user_kernels,
                                 std::vector<std::string> status_names)
    : v_(std::move(generator)), r_(std::move(departure_jumps)), gamma_(std::move(gamma)),
      mode_(mode), user_kernels_(std::move(user_kernels)), names_(std::move(status_names)) {
  const Eigen::Index k_count = v_.rows();
  if (k_count == 0 || v_.cols() != k_count) {
    std::ostringstream os;
    os << "environment generator V must be square and non-empty, got " << v_.rows() << "x"
       << v_.cols();
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }
  for (Eigen::Index k = 0; k < k_count; ++k) {
    for (Eigen::Index m = 0; m < k_count; ++m) {
      if (!std::isfinite(v_(k, m)) || (m != k && v_(k, m) < 0.0)) {
        std::ostringstream os;
        os << "V(" << k << "," << m << ") = " << v_(k, m) << " is not a valid rate";
        throw Error(ErrorCode::InvalidArgument, os.str());
      }
    }
    if (std::abs(v_.row(k).sum()) > kValidationTol) {
      std::ostringstream os;
      os.precision(17);
      os << "row " << k << " of V sums to " << v_.row(k).sum() << ", expected 0";
      throw Error(ErrorCode::RowSumError, os.str());
    }
  }
  if (r_.empty()) throw Error(ErrorCode::DimensionMismatch, "need one R_j per node");
  for (std::size_t j = 0; j < r_.size(); ++j)
    if (r_[j].dim() != k_count)
      throw Error(ErrorCode::DimensionMismatch,
                  "R_" + std::to_string(j + 1) + " must be KxK");
  if (gamma_.size() != statuses())
    throw Error(ErrorCode::DimensionMismatch, "need one capacity factor vector per status");
  for (std::size_t k = 0; k < gamma_.size(); ++k)
    if (gamma_[k].size() != r_.size())
      throw Error(ErrorCode::DimensionMismatch,
                  "gamma of status " + std::to_string(k) + " needs one entry per node");
  if (mode_ == RerouteMode::user_supplied) {
    if (user_kernels_.size() != statuses())
      throw Error(ErrorCode::DimensionMismatch,
                  "user-supplied rerouting needs one kernel per status");
    for (const auto& kern : user_kernels_)
      if (static_cast<std::size_t>(kern.dim()) != r_.size() + 1)
        throw Error(ErrorCode::DimensionMismatch, "user kernels must be (J+1)x(J+1)");
  } else if (!user_kernels_.empty()) {
    throw Error(ErrorCode::InvalidArgument,
                "kernels may only be given with user_supplied rerouting");
  }
  if (!names_.empty() && names_.size() != statuses())
    throw Error(ErrorCode::DimensionMismatch, "need one name per status");
}

StatusControls per_status_controls(const NetworkSpec& spec, const EnvironmentSpec& env,
                                   std::size_t k) {
  if (env.nodes() != spec.nodes())
    throw Error(ErrorCode::DimensionMismatch, "environment and network node counts differ");
  if (k >= env.statuses()) throw Error(ErrorCode::InvalidArgument, "status out of range");
  ControlPair controls = derive_controls(env.gamma(k));
  if (env.mode() == RerouteMode::user_supplied) {
    ModifiedChain chain{env.user_kernels()[k], RerouteMode::user_supplied,
                        controls.alpha.taboo(), spec.routing(), controls.alpha};
    return {std::move(controls), std::move(chain)};
  }
  ModifiedChain chain = modify(spec.routing(), controls.alpha, env.mode());
  return {std::move(controls), std::move(chain)};
}

EnvironmentModel::EnvironmentModel(NetworkSpec spec, EnvironmentSpec env)
    : spec_(std::move(spec)), env_(std::move(env)), traffic_(solve_traffic(spec_)) {
  per_status_.reserve(env_.statuses());
  for (std::size_t k = 0; k < env_.statuses(); ++k)
    per_status_.push_back(per_status_controls(spec_, env_, k));
}

std::optional<std::string> EnvironmentModel::hypothesis_violation(double tol) const {
  switch (env_.mode()) {
    case RerouteMode::skipping:
      return std::nullopt;
    case RerouteMode::reflection:
      if (!check_reversible(spec_.routing(), traffic_.normalized(), tol))
        return "reflection rerouting requires a reversible extended routing matrix";
      return std::nullopt;
    case RerouteMode::user_supplied:
      for (std::size_t k = 0; k < statuses(); ++k) {
        const Vector y = traffic_.eta.cwiseProduct(per_status_[k].controls.alpha.vector());
        const double res = invariant_residual(y, per_status_[k].chain.kernel);
        if (res > tol) {
          std::ostringstream os;
          os << "kernel of status " << k << " does not leave alpha(k) eta invariant (residual "
             << res << ")";
          return os.str();
        }
      }
      return std::nullopt;
  }
  return std::nullopt;
}

GeneratorView<CoupledState> coupled_generator(const EnvironmentModel& model) {
  const std::size_t j_count = model.spec().nodes();
  const std::size_t k_count = model.statuses();
  const double lambda = model.spec().total_arrival();
  const Matrix v = model.env().generator();
  std::vector<Matrix> kernels, jumps;
  std::vector<double> beta;
  std::vector<std::vector<double>> gamma;
  for (std::size_t k = 0; k < k_count; ++k) {
    kernels.push_back(model.status(k).chain.kernel.matrix());
    beta.push_back(model.status(k).controls.beta);
    gamma.push_back(model.env().gamma(k).values());
  }
  for (std::size_t j = 1; j <= j_count; ++j)
    jumps.push_back(model.env().departure_jump(j).matrix());
  const auto services = model.spec().services();
  const auto idx = [](std::size_t i) { return static_cast<Eigen::Index>(i); };

  GeneratorView<CoupledState> gen;
  gen.outgoing = [=](const CoupledState& s) {
    TransitionList<CoupledState> out;
    const std::size_t k = s.k;
    const Matrix& kern = kernels[k];
    const double arrival_rate = beta[k] * lambda;
    for (std::size_t i = 1; i <= j_count; ++i) {
      const double rate = arrival_rate * kern(0, idx(i));
      if (rate > 0.0) {
        CoupledState t = s;
        ++t.n[i - 1];
        out.push_back({std::move(t), rate});
      }
    }
    for (std::size_t j = 1; j <= j_count; ++j) {
      if (s.n[j - 1] <= 0) continue;
      const double service = gamma[k][j - 1] * services[j - 1](s.n[j - 1]);
      for (std::size_t i = 1; i <= j_count; ++i) {
        if (i == j) continue;
        const double rate = service * kern(idx(j), idx(i));
        if (rate > 0.0) {
          CoupledState t = s;
          --t.n[j - 1];
          ++t.n[i - 1];
          out.push_back({std::move(t), rate});
        }
      }
      const double leave = service * kern(idx(j), 0);
      if (!(leave > 0.0)) continue;
      for (std::size_t m = 0; m < k_count; ++m) {
        const double rate = leave * jumps[j - 1](idx(k), idx(m));
        if (rate > 0.0) {
          CoupledState t{s.n, m};
          --t.n[j - 1];
          out.push_back({std::move(t), rate});
        }
      }
    }
    for (std::size_t m = 0; m < k_count; ++m) {
      if (m == k) continue;
      const double rate = v(idx(k), idx(m));
      if (rate > 0.0) out.push_back({CoupledState{s.n, m}, rate});
    }
    return out;
  };
  gen.incoming = [=](const CoupledState& s) {
    TransitionList<CoupledState> in;
    const std::size_t k = s.k;
    const Matrix& kern = kernels[k];
    const double arrival_rate = beta[k] * lambda;
    for (std::size_t i = 1; i <= j_count; ++i) {
      if (s.n[i - 1] <= 0) continue;
      const double rate = arrival_rate * kern(0, idx(i));
      if (rate > 0.0) {
        CoupledState t = s;
        --t.n[i - 1];
        in.push_back({std::move(t), rate});
      }
    }
    for (std::size_t j = 1; j <= j_count; ++j) {
      const int next = s.n[j - 1] + 1;
      const double service = gamma[k][j - 1] * services[j - 1](next);
      for (std::size_t i = 1; i <= j_count; ++i) {
        if (i == j || s.n[i - 1] <= 0) continue;
        const double rate = service * kern(idx(j), idx(i));
        if (rate > 0.0) {
          CoupledState t = s;
          ++t.n[j - 1];
          --t.n[i - 1];
          in.push_back({std::move(t), rate});
        }
      }
      for (std::size_t m = 0; m < k_count; ++m) {
        const double leave = gamma[m][j - 1] * services[j - 1](next) * kernels[m](idx(j), 0);
        const double rate = leave * jumps[j - 1](idx(m), idx(k));
        if (rate > 0.0) {
          CoupledState t{s.n, m};
          ++t.n[j - 1];
          in.push_back({std::move(t), rate});
        }
      }
    }
    for (std::size_t m = 0; m < k_count; ++m) {
      if (m == k) continue;
      const double rate = v(idx(m), idx(k));
      if (rate > 0.0) in.push_back({CoupledState{s.n, m}, rate});
    }
    return in;
  };
  return gen;
}

ReducedGenerator reduced_generator(const EnvironmentModel& model) {
  const auto k_count = static_cast<Eigen::Index>(model.statuses());
  Matrix q = model.env().generator();
  const Matrix identity = Matrix::Identity(k_count, k_count);
  for (std::size_t j = 1; j <= model.spec().nodes(); ++j) {
    Vector exit_flow(k_count);
    for (Eigen::Index k = 0; k < k_count; ++k)
      exit_flow(k) = model.env().gamma(static_cast<std::size_t>(k))[j] *
                     model.status(static_cast<std::size_t>(k))
                         .chain.kernel(static_cast<Eigen::Index>(j), 0);
    q += model.traffic().eta(static_cast<Eigen::Index>(j)) * exit_flow.asDiagonal() *
         (model.env().departure_jump(j).matrix() - identity);
  }
  for (Eigen::Index k = 0; k < k_count; ++k) {
    for (Eigen::Index m = 0; m < k_count; ++m) {
      if (m != k && q(k, m) < -kNumericTol)
        throw Error(ErrorCode::NotAGenerator, "Q_red has a negative off-diagonal entry");
    }
    if (std::abs(q.row(k).sum()) > kNumericTol)
      throw Error(ErrorCode::NotAGenerator,
                  "row " + std::to_string(k) + " of Q_red does not sum to zero");
  }
  return ReducedGenerator{std::move(q)};
}

ProbabilityVector solve_theta(const ReducedGenerator& q_red) {
  return generator_stationary(q_red.matrix);
}

double coupled_product_pmf(const ProductFormDistribution& xi, const ProbabilityVector& theta,
                           const CoupledState& s) {
  return xi(s.n) * theta[static_cast<Eigen::Index>(s.k)];
}

double verify_coupled_balance(const EnvironmentModel& model, const ProbabilityVector& theta,
                              std::span<const CoupledState> probes) {
  if (auto why = model.hypothesis_violation())
    throw Error(ErrorCode::HypothesisViolated, *why);
  if (static_cast<std::size_t>(theta.size()) != model.statuses())
    throw Error(ErrorCode::DimensionMismatch, "theta must have one entry per status");
  const ProductFormDistribution xi(model.traffic(), model.spec().services());
  const auto gen = coupled_generator(model);
  const auto pmf = [&](const CoupledState& s) { return coupled_product_pmf(xi, theta, s); };
  return verify_global_balance(pmf, gen, probes);
}

std::vector<CoupledState> coupled_box(std::size_t nodes, int bound, std::size_t statuses) {
  std::vector<CoupledState> out;
  for (const QueueVector& n : box_states(nodes, bound))
    for (std::size_t k = 0; k < statuses; ++k) out.push_back({n, k});
  return out;
}

}  // namespace renvnet
