#include "renvnet/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>
#include <utility>

#include "renvnet/errors.hpp"
#include "renvnet/simulate.hpp"

namespace renvnet {

namespace {

using nlohmann::json;

Rows to_rows(const Matrix& m) {
  Rows out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i].push_back(m(i, j));
  return out;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

// Traffic residual max_j |eta_j - lambda_j - sum_i eta_i r(i,j)| over j=1..J.
double traffic_residual(const NetworkSpec& spec, const TrafficSolution& t) {
  const Matrix& r = spec.routing().matrix();
  const auto n = static_cast<Eigen::Index>(spec.nodes());
  double worst = 0.0;
  for (Eigen::Index j = 1; j <= n; ++j) {
    double in = spec.lambda(static_cast<std::size_t>(j));
    for (Eigen::Index i = 1; i <= n; ++i) in += t.eta(i) * r(i, j);
    worst = std::max(worst, std::abs(t.eta(j) - in));
  }
  return worst;
}

std::size_t box_size(std::size_t nodes, int bound, std::size_t statuses = 1) {
  double size = static_cast<double>(statuses);
  for (std::size_t j = 0; j < nodes; ++j) size *= bound + 1;
  return static_cast<std::size_t>(size);
}

void require_box(std::size_t nodes, int bound, std::size_t statuses = 1) {
  if (bound < 0) throw Error(ErrorCode::InvalidArgument, "probe bound must be nonnegative");
  if (box_size(nodes, bound, statuses) > 5'000'000)
    throw Error(ErrorCode::InvalidArgument, "probe box too large; lower --probe-bound");
}

void analyze(Report& rep, const SpecDocument& doc, const RunOptions& opt) {
  const NetworkSpec& spec = doc.network;
  const TrafficSolution traffic = solve_traffic(spec);
  rep.eta = to_std(traffic.eta);
  rep.checks.push_back({"traffic_residual", traffic_residual(spec, traffic), opt.tol_solve});
  const ProductFormDistribution xi(traffic, spec.services());
  rep.normalizers.clear();
  for (std::size_t j = 1; j <= spec.nodes(); ++j) rep.normalizers.push_back(xi.normalizer(j));
  rep.xi.clear();
  QueueVector n(spec.nodes(), 0);
  rep.xi.push_back({n, xi(n)});
  for (std::size_t j = 0; j < spec.nodes(); ++j) {
    QueueVector e(spec.nodes(), 0);
    e[j] = 1;
    rep.xi.push_back({e, xi(e)});
  }
  require_box(spec.nodes(), opt.probe_bound);
  const auto box = box_states(spec.nodes(), opt.probe_bound);
  rep.checks.push_back(
      {"jackson_balance", verify_global_balance(xi, jackson_generator(spec), box),
       opt.tol_balance});
}

ModifiedNetwork modified_network(const SpecDocument& doc, RerouteMode mode,
                                 const RunOptions& opt) {
  if (mode == RerouteMode::user_supplied) {
    if (!doc.user_kernel)
      throw Error(ErrorCode::InvalidArgument, "user_supplied mode needs capacity.user_kernel");
    return modify_network(doc.network, *doc.capacity, *doc.user_kernel, opt.tol_solve);
  }
  return modify_network(doc.network, *doc.capacity, mode);
}

void modify(Report& rep, const SpecDocument& doc, RerouteMode mode, const RunOptions& opt) {
  if (!doc.capacity) throw Error(ErrorCode::InvalidArgument, "the spec has no capacity section");
  const NetworkSpec& spec = doc.network;
  const ModifiedNetwork net = modified_network(doc, mode, opt);
  const ControlPair& c = net.controls();
  rep.gamma = doc.capacity->values();
  rep.alpha = to_std(c.alpha.vector());
  rep.beta = c.beta;
  rep.r_alpha = to_rows(net.kernel().matrix());
  rep.effective_arrival_rate = effective_arrival_rate(spec.total_arrival(), c.beta, net.kernel());
  rep.blocked = partition_nodes(*doc.capacity).blocked;

  const TrafficSolution traffic = solve_traffic(spec);
  const Vector weighted = traffic.eta.cwiseProduct(c.alpha.vector());
  if (weighted.sum() > 0.0)
    rep.checks.push_back({"modified_invariant_residual",
                          invariant_residual(weighted / weighted.sum(), net.kernel()),
                          opt.tol_solve});

  const StationaryFamily family = stationary_family(
      spec, *doc.capacity, doc.frozen_law.value_or(FrozenLaw::product_form_marginals()));
  require_box(spec.nodes(), opt.probe_bound);
  const auto box = box_states(spec.nodes(), opt.probe_bound);
  rep.checks.push_back(
      {"modified_balance", verify_global_balance(family, modified_generator(net), box),
       opt.tol_balance});
}

EnvironmentSpec with_mode(const EnvironmentSpec& env, RerouteMode mode) {
  std::vector<RoutingMatrix> jumps;
  std::vector<CapacityFactors> gamma;
  for (std::size_t j = 1; j <= env.nodes(); ++j) jumps.push_back(env.departure_jump(j));
  for (std::size_t k = 0; k < env.statuses(); ++k) gamma.push_back(env.gamma(k));
  return EnvironmentSpec(env.generator(), std::move(jumps), std::move(gamma), mode,
                         env.user_kernels(), env.status_names());
}

EnvironmentModel environment_model(const SpecDocument& doc, RerouteMode mode) {
  if (!doc.environment)
    throw Error(ErrorCode::InvalidArgument, "the spec has no environment section");
  return EnvironmentModel(doc.network, doc.environment->mode() == mode
                                           ? *doc.environment
                                           : with_mode(*doc.environment, mode));
}

void env(Report& rep, const SpecDocument& doc, RerouteMode mode, const RunOptions& opt) {
  const EnvironmentModel model = environment_model(doc, mode);
  const ReducedGenerator q = reduced_generator(model);
  const ProbabilityVector theta = solve_theta(q);
  rep.eta = to_std(model.traffic().eta);
  rep.q_red = to_rows(q.matrix);
  rep.theta = to_std(theta.vector());
  rep.checks.push_back(
      {"theta_residual", (theta.vector().transpose() * q.matrix).cwiseAbs().maxCoeff(),
       opt.tol_solve});
  require_box(model.spec().nodes(), opt.probe_bound, model.statuses());
  const auto box = coupled_box(model.spec().nodes(), opt.probe_bound, model.statuses());
  rep.checks.push_back(
      {"coupled_balance", verify_coupled_balance(model, theta, box), opt.tol_balance});
}

// Smallest n with marginal mass beyond n below 1e-9, capped.
int support_bound(const ProductFormDistribution& xi, std::size_t j) {
  double mass = 0.0;
  for (int n = 0; n < 500; ++n) {
    mass += xi.marginal(j, n);
    if (1.0 - mass < 1e-9) return n;
  }
  return 500;
}

void simulate(Report& rep, const SpecDocument& doc, RerouteMode mode, const RunOptions& opt) {
  const std::uint64_t events =
      opt.events.value_or(doc.simulation ? doc.simulation->events : SimulationSettings{}.events);
  const std::uint64_t seed =
      opt.seed.value_or(doc.simulation ? doc.simulation->seed : SimulationSettings{}.seed);
  const NetworkSpec& spec = doc.network;
  const std::size_t nodes = spec.nodes();
  const ProductFormDistribution xi = make_product_form(spec);
  rep.eta = to_std(xi.traffic().eta);

  if (doc.environment) {
    const EnvironmentModel model = environment_model(doc, mode);
    const ProbabilityVector theta = solve_theta(reduced_generator(model));
    rep.theta = to_std(theta.vector());
    const CoupledState init{QueueVector(nodes, 0), 0};
    const auto occ = simulate_occupation(coupled_generator(model), init,
                                         Budget::of_events(events), seed,
                                         [](const CoupledState& s) { return s; });
    const std::size_t statuses = model.statuses();
    for (std::size_t j = 1; j <= nodes; ++j) {
      OccupationMeasure<std::pair<int, std::size_t>> joint;
      for (const auto& [s, p] : occ.fractions) joint.fractions[{s.n[j - 1], s.k}] += p;
      std::vector<std::pair<int, std::size_t>> support;
      for (int n = 0; n <= support_bound(xi, j); ++n)
        for (std::size_t k = 0; k < statuses; ++k) support.emplace_back(n, k);
      const auto pmf = [&](const std::pair<int, std::size_t>& s) {
        return xi.marginal(j, s.first) * theta[static_cast<Eigen::Index>(s.second)];
      };
      rep.comparisons.push_back({"queue" + std::to_string(j) + "_status",
                                 empirical_compare(joint, pmf, support), events, seed});
    }
    return;
  }

  GeneratorView<QueueVector> gen = jackson_generator(spec);
  std::vector<bool> blocked(nodes, false);
  if (doc.capacity) {
    const ModifiedNetwork net = modified_network(doc, mode, opt);
    gen = modified_generator(net);
    for (std::size_t j : partition_nodes(*doc.capacity).blocked) blocked[j - 1] = true;
  }
  const auto occ = simulate_occupation(gen, QueueVector(nodes, 0), Budget::of_events(events),
                                       seed, [](const QueueVector& s) { return s; });
  for (std::size_t j = 1; j <= nodes; ++j) {
    OccupationMeasure<int> marginal;
    for (const auto& [s, p] : occ.fractions) marginal.fractions[s[j - 1]] += p;
    // blocked nodes never move from the empty initial state
    const int top = blocked[j - 1] ? 0 : support_bound(xi, j);
    std::vector<int> support;
    for (int n = 0; n <= top; ++n) support.push_back(n);
    const auto pmf = [&](int n) {
      return blocked[j - 1] ? (n == 0 ? 1.0 : 0.0) : xi.marginal(j, n);
    };
    rep.comparisons.push_back({"queue" + std::to_string(j),
                               empirical_compare(marginal, pmf, support), events, seed});
  }
}

json optional_field(const auto& v) { return v ? json(*v) : json(nullptr); }

template <class T>
void read_optional(const json& doc, const char* key, std::optional<T>& out) {
  const auto it = doc.find(key);
  if (it != doc.end() && !it->is_null()) out = it->template get<T>();
}

}  // namespace

bool Report::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed(); });
}

Command parse_command(std::string_view text) {
  if (text == "analyze") return Command::analyze;
  if (text == "modify") return Command::modify;
  if (text == "env") return Command::env;
  if (text == "simulate") return Command::simulate;
  if (text == "verify") return Command::verify;
  throw Error(ErrorCode::InvalidArgument, "unknown command '" + std::string(text) + "'");
}

Report run(Command command, const SpecDocument& doc, const RunOptions& options) {
  const RerouteMode mode = options.mode.value_or(doc.mode);
  Report rep;
  rep.mode = std::string(to_string(mode));
  switch (command) {
    case Command::analyze:
      rep.command = "analyze";
      analyze(rep, doc, options);
      break;
    case Command::modify:
      rep.command = "modify";
      analyze(rep, doc, options);
      modify(rep, doc, mode, options);
      break;
    case Command::env:
      rep.command = "env";
      env(rep, doc, mode, options);
      break;
    case Command::simulate:
      rep.command = "simulate";
      simulate(rep, doc, mode, options);
      break;
    case Command::verify:
      rep.command = "verify";
      analyze(rep, doc, options);
      if (doc.capacity) modify(rep, doc, mode, options);
      if (doc.environment) env(rep, doc, mode, options);
      break;
  }
  return rep;
}

json to_json(const Report& r) {
  json xi = json::array();
  for (const auto& s : r.xi) xi.push_back({{"state", s.state}, {"probability", s.probability}});
  json checks = json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name},
                      {"value", c.value},
                      {"threshold", c.threshold},
                      {"passed", c.passed()}});
  json comparisons = json::array();
  for (const auto& c : r.comparisons)
    comparisons.push_back({{"name", c.name},
                           {"total_variation", c.total_variation},
                           {"events", c.events},
                           {"seed", c.seed}});
  return {{"schema", kReportSchema},
          {"command", r.command},
          {"mode", r.mode},
          {"eta", r.eta},
          {"normalizers", r.normalizers},
          {"xi", xi},
          {"gamma", optional_field(r.gamma)},
          {"alpha", optional_field(r.alpha)},
          {"beta", optional_field(r.beta)},
          {"r_alpha", optional_field(r.r_alpha)},
          {"effective_arrival_rate", optional_field(r.effective_arrival_rate)},
          {"blocked", optional_field(r.blocked)},
          {"q_red", optional_field(r.q_red)},
          {"theta", optional_field(r.theta)},
          {"checks", checks},
          {"comparisons", comparisons},
          {"ok", r.ok()}};
}

Report report_from_json(const json& doc) {
  try {
    if (doc.at("schema").get<std::string>() != kReportSchema)
      throw Error(ErrorCode::SchemaError, "schema: not a renvnet report");
    Report r;
    r.command = doc.at("command").get<std::string>();
    r.mode = doc.at("mode").get<std::string>();
    r.eta = doc.at("eta").get<std::vector<double>>();
    r.normalizers = doc.at("normalizers").get<std::vector<double>>();
    for (const auto& s : doc.at("xi"))
      r.xi.push_back({s.at("state").get<std::vector<int>>(), s.at("probability").get<double>()});
    read_optional(doc, "gamma", r.gamma);
    read_optional(doc, "alpha", r.alpha);
    read_optional(doc, "beta", r.beta);
    read_optional(doc, "r_alpha", r.r_alpha);
    read_optional(doc, "effective_arrival_rate", r.effective_arrival_rate);
    read_optional(doc, "blocked", r.blocked);
    read_optional(doc, "q_red", r.q_red);
    read_optional(doc, "theta", r.theta);
    for (const auto& c : doc.at("checks"))
      r.checks.push_back({c.at("name").get<std::string>(), c.at("value").get<double>(),
                          c.at("threshold").get<double>()});
    for (const auto& c : doc.at("comparisons"))
      r.comparisons.push_back({c.at("name").get<std::string>(),
                               c.at("total_variation").get<double>(),
                               c.at("events").get<std::uint64_t>(),
                               c.at("seed").get<std::uint64_t>()});
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("report: ") + e.what());
  }
}

namespace {

void print_vector(std::ostream& os, const char* label, const std::vector<double>& v,
                  std::size_t first_index) {
  os << label << "\n";
  for (std::size_t i = 0; i < v.size(); ++i)
    os << "  " << std::setw(4) << i + first_index << "  " << std::setw(22) << v[i] << "\n";
}

void print_rows(std::ostream& os, const char* label, const Rows& m) {
  os << label << "\n";
  for (const auto& row : m) {
    os << " ";
    for (double x : row) os << " " << std::setw(20) << x;
    os << "\n";
  }
}

}  // namespace

void print_tables(std::ostream& os, const Report& r) {
  const auto flags = os.flags();
  const auto precision = os.precision();
  os << std::setprecision(15);
  os << "command: " << r.command << "   mode: " << r.mode << "\n";
  if (!r.eta.empty()) print_vector(os, "traffic eta (0 = exterior)", r.eta, 0);
  if (!r.normalizers.empty()) print_vector(os, "normalizers C(j)", r.normalizers, 1);
  if (!r.xi.empty()) {
    os << "xi\n";
    for (const auto& s : r.xi) {
      std::ostringstream st;
      st << "(";
      for (std::size_t i = 0; i < s.state.size(); ++i) st << (i ? "," : "") << s.state[i];
      st << ")";
      os << "  " << std::left << std::setw(16) << st.str() << std::right << std::setw(22)
         << s.probability << "\n";
    }
  }
  if (r.gamma) print_vector(os, "gamma", *r.gamma, 1);
  if (r.alpha) print_vector(os, "alpha", *r.alpha, 0);
  if (r.beta) os << "beta  " << *r.beta << "\n";
  if (r.effective_arrival_rate) os << "effective arrival rate  " << *r.effective_arrival_rate << "\n";
  if (r.blocked && !r.blocked->empty()) {
    os << "blocked nodes ";
    for (std::size_t j : *r.blocked) os << " " << j;
    os << "\n";
  }
  if (r.r_alpha) print_rows(os, "modified routing", *r.r_alpha);
  if (r.q_red) print_rows(os, "reduced generator", *r.q_red);
  if (r.theta) print_vector(os, "theta", *r.theta, 0);
  if (!r.checks.empty()) {
    os << std::setprecision(3) << "checks\n";
    for (const auto& c : r.checks)
      os << "  " << std::left << std::setw(30) << c.name << std::right << std::setw(12)
         << c.value << "  <= " << std::setw(9) << c.threshold << "  "
         << (c.passed() ? "ok" : "FAIL") << "\n";
  }
  if (!r.comparisons.empty()) {
    os << std::setprecision(4) << "simulation (total variation)\n";
    for (const auto& c : r.comparisons)
      os << "  " << std::left << std::setw(30) << c.name << std::right << std::setw(12)
         << c.total_variation << "  events " << c.events << "  seed " << c.seed << "\n";
  }
  os.flags(flags);
  os.precision(precision);
}

json error_object(const std::exception& e) {
  const auto* err = dynamic_cast<const Error*>(&e);
  return {{"error",
           {{"code", err ? std::string(to_string(err->code())) : std::string("InternalError")},
            {"message", e.what()}}}};
}

}  // namespace renvnet
