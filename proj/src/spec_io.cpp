#include "renvnet/spec_io.hpp"

#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "renvnet/errors.hpp"

namespace renvnet {

namespace {

using nlohmann::json;

[[noreturn]] void fail(ErrorCode code, const std::string& path, const std::string& what) {
  throw Error(code, path + ": " + what);
}

std::string at(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

std::string dot(const std::string& path, const char* key) {
  return path.empty() ? std::string(key) : path + "." + key;
}

// Runs `f`, prefixing the message of any library error with `path`.
template <class F>
auto with_path(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    fail(e.code(), path, e.what());
  }
}

const json& member(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) fail(ErrorCode::SchemaError, path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(ErrorCode::SchemaError, dot(path, key), "missing field");
  return *it;
}

const json* optional_member(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(ErrorCode::SchemaError, path, "expected a number");
  return v.get<double>();
}

std::uint64_t count(const json& v, const std::string& path) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    fail(ErrorCode::SchemaError, path, "expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

std::vector<double> numbers(const json& v, const std::string& path) {
  if (!v.is_array()) fail(ErrorCode::SchemaError, path, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], at(path, i)));
  return out;
}

Matrix matrix(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty())
    fail(ErrorCode::SchemaError, path, "expected a non-empty array of rows");
  const std::size_t rows = v.size();
  std::size_t cols = 0;
  Matrix m;
  for (std::size_t i = 0; i < rows; ++i) {
    const std::vector<double> row = numbers(v[i], at(path, i));
    if (i == 0) {
      cols = row.size();
      m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    } else if (row.size() != cols) {
      std::ostringstream os;
      os << "row has " << row.size() << " entries, expected " << cols;
      fail(ErrorCode::DimensionMismatch, at(path, i), os.str());
    }
    for (std::size_t j = 0; j < cols; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
  }
  return m;
}

Matrix square_matrix(const json& v, const std::string& path, std::size_t expected) {
  Matrix m = matrix(v, path);
  if (static_cast<std::size_t>(m.rows()) != expected ||
      static_cast<std::size_t>(m.cols()) != expected) {
    std::ostringstream os;
    os << "expected a " << expected << "x" << expected << " matrix, got " << m.rows() << "x"
       << m.cols();
    fail(ErrorCode::DimensionMismatch, path, os.str());
  }
  return m;
}

RoutingMatrix routing(const json& v, const std::string& path, std::size_t expected) {
  Matrix m = square_matrix(v, path, expected);
  return with_path(path, [&] { return RoutingMatrix(std::move(m)); });
}

ServiceRateFunction service(const json& v, const std::string& path) {
  if (v.is_number())
    return with_path(path, [&] { return ServiceRateFunction::constant(v.get<double>()); });
  if (!v.is_object())
    fail(ErrorCode::SchemaError, path, "expected a rate or {\"table\": [...], \"tail\": rate}");
  std::vector<double> table;
  if (const json* t = optional_member(v, "table")) table = numbers(*t, dot(path, "table"));
  const double tail = number(member(v, "tail", path), dot(path, "tail"));
  return with_path(path, [&] { return ServiceRateFunction(std::move(table), tail); });
}

NetworkSpec network(const json& v, const std::string& path) {
  const std::vector<double> lambda =
      numbers(member(v, "arrivals", path), dot(path, "arrivals"));
  if (lambda.empty()) fail(ErrorCode::SchemaError, dot(path, "arrivals"), "no nodes");
  const std::size_t nodes = lambda.size();

  const std::string spath = dot(path, "service");
  const json& sv = member(v, "service", path);
  if (!sv.is_array()) fail(ErrorCode::SchemaError, spath, "expected an array");
  if (sv.size() != nodes) {
    std::ostringstream os;
    os << "expected " << nodes << " entries, got " << sv.size();
    fail(ErrorCode::DimensionMismatch, spath, os.str());
  }
  std::vector<ServiceRateFunction> services;
  for (std::size_t j = 0; j < nodes; ++j) services.push_back(service(sv[j], at(spath, j)));

  const json* ext = optional_member(v, "routing");
  const json* inner = optional_member(v, "internal_routing");
  if ((ext != nullptr) == (inner != nullptr))
    fail(ErrorCode::SchemaError, path, "give exactly one of routing, internal_routing");
  if (ext != nullptr) {
    RoutingMatrix r = routing(*ext, dot(path, "routing"), nodes + 1);
    return with_path(path, [&] { return NetworkSpec(lambda, std::move(r), services); });
  }
  const std::string ipath = dot(path, "internal_routing");
  const Matrix m = square_matrix(*inner, ipath, nodes);
  return with_path(ipath, [&] { return NetworkSpec::from_internal(lambda, m, services); });
}

RerouteMode mode(const json& v, const std::string& path) {
  if (!v.is_string()) fail(ErrorCode::SchemaError, path, "expected a string");
  return with_path(path, [&] { return parse_reroute_mode(v.get<std::string>()); });
}

CapacityFactors factors(const json& v, const std::string& path, std::size_t nodes) {
  std::vector<double> g = numbers(v, path);
  if (g.size() != nodes) {
    std::ostringstream os;
    os << "expected " << nodes << " factors, got " << g.size();
    fail(ErrorCode::DimensionMismatch, path, os.str());
  }
  return with_path(path, [&] { return CapacityFactors(std::move(g)); });
}

FrozenLaw frozen_law(const json& v, const std::string& path) {
  if (v.is_string()) {
    if (v.get<std::string>() == "product_marginals") return FrozenLaw::product_form_marginals();
    fail(ErrorCode::SchemaError, path, "unknown frozen law '" + v.get<std::string>() + "'");
  }
  if (!v.is_array())
    fail(ErrorCode::SchemaError, path, "expected \"product_marginals\" or a table");
  std::map<QueueVector, double> table;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string p = at(path, i);
    QueueVector q;
    const std::vector<double> raw = numbers(member(v[i], "queues", p), dot(p, "queues"));
    for (double x : raw) {
      if (x < 0 || x != static_cast<double>(static_cast<int>(x)))
        fail(ErrorCode::SchemaError, dot(p, "queues"), "queue lengths are nonnegative integers");
      q.push_back(static_cast<int>(x));
    }
    table[q] += number(member(v[i], "probability", p), dot(p, "probability"));
  }
  return with_path(path, [&] { return FrozenLaw::finite(std::move(table)); });
}

EnvironmentSpec environment(const json& v, const std::string& path, std::size_t nodes,
                            RerouteMode m) {
  const std::string vpath = dot(path, "generator");
  Matrix gen = matrix(member(v, "generator", path), vpath);
  if (gen.rows() != gen.cols()) {
    std::ostringstream os;
    os << "generator must be square, got " << gen.rows() << "x" << gen.cols();
    fail(ErrorCode::DimensionMismatch, vpath, os.str());
  }
  const auto statuses = static_cast<std::size_t>(gen.rows());

  const std::string rpath = dot(path, "departure_jumps");
  const json& rj = member(v, "departure_jumps", path);
  if (!rj.is_array() || rj.size() != nodes)
    fail(ErrorCode::DimensionMismatch, rpath,
         "expected one status jump matrix per node (" + std::to_string(nodes) + ")");
  std::vector<RoutingMatrix> jumps;
  for (std::size_t j = 0; j < nodes; ++j) jumps.push_back(routing(rj[j], at(rpath, j), statuses));

  const std::string gpath = dot(path, "gamma");
  const json& gv = member(v, "gamma", path);
  if (!gv.is_array() || gv.size() != statuses)
    fail(ErrorCode::DimensionMismatch, gpath,
         "expected one factor vector per status (" + std::to_string(statuses) + ")");
  std::vector<CapacityFactors> gamma;
  for (std::size_t k = 0; k < statuses; ++k) gamma.push_back(factors(gv[k], at(gpath, k), nodes));

  std::vector<RoutingMatrix> kernels;
  if (const json* uk = optional_member(v, "user_kernels")) {
    const std::string upath = dot(path, "user_kernels");
    if (!uk->is_array() || uk->size() != statuses)
      fail(ErrorCode::DimensionMismatch, upath, "expected one kernel per status");
    for (std::size_t k = 0; k < statuses; ++k)
      kernels.push_back(routing((*uk)[k], at(upath, k), nodes + 1));
  }

  std::vector<std::string> names;
  if (const json* sn = optional_member(v, "statuses")) {
    if (!sn->is_array() || sn->size() != statuses)
      fail(ErrorCode::DimensionMismatch, dot(path, "statuses"), "expected one name per status");
    for (std::size_t k = 0; k < statuses; ++k) {
      if (!(*sn)[k].is_string())
        fail(ErrorCode::SchemaError, at(dot(path, "statuses"), k), "expected a string");
      names.push_back((*sn)[k].get<std::string>());
    }
  }
  return with_path(path, [&] {
    return EnvironmentSpec(std::move(gen), std::move(jumps), std::move(gamma), m,
                           std::move(kernels), std::move(names));
  });
}

}  // namespace

SpecDocument parse_spec(const json& doc) {
  if (!doc.is_object()) fail(ErrorCode::SchemaError, "$", "expected an object");
  const json& schema = member(doc, "schema", "");
  if (!schema.is_string() || schema.get<std::string>() != kSpecSchema)
    fail(ErrorCode::SchemaError, "schema",
         "expected \"" + std::string(kSpecSchema) + "\", got " + schema.dump());

  SpecDocument out{network(member(doc, "network", ""), "network"), RerouteMode::skipping, {}, {}, {}, {}, {}};
  const std::size_t nodes = out.network.nodes();
  if (const json* m = optional_member(doc, "mode")) out.mode = mode(*m, "mode");

  if (const json* c = optional_member(doc, "capacity")) {
    out.capacity = factors(member(*c, "gamma", "capacity"), "capacity.gamma", nodes);
    if (const json* uk = optional_member(*c, "user_kernel"))
      out.user_kernel = routing(*uk, "capacity.user_kernel", nodes + 1);
    if (const json* fl = optional_member(*c, "frozen_law"))
      out.frozen_law = frozen_law(*fl, "capacity.frozen_law");
  }
  if (out.mode == RerouteMode::user_supplied && out.capacity && !out.user_kernel)
    fail(ErrorCode::SchemaError, "capacity.user_kernel", "required in user_supplied mode");

  if (const json* e = optional_member(doc, "environment"))
    out.environment = environment(*e, "environment", nodes, out.mode);

  if (const json* s = optional_member(doc, "simulation")) {
    SimulationSettings settings;
    if (const json* ev = optional_member(*s, "events"))
      settings.events = count(*ev, "simulation.events");
    if (const json* sd = optional_member(*s, "seed")) settings.seed = count(*sd, "simulation.seed");
    out.simulation = settings;
  }
  return out;
}

SpecDocument parse_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, path.string() + ": " + e.what());
  }
  return parse_spec(doc);
}

}  // namespace renvnet
