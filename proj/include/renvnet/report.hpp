#pragma once

// Command dispatch for the renvnet tool and the report it produces.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "renvnet/spec_io.hpp"

namespace renvnet {

inline constexpr std::string_view kReportSchema = "renvnet-report/1";

using Rows = std::vector<std::vector<double>>;

struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed() const { return value <= threshold; }
};

struct Comparison {
  std::string name;
  double total_variation = 0.0;
  std::uint64_t events = 0;
  std::uint64_t seed = 0;
};

struct DistributionSample {
  std::vector<int> state;
  double probability = 0.0;
};

struct Report {
  std::string command;
  std::string mode;
  std::vector<double> eta;          // eta_0 = lambda, then eta_1..eta_J
  std::vector<double> normalizers;  // C(1..J)
  std::vector<DistributionSample> xi;
  std::optional<std::vector<double>> gamma;
  std::optional<std::vector<double>> alpha;  // alpha_0..alpha_J
  std::optional<double> beta;
  std::optional<Rows> r_alpha;
  std::optional<double> effective_arrival_rate;
  std::optional<std::vector<std::size_t>> blocked;
  std::optional<Rows> q_red;
  std::optional<std::vector<double>> theta;
  std::vector<Check> checks;
  std::vector<Comparison> comparisons;

  bool ok() const;
};

nlohmann::json to_json(const Report& report);
Report report_from_json(const nlohmann::json& doc);

/// Aligned plain-text rendering.
void print_tables(std::ostream& os, const Report& report);

struct RunOptions {
  double tol_balance = 1e-8;
  double tol_solve = 1e-10;
  int probe_bound = 6;
  std::optional<std::uint64_t> events;
  std::optional<std::uint64_t> seed;
  std::optional<RerouteMode> mode;
};

enum class Command { analyze, modify, env, simulate, verify };

Command parse_command(std::string_view text);

/// Throws Error on invalid input or a failed computation. Whether the
/// numerical checks passed is `Report::ok()`.
Report run(Command command, const SpecDocument& spec, const RunOptions& options = {});

nlohmann::json error_object(const std::exception& e);

}  // namespace renvnet
