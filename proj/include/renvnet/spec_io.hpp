#pragma once

// JSON spec files: a network, optional capacity factors, an optional random
// environment and simulation settings. Layout is described in docs/schema.md.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>

#include <json.hpp>

#include "renvnet/capacity_mod.hpp"
#include "renvnet/environment.hpp"
#include "renvnet/jackson.hpp"
#include "renvnet/randomization.hpp"

namespace renvnet {

inline constexpr std::string_view kSpecSchema = "renvnet-spec/1";

struct SimulationSettings {
  std::uint64_t events = 1'000'000;
  std::uint64_t seed = 1;
};

struct SpecDocument {
  NetworkSpec network;
  RerouteMode mode = RerouteMode::skipping;
  std::optional<CapacityFactors> capacity;
  std::optional<RoutingMatrix> user_kernel;  // capacity rerouting in user_supplied mode
  std::optional<FrozenLaw> frozen_law;
  std::optional<EnvironmentSpec> environment;
  std::optional<SimulationSettings> simulation;
};

/// Every failure is an Error whose message starts with the offending JSON
/// path, e.g. "network.routing[2]: row 2 sums to 0.9".
SpecDocument parse_spec(const nlohmann::json& doc);
SpecDocument parse_spec(const std::filesystem::path& path);

}  // namespace renvnet
