// renvnet <analyze|modify|env|simulate|verify> <spec.json> [options]
//
// Exit status: 0 when every check passes, 1 when a check exceeds its
// threshold, 2 on invalid input or a failed computation (an error object is
// printed as JSON).

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "renvnet/report.hpp"

namespace {

void write_json(const std::string& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << doc.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Product-form analysis of Jackson networks under capacity changes"};
  std::string command, spec_path, out_path, mode;
  std::optional<std::uint64_t> seed, events;
  renvnet::RunOptions options;
  bool json_stdout = false;

  app.add_option("command", command, "analyze | modify | env | simulate | verify")
      ->required()
      ->check(CLI::IsMember({"analyze", "modify", "env", "simulate", "verify"}));
  app.add_option("spec", spec_path, "spec file (JSON)")->required();
  app.add_option("--out", out_path, "write the JSON report here");
  app.add_option("--seed", seed, "simulation seed");
  app.add_option("--events", events, "simulation length in events");
  app.add_option("--tol-balance", options.tol_balance, "balance residual threshold")
      ->capture_default_str();
  app.add_option("--tol-solve", options.tol_solve, "linear solve residual threshold")
      ->capture_default_str();
  app.add_option("--probe-bound", options.probe_bound, "probe box {0..B}^J for balance checks")
      ->capture_default_str();
  app.add_option("--mode", mode, "rerouting mode")
      ->check(CLI::IsMember({"skipping", "reflection", "user_supplied"}));
  app.add_flag("--json", json_stdout, "print the JSON report instead of tables");
  CLI11_PARSE(app, argc, argv);

  options.seed = seed;
  options.events = events;
  try {
    if (!mode.empty()) options.mode = renvnet::parse_reroute_mode(mode);
    const renvnet::SpecDocument doc = renvnet::parse_spec(std::filesystem::path(spec_path));
    const renvnet::Report report = renvnet::run(renvnet::parse_command(command), doc, options);
    const nlohmann::json j = renvnet::to_json(report);
    if (!out_path.empty()) write_json(out_path, j);
    if (json_stdout)
      std::cout << j.dump(2) << "\n";
    else
      renvnet::print_tables(std::cout, report);
    return report.ok() ? 0 : 1;
  } catch (const std::exception& e) {
    const nlohmann::json err = renvnet::error_object(e);
    std::cout << err.dump(2) << "\n";
    if (!out_path.empty()) {
      try {
        write_json(out_path, err);
      } catch (const std::exception&) {
      }
    }
    return 2;
  }
}
