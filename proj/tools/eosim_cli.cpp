// Command-line front end over the C interface.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "eosim/eosim.h"

namespace {

struct ScenarioDeleter {
  void operator()(eosim_scenario* s) const { eosim_scenario_destroy(s); }
};
struct ResultDeleter {
  void operator()(eosim_result* r) const { eosim_result_destroy(r); }
};
using ScenarioPtr = std::unique_ptr<eosim_scenario, ScenarioDeleter>;
using ResultPtr = std::unique_ptr<eosim_result, ResultDeleter>;

int report(eosim_status st, const std::string& context) {
  std::cerr << "eosim: " << context << ": " << eosim_status_name(st) << ": "
            << eosim_last_error() << "\n";
  return 1;
}

std::string take(char* s) {
  std::string out = s ? s : "";
  eosim_string_free(s);
  return out;
}

int run_compare(const std::vector<std::string>& files, const std::string& out_dir) {
  char* text = nullptr;
  if (auto st = eosim_compare_files(files[0].c_str(), files[1].c_str(), &text))
    return report(st, "compare");
  const std::string report_json = take(text);
  std::cout << report_json;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream(std::filesystem::path(out_dir) / "compare.json") << report_json;
  }
  return 0;
}

int run_dtn(const std::string& traffic, const std::string& plan, const std::string& out_dir) {
  const std::filesystem::path base(out_dir);
  std::error_code ec;
  std::filesystem::create_directories(base, ec);
  const auto records = (base / "dtn_deliveries.csv").string();
  const auto summary = (base / "dtn_latency.json").string();
  if (auto st = eosim_dtn_simulate_files(traffic.c_str(), plan.c_str(), records.c_str(),
                                         summary.c_str()))
    return report(st, "dtn");
  std::cout << "wrote " << records << " and " << summary << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Agile constellation observation co-simulator"};
  app.set_version_flag("--version", std::string(eosim_version()));

  std::string config_path;
  std::vector<std::string> modes;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "eosim_out";
  bool export_plan = false;
  bool print_default = false;
  std::vector<std::string> compare;
  std::string dtn_traffic, dtn_plan;

  app.add_option("--config", config_path, "Scenario configuration (JSON)")
      ->check(CLI::ExistingFile);
  app.add_option("--mode", modes, "decentralized | centralized | nonagile (repeatable)")
      ->check(CLI::IsMember({"decentralized", "centralized", "nonagile"}))
      ->take_all();
  app.add_option("--seed", seed, "Master seed, overrides the configuration");
  app.add_option("--out", out_dir, "Output directory");
  app.add_flag("--export-contact-plan", export_plan, "Write contact_plan.csv");
  app.add_flag("--print-default-config", print_default, "Print the default configuration");
  auto* cmp = app.add_option("--compare", compare, "Compare two metrics files")
                  ->expected(2);
  auto* tr = app.add_option("--dtn-traffic", dtn_traffic, "Standalone DTN run: traffic file");
  auto* pl = app.add_option("--dtn-plan", dtn_plan, "Standalone DTN run: contact plan file");
  tr->needs(pl);
  pl->needs(tr);
  cmp->excludes(tr)->excludes(pl);

  CLI11_PARSE(app, argc, argv);

  if (print_default) {
    char* text = nullptr;
    if (auto st = eosim_default_config_json(&text)) return report(st, "default config");
    std::cout << take(text);
    return 0;
  }
  if (!compare.empty()) return run_compare(compare, app.count("--out") ? out_dir : "");
  if (!dtn_traffic.empty()) return run_dtn(dtn_traffic, dtn_plan, out_dir);

  if (modes.empty() && !export_plan) modes = {"decentralized", "centralized", "nonagile"};

  eosim_scenario* raw = nullptr;
  eosim_status st = config_path.empty() ? eosim_scenario_create(nullptr, &raw)
                                        : eosim_scenario_load(config_path.c_str(), &raw);
  if (st) return report(st, config_path.empty() ? "default scenario" : config_path);
  ScenarioPtr scenario(raw);
  if (seed) {
    if (auto e = eosim_scenario_set_seed(scenario.get(), *seed)) return report(e, "seed");
  }

  // Everything runs before anything is written, so a failure leaves no
  // partial output behind.
  std::vector<ResultPtr> results;
  for (const auto& m : modes) {
    eosim_result* r = nullptr;
    if (auto e = eosim_run(scenario.get(), m.c_str(), &r)) return report(e, "run " + m);
    results.emplace_back(r);
    double value = 0, coverage = 0, seconds = 0;
    eosim_result_metric(r, "cumulative_recorded_value", &value);
    eosim_result_metric(r, "pct_gp_observed", &coverage);
    eosim_result_metric(r, "timing.total_s", &seconds);
    std::printf("%-14s value %.1f  coverage %.2f%%  (%.1f s)\n", m.c_str(), value, coverage,
                seconds);
  }

  const std::filesystem::path base(out_dir);
  std::error_code ec;
  std::filesystem::create_directories(base, ec);
  if (ec) {
    std::cerr << "eosim: cannot create " << base << ": " << ec.message() << "\n";
    return 1;
  }
  const auto echo = (base / "config_echo.json").string();
  if (auto e = eosim_scenario_write_config(scenario.get(), echo.c_str()))
    return report(e, "config echo");
  if (export_plan) {
    const auto plan = (base / "contact_plan.csv").string();
    if (auto e = eosim_scenario_write_contact_plan(scenario.get(), plan.c_str()))
      return report(e, "contact plan");
  }
  for (const auto& r : results)
    if (auto e = eosim_result_write(r.get(), out_dir.c_str())) return report(e, "write");
  return 0;
}
