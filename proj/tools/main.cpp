// Command-line front end. All work happens behind the C API; this file only
// maps flags onto config keys.
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nowcast/nowcast.h"

namespace {

struct ConfigHandle {
  nc_config* ptr = nc_config_new();
  ~ConfigHandle() { nc_config_free(ptr); }
};

int fail_input(const std::string& msg) {
  std::fprintf(stderr, "error: %s\n", msg.c_str());
  return NC_ERR_INPUT;
}

// Applies, in order: config files, convenience flags, raw --set overrides.
int apply(nc_config* cfg, const std::vector<std::string>& files,
          const std::vector<std::pair<std::string, std::string>>& flags,
          const std::vector<std::string>& sets) {
  for (const auto& f : files)
    if (nc_config_load_file(cfg, f.c_str()) != NC_OK) return fail_input(nc_last_error());
  for (const auto& [k, v] : flags)
    if (nc_config_set(cfg, k.c_str(), v.c_str()) != NC_OK) return fail_input(nc_last_error());
  for (const auto& s : sets) {
    auto eq = s.find('=');
    if (eq == std::string::npos) return fail_input("--set expects key=value, got '" + s + "'");
    if (nc_config_set(cfg, s.substr(0, eq).c_str(), s.substr(eq + 1).c_str()) != NC_OK)
      return fail_input(nc_last_error());
  }
  return NC_OK;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Delay-aware epidemic nowcasting and trend detection"};
  app.set_version_flag("--version", std::string(nc_version()));
  app.require_subcommand(1);

  std::vector<std::string> config_files, sets, run_dirs;
  std::vector<std::pair<std::string, std::string>> flags;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_files, "Config file(s), key = value per line")
        ->check(CLI::ExistingFile);
    sub->add_option("--set", sets, "Override any config key as key=value");
    auto opt = [sub, &flags](const std::string& flag, const std::string& key,
                             const std::string& help) {
      sub->add_option_function<std::string>(
          flag, [&flags, key](const std::string& v) { flags.emplace_back(key, v); }, help);
    };
    opt("--output-dir", "output_dir", "Directory for this command's outputs");
    opt("--seed", "seed", "RNG seed");
    opt("--as-of", "as_of", "Analysis date (YYYY-MM-DD)");
    opt("--window-length", "window_length", "Days in the analysis window");
    opt("--max-delay", "max_delay", "Largest reporting delay modeled");
    return opt;
  };

  auto* sim = app.add_subcommand("simulate", "Generate a synthetic line list with truth");
  {
    auto opt = add_common(sim);
    opt("--population", "population_csv", "County population CSV");
    opt("--edges", "edge_csv", "County adjacency CSV");
    opt("--grid-rows", "grid_rows", "Rows of a synthetic rook-adjacency grid");
    opt("--grid-cols", "grid_cols", "Columns of a synthetic grid");
    opt("--grid-population", "grid_population", "Population per grid county");
  }

  auto* ind = app.add_subcommand("indicators", "Baseline trend indicators from a line list");
  {
    auto opt = add_common(ind);
    opt("--line-list", "line_list", "Case line-list CSV");
    opt("--population", "population_csv", "County population CSV");
  }

  auto* now = app.add_subcommand("nowcast", "Fit the model and nowcast true counts");
  {
    auto opt = add_common(now);
    opt("--line-list", "line_list", "Case line-list CSV");
    opt("--population", "population_csv", "County population CSV");
    opt("--edges", "edge_csv", "County adjacency CSV");
    opt("--iterations", "iterations", "MCMC iterations per chain");
    opt("--burn-in", "burn_in", "Burn-in iterations discarded per chain");
    opt("--thin", "thin", "Keep every thin-th post-burn-in draw");
    opt("--chains", "chains", "Number of chains");
    opt("--threads", "threads", "Chains run in parallel (at most this many)");
  }

  auto* ev = app.add_subcommand("evaluate", "Score runs against simulated truth");
  {
    auto opt = add_common(ev);
    opt("--truth", "truth", "truth_counts.csv from the matching simulate run");
    ev->add_option("--run", run_dirs, "Run directory to score (repeatable)");
  }

  CLI11_PARSE(app, argc, argv);

  ConfigHandle handle;
  if (!run_dirs.empty()) {
    std::string joined;
    for (const auto& r : run_dirs) joined += (joined.empty() ? "" : ",") + r;
    flags.emplace_back("runs", joined);
  }
  if (int rc = apply(handle.ptr, config_files, flags, sets); rc != NC_OK) return rc;

  int code = NC_ERR_INTERNAL;
  if (sim->parsed()) code = nc_run_simulate(handle.ptr);
  if (ind->parsed()) code = nc_run_indicators(handle.ptr);
  if (now->parsed()) code = nc_run_nowcast(handle.ptr);
  if (ev->parsed()) code = nc_run_evaluate(handle.ptr);
  return code;
}
