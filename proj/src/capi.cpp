#include "nowcast/nowcast.h"

#include <iostream>
#include <sstream>
#include <string>

#include "commands.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "version.hpp"

struct nc_config {
  nowcast::KeyValueConfig cfg;
  std::string last_get;  // backing storage for nc_config_get
};

namespace {
thread_local std::string g_last_error;

int run(nc_config* cfg, const char* name) {
  if (!cfg) {
    g_last_error = "null config handle";
    return NC_ERR_INPUT;
  }
  g_last_error.clear();
  // Stream command logging to stderr as it happens, but keep a copy: on
  // failure the last line is the error message.
  std::ostringstream captured;
  int code = nowcast::run_command(name, cfg->cfg, captured);
  std::string text = captured.str();
  std::cerr << text;
  if (code != NC_OK && code != NC_WARN_CONVERGENCE) {
    auto last_break = text.find_last_of('\n', text.empty() ? 0 : text.size() - 2);
    g_last_error =
        last_break == std::string::npos ? text : text.substr(last_break + 1);
    while (!g_last_error.empty() && g_last_error.back() == '\n') g_last_error.pop_back();
  }
  return code;
}
}  // namespace

extern "C" {

nc_config* nc_config_new(void) { return new nc_config(); }

void nc_config_free(nc_config* cfg) { delete cfg; }

int nc_config_set(nc_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) {
    g_last_error = "null argument to nc_config_set";
    return NC_ERR_INPUT;
  }
  try {
    cfg->cfg.set(key, value);
    return NC_OK;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return NC_ERR_INPUT;
  }
}

int nc_config_load_file(nc_config* cfg, const char* path) {
  if (!cfg || !path) {
    g_last_error = "null argument to nc_config_load_file";
    return NC_ERR_INPUT;
  }
  try {
    for (const auto& [k, v] : nowcast::KeyValueConfig::from_file(path).entries())
      cfg->cfg.set(k, v);
    return NC_OK;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return NC_ERR_INPUT;
  }
}

const char* nc_config_get(nc_config* cfg, const char* key) {
  if (!cfg || !key || !cfg->cfg.has(key)) return nullptr;
  cfg->last_get = cfg->cfg.get_string(key);
  return cfg->last_get.c_str();
}

int nc_run_simulate(nc_config* cfg) { return run(cfg, "simulate"); }
int nc_run_indicators(nc_config* cfg) { return run(cfg, "indicators"); }
int nc_run_nowcast(nc_config* cfg) { return run(cfg, "nowcast"); }
int nc_run_evaluate(nc_config* cfg) { return run(cfg, "evaluate"); }

const char* nc_last_error(void) { return g_last_error.c_str(); }

const char* nc_version(void) { return nowcast::kVersion; }

}  // extern "C"
