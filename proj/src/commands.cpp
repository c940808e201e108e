#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "csv.hpp"
#include "diagnostics.hpp"
#include "errors.hpp"
#include "evaluation.hpp"
#include "indicators.hpp"
#include "model.hpp"
#include "posterior.hpp"
#include "sampler.hpp"
#include "simulator.hpp"
#include "version.hpp"

namespace nowcast {

namespace {
using nlohmann::json;

std::string hash_hex(const KeyValueConfig& cfg) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << cfg.hash();
  return os.str();
}

AnalysisWindow window_from(const KeyValueConfig& cfg) {
  AnalysisWindow w;
  w.as_of = parse_date(cfg.get_string("as_of"));
  w.length = static_cast<int>(cfg.get_int("window_length", 90));
  w.max_delay = static_cast<int>(cfg.get_int("max_delay", 30));
  w.validate();
  return w;
}

HyperPriorSpec hyper_from(const KeyValueConfig& cfg) {
  HyperPriorSpec hp;
  hp.effect_var = cfg.get_real("hyper_effect_var", hp.effect_var);
  hp.beta_var = cfg.get_real("hyper_beta_var", hp.beta_var);
  hp.alpha1_var = cfg.get_real("hyper_alpha1_var", hp.alpha1_var);
  hp.ig_shape = cfg.get_real("hyper_ig_shape", hp.ig_shape);
  hp.ig_scale = cfg.get_real("hyper_ig_scale", hp.ig_scale);
  hp.phi_shape = cfg.get_real("hyper_phi_shape", hp.phi_shape);
  hp.phi_rate = cfg.get_real("hyper_phi_rate", hp.phi_rate);
  hp.log_lambda_guard = cfg.get_real("hyper_log_lambda_guard", hp.log_lambda_guard);
  return hp;
}

SamplerConfig sampler_from(const KeyValueConfig& cfg) {
  SamplerConfig sc;
  sc.iterations = cfg.get_int("iterations", sc.iterations);
  sc.burn_in = cfg.get_int("burn_in", sc.burn_in);
  sc.thin = cfg.get_int("thin", sc.thin);
  sc.chains = static_cast<int>(cfg.get_int("chains", sc.chains));
  sc.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
  sc.adapt_interval = cfg.get_int("adapt_interval", sc.adapt_interval);
  sc.target_acceptance = cfg.get_real("target_acceptance", sc.target_acceptance);
  sc.threads = static_cast<int>(cfg.get_int("threads", sc.threads));
  sc.monitor_full_state = cfg.get_bool("monitor_full_state", false);
  sc.validate();
  return sc;
}

std::string out_dir(const KeyValueConfig& cfg) {
  std::string dir = cfg.get_string("output_dir");
  std::filesystem::create_directories(dir);
  return dir;
}

CountyGraph graph_from(const KeyValueConfig& cfg) {
  if (cfg.has("grid_rows") || cfg.has("grid_cols")) {
    return grid_graph(static_cast<int>(cfg.require_int("grid_rows")),
                      static_cast<int>(cfg.require_int("grid_cols")),
                      cfg.get_int("grid_population", 100000));
  }
  return load_graph(cfg.get_string("population_csv"), cfg.get_string("edge_csv"));
}

json json_finite(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << j.dump(2) << '\n';
}

void write_run_meta(const std::string& dir, const std::string& command,
                    const KeyValueConfig& cfg, const AnalysisWindow& w, double wall_seconds) {
  json meta;
  meta["command"] = command;
  meta["version"] = kVersion;
  meta["config_hash"] = hash_hex(cfg);
  meta["config"] = json::object();
  for (const auto& [k, v] : cfg.entries()) meta["config"][k] = v;
  meta["as_of"] = format_date(w.as_of);
  meta["window_length"] = w.length;
  meta["max_delay"] = w.max_delay;
  meta["wall_clock_seconds"] = wall_seconds;
  write_json(dir + "/run_meta.json", meta);
}

class WallClock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void write_indicator_csv(const std::string& path, const std::vector<IndicatorResult>& rows) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << "county_id,method,flagged\n";
  for (const auto& r : rows)
    out << r.county_id << ',' << method_name(r.method) << ',' << (r.flagged ? 1 : 0) << '\n';
}

std::vector<IndicatorResult> baseline_indicators(const ReportingTriangle& tri,
                                                 const std::vector<std::string>& ids,
                                                 Date as_of) {
  auto totals = tri.partial_totals();
  std::vector<IndicatorResult> rows;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::vector<double> series(totals[i].begin(), totals[i].end());
    rows.push_back(rolling_indicator(ids[i], as_of, series));
    rows.push_back(spline_indicator(ids[i], as_of, series));
  }
  return rows;
}

std::optional<std::vector<double>> list_override(const KeyValueConfig& cfg,
                                                 const std::string& key) {
  if (!cfg.has(key)) return std::nullopt;
  return cfg.get_real_list(key);
}

std::optional<double> real_override(const KeyValueConfig& cfg, const std::string& key) {
  if (!cfg.has(key)) return std::nullopt;
  return cfg.get_real(key, 0.0);
}
}  // namespace

int cmd_simulate(const KeyValueConfig& cfg, std::ostream& log) {
  WallClock clock;
  std::string dir = out_dir(cfg);
  AnalysisWindow w = window_from(cfg);
  CountyGraph g = graph_from(cfg);
  HyperPriorSpec hp = hyper_from(cfg);

  SimOverrides o;
  o.delta_bar = real_override(cfg, "sim_delta_bar");
  o.rho_delta = real_override(cfg, "sim_rho_delta");
  o.rho_psi = real_override(cfg, "sim_rho_psi");
  o.tau2_alpha = real_override(cfg, "sim_tau2_alpha");
  o.tau2_delta = real_override(cfg, "sim_tau2_delta");
  o.tau2_d = real_override(cfg, "sim_tau2_d");
  o.tau2_eta = real_override(cfg, "sim_tau2_eta");
  o.tau2_psi = real_override(cfg, "sim_tau2_psi");
  o.tau2_xi = real_override(cfg, "sim_tau2_xi");
  o.alpha0 = real_override(cfg, "sim_alpha0");
  o.beta = list_override(cfg, "sim_beta");
  o.phi = list_override(cfg, "sim_phi");
  o.fixed_d = list_override(cfg, "sim_fixed_d");
  if (cfg.has("sim_max_total")) o.max_total = cfg.require_int("sim_max_total");

  Rng rng(static_cast<std::uint64_t>(cfg.get_int("seed", 0)), 0);
  Simulation sim = simulate(g, w, hp, o, rng);

  write_line_list(dir + "/line_list.csv", sim.records);
  write_truth_csv(dir + "/truth_counts.csv", g, w, sim.state.y);

  const ModelState& s = sim.state;
  json params;
  params["delta_bar"] = s.delta_bar;
  params["rho_delta"] = s.rho_delta;
  params["rho_psi"] = s.rho_psi;
  params["tau2_alpha"] = s.tau2_alpha;
  params["tau2_delta"] = s.tau2_delta;
  params["tau2_d"] = s.tau2_d;
  params["tau2_eta"] = s.tau2_eta;
  params["tau2_psi"] = s.tau2_psi;
  params["tau2_xi"] = s.tau2_xi;
  for (int d = 0; d < w.max_delay; ++d) {
    params["beta"].push_back(s.beta(d));
    params["phi"].push_back(s.phi(d));
  }
  for (int i = 0; i < g.size(); ++i) {
    params["d"].push_back(s.d(i));
    double trend_sum = 0.0;
    for (int t = std::max(0, w.length - 21); t < w.length; ++t) trend_sum += s.delta(i, t);
    params["trend_sum_21d"].push_back(trend_sum);
  }
  params["total_count"] = static_cast<long long>(s.y.sum());
  params["redraws"] = sim.redraws;
  params["config_hash"] = hash_hex(cfg);
  write_json(dir + "/true_params.json", params);

  write_run_meta(dir, "simulate", cfg, w, clock.seconds());
  log << "simulate: " << sim.records.size() << " cases over " << g.size() << " counties, "
      << w.length << " days\n";
  return kExitOk;
}

int cmd_indicators(const KeyValueConfig& cfg, std::ostream& log) {
  WallClock clock;
  std::string dir = out_dir(cfg);
  AnalysisWindow w = window_from(cfg);
  CountyIndex counties = load_county_list(cfg.get_string("population_csv"));
  auto records = load_line_list(cfg.get_string("line_list"));
  ReportingTriangle tri = build_triangle(records, w, counties);

  write_indicator_csv(dir + "/indicators.csv", baseline_indicators(tri, counties.ids, w.as_of));
  write_run_meta(dir, "indicators", cfg, w, clock.seconds());
  log << "indicators: " << counties.size() << " counties, " << tri.total_count()
      << " observed cases (" << tri.dropped_late() << " late reports dropped)\n";
  return kExitOk;
}

int cmd_nowcast(const KeyValueConfig& cfg, std::ostream& log) {
  WallClock clock;
  std::string dir = out_dir(cfg);
  AnalysisWindow w = window_from(cfg);
  CountyGraph g = graph_from(cfg);
  HyperPriorSpec hp = hyper_from(cfg);
  SamplerConfig sc = sampler_from(cfg);

  auto records = load_line_list(cfg.get_string("line_list"));
  ReportingTriangle tri = build_triangle(records, w, g);
  ModelData data(tri, g);

  SamplerRun run = run_chains(data, hp, sc);

  {
    std::ofstream out(dir + "/draws.csv");
    if (!out) throw InputError("cannot write " + dir + "/draws.csv");
    out << "chain,draw";
    for (const auto& c : run.draws.columns) out << ',' << c;
    out << '\n';
    for (std::size_t ch = 0; ch < run.draws.chains.size(); ++ch) {
      const auto& vals = run.draws.chains[ch].values;
      for (long long r = 0; r < vals.rows(); ++r) {
        out << (ch + 1) << ',' << (r + 1);
        for (long long c = 0; c < vals.cols(); ++c) out << ',' << format_real(vals(r, c));
        out << '\n';
      }
    }
  }

  write_nowcast_csv(dir + "/nowcast.csv", nowcast_rows(run.draws, data));
  write_trend_csv(dir + "/trend.csv", trend_rows(run.draws, data));
  write_indicator_csv(dir + "/indicators.csv", baseline_indicators(tri, g.county_ids, w.as_of));

  json diag;
  diag["command"] = "nowcast";
  diag["version"] = kVersion;
  diag["config_hash"] = hash_hex(cfg);
  diag["seed"] = static_cast<long long>(sc.seed);
  diag["acceptance_rates"] = json::object();
  for (const auto& [fam, rate] : run.acceptance_rates) diag["acceptance_rates"][fam] = rate;

  bool converged = true;
  json rhat = json::object(), ess = json::object();
  if (run.draws.draws_per_chain() < 100) {
    for (const auto& c : run.draws.columns) {
      rhat[c] = nullptr;
      ess[c] = nullptr;
    }
    diag["note"] = "fewer than 100 retained draws per chain; diagnostics not computed";
  } else {
    for (const auto& [col, d] : diagnostics(run.draws)) {
      rhat[col] = json_finite(d.rhat);
      ess[col] = json_finite(d.ess);
      if (std::isfinite(d.rhat) && d.rhat > 1.05) converged = false;
    }
  }
  diag["rhat"] = rhat;
  diag["ess"] = ess;
  diag["converged"] = converged;
  diag["wall_clock_seconds"] = clock.seconds();
  write_json(dir + "/diagnostics.json", diag);

  write_run_meta(dir, "nowcast", cfg, w, clock.seconds());
  log << "nowcast: " << run.draws.chains.size() << " chains x "
      << run.draws.draws_per_chain() << " draws over " << g.size() << " counties\n";
  if (!converged) {
    log << "warning: split-rhat exceeds 1.05 for at least one monitored quantity\n";
    return kExitConvergence;
  }
  return kExitOk;
}

int cmd_evaluate(const KeyValueConfig& cfg, std::ostream& log) {
  WallClock clock;
  std::string dir = out_dir(cfg);
  std::string truth_path = cfg.get_string("truth");

  std::vector<std::string> run_dirs;
  {
    std::string runs = cfg.get_string("runs");
    std::string item;
    std::istringstream is(runs);
    while (std::getline(is, item, ','))
      if (!item.empty()) run_dirs.push_back(item);
  }
  if (run_dirs.empty()) throw InputError("evaluate needs at least one run directory");

  Confusion rolling_conf, spline_conf;
  std::map<std::string, Confusion> model_conf;  // keyed by cutpoint text
  const std::vector<std::pair<std::string, double>> cutpoints = {
      {"0.5", 0.5}, {"0.7", 0.7}, {"0.9", 0.9}};
  CoverageResult cov30, cov7;

  for (const auto& run_dir : run_dirs) {
    std::ifstream meta_in(run_dir + "/run_meta.json");
    if (!meta_in) throw InputError("missing run_meta.json in " + run_dir);
    json meta = json::parse(meta_in);
    AnalysisWindow w;
    w.as_of = parse_date(meta.at("as_of").get<std::string>());
    w.length = meta.at("window_length").get<int>();
    w.max_delay = meta.at("max_delay").get<int>();
    w.validate();

    CsvTable trend = read_csv_file(run_dir + "/trend.csv");
    require_header(trend, {"county_id", "p_increase", "flag50", "flag70", "flag90"},
                   run_dir + "/trend.csv");
    std::vector<std::string> ids;
    std::vector<double> p_inc;
    for (const auto& row : trend.rows) {
      ids.push_back(row[0]);
      p_inc.push_back(parse_real(row[1], "p_increase"));
    }
    CountyIndex counties = CountyIndex::from_ids(ids);
    auto truth = load_truth_csv(truth_path, counties, w);

    std::vector<bool> labels;
    for (int i = 0; i < counties.size(); ++i) {
      std::vector<long long> series;
      for (int t = 0; t < w.length; ++t) series.push_back(truth(i, t));
      labels.push_back(true_increase(series));
    }

    CsvTable ind = read_csv_file(run_dir + "/indicators.csv");
    require_header(ind, {"county_id", "method", "flagged"}, run_dir + "/indicators.csv");
    for (const auto& row : ind.rows) {
      int i = counties.require_index(row[0]);
      bool flagged = parse_int(row[2], "flagged") != 0;
      if (row[1] == "rolling")
        rolling_conf.add(flagged, labels[i]);
      else if (row[1] == "spline")
        spline_conf.add(flagged, labels[i]);
      else
        throw InputError("unknown indicator method " + row[1]);
    }

    for (int i = 0; i < counties.size(); ++i)
      for (const auto& [name, cut] : cutpoints)
        model_conf[name].add(classify(p_inc[i], cut), labels[i]);

    CsvTable ncast = read_csv_file(run_dir + "/nowcast.csv");
    require_header(ncast, {"county_id", "onset_date", "observed", "mean", "lower90", "upper90"},
                   run_dir + "/nowcast.csv");
    std::vector<NowcastRow> rows;
    std::vector<long long> row_truth;
    for (const auto& row : ncast.rows) {
      NowcastRow r;
      r.county_id = row[0];
      r.date = parse_date(row[1]);
      r.observed = parse_int(row[2], "observed");
      r.mean = parse_real(row[3], "mean");
      r.lower = parse_real(row[4], "lower90");
      r.upper = parse_real(row[5], "upper90");
      int t = w.day_of_date(r.date);
      if (t < 0 || t >= w.length) throw InputError("nowcast row outside its own window");
      rows.push_back(r);
      row_truth.push_back(truth(counties.require_index(r.county_id), t));
    }
    auto c30 = interval_coverage(rows, row_truth, add_days(w.as_of, -29), w.as_of);
    auto c7 = interval_coverage(rows, row_truth, add_days(w.as_of, -6), w.as_of);
    cov30.covered += c30.covered;
    cov30.total += c30.total;
    cov7.covered += c7.covered;
    cov7.total += c7.total;
  }

  {
    std::ofstream out(dir + "/evaluation.csv");
    if (!out) throw InputError("cannot write " + dir + "/evaluation.csv");
    out << "method,cutpoint,tp,fp,tn,fn,sensitivity,specificity\n";
    auto emit = [&](const std::string& method, const std::string& cut, const Confusion& c) {
      auto opt = [](const std::optional<double>& v) {
        return v ? format_real(*v) : std::string();
      };
      out << method << ',' << cut << ',' << c.tp << ',' << c.fp << ',' << c.tn << ',' << c.fn
          << ',' << opt(c.sensitivity()) << ',' << opt(c.specificity()) << '\n';
    };
    emit("rolling", "", rolling_conf);
    emit("spline", "", spline_conf);
    for (const auto& [name, c] : model_conf) emit("model", name, c);
  }
  {
    std::ofstream out(dir + "/coverage.csv");
    if (!out) throw InputError("cannot write " + dir + "/coverage.csv");
    out << "region,covered,total,coverage\n";
    out << "last30," << cov30.covered << ',' << cov30.total << ','
        << format_real(cov30.fraction()) << '\n';
    out << "last7," << cov7.covered << ',' << cov7.total << ',' << format_real(cov7.fraction())
        << '\n';
  }

  json meta;
  meta["command"] = "evaluate";
  meta["version"] = kVersion;
  meta["config_hash"] = hash_hex(cfg);
  meta["config"] = json::object();
  for (const auto& [k, v] : cfg.entries()) meta["config"][k] = v;
  meta["runs"] = run_dirs;
  meta["wall_clock_seconds"] = clock.seconds();
  write_json(dir + "/run_meta.json", meta);

  log << "evaluate: " << run_dirs.size() << " runs, " << (cov30.total + cov7.total)
      << " coverage cells\n";
  return kExitOk;
}

int run_command(const std::string& name, const KeyValueConfig& cfg, std::ostream& log) {
  try {
    if (name == "simulate") return cmd_simulate(cfg, log);
    if (name == "indicators") return cmd_indicators(cfg, log);
    if (name == "nowcast") return cmd_nowcast(cfg, log);
    if (name == "evaluate") return cmd_evaluate(cfg, log);
    throw InputError("unknown command " + name);
  } catch (const InputError& e) {
    log << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const NumericError& e) {
    log << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    log << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace nowcast
