#pragma once

// The `estimate`, `simulate` and `backtest` commands. Settings come from a
// flat key=value file and command-line flags (flags win); every table written
// starts with a `# config_hash=...,seed=...` line.

#include "mlport/experiments.hpp"
#include "mlport/io.hpp"

#include <Eigen/Core>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace mlport::cli {

inline constexpr const char* kVersion = "1.0.0";

using Settings = std::map<std::string, std::string>;

/// Every accepted setting. Flags use the same names with '-' for '_'.
inline const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "input",        "population",   "rbar",         "alpha",         "rf",          "window",
      "cv_k",         "seed",         "out",          "strategies",    "threads",     "n_list",
      "K",            "m",            "generator",    "gen_m",         "gen_seed",    "gen_vol",
      "gen_decay",    "gen_sparsity", "gen_mean_scale", "gen_target_sharpe", "gen_rho", "gen_nonzero",
      "bv_n",         "bv_points",    "rf_column",    "drop_above",    "ss_iter",     "ss_burn",
      "ss_g",         "ss_a0",        "ss_b0",        "ss_pi"};
  return keys;
}

/// Settings that do not change any output and so stay out of the hash.
inline bool is_runtime_only(const std::string& key) { return key == "threads" || key == "out"; }

struct RunConfig {
  std::string command;
  Settings settings;  // merged file + flags, unknown keys rejected

  std::string input;
  std::string population;
  double r_bar = 1.0;
  std::vector<StrategySpec> strategies;
  int cv_k = 5;  // 0: leave-one-out
  std::uint64_t seed = 0;
  std::filesystem::path out = ".";
  std::size_t threads = 0;

  // simulate
  std::vector<Eigen::Index> n_list;
  int K = 100;
  Eigen::Index leading = 0;  // 0: all assets
  GeneratorConfig generator;
  Eigen::Index bv_n = 0;
  int bv_points = 25;

  // backtest / ingest
  Eigen::Index window = 60;
  io::IngestOptions ingest;

  std::string config_hash;
};

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    cur = io::trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

inline double to_double(const Settings& s, const std::string& key) {
  const auto v = mlport::detail::parse_number(s.at(key));
  if (!v || !std::isfinite(*v)) throw Error(ErrorKind::ConfigError, key + " must be a number, got '" + s.at(key) + "'");
  return *v;
}

inline long long to_integer(const Settings& s, const std::string& key) {
  const double v = to_double(s, key);
  if (v != std::floor(v) || std::abs(v) > 9e15) throw Error(ErrorKind::ConfigError, key + " must be an integer");
  return static_cast<long long>(v);
}

inline std::uint64_t to_seed(const Settings& s, const std::string& key) {
  const std::string& text = s.at(key);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) throw Error(ErrorKind::ConfigError, key + " must be a nonnegative integer");
  return v;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// File-name-safe version of a strategy label.
inline std::string safe_name(const std::string& label) {
  std::string out = label;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' || c == '-';
    if (!ok) c = '_';
  }
  return out;
}

}  // namespace detail

inline std::string default_strategies(const std::string& command) {
  if (command == "simulate") return "population,mv,ridge,lasso,pcr,ss,ew,mvc,minvar,eb";
  return "mv,ridge,lasso,pcr,ss,ew,mvc,minvar,eb";
}

inline RunConfig make_config(const std::string& command, const Settings& settings) {
  if (command != "estimate" && command != "simulate" && command != "backtest") {
    throw Error(ErrorKind::ConfigError, "unknown command '" + command + "'");
  }
  const std::set<std::string> known(known_keys().begin(), known_keys().end());
  for (const auto& [k, v] : settings) {
    if (!known.count(k)) throw Error(ErrorKind::ConfigError, "unknown setting '" + k + "'");
  }
  RunConfig cfg;
  cfg.command = command;
  cfg.settings = settings;
  const auto& s = settings;
  auto has = [&](const char* k) { return s.count(k) > 0; };

  if (has("input")) cfg.input = s.at("input");
  if (has("population")) cfg.population = s.at("population");
  if (has("rbar") && has("alpha")) throw Error(ErrorKind::ConfigError, "give either rbar or alpha, not both");
  if (has("rf") && !has("alpha")) throw Error(ErrorKind::ConfigError, "rf is only used together with alpha");
  if (has("rbar")) cfg.r_bar = detail::to_double(s, "rbar");
  if (has("alpha")) {
    const double alpha = detail::to_double(s, "alpha");
    const double rf = has("rf") ? detail::to_double(s, "rf") : 0.0;
    if (!(alpha > 0.0)) throw Error(ErrorKind::ConfigError, "alpha must be positive");
    cfg.r_bar = (1.0 - alpha * rf) / alpha;
  }
  if (!(cfg.r_bar > 0.0)) throw Error(ErrorKind::ConfigError, "r_bar must be positive");

  if (has("cv_k")) {
    if (s.at("cv_k") == "loo") {
      cfg.cv_k = 0;
    } else {
      cfg.cv_k = static_cast<int>(detail::to_integer(s, "cv_k"));
      if (cfg.cv_k < 2) throw Error(ErrorKind::ConfigError, "cv_k must be >= 2 or 'loo'");
    }
  }
  if (has("seed")) cfg.seed = detail::to_seed(s, "seed");
  if (has("out")) cfg.out = s.at("out");
  if (has("threads")) {
    const auto t = detail::to_integer(s, "threads");
    if (t < 0) throw Error(ErrorKind::ConfigError, "threads must be >= 0");
    cfg.threads = static_cast<std::size_t>(t);
  }

  SpikeSlabConfig ss;
  if (has("ss_iter")) ss.n_iter = static_cast<int>(detail::to_integer(s, "ss_iter"));
  if (has("ss_burn")) ss.n_burn = static_cast<int>(detail::to_integer(s, "ss_burn"));
  if (has("ss_g")) ss.g = detail::to_double(s, "ss_g");
  if (has("ss_a0")) ss.a0 = detail::to_double(s, "ss_a0");
  if (has("ss_b0")) ss.b0 = detail::to_double(s, "ss_b0");
  std::optional<double> ss_pi;
  if (has("ss_pi")) ss_pi = detail::to_double(s, "ss_pi");

  const auto tokens = detail::split(has("strategies") ? s.at("strategies") : default_strategies(command), ',');
  if (tokens.empty()) throw Error(ErrorKind::ConfigError, "no strategies given");
  std::set<std::string> names;
  for (const auto& token : tokens) {
    auto spec = StrategySpec::parse(token);
    if (!names.insert(detail::safe_name(spec.label)).second) {
      throw Error(ErrorKind::ConfigError, "strategy '" + token + "' listed twice");
    }
    if (spec.kind == StrategyKind::population && command != "simulate") {
      throw Error(ErrorKind::ConfigError, "the population strategy needs a known population (simulate)");
    }
    spec.spike_slab = ss;
    spec.uniform_inclusion = ss_pi;
    cfg.strategies.push_back(std::move(spec));
  }

  if (has("n_list")) {
    for (const auto& tok : detail::split(s.at("n_list"), ',')) {
      const auto v = mlport::detail::parse_number(tok);
      if (!v || *v != std::floor(*v) || *v < 2) throw Error(ErrorKind::ConfigError, "n_list entries must be integers >= 2");
      cfg.n_list.push_back(static_cast<Eigen::Index>(*v));
    }
  } else {
    cfg.n_list = {20, 40, 60, 100, 200, 500, 1000};
  }
  if (has("K")) cfg.K = static_cast<int>(detail::to_integer(s, "K"));
  if (cfg.K < 2) throw Error(ErrorKind::ConfigError, "K must be >= 2");
  if (has("m")) {
    cfg.leading = static_cast<Eigen::Index>(detail::to_integer(s, "m"));
    if (cfg.leading < 1) throw Error(ErrorKind::ConfigError, "m must be >= 1");
  }
  if (has("generator")) {
    const auto& g = s.at("generator");
    if (g == "decay") cfg.generator.mode = GeneratorMode::decay;
    else if (g == "equicorrelation" || g == "equicorr") cfg.generator.mode = GeneratorMode::equicorrelation;
    else throw Error(ErrorKind::ConfigError, "generator must be 'decay' or 'equicorrelation'");
  }
  if (has("gen_m")) cfg.generator.m = static_cast<Eigen::Index>(detail::to_integer(s, "gen_m"));
  if (has("gen_seed")) cfg.generator.seed = detail::to_seed(s, "gen_seed");
  if (has("gen_vol")) cfg.generator.vol = detail::to_double(s, "gen_vol");
  if (has("gen_decay")) cfg.generator.decay = detail::to_double(s, "gen_decay");
  if (has("gen_sparsity")) cfg.generator.mean_sparsity = detail::to_double(s, "gen_sparsity");
  if (has("gen_mean_scale")) cfg.generator.mean_scale = detail::to_double(s, "gen_mean_scale");
  if (has("gen_target_sharpe")) cfg.generator.target_sharpe = detail::to_double(s, "gen_target_sharpe");
  if (has("gen_rho")) cfg.generator.rho = detail::to_double(s, "gen_rho");
  if (has("gen_nonzero")) cfg.generator.nonzero_means = static_cast<Eigen::Index>(detail::to_integer(s, "gen_nonzero"));
  cfg.generator.r_bar = cfg.r_bar;
  if (has("bv_n")) {
    cfg.bv_n = static_cast<Eigen::Index>(detail::to_integer(s, "bv_n"));
    if (cfg.bv_n < 2) throw Error(ErrorKind::ConfigError, "bv_n must be >= 2");
  }
  if (has("bv_points")) {
    cfg.bv_points = static_cast<int>(detail::to_integer(s, "bv_points"));
    if (cfg.bv_points < 2) throw Error(ErrorKind::ConfigError, "bv_points must be >= 2");
  }

  if (has("window")) cfg.window = static_cast<Eigen::Index>(detail::to_integer(s, "window"));
  if (has("rf_column")) cfg.ingest.rf_column = s.at("rf_column");
  if (has("drop_above")) cfg.ingest.drop_above = detail::to_double(s, "drop_above");

  if (command != "simulate" && cfg.input.empty()) throw Error(ErrorKind::ConfigError, command + " needs --input");
  if (!cfg.input.empty() && !std::filesystem::exists(cfg.input)) {
    throw Error(ErrorKind::IoError, "input '" + cfg.input + "' does not exist");
  }
  if (!cfg.population.empty() && !std::filesystem::exists(cfg.population)) {
    throw Error(ErrorKind::IoError, "population '" + cfg.population + "' does not exist");
  }

  std::string canonical = "command=" + command + "\n";
  for (const auto& [k, v] : settings) {
    if (!is_runtime_only(k)) canonical += k + "=" + v + "\n";
  }
  // Input files are hashed by content so a renamed copy hashes alike.
  if (!cfg.input.empty()) canonical += "#input=" + detail::hex64(stable_hash(io::read_file(cfg.input))) + "\n";
  if (!cfg.population.empty()) canonical += "#population=" + detail::hex64(stable_hash(io::read_file(cfg.population))) + "\n";
  cfg.config_hash = detail::hex64(stable_hash(canonical));
  return cfg;
}

// ---------------------------------------------------------------------------
// Output helpers

class Outputs {
 public:
  explicit Outputs(const RunConfig& cfg) : cfg_(cfg) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.out, ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot create output directory '" + cfg.out.string() + "'");
  }

  std::string provenance() const {
    return "# config_hash=" + cfg_.config_hash + ",seed=" + std::to_string(cfg_.seed) + "\n";
  }

  void table(const std::string& name, const std::string& body) {
    io::write_file(cfg_.out / name, provenance() + body);
    files_.push_back(name);
  }

  void raw(const std::string& name, const std::string& body) {
    io::write_file(cfg_.out / name, body);
    files_.push_back(name);
  }

  const std::vector<std::string>& files() const { return files_; }

 private:
  const RunConfig& cfg_;
  std::vector<std::string> files_;
};

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline nlohmann::json manifest_base(const RunConfig& cfg) {
  nlohmann::json j;
  j["command"] = cfg.command;
  nlohmann::json echo = nlohmann::json::object();
  for (const auto& [k, v] : cfg.settings) {
    if (!is_runtime_only(k)) echo[k] = v;
  }
  j["config"] = echo;
  j["config_hash"] = cfg.config_hash;
  j["seed"] = cfg.seed;
  j["r_bar"] = io::format_number(cfg.r_bar);
  j["versions"] = {{"mlport", kVersion},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)}};
  return j;
}

inline std::string weights_table(const Eigen::VectorXd& theta, const std::vector<std::string>& labels) {
  std::optional<Eigen::VectorXd> omega;
  try {
    omega = relative_weights(theta);
  } catch (const Error&) {
  }
  std::string body = "asset,theta,omega\n";
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    body += csv_escape(labels[static_cast<std::size_t>(j)]) + "," + io::format_number(theta(j)) + "," +
            (omega ? io::format_number((*omega)(j)) : std::string("-")) + "\n";
  }
  return body;
}

inline std::string cv_table(const CvCurve& curve) {
  std::string body = "penalty,error";
  for (Eigen::Index f = 0; f < curve.per_fold.rows(); ++f) body += ",fold_" + std::to_string(f + 1);
  body += "\n";
  for (std::size_t i = 0; i < curve.lambdas.size(); ++i) {
    body += io::format_number(curve.lambdas[i]) + "," + io::format_cell(curve.errors[i]);
    for (Eigen::Index f = 0; f < curve.per_fold.rows(); ++f) {
      body += "," + io::format_cell(curve.per_fold(f, static_cast<Eigen::Index>(i)));
    }
    body += "\n";
  }
  return body;
}

inline std::string policy_name(const StrategySpec& spec) {
  if (spec.uses_cv()) return "cv";
  if (spec.penalty) return "fixed";
  return "none";
}

// ---------------------------------------------------------------------------
// Commands

inline void run_estimate(const RunConfig& cfg, Outputs& out, nlohmann::json& manifest) {
  io::IngestReport report;
  const ReturnsMatrix returns = io::ingest_csv(cfg.input, cfg.ingest, &report);
  manifest["input_shape"] = {{"n", returns.n()}, {"m", returns.m()}};
  manifest["dropped_periods"] = report.dropped_periods;
  std::string selection = "strategy,policy,penalty,cv_error,status\n";
  auto diagnostics = nlohmann::json::array();
  for (const auto& spec : cfg.strategies) {
    const std::string name = detail::safe_name(spec.label);
    FitContext ctx{cfg.r_bar, cfg.cv_k, derive_seed(cfg.seed, {stable_hash(spec.label)}), nullptr};
    try {
      const auto fit = fit_strategy(spec, returns.data(), ctx);
      out.table("weights_" + name + ".csv", weights_table(fit.theta, returns.asset_labels()));
      std::string cv_error = "-";
      if (fit.curve) {
        out.table("cv_" + name + ".csv", cv_table(*fit.curve));
        cv_error = io::format_cell(fit.curve->errors[fit.curve->chosen_index]);
      }
      if (spec.kind == StrategyKind::spike_slab) {
        std::string body = "asset,inclusion_freq\n";
        for (Eigen::Index j = 0; j < returns.m(); ++j) {
          body += csv_escape(returns.asset_labels()[static_cast<std::size_t>(j)]) + "," +
                  io::format_number(fit.inclusion_freq(j)) + "\n";
        }
        out.table("inclusion_" + name + ".csv", body);
        if (fit.singular_rejections > 0) {
          diagnostics.push_back(spec.label + ": " + std::to_string(fit.singular_rejections) + " singular submodel proposals");
        }
      }
      selection += csv_escape(spec.label) + "," + policy_name(spec) + "," + io::format_cell(fit.penalty) + "," + cv_error +
                   ",ok\n";
    } catch (const Error& e) {
      selection += csv_escape(spec.label) + "," + policy_name(spec) + ",-,-," + std::string(kind_name(e.kind())) + "\n";
      diagnostics.push_back(spec.label + ": " + e.what());
    }
  }
  out.table("selection.csv", selection);
  manifest["diagnostics"] = diagnostics;
}

inline PopulationSpec simulation_population(const RunConfig& cfg) {
  PopulationSpec pop = [&] {
    if (!cfg.population.empty()) {
      const PopulationSpec loaded = io::load_population(cfg.population);
      // r_bar from the command line takes precedence over the file
      if (cfg.settings.count("rbar") || cfg.settings.count("alpha")) {
        return PopulationSpec(loaded.mu(), loaded.sigma(), cfg.r_bar);
      }
      return loaded;
    }
    return generate_population(cfg.generator);
  }();
  if (cfg.leading > 0) pop = pop.leading(cfg.leading);
  return pop;
}

inline void run_simulate(const RunConfig& cfg, Outputs& out, nlohmann::json& manifest) {
  const PopulationSpec pop = simulation_population(cfg);
  SimulationConfig sim{pop, cfg.n_list, cfg.strategies, cfg.K, cfg.seed, cfg.cv_k, cfg.threads};
  const auto tables = run_simulation(sim);

  std::string header = "strategy";
  for (auto n : tables.n_list) header += ",n_" + std::to_string(n);
  header += "\n";
  std::string sharpe = header;
  std::string risk = header;
  auto diagnostics = nlohmann::json::array();
  for (std::size_t s = 0; s < tables.strategies.size(); ++s) {
    sharpe += csv_escape(tables.strategies[s]);
    risk += csv_escape(tables.strategies[s]);
    for (std::size_t i = 0; i < tables.n_list.size(); ++i) {
      const auto& cell = tables.cells[s][i];
      sharpe += "," + io::format_cell(cell.sharpe);
      risk += "," + (cell.risk ? io::format_number(cell.risk->risk) : std::string("-"));
      if (cell.failures > 0 || cell.zero_risk > 0) {
        nlohmann::json d;
        d["strategy"] = tables.strategies[s];
        d["n"] = tables.n_list[i];
        d["failures"] = cell.failures;
        d["failure_kinds"] = cell.failure_kinds;
        d["zero_risk_replications"] = cell.zero_risk;
        diagnostics.push_back(d);
      }
    }
    sharpe += "\n";
    risk += "\n";
  }
  out.table("sharpe.csv", sharpe);
  out.table("risk.csv", risk);

  // Ridge bias/variance over a grid centred on the dominance bound.
  const Eigen::Index bv_n = cfg.bv_n > 0 ? cfg.bv_n : tables.n_list.front();
  double centre = ridge_dominance_bound(pop);
  if (!std::isfinite(centre)) centre = 1.0;
  std::vector<double> lambdas;
  for (int i = 0; i < cfg.bv_points; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(cfg.bv_points - 1);
    lambdas.push_back(centre * std::pow(10.0, -3.0 + 6.0 * t));
  }
  const auto curve = bias_variance_curve(pop, bv_n, lambdas, cfg.K, derive_seed(cfg.seed, {0xb1a5}), cfg.threads);
  std::string bv = "lambda,risk,bias_sq,variance\n";
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    bv += io::format_number(lambdas[i]) + "," + io::format_number(curve[i].risk) + "," +
          io::format_number(curve[i].bias_sq) + "," + io::format_number(curve[i].variance) + "\n";
  }
  out.table("bias_variance.csv", bv);

  nlohmann::json popj = io::population_to_json(pop);
  popj["population_sharpe"] = tables.population_sharpe;
  popj["minimum_generalisation_error"] = minimum_generalisation_error(pop);
  popj["ridge_dominance_bound"] = ridge_dominance_bound(pop);
  out.raw("population.json", popj.dump(2) + "\n");

  manifest["bias_variance_n"] = bv_n;
  manifest["diagnostics"] = diagnostics;
}

inline void run_backtest_command(const RunConfig& cfg, Outputs& out, nlohmann::json& manifest) {
  io::IngestReport report;
  const ReturnsMatrix returns = io::ingest_csv(cfg.input, cfg.ingest, &report);
  manifest["input_shape"] = {{"n", returns.n()}, {"m", returns.m()}};
  manifest["dropped_periods"] = report.dropped_periods;
  BacktestConfig bt{cfg.window, cfg.strategies, cfg.cv_k, cfg.r_bar, cfg.seed, cfg.threads};
  const auto res = run_backtest(returns, bt);
  const std::size_t S = res.strategies.size();

  std::string header = "period";
  for (const auto& name : res.strategies) header += "," + csv_escape(name);
  header += "\n";
  std::string oos = header;
  for (std::size_t w = 0; w < res.periods.size(); ++w) {
    oos += csv_escape(res.periods[w]);
    for (std::size_t s = 0; s < S; ++s) {
      oos += "," + io::format_number(res.oos_returns(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(s)));
    }
    oos += "\n";
  }
  out.table("oos_returns.csv", oos);

  std::string penalties = header;
  bool any_penalty = false;
  for (std::size_t w = 0; w < res.periods.size(); ++w) {
    penalties += csv_escape(res.periods[w]);
    for (std::size_t s = 0; s < S; ++s) {
      penalties += "," + io::format_cell(res.penalties[s][w]);
      any_penalty = any_penalty || res.penalties[s][w].has_value();
    }
    penalties += "\n";
  }
  if (any_penalty) out.table("penalties.csv", penalties);

  std::string summary = "strategy,mean,std,sharpe,failed_windows\n";
  for (std::size_t s = 0; s < S; ++s) {
    const auto& sm = res.summary[s];
    const bool failed = res.strategy_failed[s];
    summary += csv_escape(res.strategies[s]) + "," + (failed ? "-" : io::format_number(sm.mean)) + "," +
               (failed ? "-" : io::format_number(sm.std)) + "," + (failed ? "-" : io::format_cell(sm.sharpe)) + "," +
               std::to_string(res.failed_windows[s]) + "\n";
  }
  out.table("sharpe_summary.csv", summary);

  std::string jk_header = "strategy";
  for (const auto& name : res.strategies) jk_header += "," + csv_escape(name);
  jk_header += "\n";
  std::string jk = jk_header;
  std::string jkp = jk_header;
  for (std::size_t q = 0; q < S; ++q) {
    jk += csv_escape(res.strategies[q]);
    jkp += csv_escape(res.strategies[q]);
    for (std::size_t l = 0; l < S; ++l) {
      const double z = res.jk_z(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(l));
      const double p = res.jk_p(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(l));
      if (std::isnan(z)) {
        jk += ",-";
        jkp += ",-";
      } else {
        jk += "," + io::format_number(z) + significance_stars(p);
        jkp += "," + io::format_number(p);
      }
    }
    jk += "\n";
    jkp += "\n";
  }
  out.table("jk_matrix.csv", jk);
  out.table("jk_pvalues.csv", jkp);
  manifest["diagnostics"] = res.diagnostics;
}

inline nlohmann::json error_record(const std::string& kind, const std::string& message) {
  return {{"error", {{"kind", kind}, {"message", message}}}};
}

inline nlohmann::json error_record(const Error& e) {
  auto j = error_record(std::string(kind_name(e.kind())), e.what());
  if (const auto* pf = dynamic_cast<const ParseFailure*>(&e)) {
    j["error"]["row"] = pf->row();
    j["error"]["column"] = pf->column();
  }
  return j;
}

/// Runs one command. Returns the process exit status; on failure a JSON error
/// record goes to `err` and, when the output directory is usable, error.json.
inline int run(const std::string& command, const Settings& settings, std::ostream& err = std::cerr) {
  std::filesystem::path out_dir = settings.count("out") ? settings.at("out") : ".";
  auto fail = [&](const nlohmann::json& j) {
    const auto record = j.dump();
    err << record << "\n";
    std::error_code ec;
    if (std::filesystem::is_directory(out_dir, ec)) {
      std::ofstream f(out_dir / "error.json", std::ios::binary | std::ios::trunc);
      f << record << "\n";
    }
  };
  try {
    const RunConfig cfg = make_config(command, settings);
    Outputs out(cfg);
    std::error_code ec;
    std::filesystem::remove(cfg.out / "error.json", ec);
    nlohmann::json manifest = manifest_base(cfg);
    if (command == "estimate") run_estimate(cfg, out, manifest);
    else if (command == "simulate") run_simulate(cfg, out, manifest);
    else run_backtest_command(cfg, out, manifest);
    manifest["files"] = out.files();
    out.raw("manifest.json", manifest.dump(2) + "\n");
    return 0;
  } catch (const Error& e) {
    fail(error_record(e));
    return 2;
  } catch (const std::exception& e) {
    fail(error_record("InternalError", e.what()));
    return 1;
  }
}

}  // namespace mlport::cli
