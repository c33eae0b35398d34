#include "msgn/experiment.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "msgn/errors.hpp"
#include "msgn/jump_sim.hpp"
#include "msgn/network.hpp"
#include "msgn/path.hpp"
#include "msgn/pdmp_sim.hpp"
#include "msgn/stats.hpp"

namespace msgn {

namespace {

std::vector<std::string> split_tokens(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
      if (!cur.empty()) {
        out.push_back(cur);
        cur.clear();
      }
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

double parse_double(const std::string& v, const std::string& key, int line) {
  try {
    size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw parse_error("value of '" + key + "' is not a number", line);
  }
}

long long parse_ll(const std::string& v, const std::string& key, int line) {
  try {
    size_t used = 0;
    long long d = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw parse_error("value of '" + key + "' is not an integer", line);
  }
}

bool parse_bool(const std::string& v, const std::string& key, int line) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw parse_error("value of '" + key + "' is not a boolean", line);
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool has_x0n = false, has_y0n = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (size_t hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) throw parse_error("expected 'key = value'", lineno);
    auto trim = [](std::string s) {
      size_t a = s.find_first_not_of(" \t\r");
      size_t b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw parse_error("expected 'key = value'", lineno);

    if (key == "network") {
      cfg.network_path = value;
    } else if (key == "x0") {
      cfg.x0.clear();
      for (const auto& t : split_tokens(value)) cfg.x0.push_back(parse_double(t, key, lineno));
    } else if (key == "y0") {
      cfg.y0.clear();
      for (const auto& t : split_tokens(value)) cfg.y0.push_back(parse_ll(t, key, lineno));
    } else if (key == "x0N") {
      cfg.x0n.clear();
      for (const auto& t : split_tokens(value)) cfg.x0n.push_back(parse_double(t, key, lineno));
      has_x0n = true;
    } else if (key == "y0N") {
      cfg.y0n.clear();
      for (const auto& t : split_tokens(value)) cfg.y0n.push_back(parse_ll(t, key, lineno));
      has_y0n = true;
    } else if (key == "T") {
      cfg.T = parse_double(value, key, lineno);
    } else if (key == "N") {
      cfg.N = parse_ll(value, key, lineno);
    } else if (key == "N_list") {
      cfg.n_list.clear();
      for (const auto& t : split_tokens(value)) cfg.n_list.push_back(parse_ll(t, key, lineno));
      for (size_t i = 1; i < cfg.n_list.size(); ++i)
        if (cfg.n_list[i] <= cfg.n_list[i - 1])
          throw parse_error("N_list must be strictly ascending", lineno);
    } else if (key == "M") {
      cfg.M = static_cast<int>(parse_ll(value, key, lineno));
    } else if (key == "M_sde") {
      cfg.M_sde = static_cast<int>(parse_ll(value, key, lineno));
    } else if (key == "batches") {
      cfg.batches = static_cast<int>(parse_ll(value, key, lineno));
    } else if (key == "seed") {
      cfg.seed = static_cast<uint64_t>(parse_ll(value, key, lineno));
    } else if (key == "grid") {
      cfg.grid = static_cast<int>(parse_ll(value, key, lineno));
    } else if (key == "sde_steps") {
      cfg.sde_steps = static_cast<int>(parse_ll(value, key, lineno));
    } else if (key == "workers") {
      cfg.workers = static_cast<int>(parse_ll(value, key, lineno));
    } else if (key == "ode_rel_tol") {
      cfg.ode_rtol = parse_double(value, key, lineno);
    } else if (key == "ode_abs_tol") {
      cfg.ode_atol = parse_double(value, key, lineno);
    } else if (key == "event_cap") {
      cfg.event_cap = parse_ll(value, key, lineno);
    } else if (key == "lambda0") {
      cfg.lambda0 = parse_double(value, key, lineno);
    } else if (key == "replica") {
      cfg.replica = static_cast<uint32_t>(parse_ll(value, key, lineno));
    } else if (key == "emit_plot") {
      cfg.emit_plot = parse_bool(value, key, lineno);
    } else if (key == "out") {
      cfg.out_dir = value;
    } else if (key == "val_x_max") {
      cfg.val_x_max = parse_double(value, key, lineno);
    } else if (key == "val_y_max") {
      cfg.val_y_max = parse_ll(value, key, lineno);
    } else if (key == "val_samples") {
      cfg.val_samples = static_cast<int>(parse_ll(value, key, lineno));
    } else {
      throw parse_error("unknown config key '" + key + "'", lineno);
    }
  }
  if (has_x0n || has_y0n) {
    cfg.has_z0n = true;
    if (!has_x0n) cfg.x0n = cfg.x0;
    if (!has_y0n) cfg.y0n = cfg.y0;
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

namespace {

// one "key = value" line per resolved field, embedded at the top of
// every output file
std::vector<std::string> resolved_header(const ExperimentConfig& c) {
  std::vector<std::string> h;
  auto add = [&](const std::string& k, const std::string& v) { h.push_back(k + " = " + v); };
  auto join_d = [](const std::vector<double>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_double(v[i]);
    return s.empty() ? std::string("-") : s;
  };
  auto join_ll = [](const std::vector<long long>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
    return s.empty() ? std::string("-") : s;
  };
  add("command", c.command);
  add("network", c.network_path);
  add("x0", join_d(c.x0));
  add("y0", join_ll(c.y0));
  if (c.has_z0n) {
    add("x0N", join_d(c.x0n));
    add("y0N", join_ll(c.y0n));
  }
  add("T", format_double(c.T));
  if (c.N > 0) add("N", std::to_string(c.N));
  if (!c.n_list.empty()) add("N_list", join_ll(c.n_list));
  add("M", std::to_string(c.M));
  add("M_sde", std::to_string(c.M_sde));
  add("batches", std::to_string(c.batches));
  add("seed", std::to_string(c.seed));
  add("grid", std::to_string(c.grid));
  add("sde_steps", std::to_string(c.sde_steps));
  add("workers", std::to_string(c.workers));
  add("ode_rel_tol", format_double(c.ode_rtol));
  add("ode_abs_tol", format_double(c.ode_atol));
  add("event_cap", std::to_string(c.event_cap));
  add("lambda0", format_double(c.lambda0));
  add("replica", std::to_string(c.replica));
  add("out", c.out_dir);
  return h;
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw parse_error(msg);
}

HybridState make_initial(const ReactionNetwork& net, const std::vector<double>& x0,
                         const std::vector<long long>& y0) {
  HybridState s{x0, y0};
  check_state(net, s);
  return s;
}

std::ofstream open_output(const std::filesystem::path& dir, const std::string& name) {
  std::filesystem::path p = dir / name;
  std::ofstream out(p, std::ios::binary);
  if (!out) throw io_error("cannot open output file: " + p.string());
  return out;
}

void run_validated(const ExperimentConfig& cfg, const std::string& command,
                   std::ostream& log) {
  const auto header = resolved_header(cfg);
  std::filesystem::path out_dir(cfg.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw io_error("cannot create output directory: " + out_dir.string());

  std::ifstream nf(cfg.network_path);
  if (!nf) throw io_error("cannot open network file: " + cfg.network_path);
  std::ostringstream ns;
  ns << nf.rdbuf();
  DomainBox box{cfg.val_x_max, cfg.val_y_max, cfg.val_samples};
  ReactionNetwork net = [&] {
    try {
      return parse_network(ns.str(), box);
    } catch (const parse_error& e) {
      // network-file problems map to the network error category, not the
      // config one
      throw validation_error(std::string("network parse: ") + e.what());
    }
  }();

  if (command == "validate") {
    auto out = open_output(out_dir, "summary.txt");
    for (const auto& h : header) out << "# " << h << "\n";
    out << "network ok\n";
    out << "continuous species: " << net.n() << "\n";
    out << "discrete species: " << net.d() << "\n";
    out << "continuous reactions: " << net.continuous_reactions().size() << "\n";
    out << "discrete reactions: " << net.discrete_reactions().size() << "\n";
    if (net.rate_bound()) out << "declared rate bound: " << format_double(*net.rate_bound()) << "\n";
    log << "validate: ok (n=" << net.n() << " d=" << net.d() << ")\n";
    return;
  }

  require(cfg.T > 0.0, "T must be positive");
  require(cfg.grid >= 1, "grid must be >= 1");
  HybridState z0 = make_initial(net, cfg.x0, cfg.y0);
  HybridState z0n = cfg.has_z0n ? make_initial(net, cfg.x0n, cfg.y0n) : z0;

  JumpSimOptions jopts;
  jopts.event_cap = cfg.event_cap;
  jopts.grid_intervals = cfg.grid;
  jopts.lambda0 = cfg.lambda0;
  PdmpSimOptions popts;
  popts.event_cap = cfg.event_cap;
  popts.grid_intervals = cfg.grid;
  popts.lambda0 = cfg.lambda0;
  popts.ode_rtol = cfg.ode_rtol;
  popts.ode_atol = cfg.ode_atol;

  if (command == "simulate") {
    require(cfg.N >= 1, "N must be a positive integer");
    auto path = simulate_scaled(net, cfg.N, z0n, cfg.T, cfg.seed, cfg.replica, jopts);
    auto pout = open_output(out_dir, "path.csv");
    write_path_csv(pout, net, path, header);
    auto eout = open_output(out_dir, "events.csv");
    write_events_csv(eout, net, path, header);
    log << "simulate: " << path.events.size() << " accepted events\n";
    return;
  }

  if (command == "pdmp") {
    auto path = simulate_pdmp(net, z0, cfg.T, cfg.seed, cfg.replica, popts);
    auto pout = open_output(out_dir, "path.csv");
    write_path_csv(pout, net, path, header);
    auto eout = open_output(out_dir, "events.csv");
    write_events_csv(eout, net, path, header);
    log << "pdmp: " << path.events.size() << " accepted events\n";
    return;
  }

  if (command == "converge") {
    require(!cfg.n_list.empty(), "converge needs N_list");
    require(cfg.M >= 2, "converge needs M >= 2");
    stats::SweepOptions sopts;
    sopts.grid_intervals = cfg.grid;
    sopts.workers = cfg.workers;
    sopts.coupled.jump = jopts;
    sopts.coupled.pdmp = popts;
    auto report = stats::strong_error_sweep(net, z0n, z0, cfg.T, cfg.n_list, cfg.M,
                                            cfg.seed, sopts);
    auto rout = open_output(out_dir, "report.csv");
    stats::write_report_csv(rout, report, header);
    auto sout = open_output(out_dir, "summary.txt");
    for (const auto& h : header) sout << "# " << h << "\n";
    sout << stats::summary_text(report);
    if (cfg.emit_plot) {
      auto plot = open_output(out_dir, "plot.py");
      plot << stats::plot_script(true, false);
    }
    log << "converge: " << report.rows.size() << " rows";
    if (report.fit.defined) log << ", slope " << format_double(report.fit.slope);
    log << "\n";
    return;
  }

  if (command == "clt") {
    require(cfg.N >= 1, "clt needs N");
    require(cfg.M >= 2 && cfg.M_sde >= 2, "clt needs M and M_sde >= 2");
    stats::CltOptions copts;
    copts.sde_steps = cfg.sde_steps;
    copts.batches = cfg.batches;
    copts.workers = cfg.workers;
    copts.coupled.jump = jopts;
    copts.coupled.pdmp = popts;
    auto block = stats::clt_compare(net, z0n, z0, cfg.T, cfg.N, cfg.M, cfg.M_sde, cfg.seed,
                                    copts);
    auto rout = open_output(out_dir, "report.csv");
    stats::write_clt_csv(rout, block, header);
    auto samples = open_output(out_dir, "samples.csv");
    stats::write_clt_samples_csv(samples, block, header);
    auto sout = open_output(out_dir, "summary.txt");
    for (const auto& h : header) sout << "# " << h << "\n";
    sout << stats::clt_summary_text(block);
    if (cfg.emit_plot) {
      auto plot = open_output(out_dir, "plot.py");
      plot << stats::plot_script(false, true);
    }
    log << "clt: " << block.batches << " batch(es)\n";
    return;
  }

  throw parse_error("unknown command '" + command + "'");
}

}  // namespace

int run_experiment(ExperimentConfig config, const std::string& command,
                   const CliOverrides& overrides, std::ostream& log) {
  config.command = command;
  if (overrides.seed) config.seed = *overrides.seed;
  if (overrides.out_dir) config.out_dir = *overrides.out_dir;
  if (overrides.workers) config.workers = *overrides.workers;
  try {
    run_validated(config, command, log);
    return 0;
  } catch (const parse_error& e) {
    log << "config error: " << e.what() << "\n";
    return 2;
  } catch (const validation_error& e) {
    log << "network error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    log << "config error: " << e.what() << "\n";
    return 2;
  } catch (const cap_error& e) {
    log << "simulation error: " << e.what() << "\n";
    return 4;
  } catch (const integrator_error& e) {
    log << "integrator error: " << e.what() << "\n";
    return 4;
  } catch (const io_error& e) {
    log << "io error: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace msgn
