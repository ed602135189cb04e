// Command-line front end: simulate switched systems, check dwell-time and
// average-dwell-time certificates, estimate ADT bounds, evaluate the
// small-gain tau*, and reproduce the divergent two-mode example end to end.
//
// Exit codes: 0 success / certified, 1 parse or input error, 2 simulation
// blow-up (partial CSV still written), 3 failed check or assertion.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dwell/bounds.hpp"
#include "dwell/certify.hpp"
#include "dwell/io.hpp"
#include "dwell/linalg.hpp"
#include "dwell/signals.hpp"
#include "dwell/simulate.hpp"
#include "dwell/svg.hpp"
#include "dwell/system.hpp"

namespace fs = std::filesystem;
using dwell::json;

namespace {

constexpr std::uint64_t kDefaultSeed = 12022;

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  json j;
  in >> j;
  return j;
}

void write_text_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << body;
}

template <typename WriteFn>
void write_stream_file(const fs::path& path, WriteFn&& fn) {
  std::ostringstream os;
  fn(os);
  write_text_file(path, os.str());
}

std::vector<double> parse_vector(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  if (out.empty()) throw std::runtime_error("empty vector literal '" + csv + "'");
  return out;
}

std::pair<double, double> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw std::runtime_error("range must look like LO:HI, got '" + text + "'");
  return {std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1))};
}

// Comparison-function literals: "identity", "linear:C", "power:C,P".
dwell::ComparisonFunction parse_comparison(const std::string& spec) {
  if (spec == "identity") return dwell::ComparisonFunction::identity();
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  if (head == "linear" && colon != std::string::npos)
    return dwell::ComparisonFunction::linear(std::stod(spec.substr(colon + 1)));
  if (head == "power" && colon != std::string::npos) {
    const auto args = parse_vector(spec.substr(colon + 1));
    if (args.size() != 2) throw std::runtime_error("power spec needs two parameters, got '" + spec + "'");
    return dwell::ComparisonFunction::power(args[0], args[1]);
  }
  throw std::runtime_error("unknown comparison function '" + spec + "' (use identity, linear:C, power:C,P)");
}

// Config file support: keys mirror long flag names; explicit command-line
// flags win, so config tokens are appended only for absent flags.
std::vector<std::string> merge_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_path;
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) config_path = args[k + 1];
    if (args[k].rfind("--config=", 0) == 0) config_path = args[k].substr(9);
  }
  if (config_path.empty()) return args;
  const json cfg = load_json_file(config_path);
  if (!cfg.is_object()) throw std::runtime_error("config file must hold a JSON object");
  std::set<std::string> present;
  for (const auto& a : args) {
    if (a.rfind("--", 0) != 0) continue;
    const auto eq = a.find('=');
    present.insert(a.substr(2, eq == std::string::npos ? std::string::npos : eq - 2));
  }
  for (const auto& [key, value] : cfg.items()) {
    if (present.count(key)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back("--" + key);
    } else if (value.is_string()) {
      args.push_back("--" + key);
      args.push_back(value.get<std::string>());
    } else {
      args.push_back("--" + key);
      args.push_back(value.dump());
    }
  }
  return args;
}

struct CommonOpts {
  std::string out_dir = "out";
  std::string config;
  std::uint64_t seed = kDefaultSeed;
  double margin = 1e-9;
  bool svg = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--out", opts.out_dir, "Output directory");
  cmd->add_option("--config", opts.config, "JSON config file; keys mirror flags, flags win");
  cmd->add_option("--seed", opts.seed, "RNG seed for sampled signals");
  cmd->add_option("--margin", opts.margin, "Strictness margin on condition eigenvalues")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--svg", opts.svg, "Also render an SVG plot");
}

fs::path prepare_out(const CommonOpts& opts) {
  fs::path dir(opts.out_dir);
  fs::create_directories(dir);
  return dir;
}

dwell::SvgSeries trajectory_series(const dwell::Trajectory& traj, std::size_t component, const char* color) {
  dwell::SvgSeries s;
  s.color = color;
  for (std::size_t k = 0; k < traj.times.size(); ++k)
    s.points.emplace_back(traj.times[k], traj.states[k][component]);
  return s;
}

// ---- subcommand bodies ----

int run_simulate(const CommonOpts& opts, const std::string& system_path, const std::string& signal_path,
                 const std::string& signal_class, const std::string& x0_text, double horizon, double dt,
                 double rk_step) {
  auto sys = dwell::system_from_json(load_json_file(system_path));
  dwell::SwitchingSignal sig = dwell::SwitchingSignal::constant(1, sys.mode_count);
  if (!signal_path.empty()) {
    sig = dwell::signal_from_json(load_json_file(signal_path));
  } else if (!signal_class.empty()) {
    // dwell:TAU or adw:TAU:N0, sampled with the seed.
    std::stringstream ss(signal_class);
    std::string kind, tau_s, n0_s;
    std::getline(ss, kind, ':');
    std::getline(ss, tau_s, ':');
    std::getline(ss, n0_s, ':');
    dwell::SignalClassSpec spec = kind == "adw"
                                      ? dwell::SignalClassSpec::average_dwell(std::stod(tau_s), std::stoi(n0_s))
                                      : dwell::SignalClassSpec::dwell(std::stod(tau_s));
    sig = dwell::sample_signal(spec, horizon, opts.seed, sys.mode_count);
  } else {
    throw std::runtime_error("simulate needs --signal or --signal-class");
  }
  std::vector<double> x0 = parse_vector(x0_text);
  dwell::Trajectory traj;
  if (rk_step > 0.0) {
    traj = dwell::flow_nonlinear(sys, sig, x0, horizon, rk_step);
  } else {
    traj = dwell::flow_linear(sys, sig, x0, horizon, dt);
  }
  const fs::path dir = prepare_out(opts);
  write_stream_file(dir / "trajectory.csv", [&](std::ostream& os) { dwell::write_trajectory_csv(os, traj); });
  if (opts.svg) {
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    std::vector<dwell::SvgSeries> series;
    for (std::size_t c = 0; c < x0.size(); ++c)
      series.push_back(trajectory_series(traj, c, colors[c % 4]));
    write_stream_file(dir / "trajectory.svg",
                      [&](std::ostream& os) { dwell::write_svg_plot(os, series, "t", "x"); });
  }
  if (traj.blew_up) {
    std::cerr << "blow-up at t = " << traj.blowup_time << "; partial trajectory written\n";
    return 2;
  }
  std::cout << "wrote " << (dir / "trajectory.csv").string() << " (" << traj.times.size() << " samples)\n";
  return 0;
}

int run_check_dwell(const CommonOpts& opts, const std::string& system_path, const std::string& cert_path,
                    double rho, double tau, int budget) {
  auto sys = dwell::system_from_json(load_json_file(system_path));
  dwell::CertifyOptions copts;
  copts.margin = opts.margin;
  const fs::path dir = prepare_out(opts);

  std::optional<dwell::DwellCertificate> cert;
  if (!cert_path.empty()) {
    auto loaded = dwell::dwell_certificate_from_json(load_json_file(cert_path));
    if (rho > 0.0) loaded.rho = rho;
    if (tau > 0.0) loaded.tau = tau;
    cert = std::move(loaded);
  } else {
    if (!(rho > 0.0) || !(tau > 0.0)) throw std::runtime_error("check-dwell needs --rho and --tau (or --cert)");
    cert = dwell::search_dwell_quadratic(sys, rho, tau, budget, copts);
    if (!cert) {
      write_text_file(dir / "verdict.json",
                      json{{"verdict", "failed"}, {"condition", "search exhausted"}}.dump(2) + "\n");
      std::cerr << "no certificate found within budget " << budget << "\n";
      return 3;
    }
    write_text_file(dir / "certificate.json", dwell::to_json(*cert).dump(2) + "\n");
  }

  const auto verdict = dwell::check_dwell_quadratic(sys, cert->P, cert->rho, cert->tau, copts);
  write_text_file(dir / "verdict.json", dwell::to_json(verdict).dump(2) + "\n");
  if (!verdict.certified) {
    std::cerr << "failed: " << verdict.condition << " condition, pair (" << verdict.i << ", " << verdict.j
              << "), margin " << verdict.margin << "\n";
    return 3;
  }
  std::cout << "certified: dwell-time " << cert->tau << " at rate " << cert->rho << "\n";
  return 0;
}

int run_check_adt(const CommonOpts& opts, const std::string& system_path, const std::string& cert_path) {
  auto sys = dwell::system_from_json(load_json_file(system_path));
  auto cert = dwell::certificate_from_json(load_json_file(cert_path));
  dwell::CertifyOptions copts;
  copts.margin = opts.margin;
  const auto verdict = dwell::check_adt_quadratic(sys, cert, copts);
  const fs::path dir = prepare_out(opts);
  write_text_file(dir / "verdict.json", dwell::to_json(verdict).dump(2) + "\n");
  if (!verdict.certified) {
    std::cerr << "failed: " << verdict.condition << " condition, pair (" << verdict.i << ", " << verdict.j
              << "), margin " << verdict.margin << "\n";
    return 3;
  }
  std::cout << "certified: tau-UGEB at tau = " << cert.tau << ", alpha = " << cert.alpha << ", nu = " << cert.nu
            << "\n";
  return 0;
}

int run_check_nonlinear(const CommonOpts& opts, const std::string& system_path, const std::string& cert_path,
                        double flow_step) {
  auto sys = dwell::system_from_json(load_json_file(system_path));
  auto cert = dwell::certificate_from_json(load_json_file(cert_path));
  auto nl = dwell::nonlinear_from_quadratic(sys, cert);
  auto samples = dwell::spherical_samples(sys.dimension);
  auto verdict = dwell::check_nonlinear_sampled(sys, nl, samples, flow_step);
  const fs::path dir = prepare_out(opts);
  json j;
  if (verdict.consistent) {
    j = json{{"verdict", "consistent_on_samples"}, {"samples", samples.size()}};
  } else {
    j = json{{"verdict", "violated"},
             {"condition", verdict.condition},
             {"pair", {verdict.i, verdict.j}},
             {"point", verdict.point}};
  }
  write_text_file(dir / "verdict.json", j.dump(2) + "\n");
  if (!verdict.consistent) {
    std::cerr << "violated: " << verdict.condition << " at sample, pair (" << verdict.i << ", " << verdict.j
              << ")\n";
    return 3;
  }
  std::cout << "consistent on " << samples.size() << " samples (not a proof)\n";
  return 0;
}

int run_estimate_adt(const CommonOpts& opts, const std::string& system_path, double rho,
                     const std::string& alpha_range, int grid, int jobs) {
  auto sys = dwell::system_from_json(load_json_file(system_path));
  const auto range = parse_range(alpha_range);
  const auto report = dwell::estimate_min_adt(sys, rho, range, grid, jobs);
  const fs::path dir = prepare_out(opts);
  write_stream_file(dir / "adt_curve.csv", [&](std::ostream& os) { dwell::write_adt_curve_csv(os, report); });
  write_text_file(dir / "adt_report.json", dwell::to_json(report).dump(2) + "\n");
  if (opts.svg) {
    dwell::SvgSeries s;
    for (const auto& row : report.curve) s.points.emplace_back(std::log10(row.alpha), std::log10(row.tau));
    write_stream_file(dir / "adt_curve.svg",
                      [&](std::ostream& os) { dwell::write_svg_plot(os, {s}, "log10 alpha", "log10 tau"); });
  }
  std::cout << "tau bound " << report.tau_quad << " at alpha = " << report.alpha_star << " (nu = " << report.nu_star
            << "); certificate re-verified\n";
  return 0;
}

int run_tau_star(const CommonOpts& opts, const std::string& rho_spec, const std::string& chi_spec, double epsilon,
                 const std::string& s_range, int grid) {
  auto rho_fn = parse_comparison(rho_spec);
  auto chi = parse_comparison(chi_spec);
  const auto range = parse_range(s_range);
  const auto report = dwell::tau_star(rho_fn, chi, epsilon, range, grid);
  const fs::path dir = prepare_out(opts);
  write_stream_file(dir / "tau_star.csv", [&](std::ostream& os) { dwell::write_tau_star_csv(os, report); });
  write_text_file(dir / "tau_star.json", dwell::to_json(report).dump(2) + "\n");
  if (report.unbounded)
    std::cout << "tau* unbounded over the probed range\n";
  else
    std::cout << "tau* = " << report.tau_star << " attained near s = " << report.attained_s << "\n";
  return 0;
}

int run_counterexample(const CommonOpts& opts, double tau, bool swap_modes) {
  // Two planar rotating modes; dwelling tau = 2.1 between switches is
  // safe, yet a periodic signal with the same average budget aligns the
  // rotations into growth.
  const dwell::Matrix a1 = dwell::Matrix::from_rows({{-0.1, 1.0}, {-2.0, -0.1}});
  const dwell::Matrix a2 = dwell::Matrix::from_rows({{-0.03, 1.0}, {-1.0, -0.03}});
  auto sys = dwell::SwitchedSystem::linear({a1, a2});
  const double t1 = M_PI / (2.0 * std::sqrt(2.0));
  const double t2 = 3.0 * M_PI / 2.0;
  const double period = t1 + t2;
  std::vector<int> modes = swap_modes ? std::vector<int>{2, 1} : std::vector<int>{1, 2};
  auto sig = dwell::SwitchingSignal::make({0.0, t1}, modes, 2, dwell::SwitchingSignal::Tail::periodic, period);

  struct Assertion {
    std::string name;
    bool pass;
    std::string detail;
  };
  std::vector<Assertion> checks;
  auto record = [&](std::string name, bool pass, std::string detail) {
    checks.push_back({std::move(name), pass, std::move(detail)});
  };

  const dwell::Matrix map =
      dwell::expm(sys.matrices[static_cast<std::size_t>(modes[1] - 1)], period - t1) *
      dwell::expm(sys.matrices[static_cast<std::size_t>(modes[0] - 1)], t1);
  const double decay = std::exp(-0.1 * t1 - 0.03 * t2);
  dwell::Matrix expected(2, 2);
  expected(0, 0) = decay * std::sqrt(2.0);
  expected(1, 1) = decay * std::sqrt(2.0) / 2.0;
  const double map_err = (map - expected).max_abs();
  record("period map matches closed form", map_err < 1e-9, "entrywise error " + std::to_string(map_err));

  const double growth = decay * std::sqrt(2.0);
  record("per-period growth exceeds 1.09", growth > 1.09, "growth factor " + std::to_string(growth));

  const int periods = 20;
  auto traj = dwell::flow_linear(sys, sig, std::vector<double>{1.0, 0.0}, periods * period);
  const double end_norm = dwell::norm2(traj.states.back());
  const double predicted = std::pow(growth, periods);
  record("simulated 20-period growth matches the map",
         !traj.blew_up && std::abs(end_norm - predicted) <= 1e-6 * predicted,
         "simulated " + std::to_string(end_norm) + " vs " + std::to_string(predicted));

  const long n_period = dwell::count_switches(sig, 0.0, period);
  record("two switches per period", n_period == 2, "count " + std::to_string(n_period));

  const double ratio = period / tau;
  record("T/tau within [2.772, 2.774]", ratio >= 2.772 && ratio <= 2.774, "T/tau = " + std::to_string(ratio));

  const auto dwell_verdict = dwell::classify(sig, dwell::SignalClassSpec::dwell(tau));
  const double witness_gap = dwell_verdict.witness_t - dwell_verdict.witness_s;
  record("not a dwell-time member; witness gap is the short segment",
         !dwell_verdict.member && std::abs(witness_gap - t1) < 1e-9, "gap " + std::to_string(witness_gap));

  const auto adt_verdict = dwell::classify(sig, dwell::SignalClassSpec::average_dwell(tau, 2));
  record("average-dwell member with chattering bound 2", adt_verdict.member,
         adt_verdict.member ? "member" : adt_verdict.detail);

  const fs::path dir = prepare_out(opts);
  json report = json::array();
  bool all_pass = true;
  std::ostringstream text;
  for (const auto& c : checks) {
    all_pass = all_pass && c.pass;
    report.push_back(json{{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    text << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << " (" << c.detail << ")\n";
  }
  write_text_file(dir / "counterexample_report.json",
                  json{{"tau", tau}, {"swap_modes", swap_modes}, {"assertions", report}}.dump(2) + "\n");
  auto plotted = dwell::flow_linear(sys, sig, std::vector<double>{1.0, 0.0}, 10.0 * period, 0.02);
  write_stream_file(dir / "counterexample_trajectory.csv",
                    [&](std::ostream& os) { dwell::write_trajectory_csv(os, plotted); });
  if (opts.svg) {
    write_stream_file(dir / "counterexample_trajectory.svg", [&](std::ostream& os) {
      dwell::write_svg_plot(os, {trajectory_series(plotted, 0, "#1f77b4"), trajectory_series(plotted, 1, "#d62728")},
                            "t", "x");
    });
  }
  std::cout << text.str();
  return all_pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Switched-system dwell-time stability toolkit"};
  app.require_subcommand(1);

  CommonOpts sim_opts;
  std::string sim_system, sim_signal, sim_signal_class, sim_x0 = "1,0";
  double sim_horizon = 10.0, sim_dt = 0.01, sim_rk = 0.0;
  auto* sim = app.add_subcommand("simulate", "Integrate a switched system along a signal");
  sim->add_option("--system", sim_system, "System JSON file")->required();
  sim->add_option("--signal", sim_signal, "Signal JSON file");
  sim->add_option("--signal-class", sim_signal_class, "Sample a signal: dwell:TAU or adw:TAU:N0");
  sim->add_option("--x0", sim_x0, "Initial state, comma separated");
  sim->add_option("--horizon", sim_horizon, "Simulation horizon")->check(CLI::PositiveNumber);
  sim->add_option("--dt", sim_dt, "Output sample spacing")->check(CLI::NonNegativeNumber);
  sim->add_option("--rk-step", sim_rk, "Integrate with RK4 at this step instead of matrix exponentials");
  add_common(sim, sim_opts);

  CommonOpts cd_opts;
  std::string cd_system, cd_cert;
  double cd_rho = 0.0, cd_tau = 0.0;
  int cd_budget = 500;
  auto* cd = app.add_subcommand("check-dwell", "Search/verify a dwell-time quadratic certificate");
  cd->add_option("--system", cd_system, "System JSON file")->required();
  cd->add_option("--cert", cd_cert, "Certificate JSON file (searched when omitted)");
  cd->add_option("--rho", cd_rho, "Decay rate");
  cd->add_option("--tau", cd_tau, "Dwell time");
  cd->add_option("--budget", cd_budget, "Search iteration budget");
  add_common(cd, cd_opts);

  CommonOpts ca_opts;
  std::string ca_system, ca_cert;
  auto* ca = app.add_subcommand("check-adt", "Verify a flow-free average-dwell-time certificate");
  ca->add_option("--system", ca_system, "System JSON file")->required();
  ca->add_option("--cert", ca_cert, "Certificate JSON file")->required();
  add_common(ca, ca_opts);

  CommonOpts cn_opts;
  std::string cn_system, cn_cert;
  double cn_step = 1e-4;
  auto* cn = app.add_subcommand("check-nonlinear",
                                "Sampled nonlinear-condition check of a quadratic certificate");
  cn->add_option("--system", cn_system, "System JSON file")->required();
  cn->add_option("--cert", cn_cert, "Certificate JSON file")->required();
  cn->add_option("--flow-step", cn_step, "Dini quotient step")->check(CLI::PositiveNumber);
  add_common(cn, cn_opts);

  CommonOpts ea_opts;
  std::string ea_system, ea_range = "0.001:100";
  double ea_rho = 1e-6;
  int ea_grid = 64, ea_jobs = 1;
  auto* ea = app.add_subcommand("estimate-adt", "Quadratic upper bound on the minimal average dwell-time");
  ea->add_option("--system", ea_system, "System JSON file")->required();
  ea->add_option("--rho", ea_rho, "Decay rate")->check(CLI::PositiveNumber);
  ea->add_option("--alpha-range", ea_range, "Log grid range LO:HI");
  ea->add_option("--grid", ea_grid, "Grid size")->check(CLI::PositiveNumber);
  ea->add_option("--jobs", ea_jobs, "Parallel grid evaluation")->check(CLI::PositiveNumber);
  add_common(ea, ea_opts);

  CommonOpts ts_opts;
  std::string ts_rho, ts_chi, ts_range = "0.01:100";
  double ts_eps = 1.0;
  int ts_grid = 64;
  auto* ts = app.add_subcommand("tau-star", "Small-gain average dwell-time bound for class-K data");
  ts->add_option("--rho-fn", ts_rho, "Decrease rate: identity, linear:C, power:C,P")->required();
  ts->add_option("--chi", ts_chi, "Jump gain: identity, linear:C, power:C,P")->required();
  ts->add_option("--epsilon", ts_eps, "Psi_eps parameter")->check(CLI::PositiveNumber);
  ts->add_option("--s-range", ts_range, "Supremum probe range LO:HI");
  ts->add_option("--grid", ts_grid, "Grid size")->check(CLI::PositiveNumber);
  add_common(ts, ts_opts);

  CommonOpts ce_opts;
  double ce_tau = 2.1;
  bool ce_swap = false;
  auto* ce = app.add_subcommand("counterexample",
                                "Reproduce the dwell-stable but average-dwell-divergent two-mode example");
  ce->add_option("--tau", ce_tau, "Dwell threshold under test")->check(CLI::PositiveNumber);
  ce->add_flag("--swap-modes", ce_swap, "Swap the mode order inside the period");
  add_common(ce, ce_opts);

  std::vector<std::string> args;
  try {
    args = merge_config(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  try {
    std::vector<const char*> cargs;
    cargs.push_back(argv[0]);
    for (const auto& a : args) cargs.push_back(a.c_str());
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sim->parsed())
      return run_simulate(sim_opts, sim_system, sim_signal, sim_signal_class, sim_x0, sim_horizon, sim_dt, sim_rk);
    if (cd->parsed()) return run_check_dwell(cd_opts, cd_system, cd_cert, cd_rho, cd_tau, cd_budget);
    if (ca->parsed()) return run_check_adt(ca_opts, ca_system, ca_cert);
    if (cn->parsed()) return run_check_nonlinear(cn_opts, cn_system, cn_cert, cn_step);
    if (ea->parsed()) return run_estimate_adt(ea_opts, ea_system, ea_rho, ea_range, ea_grid, ea_jobs);
    if (ts->parsed()) return run_tau_star(ts_opts, ts_rho, ts_chi, ts_eps, ts_range, ts_grid);
    if (ce->parsed()) return run_counterexample(ce_opts, ce_tau, ce_swap);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
