#pragma once

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "dwell/bounds.hpp"
#include "dwell/certify.hpp"
#include "dwell/matrix.hpp"
#include "dwell/signals.hpp"
#include "dwell/simulate.hpp"
#include "dwell/system.hpp"

namespace dwell {

using nlohmann::json;

// ---- JSON ----

inline json to_json(const Matrix& m) {
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

inline Matrix matrix_from_json(const json& j) {
  const int rows = j.at("rows").get<int>();
  const int cols = j.at("cols").get<int>();
  const std::vector<double> data = j.at("data").get<std::vector<double>>();
  if (static_cast<int>(data.size()) != rows * cols) throw std::invalid_argument("matrix json: data length mismatch");
  Matrix m(rows, cols);
  m.data() = data;
  if (!m.all_finite()) throw std::invalid_argument("matrix json: non-finite entries");
  return m;
}

inline json to_json(const SwitchingSignal& sig) {
  json tail;
  if (sig.tail == SwitchingSignal::Tail::periodic)
    tail = json{{"kind", "periodic"}, {"period", sig.period}};
  else
    tail = json{{"kind", "constant"}};
  return json{{"breakpoints", sig.breakpoints}, {"modes", sig.modes}, {"tail", tail}};
}

inline SwitchingSignal signal_from_json(const json& j) {
  const auto breakpoints = j.at("breakpoints").get<std::vector<double>>();
  const auto modes = j.at("modes").get<std::vector<int>>();
  int mode_count = 0;
  if (j.contains("mode_count")) mode_count = j.at("mode_count").get<int>();
  for (int m : modes) mode_count = std::max(mode_count, m);
  auto tail = SwitchingSignal::Tail::constant;
  double period = 0.0;
  if (j.contains("tail")) {
    const std::string kind = j.at("tail").at("kind").get<std::string>();
    if (kind == "periodic") {
      tail = SwitchingSignal::Tail::periodic;
      period = j.at("tail").at("period").get<double>();
    } else if (kind != "constant") {
      throw std::invalid_argument("signal json: unknown tail kind '" + kind + "'");
    }
  }
  return SwitchingSignal::make(breakpoints, modes, mode_count, tail, period);
}

inline json to_json(const SwitchedSystem& sys) {
  if (sys.kind != SwitchedSystem::Kind::linear)
    throw std::invalid_argument("system json: only linear systems have a file form");
  json mats = json::array();
  for (const auto& a : sys.matrices) mats.push_back(to_json(a));
  return json{{"kind", "linear"}, {"matrices", mats}};
}

inline SwitchedSystem system_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind != "linear") throw std::invalid_argument("system json: unsupported kind '" + kind + "'");
  std::vector<Matrix> mats;
  for (const auto& mj : j.at("matrices")) mats.push_back(matrix_from_json(mj));
  return SwitchedSystem::linear(std::move(mats));
}

inline json to_json(const QuadraticCertificate& cert) {
  json ps = json::array();
  for (const auto& p : cert.P) ps.push_back(to_json(p.matrix()));
  return json{{"P", ps}, {"rho", cert.rho}, {"alpha", cert.alpha}, {"nu", cert.nu}, {"tau", cert.tau}};
}

inline json to_json(const DwellCertificate& cert) {
  json ps = json::array();
  for (const auto& p : cert.P) ps.push_back(to_json(p.matrix()));
  // Same schema as the flow-free certificate; the dwell form carries the
  // degenerate coupling parameters.
  return json{{"P", ps}, {"rho", cert.rho}, {"alpha", 0.0}, {"nu", 1.0}, {"tau", cert.tau}};
}

inline std::vector<SpdMatrix> spd_family_from_json(const json& j) {
  std::vector<SpdMatrix> out;
  for (const auto& pj : j) out.emplace_back(matrix_from_json(pj));
  return out;
}

inline QuadraticCertificate certificate_from_json(const json& j) {
  return QuadraticCertificate::checked(spd_family_from_json(j.at("P")), j.at("rho").get<double>(),
                                       j.value("alpha", 0.0), j.value("nu", 1.0), j.at("tau").get<double>());
}

inline DwellCertificate dwell_certificate_from_json(const json& j) {
  return DwellCertificate{spd_family_from_json(j.at("P")), j.at("rho").get<double>(), j.at("tau").get<double>()};
}

inline json to_json(const CheckResult& verdict) {
  if (verdict.certified) return json{{"verdict", "certified"}};
  return json{{"verdict", "failed"},
              {"condition", verdict.condition},
              {"pair", {verdict.i, verdict.j}},
              {"margin", verdict.margin}};
}

inline json to_json(const AdtBoundReport& report) {
  return json{{"rho", report.rho},
              {"tau_quad", report.tau_quad},
              {"alpha_star", report.alpha_star},
              {"nu_star", report.nu_star},
              {"certificate", to_json(report.certificate)}};
}

inline json to_json(const TauStarReport& report) {
  json j{{"epsilon", report.epsilon}, {"unbounded", report.unbounded}};
  if (report.unbounded) {
    j["tau_star"] = "unbounded";
  } else {
    j["tau_star"] = report.tau_star;
    j["attained_s"] = report.attained_s;
  }
  return j;
}

// ---- CSV ----

namespace detail {

/// Fixed shortest-faithful formatting: 15 significant digits round-trips
/// doubles and keeps outputs byte-stable across runs.
inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

}  // namespace detail

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,mode";
  const std::size_t n = traj.states.empty() ? 0 : traj.states.front().size();
  for (std::size_t k = 1; k <= n; ++k) os << ",x" << k;
  os << "\n";
  for (std::size_t row = 0; row < traj.times.size(); ++row) {
    os << detail::fmt(traj.times[row]) << "," << traj.modes[row];
    for (double v : traj.states[row]) os << "," << detail::fmt(v);
    os << "\n";
  }
}

inline void write_adt_curve_csv(std::ostream& os, const AdtBoundReport& report) {
  os << "alpha,nu,tau\n";
  for (const auto& row : report.curve)
    os << detail::fmt(row.alpha) << "," << detail::fmt(row.nu) << "," << detail::fmt(row.tau) << "\n";
}

inline void write_tau_star_csv(std::ostream& os, const TauStarReport& report) {
  os << "s,integral\n";
  for (const auto& [s, v] : report.grid) os << detail::fmt(s) << "," << detail::fmt(v) << "\n";
}

}  // namespace dwell
