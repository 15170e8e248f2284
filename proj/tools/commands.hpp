#pragma once

// Subcommand bodies. Each writes a CSV table with '#' header lines and
// returns the process exit code.

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "scenario.hpp"
#include "vcm/verify.hpp"

namespace vcm::cli {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Table {
 public:
  Table(std::ostream& out, const std::string& command, const std::string& hash,
        const std::vector<std::string>& columns)
      : out_(out) {
    out_ << "# vcm " << command << "\n# config_hash: " << hash << "\n# columns: ";
    for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << "\n";
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << "\n";
  }

  void row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(fmt(v));
    row(cells);
  }

  void comment(const std::string& text) { out_ << "# " << text << "\n"; }

 private:
  std::ostream& out_;
};

namespace detail {

inline void append(std::vector<double>& row, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) row.push_back(v[i]);
}

inline const std::vector<std::string> kStateColumns = {"q1", "q2", "q3", "p1", "p2", "p3"};
inline const std::vector<std::string> kElementColumns = {"sma", "ecc", "inc", "raan", "argp", "m0"};

inline std::vector<std::string> prefixed(const std::string& prefix,
                                         const std::vector<std::string>& names) {
  std::vector<std::string> out;
  for (const auto& n : names) out.push_back(prefix + n);
  return out;
}

inline MotionChart chart_for(const Scenario& sc) {
  return kepler_chart(sc.model, sc.epoch, sc.chart_step);
}

inline Vector chart_coordinates(const Scenario& sc, const MotionChart& chart) {
  if (sc.elements) return sc.elements->to_vector();
  return chart.to_elements(sc.state->to_vector(), sc.t0);
}

}  // namespace detail

/// Kepler or directly integrated perturbed trajectory.
inline int cmd_propagate(const Scenario& sc, std::ostream& out) {
  const DisturbingFunction dist = sc.disturbing();
  const Trajectory tr =
      direct_perturbed(sc.model, dist, sc.initial_state(), sc.t1, sc.integrator, sc.samples);
  std::vector<std::string> cols = {"t"};
  cols.insert(cols.end(), detail::kStateColumns.begin(), detail::kStateColumns.end());
  cols.insert(cols.end(), {"r", "energy"});
  Table table(out, "propagate", sc.hash, cols);
  for (const Sample& s : tr.samples) {
    const PhaseState ps = PhaseState::from_vector(s.t, s.x);
    std::vector<double> row = {s.t};
    detail::append(row, s.x);
    row.push_back(ps.q.norm());
    row.push_back(perturbed_energy(ps, sc.model, dist));
    table.row(row);
  }
  return 0;
}

/// Element <-> state conversion at t0, optionally with the state round-trip residual.
inline int cmd_elements(const Scenario& sc, std::ostream& out, bool round_trip) {
  const PhaseState s = sc.initial_state();
  const OrbitalElements el =
      sc.elements ? *sc.elements : elements_from_state(s, sc.model, sc.epoch);
  std::vector<std::string> cols = {"t"};
  cols.insert(cols.end(), detail::kElementColumns.begin(), detail::kElementColumns.end());
  cols.insert(cols.end(), detail::kStateColumns.begin(), detail::kStateColumns.end());
  cols.push_back("degenerate");
  if (round_trip) cols.push_back("round_trip_residual");
  Table table(out, "elements", sc.hash, cols);
  std::vector<double> row = {sc.t0};
  detail::append(row, el.to_vector());
  detail::append(row, s.to_vector());
  row.push_back(el.degenerate ? 1.0 : 0.0);
  if (round_trip) {
    const PhaseState back =
        state_from_elements(elements_from_state(s, sc.model, sc.epoch), sc.model, sc.t0);
    row.push_back((back.to_vector() - s.to_vector()).lpNorm<Eigen::Infinity>());
  }
  table.row(row);
  return 0;
}

/// Bracket matrices at (elements, t0) and residuals, long format.
inline int cmd_brackets(const Scenario& sc, std::ostream& out,
                        PoissonSign sign = PoissonSign::classical) {
  const MotionChart chart = detail::chart_for(sc);
  const Vector el = detail::chart_coordinates(sc, chart);
  const BracketMatrices b = bracket_matrices(chart, el, sc.t0, sign);
  Table table(out, "brackets", sc.hash, {"quantity", "row", "col", "value"});
  auto matrix = [&](const std::string& name, const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        table.row({name, detail::kElementColumns[static_cast<std::size_t>(i)],
                   detail::kElementColumns[static_cast<std::size_t>(j)], fmt(m(i, j))});
  };
  matrix("lagrange", b.lagrange);
  matrix("poisson", b.poisson);
  auto scalar = [&](const std::string& name, double v) { table.row({name, "", "", fmt(v)}); };
  scalar("inverse_residual", (b.lagrange * b.poisson - Matrix::Identity(6, 6)).lpNorm<Eigen::Infinity>());
  scalar("darboux_residual", darboux_pullback_residual(chart, el, sc.t0));
  scalar("time_independence_residual", time_independence_residual(chart, el, sc.t0, sc.t1));
  scalar("jacobian_condition", b.jacobian_condition);
  return 0;
}

/// Element trajectory, reconstructed states and the direct Cartesian oracle.
inline int cmd_varconst(const Scenario& sc, std::ostream& out) {
  const MotionChart chart = detail::chart_for(sc);
  const Vector el0 = detail::chart_coordinates(sc, chart);
  const DisturbingFunction dist = sc.disturbing();
  const ElementTrajectory et =
      integrate_varconst(chart, dist, el0, sc.t0, sc.t1, sc.integrator, sc.samples);
  const Trajectory rec = reconstruct_trajectory(chart, et);
  const Trajectory direct =
      direct_perturbed(sc.model, dist, sc.initial_state(), sc.t1, sc.integrator, sc.samples);
  std::vector<std::string> cols = {"t"};
  for (const auto& group : {detail::kElementColumns, detail::prefixed("rec_", detail::kStateColumns),
                            detail::prefixed("direct_", detail::kStateColumns)})
    cols.insert(cols.end(), group.begin(), group.end());
  cols.push_back("position_deviation");
  Table table(out, "varconst", sc.hash, cols);
  double worst = 0.0;
  for (std::size_t i = 0; i < et.samples.size(); ++i) {
    const double dev =
        (rec.samples[i].x.head(3) - direct.samples[i].x.head(3)).lpNorm<Eigen::Infinity>();
    worst = std::max(worst, dev);
    std::vector<double> row = {et.samples[i].t};
    detail::append(row, et.samples[i].x);
    detail::append(row, rec.samples[i].x);
    detail::append(row, direct.samples[i].x);
    row.push_back(dev);
    table.row(row);
  }
  table.comment("max_position_deviation: " + fmt(worst));
  return 0;
}

/// Invariant suite. Exit 1 when any row fails, 2 when the filter selects nothing.
inline int cmd_verify(const VerifyOptions& opts, const std::string& filter, std::ostream& out) {
  const std::vector<Check> rows = run_checks(opts, filter);
  if (rows.empty()) throw ConfigError("verify: no checks match filter '" + filter + "'");
  json id = {{"filter", filter},
             {"seed", opts.seed},
             {"sign", opts.sign == PoissonSign::classical ? "classical" : "modern"}};
  Table table(out, "verify", fnv1a_hex(id.dump()),
              {"name", "group", "criterion", "value", "tolerance", "verdict"});
  bool ok = true;
  for (const Check& c : rows) {
    ok = ok && c.passed();
    table.row({c.name, c.group, c.criterion, fmt(c.value), fmt(c.tolerance),
               c.passed() ? "pass" : "FAIL"});
  }
  return ok ? 0 : 1;
}

}  // namespace vcm::cli
