#pragma once

// Parameter sweeps over the dimensionless inputs (lambda1*t, lambda1*tau,
// omega_m/lambda1, g/lambda1) with deterministic CSV output. Grid points are
// independent, so they are farmed out to a worker pool and written back in
// canonical order; the output is identical for any thread count.

#include "qrep/dynamics.hpp"
#include "qrep/metrics.hpp"

#include <atomic>
#include <cstdio>
#include <ostream>
#include <thread>

namespace qrep {

enum class Quantity { e14, p14_1, p14_2, e18, p18, tree };

inline const char* to_string(Quantity q) {
  switch (q) {
    case Quantity::e14: return "E14";
    case Quantity::p14_1: return "P14_1";
    case Quantity::p14_2: return "P14_2";
    case Quantity::e18: return "E18";
    case Quantity::p18: return "P18";
    case Quantity::tree: return "tree";
  }
  return "?";
}

inline Quantity quantity_from_string(const std::string& s) {
  if (s == "E14") return Quantity::e14;
  if (s == "P14_1") return Quantity::p14_1;
  if (s == "P14_2") return Quantity::p14_2;
  if (s == "E18") return Quantity::e18;
  if (s == "P18") return Quantity::p18;
  if (s == "tree") return Quantity::tree;
  throw std::invalid_argument("unknown quantity '" + s +
                              "' (expected E14, P14_1, P14_2, E18, P18 or tree)");
}

inline bool is_pair18_quantity(Quantity q) { return q == Quantity::e18 || q == Quantity::p18; }

/// One curve to evaluate: a quantity plus, for the target-pair quantities,
/// the initial-state case.
struct SweepSeries {
  Quantity quantity = Quantity::e14;
  std::optional<int> case_id;
};

/// A sweep: series evaluated over the cartesian grid of the four axes. Axis
/// order in the output is omega_m (outermost), then g, then lambda1*t, then
/// lambda1*tau (innermost). The tau axis applies only to the target-pair
/// quantities and then requires a single fixed lambda1*t.
struct SweepConfig {
  std::vector<SweepSeries> series;
  std::vector<double> omega_m{0.5};
  std::vector<double> g{2.0};
  std::vector<double> lambda1_t{1.0};
  std::vector<double> lambda1_tau;  // ignored for the pair-(1,4) quantities
  int threads = 1;

  void validate() const {
    if (series.empty()) throw std::invalid_argument("sweep has no series");
    if (omega_m.empty() || g.empty() || lambda1_t.empty())
      throw std::invalid_argument("every parameter axis needs at least one value");
    for (double w : omega_m)
      if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("omega_m must be finite and > 0");
    for (double v : g)
      if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("g must be finite and > 0");
    for (double v : lambda1_t)
      if (v < 0.0 || !std::isfinite(v)) throw std::invalid_argument("lambda1_t must be finite and >= 0");
    for (double v : lambda1_tau)
      if (!std::isfinite(v)) throw std::invalid_argument("lambda1_tau must be finite");
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
    for (const auto& s : series) {
      if (s.quantity == Quantity::tree)
        throw std::invalid_argument("the tree quantity is produced by the protocol command");
      if (is_pair18_quantity(s.quantity)) {
        if (!s.case_id || *s.case_id < 1 || *s.case_id > 4)
          throw std::invalid_argument("E18/P18 require a case in 1..4");
        if (lambda1_tau.empty())
          throw std::invalid_argument("E18/P18 require a lambda1_tau axis");
        if (lambda1_t.size() != 1)
          throw std::invalid_argument("a tau axis requires a single fixed lambda1_t");
        for (double tau : lambda1_tau)
          if (tau < lambda1_t.front())
            throw std::invalid_argument("lambda1_tau must be >= lambda1_t");
      }
    }
  }
};

inline constexpr const char* sweep_csv_header =
    "quantity,case_id,lambda1_t,lambda1_tau,omega_m_over_lambda1,g_over_lambda1,value";

namespace detail {

inline std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct SweepRow {
  const SweepSeries* series;
  double omega_m, g, t, tau;  // tau < 0 marks "not applicable"
  double value;
};

inline double evaluate_point(const SweepSeries& s, double omega_m, double g, double t,
                             double tau) {
  const ModelParams params = ModelParams::simplified(1.0, g, omega_m);
  const StageASolution sa = stage_a_coefficients(params, t);
  switch (s.quantity) {
    case Quantity::e14:
      return linear_entropy_two_term(sa.a[1], sa.a[9]);
    case Quantity::p14_1:
      return success_probability(sa.a[1], sa.a[9]);
    case Quantity::p14_2:
      return success_probability(sa.a[3], sa.a[10]);
    case Quantity::e18:
    case Quantity::p18: {
      const StageBSolution sb = stage_b_coefficients(sa, params, *s.case_id, tau);
      const PairStateSummary sum = summarize_pair(sb.b[1], sb.b[4]);
      return s.quantity == Quantity::e18 ? sum.e : sum.p;
    }
    case Quantity::tree:
      break;
  }
  throw std::logic_error("unreachable quantity");
}

inline void write_row(std::ostream& out, const SweepRow& row) {
  out << to_string(row.series->quantity) << ',';
  if (row.series->case_id) out << *row.series->case_id;
  out << ',' << format_value(row.t) << ',';
  if (row.tau >= 0.0) out << format_value(row.tau);
  out << ',' << format_value(row.omega_m) << ',' << format_value(row.g) << ','
      << format_value(row.value) << '\n';
}

inline void collect_rows(const SweepConfig& config, std::vector<SweepRow>& rows) {
  for (const auto& s : config.series) {
    const bool uses_tau = is_pair18_quantity(s.quantity);
    for (double w : config.omega_m)
      for (double g : config.g)
        for (double t : config.lambda1_t) {
          if (uses_tau) {
            for (double tau : config.lambda1_tau) rows.push_back({&s, w, g, t, tau, 0.0});
          } else {
            rows.push_back({&s, w, g, t, -1.0, 0.0});
          }
        }
  }
}

inline void evaluate_rows(std::vector<SweepRow>& rows, int threads) {
  auto work = [&rows](std::atomic<std::size_t>& next) {
    for (std::size_t i = next.fetch_add(1); i < rows.size(); i = next.fetch_add(1)) {
      SweepRow& r = rows[i];
      r.value = evaluate_point(*r.series, r.omega_m, r.g, r.t, r.tau);
    }
  };
  if (threads <= 1 || rows.size() < 2) {
    std::atomic<std::size_t> next{0};
    work(next);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const int n = std::min<int>(threads, static_cast<int>(rows.size()));
  pool.reserve(n);
  for (int i = 0; i < n; ++i) pool.emplace_back([&] { work(next); });
  for (auto& th : pool) th.join();
}

}  // namespace detail

/// Writes one comment line per config group, one header, and one row per grid
/// point. Output is deterministic and independent of the thread count.
inline void run_sweep_groups(const std::vector<SweepConfig>& groups, std::ostream& out,
                             const std::vector<std::string>& comments = {}) {
  for (const auto& config : groups) config.validate();
  for (const auto& line : comments) out << "# " << line << '\n';

  std::vector<detail::SweepRow> rows;
  for (const auto& config : groups) detail::collect_rows(config, rows);
  const int threads = groups.empty() ? 1 : groups.front().threads;
  detail::evaluate_rows(rows, threads);

  out << sweep_csv_header << '\n';
  for (const auto& row : rows) detail::write_row(out, row);
}

inline void run_sweep(const SweepConfig& config, std::ostream& out,
                      const std::vector<std::string>& comments = {}) {
  run_sweep_groups({config}, out, comments);
}

// ---------------------------------------------------------------------------
// figure presets
// ---------------------------------------------------------------------------

/// Preset parameter studies. Each returns the sweep groups reproducing one
/// figure's curves; `points` controls the resolution of the swept time axis.
inline std::vector<SweepConfig> figure_preset(const std::string& name, int points = 400) {
  if (points < 1) throw std::invalid_argument("points must be >= 1");
  auto linspace = [points](double lo, double hi) {
    std::vector<double> v(points);
    for (int i = 0; i < points; ++i)
      v[i] = points == 1 ? lo : lo + (hi - lo) * i / (points - 1);
    return v;
  };

  SweepConfig base;
  if (name == "fig2" || name == "fig3") {
    base.series = {{Quantity::e14, {}}, {Quantity::p14_1, {}}};
    base.lambda1_t = linspace(0.0, 10.0);
    if (name == "fig2") {
      base.omega_m = {0.5, 1.0, 1.5};
      base.g = {2.0};
    } else {
      base.omega_m = {0.5};
      base.g = {2.0, 2.5, 3.0};
    }
    return {base};
  }
  if (name == "fig4") {
    base.series = {{Quantity::p14_2, {}}};
    base.lambda1_t = linspace(0.0, 10.0);
    base.omega_m = {0.5, 1.0, 1.5};
    base.g = {2.0};
    SweepConfig extra = base;
    extra.omega_m = {0.5};
    extra.g = {2.5, 3.0};
    return {base, extra};
  }
  if (name == "fig5" || name == "fig6") {
    base.series = {{Quantity::e18, 1}, {Quantity::p18, 1}, {Quantity::e18, 3},
                   {Quantity::p18, 3}, {Quantity::e18, 4}, {Quantity::p18, 4}};
    base.lambda1_t = {1.0};
    base.lambda1_tau = linspace(1.0, 11.0);
    if (name == "fig5") {
      base.omega_m = {0.5, 1.0, 1.5};
      base.g = {2.0};
    } else {
      base.omega_m = {0.5};
      base.g = {0.5, 0.7, 0.9};
    }
    return {base};
  }
  throw std::invalid_argument("unknown figure preset '" + name + "'");
}

}  // namespace qrep
