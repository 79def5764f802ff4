#pragma once

// The safety scalar field F_D(mu', sigma', kappa'), its worst-case
// mu' = 2 slice, the universal (kappa/sigma, delta/sigma) schematic, and
// grid sampling for figure data.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "escalate/pharmacology.hpp"
#include "escalate/safety.hpp"
#include "escalate/trial_paths.hpp"

namespace escalate {

enum class SafetyMetric { ExpectedFatalities, ProbAnyFatality };

inline const char* metric_name(SafetyMetric m) {
  return m == SafetyMetric::ExpectedFatalities ? "expected_fatalities" : "prob_any_fatality";
}

namespace detail {

inline double metric_value(SafetyMetric metric, const PathProbabilities& prob,
                           const DesignTables& tables, const DoseHazards& hz) {
  return metric == SafetyMetric::ExpectedFatalities ? expected_fatalities(prob, tables, hz)
                                                    : prob_any_fatality(prob, tables, hz);
}

}  // namespace detail

/// The safety field at one point of normalized parameter space.
inline double safety_field(int doses, double mu_prime, double sigma_prime, double kappa_prime,
                           SafetyMetric metric = SafetyMetric::ExpectedFatalities) {
  const NormScenario scn{doses, mu_prime, sigma_prime, kappa_prime};
  const DoseHazards hz = hazards(scn);
  const DesignTables& tables = cached_design_tables(doses);
  const PathProbabilities prob = path_probabilities(tables, hz);
  return detail::metric_value(metric, prob, tables, hz);
}

/// Worst-case slice: median MTD pinned to dose level 2.
inline double minimax_slice(int doses, double sigma_prime, double kappa_prime,
                            SafetyMetric metric = SafetyMetric::ExpectedFatalities) {
  return safety_field(doses, 2.0, sigma_prime, kappa_prime, metric);
}

/// The universal schematic: axes are the drug index kappa/sigma and the
/// escalation signal-to-noise index delta/sigma; evaluated on the minimax
/// slice. sigma' = 1/(delta/sigma) and kappa' = (kappa/sigma) * sigma'.
inline double schematic_point(double kappa_over_sigma, double delta_over_sigma, int doses = 6,
                              SafetyMetric metric = SafetyMetric::ExpectedFatalities) {
  if (!(kappa_over_sigma > 0.0) || !(delta_over_sigma > 0.0)) {
    throw std::invalid_argument("schematic_point: design indices must be > 0");
  }
  const double sigma_prime = 1.0 / delta_over_sigma;
  const double kappa_prime = kappa_over_sigma * sigma_prime;
  return minimax_slice(doses, sigma_prime, kappa_prime, metric);
}

struct AxisSpec {
  std::string name;  // mu_p | sigma_p | kappa_p | kappa_over_sigma | delta_over_sigma
  double min = 0.0;
  double max = 0.0;
  int steps = 2;
  bool log_spaced = false;
};

struct GridSpec {
  AxisSpec x_axis;
  AxisSpec y_axis;
  int doses = 6;
  double mu_prime = 2.0;     // used unless an axis supplies it
  double kappa_prime = 1.0;  // used unless an axis supplies it
  SafetyMetric metric = SafetyMetric::ExpectedFatalities;
};

struct FieldGrid {
  GridSpec spec;
  std::vector<double> xs;      // lattice coordinates, ascending
  std::vector<double> ys;
  std::vector<double> values;  // row-major, rows ascend with y
};

namespace detail {

enum class AxisRole { MuPrime, SigmaPrime, KappaPrime, KappaOverSigma, DeltaOverSigma };

inline AxisRole axis_role(const std::string& name) {
  if (name == "mu_p") return AxisRole::MuPrime;
  if (name == "sigma_p") return AxisRole::SigmaPrime;
  if (name == "kappa_p") return AxisRole::KappaPrime;
  if (name == "kappa_over_sigma") return AxisRole::KappaOverSigma;
  if (name == "delta_over_sigma") return AxisRole::DeltaOverSigma;
  throw std::invalid_argument("unknown axis name: " + name);
}

inline bool index_axis(AxisRole r) {
  return r == AxisRole::KappaOverSigma || r == AxisRole::DeltaOverSigma;
}

inline std::vector<double> axis_coords(const AxisSpec& axis) {
  if (!(axis.min < axis.max)) throw std::invalid_argument("axis min must be below max");
  if (axis.steps < 2) throw std::invalid_argument("axis needs at least 2 steps");
  if (axis.log_spaced && !(axis.min > 0.0)) {
    throw std::invalid_argument("log-spaced axis needs positive bounds");
  }
  std::vector<double> c(axis.steps);
  if (axis.log_spaced) {
    const double la = std::log(axis.min), lb = std::log(axis.max);
    for (int i = 0; i < axis.steps; ++i) {
      c[i] = std::exp(la + (lb - la) * i / (axis.steps - 1));
    }
    c.back() = axis.max;
  } else {
    for (int i = 0; i < axis.steps; ++i) {
      c[i] = axis.min + (axis.max - axis.min) * i / (axis.steps - 1);
    }
    c.back() = axis.max;
  }
  c.front() = axis.min;
  return c;
}

// Resolves one lattice point to normalized parameters.
struct PointResolver {
  AxisRole x_role, y_role;
  double fixed_mu, fixed_kappa;

  explicit PointResolver(const GridSpec& spec)
      : x_role(axis_role(spec.x_axis.name)),
        y_role(axis_role(spec.y_axis.name)),
        fixed_mu(spec.mu_prime),
        fixed_kappa(spec.kappa_prime) {
    if (x_role == y_role) throw std::invalid_argument("grid axes must differ");
    if (index_axis(x_role) != index_axis(y_role)) {
      throw std::invalid_argument(
          "grid axes must both be normalized parameters or both design indices");
    }
    if (index_axis(x_role)) fixed_mu = 2.0;  // design indices live on the minimax slice
  }

  NormScenario resolve(int doses, double x, double y) const {
    if (index_axis(x_role)) {
      const double kos = x_role == AxisRole::KappaOverSigma ? x : y;
      const double dos = x_role == AxisRole::DeltaOverSigma ? x : y;
      if (!(kos > 0.0) || !(dos > 0.0)) {
        throw std::invalid_argument("design indices must be > 0");
      }
      const double sigma_prime = 1.0 / dos;
      return {doses, 2.0, sigma_prime, kos * sigma_prime};
    }
    NormScenario scn{doses, fixed_mu, 0.0, fixed_kappa};
    assign(scn, x_role, x);
    assign(scn, y_role, y);
    if (!(scn.sigma_prime > 0.0)) {
      throw std::invalid_argument("grid requires sigma_p > 0 (fix it or give it an axis)");
    }
    return scn;
  }

  // True when pi (which ignores kappa') is unchanged along this axis:
  // kappa' and kappa/sigma move the fatal fractions but not p.
  static bool pi_invariant(AxisRole r) {
    return r == AxisRole::KappaPrime || r == AxisRole::KappaOverSigma;
  }

 private:
  static void assign(NormScenario& scn, AxisRole role, double v) {
    switch (role) {
      case AxisRole::MuPrime: scn.mu_prime = v; break;
      case AxisRole::SigmaPrime: scn.sigma_prime = v; break;
      case AxisRole::KappaPrime: scn.kappa_prime = v; break;
      default: break;
    }
  }
};

inline int resolve_thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ESCALATE_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace detail

/// Samples the metric over the lattice. Evaluation is pointwise and pure,
/// so the result is identical regardless of `threads` (0 = ESCALATE_THREADS
/// or hardware concurrency). Path probabilities are reused across lattice
/// points that share (mu', sigma'), which changes nothing in the output:
/// the per-point arithmetic is identical.
inline FieldGrid evaluate_grid(const GridSpec& spec, int threads = 0) {
  const detail::PointResolver resolver(spec);
  FieldGrid grid;
  grid.spec = spec;
  grid.xs = detail::axis_coords(spec.x_axis);
  grid.ys = detail::axis_coords(spec.y_axis);
  const int nx = static_cast<int>(grid.xs.size());
  const int ny = static_cast<int>(grid.ys.size());
  grid.values.assign(static_cast<std::size_t>(nx) * ny, 0.0);

  const DesignTables& tables = cached_design_tables(spec.doses);

  // Walk any pi-invariant axis in the inner loop so each outer slot
  // computes pi once.
  const bool x_inner = detail::PointResolver::pi_invariant(resolver.x_role) ||
                       !detail::PointResolver::pi_invariant(resolver.y_role);
  const int outer_n = x_inner ? ny : nx;
  const int inner_n = x_inner ? nx : ny;

  auto run_outer = [&](int o) {
    PathProbabilities prob;
    bool have_prob = false;
    double prob_mu = 0.0, prob_sigma = 0.0;
    for (int i = 0; i < inner_n; ++i) {
      const int ix = x_inner ? i : o;
      const int iy = x_inner ? o : i;
      const NormScenario scn = resolver.resolve(spec.doses, grid.xs[ix], grid.ys[iy]);
      const DoseHazards hz = hazards(scn);
      if (!have_prob || prob_mu != scn.mu_prime || prob_sigma != scn.sigma_prime) {
        prob = path_probabilities(tables, hz);
        prob_mu = scn.mu_prime;
        prob_sigma = scn.sigma_prime;
        have_prob = true;
      }
      grid.values[static_cast<std::size_t>(iy) * nx + ix] =
          detail::metric_value(spec.metric, prob, tables, hz);
    }
  };

  const int n_threads = std::min(detail::resolve_thread_count(threads), outer_n);
  if (n_threads <= 1) {
    for (int o = 0; o < outer_n; ++o) run_outer(o);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) {
      pool.emplace_back([&, t] {
        for (int o = t; o < outer_n; o += n_threads) run_outer(o);
      });
    }
    for (std::thread& th : pool) th.join();
  }
  return grid;
}

/// Evaluates one grid per kappa' value in a single sweep, computing path
/// probabilities once per lattice point (they do not depend on kappa').
/// The grid spec's own kappa_prime is ignored and neither axis may involve
/// kappa. Each panel equals evaluate_grid with that kappa' fixed, bit for
/// bit: the per-point arithmetic is the same.
inline std::vector<FieldGrid> evaluate_grid_stack(const GridSpec& spec,
                                                  const std::vector<double>& kappa_values,
                                                  int threads = 0) {
  const detail::PointResolver resolver(spec);
  if (detail::PointResolver::pi_invariant(resolver.x_role) ||
      detail::PointResolver::pi_invariant(resolver.y_role)) {
    throw std::invalid_argument("evaluate_grid_stack: kappa belongs to the panel list, not an axis");
  }
  if (kappa_values.empty()) {
    throw std::invalid_argument("evaluate_grid_stack: need at least one kappa value");
  }

  const std::vector<double> xs = detail::axis_coords(spec.x_axis);
  const std::vector<double> ys = detail::axis_coords(spec.y_axis);
  const int nx = static_cast<int>(xs.size());
  const int ny = static_cast<int>(ys.size());

  std::vector<FieldGrid> panels(kappa_values.size());
  for (std::size_t k = 0; k < kappa_values.size(); ++k) {
    panels[k].spec = spec;
    panels[k].spec.kappa_prime = kappa_values[k];
    panels[k].xs = xs;
    panels[k].ys = ys;
    panels[k].values.assign(static_cast<std::size_t>(nx) * ny, 0.0);
  }

  const DesignTables& tables = cached_design_tables(spec.doses);
  auto run_row = [&](int i) {
    for (int j = 0; j < nx; ++j) {
      NormScenario scn = resolver.resolve(spec.doses, xs[j], ys[i]);
      scn.kappa_prime = kappa_values[0];
      const PathProbabilities prob = path_probabilities(tables, hazards(scn));
      for (std::size_t k = 0; k < kappa_values.size(); ++k) {
        scn.kappa_prime = kappa_values[k];
        const DoseHazards hz = hazards(scn);
        panels[k].values[static_cast<std::size_t>(i) * nx + j] =
            detail::metric_value(spec.metric, prob, tables, hz);
      }
    }
  };

  const int n_threads = std::min(detail::resolve_thread_count(threads), ny);
  if (n_threads <= 1) {
    for (int i = 0; i < ny; ++i) run_row(i);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) {
      pool.emplace_back([&, t] {
        for (int i = t; i < ny; i += n_threads) run_row(i);
      });
    }
    for (std::thread& th : pool) th.join();
  }
  return panels;
}

/// Bilinear interpolation of a sampled grid at an arbitrary in-range point.
inline double interpolate_field(const FieldGrid& grid, double x, double y) {
  const auto locate = [](const std::vector<double>& c, double v) -> int {
    const auto it = std::upper_bound(c.begin(), c.end(), v);
    int hi = static_cast<int>(it - c.begin());
    hi = std::clamp(hi, 1, static_cast<int>(c.size()) - 1);
    return hi - 1;
  };
  const int j = locate(grid.xs, x);
  const int i = locate(grid.ys, y);
  const int nx = static_cast<int>(grid.xs.size());
  const double tx = (x - grid.xs[j]) / (grid.xs[j + 1] - grid.xs[j]);
  const double ty = (y - grid.ys[i]) / (grid.ys[i + 1] - grid.ys[i]);
  const double v00 = grid.values[static_cast<std::size_t>(i) * nx + j];
  const double v01 = grid.values[static_cast<std::size_t>(i) * nx + j + 1];
  const double v10 = grid.values[static_cast<std::size_t>(i + 1) * nx + j];
  const double v11 = grid.values[static_cast<std::size_t>(i + 1) * nx + j + 1];
  return (1 - ty) * ((1 - tx) * v00 + tx * v01) + ty * ((1 - tx) * v10 + tx * v11);
}

}  // namespace escalate
