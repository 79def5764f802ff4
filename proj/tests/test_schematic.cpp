#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cmath>
#include <random>

#include "escalate/schematic.hpp"

using namespace escalate;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("safety field vanishes when the fatal threshold is far above all doses") {
  CHECK(safety_field(4, 2.0, 0.5, 6.0) < 1e-6);
  CHECK(safety_field(6, 2.0, 0.5, 8.0) < 1e-6);
}

TEST_CASE("safety field is invariant under raw-parameter rescaling") {
  const double direct = safety_field(4, 2.0, 1.0, 1.0);
  const NormScenario n = normalize({4, 2.0, 4.0, 2.0, 2.0, 2.0});
  const double via_raw = safety_field(4, n.mu_prime, n.sigma_prime, n.kappa_prime);
  CHECK_THAT(via_raw, WithinRel(direct, 1e-12));
}

TEST_CASE("four- and six-dose fields nearly coincide on the minimax slice") {
  const double f4 = safety_field(4, 2.0, 0.5, 1.0);
  const double f6 = safety_field(6, 2.0, 0.5, 1.0);
  CHECK(std::abs(f4 - f6) / std::max(f4, f6) < 0.01);
}

TEST_CASE("minimax slice is the field pinned at mu' = 2") {
  CHECK(minimax_slice(5, 0.7, 0.9) == safety_field(5, 2.0, 0.7, 0.9));
  CHECK(minimax_slice(5, 0.7, 0.9, SafetyMetric::ProbAnyFatality) ==
        safety_field(5, 2.0, 0.7, 0.9, SafetyMetric::ProbAnyFatality));
}

TEST_CASE("slice values collapse for D >= 3 but not for D = 2") {
  const double at[] = {0.0,
                       0.0,
                       minimax_slice(2, 0.5, 1.0),
                       minimax_slice(3, 0.5, 1.0),
                       minimax_slice(4, 0.5, 1.0),
                       minimax_slice(5, 0.5, 1.0),
                       minimax_slice(6, 0.5, 1.0),
                       minimax_slice(7, 0.5, 1.0)};
  double lo = at[3], hi = at[3];
  for (int d = 3; d <= 7; ++d) {
    lo = std::min(lo, at[d]);
    hi = std::max(hi, at[d]);
  }
  const double spread = (hi - lo) / hi;
  CHECK(spread < 1e-3);
  // Dose count 2 misses upside risk entirely at this point.
  CHECK(std::abs(at[2] - at[3]) / std::max(at[2], at[3]) > 10.0 * spread);
}

TEST_CASE("expected fatalities never increase with the therapeutic index") {
  std::mt19937 rng(2026);
  std::uniform_real_distribution<double> mu(0.5, 6.0), sig(0.2, 2.0), kap(0.0, 2.0);
  for (int rep = 0; rep < 40; ++rep) {
    const double m = mu(rng), s = sig(rng);
    double k1 = kap(rng), k2 = kap(rng);
    const auto [ka, kb] = std::minmax(k1, k2);
    const double fa = safety_field(4, m, s, ka);
    const double fb = safety_field(4, m, s, kb);
    CHECK(fb <= fa * (1.0 + 1e-12) + 1e-300);
  }
}

TEST_CASE("schematic axes map to normalized parameters and back") {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> pos(0.25, 4.0);
  for (int rep = 0; rep < 100; ++rep) {
    const double kos = pos(rng), dos = pos(rng);
    const double sigma_p = 1.0 / dos;
    const double kappa_p = kos * sigma_p;
    CHECK_THAT(kappa_p / sigma_p, WithinRel(kos, 1e-14));
    CHECK_THAT(1.0 / sigma_p, WithinRel(dos, 1e-14));
    CHECK(schematic_point(kos, dos, 4) == minimax_slice(4, sigma_p, kappa_p));
  }
}

TEST_CASE("hazardous corner dominates the well-separated regime") {
  // At equal escalation signal-to-noise, a drug with kappa/sigma < 1 is
  // materially more dangerous than one with kappa/sigma >= 2.
  for (const double dos : {0.5, 1.0, 2.0}) {
    CHECK(schematic_point(0.5, dos, 6) > schematic_point(2.0, dos, 6));
  }
}

TEST_CASE("sigma below delta below kappa keeps the schematic under 0.1") {
  // sigma' = 0.9 < 1 < kappa' = 1.1 translated to the design indices.
  const double kos = 1.1 / 0.9, dos = 1.0 / 0.9;
  for (const int d : {4, 5, 6}) {
    CHECK(schematic_point(kos, dos, d) < 0.1);
  }
}

TEST_CASE("schematic rejects nonpositive indices") {
  CHECK_THROWS_AS(schematic_point(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(schematic_point(1.0, -2.0), std::invalid_argument);
}

TEST_CASE("grid evaluation matches pointwise field calls") {
  GridSpec spec;
  spec.x_axis = {"mu_p", 1.0, 3.0, 3};
  spec.y_axis = {"sigma_p", 0.4, 1.2, 2};
  spec.doses = 3;
  spec.kappa_prime = 0.8;
  const FieldGrid grid = evaluate_grid(spec);
  REQUIRE(grid.xs.size() == 3);
  REQUIRE(grid.ys.size() == 2);
  for (std::size_t i = 0; i < grid.ys.size(); ++i) {
    for (std::size_t j = 0; j < grid.xs.size(); ++j) {
      CHECK(grid.values[i * 3 + j] == safety_field(3, grid.xs[j], grid.ys[i], 0.8));
    }
  }
}

TEST_CASE("grid values are identical when axes swap roles") {
  GridSpec a;
  a.x_axis = {"sigma_p", 0.3, 1.5, 5};
  a.y_axis = {"kappa_p", 0.4, 1.4, 4};
  a.doses = 3;
  a.mu_prime = 2.0;
  GridSpec b;
  b.x_axis = a.y_axis;
  b.y_axis = a.x_axis;
  b.doses = 3;
  b.mu_prime = 2.0;
  const FieldGrid ga = evaluate_grid(a);
  const FieldGrid gb = evaluate_grid(b);
  for (std::size_t i = 0; i < ga.ys.size(); ++i) {
    for (std::size_t j = 0; j < ga.xs.size(); ++j) {
      CHECK(ga.values[i * ga.xs.size() + j] == gb.values[j * gb.xs.size() + i]);
    }
  }
}

TEST_CASE("grid evaluation is independent of thread count") {
  GridSpec spec;
  spec.x_axis = {"kappa_over_sigma", 0.25, 4.0, 9};
  spec.y_axis = {"delta_over_sigma", 0.25, 4.0, 7};
  spec.doses = 3;
  const FieldGrid one = evaluate_grid(spec, 1);
  const FieldGrid many = evaluate_grid(spec, 5);
  CHECK(one.values == many.values);
}

TEST_CASE("design-index grids evaluate on the minimax slice") {
  GridSpec spec;
  spec.x_axis = {"kappa_over_sigma", 0.5, 2.0, 4};
  spec.y_axis = {"delta_over_sigma", 0.5, 2.0, 3};
  spec.doses = 4;
  const FieldGrid grid = evaluate_grid(spec);
  for (std::size_t i = 0; i < grid.ys.size(); ++i) {
    for (std::size_t j = 0; j < grid.xs.size(); ++j) {
      CHECK(grid.values[i * grid.xs.size() + j] ==
            schematic_point(grid.xs[j], grid.ys[i], 4));
    }
  }
}

TEST_CASE("panel stacks equal per-panel grids bit for bit") {
  const std::vector<double> kappas = {0.5, 0.9, 1.2};
  for (const SafetyMetric metric :
       {SafetyMetric::ExpectedFatalities, SafetyMetric::ProbAnyFatality}) {
    GridSpec spec;
    spec.x_axis = {"mu_p", 1.0, 4.0, 7};
    spec.y_axis = {"sigma_p", 0.3, 1.5, 5};
    spec.doses = 4;
    spec.metric = metric;
    const std::vector<FieldGrid> panels = evaluate_grid_stack(spec, kappas);
    REQUIRE(panels.size() == kappas.size());
    for (std::size_t k = 0; k < kappas.size(); ++k) {
      GridSpec one = spec;
      one.kappa_prime = kappas[k];
      CHECK(panels[k].values == evaluate_grid(one).values);
    }
  }
  GridSpec bad;
  bad.x_axis = {"sigma_p", 0.3, 1.5, 5};
  bad.y_axis = {"kappa_p", 0.4, 1.4, 5};
  bad.doses = 3;
  CHECK_THROWS_AS(evaluate_grid_stack(bad, {0.5}), std::invalid_argument);
}

TEST_CASE("one contours46 panel set regenerates at 101x101") {
  const auto t0 = std::chrono::steady_clock::now();
  GridSpec spec;
  spec.x_axis = {"mu_p", 1.0, 4.0, 101};
  spec.y_axis = {"sigma_p", 0.2, 2.0, 101};
  spec.doses = 4;
  const std::vector<FieldGrid> panels =
      evaluate_grid_stack(spec, {0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(secs < 60.0);
  for (const FieldGrid& panel : panels) {
    REQUIRE(panel.values.size() == 101u * 101u);
    for (const double v : panel.values) {
      CHECK(v >= 0.0);
      CHECK(std::isfinite(v));
    }
  }
}

TEST_CASE("log-spaced axes honor their endpoints") {
  GridSpec spec;
  spec.x_axis = {"kappa_over_sigma", 0.25, 4.0, 5, true};
  spec.y_axis = {"delta_over_sigma", 0.25, 4.0, 3, true};
  spec.doses = 2;
  const FieldGrid grid = evaluate_grid(spec);
  CHECK(grid.xs.front() == 0.25);
  CHECK(grid.xs.back() == 4.0);
  CHECK_THAT(grid.xs[2], WithinRel(1.0, 1e-12));  // geometric midpoint
}

TEST_CASE("invalid grid specs are rejected") {
  GridSpec spec;
  spec.x_axis = {"mu_p", 1.0, 3.0, 3};
  spec.y_axis = {"sigma_p", 0.4, 1.2, 2};
  spec.doses = 3;

  GridSpec bad_name = spec;
  bad_name.x_axis.name = "mu";
  CHECK_THROWS_AS(evaluate_grid(bad_name), std::invalid_argument);

  GridSpec mixed = spec;
  mixed.y_axis.name = "delta_over_sigma";
  CHECK_THROWS_AS(evaluate_grid(mixed), std::invalid_argument);

  GridSpec duplicate = spec;
  duplicate.y_axis.name = "mu_p";
  CHECK_THROWS_AS(evaluate_grid(duplicate), std::invalid_argument);

  GridSpec reversed = spec;
  reversed.x_axis.min = 5.0;
  CHECK_THROWS_AS(evaluate_grid(reversed), std::invalid_argument);

  GridSpec single = spec;
  single.y_axis.steps = 1;
  CHECK_THROWS_AS(evaluate_grid(single), std::invalid_argument);
}

TEST_CASE("bilinear interpolation reproduces lattice values and linear fields") {
  GridSpec spec;
  spec.x_axis = {"mu_p", 1.0, 3.0, 5};
  spec.y_axis = {"sigma_p", 0.4, 1.2, 4};
  spec.doses = 2;
  const FieldGrid grid = evaluate_grid(spec);
  for (std::size_t i = 0; i < grid.ys.size(); ++i) {
    for (std::size_t j = 0; j < grid.xs.size(); ++j) {
      CHECK_THAT(interpolate_field(grid, grid.xs[j], grid.ys[i]),
                 WithinRel(grid.values[i * grid.xs.size() + j], 1e-12));
    }
  }
}
