#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <unordered_set>

#include "escalate/safety.hpp"
#include "escalate/simulate.hpp"

using namespace escalate;
using Catch::Matchers::WithinAbs;

namespace {

DoseHazards manual_hazards(std::vector<double> p, std::vector<double> f) {
  DoseHazards hz;
  hz.dlt_prob = std::move(p);
  hz.fatal_frac = std::move(f);
  hz.dlt_compl.resize(hz.dlt_prob.size());
  for (std::size_t d = 0; d < hz.dlt_prob.size(); ++d) hz.dlt_compl[d] = 1.0 - hz.dlt_prob[d];
  return hz;
}

std::string canonical(const Path& p) {
  std::string s;
  for (const CohortEvent& ev : p.events) {
    s.push_back(static_cast<char>(ev.dose));
    s.push_back(static_cast<char>(ev.kind));
    s.push_back(static_cast<char>(ev.tox));
  }
  s.push_back('|');
  s.push_back(static_cast<char>(p.outcome.kind));
  s.push_back(static_cast<char>(p.outcome.level));
  return s;
}

}  // namespace

TEST_CASE("nontoxic scenario always ends with MTD not found and no fatalities") {
  const DoseHazards hz = manual_hazards({0.0, 0.0, 0.0}, {0.0, 0.0, 0.0});
  const SimResult r = simulate_trials(hz, 500, 42);
  CHECK(r.mean_fatalities == 0.0);
  CHECK(r.se_fatalities == 0.0);
  CHECK(r.frac_any_fatality == 0.0);
  CHECK(r.mean_enrollment == 12.0);  // 3 cohorts up plus the top-dose second cohort
  CHECK(r.outcome_freqs.back() == 1.0);
}

TEST_CASE("certainly fatal dose 1 produces exactly three fatalities per trial") {
  const DoseHazards hz = manual_hazards({1.0, 1.0}, {1.0, 1.0});
  const SimResult r = simulate_trials(hz, 200, 7);
  CHECK(r.mean_fatalities == 3.0);
  CHECK(r.se_fatalities == 0.0);
  CHECK(r.frac_any_fatality == 1.0);
  CHECK(r.mean_enrollment == 3.0);
  CHECK(r.outcome_freqs[0] == 1.0);
}

TEST_CASE("fixed seed reproduces results bit for bit") {
  const DoseHazards hz = hazards({5, 2.5, 0.8, 0.6});
  const SimResult a = simulate_trials(hz, 2000, 20260810);
  const SimResult b = simulate_trials(hz, 2000, 20260810);
  CHECK(a.mean_fatalities == b.mean_fatalities);
  CHECK(a.se_fatalities == b.se_fatalities);
  CHECK(a.frac_any_fatality == b.frac_any_fatality);
  CHECK(a.mean_enrollment == b.mean_enrollment);
  CHECK(a.outcome_freqs == b.outcome_freqs);

  const SimResult c = simulate_trials(hz, 2000, 1);
  CHECK(a.mean_fatalities != c.mean_fatalities);  // different stream
}

TEST_CASE("per-trial substreams do not depend on how many trials ran before") {
  const DoseHazards hz = hazards({4, 2.0, 1.0, 0.5});
  const TrialDraw alone = simulate_trial(hz, 99, 1234);
  const TrialDraw again = simulate_trial(hz, 99, 1234);
  CHECK(alone.path == again.path);
  CHECK(alone.fatalities == again.fatalities);
}

TEST_CASE("every simulated trajectory is an enumerated path") {
  const int doses = 4;
  std::unordered_set<std::string> known;
  for (const Path& p : enumerate_paths(doses)) known.insert(canonical(p));

  std::mt19937 meta(5);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int scenario = 0; scenario < 5; ++scenario) {
    std::vector<double> p(doses), f(doses);
    for (double& v : p) v = unif(meta);
    for (double& v : f) v = unif(meta);
    std::sort(p.begin(), p.end());
    std::sort(f.begin(), f.end());
    const DoseHazards hz = manual_hazards(p, f);
    for (std::uint64_t trial = 0; trial < 2000; ++trial) {
      const TrialDraw draw = simulate_trial(hz, 1000 + scenario, trial);
      CHECK(known.count(canonical(draw.path)) == 1);
    }
  }
}

TEST_CASE("all four summary quantities approach their exact values") {
  const DoseHazards hz = hazards({4, 2.0, 0.8, 0.7});
  const DesignTables& t = cached_design_tables(4);
  const SafetySummary exact = summarize(t, hz);

  const std::uint64_t n = 200000;
  const SimResult sim = simulate_trials(hz, n, 31415);
  CHECK(sim.se_fatalities > 0.0);
  const double freq_mass =
      std::accumulate(sim.outcome_freqs.begin(), sim.outcome_freqs.end(), 0.0);
  CHECK_THAT(freq_mass, Catch::Matchers::WithinAbs(1.0, 1e-12));

  // Means within 5 standard errors.
  CHECK(std::abs(sim.mean_fatalities - exact.expected_fatalities) <= 5.0 * sim.se_fatalities);
  const double se_any = std::sqrt(exact.prob_any_fatality * (1 - exact.prob_any_fatality) /
                                  static_cast<double>(n));
  CHECK(std::abs(sim.frac_any_fatality - exact.prob_any_fatality) <= 5.0 * se_any);

  // Enrollment SE from the exact second moment of 3 * (cohort count).
  const PathProbabilities prob = path_probabilities(t, hz);
  double second_moment = 0.0;
  for (std::size_t j = 0; j < t.paths; ++j) {
    const std::uint8_t* c = t.cohort_row(j);
    const double patients = 3.0 * (c[0] + c[1] + c[2] + c[3]);
    second_moment += prob.pi[j] * patients * patients;
  }
  const double enroll_var = second_moment - exact.expected_enrollment * exact.expected_enrollment;
  const double se_enroll = std::sqrt(enroll_var / static_cast<double>(n));
  CHECK(std::abs(sim.mean_enrollment - exact.expected_enrollment) <= 5.0 * se_enroll);

  for (std::size_t k = 0; k < exact.mtd_distribution.size(); ++k) {
    const double se =
        std::sqrt(exact.mtd_distribution[k] * (1 - exact.mtd_distribution[k]) /
                  static_cast<double>(n)) +
        1e-12;
    CHECK(std::abs(sim.outcome_freqs[k] - exact.mtd_distribution[k]) <= 5.0 * se);
  }
}
