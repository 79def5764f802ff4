#pragma once

// Monte Carlo simulator of the 3+3 trial. Verification oracle only: the
// exact engine never calls into this; tests use it to cross-validate the
// exact results and to confirm the enumerator is exhaustive.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "escalate/pharmacology.hpp"
#include "escalate/trial_paths.hpp"

namespace escalate {

// splitmix64: counter-based, O(1) per-trial substreams, identical output
// on every platform and regardless of thread count.
struct SplitMix64 {
  std::uint64_t state;

  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Independent substream for one trial of one run. The start state is a
/// mixed function of (seed, trial), not an arithmetic progression: SplitMix
/// itself steps by the golden gamma, and spacing trial origins by that same
/// gamma would make trial i's k-th draw equal trial i+k's first draw.
inline SplitMix64 trial_stream(std::uint64_t seed, std::uint64_t trial_index) {
  return SplitMix64{detail::mix64(detail::mix64(seed + 0x632BE59BD9B4E019ULL) +
                                  detail::mix64(trial_index + 0x9E3779B97F4A7C15ULL))};
}

struct TrialDraw {
  Path path;
  int fatalities = 0;
  int enrolled = 0;
};

namespace detail {

// Walks one trial cohort by cohort. Each cohort draws 3 Bernoulli DLT
// coins; every DLT immediately draws its own fatality coin, so the stream
// position depends only on the event history.
template <typename EventSink>
inline FinalOutcome run_trial(const DoseHazards& hz, SplitMix64& rng, EventSink&& sink,
                              int& fatalities, int& enrolled) {
  const int top = hz.doses();

  auto enroll_cohort = [&](int dose, CohortKind kind) -> int {
    const double p = hz.dlt_prob[dose - 1];
    const double f = hz.fatal_frac[dose - 1];
    int tox = 0;
    for (int patient = 0; patient < kCohortSize; ++patient) {
      if (rng.uniform01() < p) {
        ++tox;
        if (rng.uniform01() < f) ++fatalities;
      }
    }
    enrolled += kCohortSize;
    sink(CohortEvent{std::int8_t(dose), kind, std::int8_t(tox)});
    return tox;
  };

  int dose = 0, lo = 0;
  enum class Mode { Escalate, Deescalate } mode = Mode::Escalate;
  while (true) {
    if (mode == Mode::Escalate) {
      if (dose == top) {
        const int tox = enroll_cohort(top, CohortKind::TopSecondEnroll);
        if (tox <= 1) return {FinalOutcome::Kind::MtdNotFound, std::int8_t(top)};
        mode = Mode::Deescalate;
        continue;
      }
      const int next = dose + 1;
      const int tox = enroll_cohort(next, CohortKind::EscalateEnroll);
      if (tox == 0) {
        dose = next;
      } else if (tox == 1) {
        const int confirm = enroll_cohort(next, CohortKind::ConfirmEnroll);
        if (next == top) {
          if (confirm == 0) return {FinalOutcome::Kind::MtdNotFound, std::int8_t(top)};
          dose = next;
          mode = Mode::Deescalate;
        } else if (confirm == 0) {
          lo = next;  // 1/6 here: valid fallback MTD
          dose = next;
        } else {
          dose = next;
          mode = Mode::Deescalate;
        }
      } else {
        dose = next;
        mode = Mode::Deescalate;
      }
    } else {
      const int below = dose - 1;
      if (below == lo) return {FinalOutcome::Kind::DeclareMtd, std::int8_t(lo)};
      const int tox = enroll_cohort(below, CohortKind::DeescalateEnroll);
      if (tox <= 1) return {FinalOutcome::Kind::DeclareMtd, std::int8_t(below)};
      dose = below;
    }
  }
}

}  // namespace detail

/// Simulates one trial and keeps its full trajectory.
inline TrialDraw simulate_trial(const DoseHazards& hz, std::uint64_t seed,
                                std::uint64_t trial_index) {
  TrialDraw draw;
  SplitMix64 rng = trial_stream(seed, trial_index);
  draw.path.outcome = detail::run_trial(
      hz, rng, [&](const CohortEvent& ev) { draw.path.events.push_back(ev); }, draw.fatalities,
      draw.enrolled);
  return draw;
}

struct SimResult {
  std::uint64_t n_trials = 0;
  double mean_fatalities = 0.0;
  double se_fatalities = 0.0;
  double frac_any_fatality = 0.0;
  double mean_enrollment = 0.0;
  std::vector<double> outcome_freqs;  // same layout as SafetySummary::mtd_distribution
  std::uint64_t seed = 0;
  static constexpr const char* kGenerator = "splitmix64";
};

/// Runs `n_trials` independent trials; bit-identical for a fixed seed.
inline SimResult simulate_trials(const DoseHazards& hz, std::uint64_t n_trials,
                                 std::uint64_t seed) {
  if (n_trials < 1) throw std::invalid_argument("simulate_trials: need at least one trial");
  const int doses = hz.doses();
  SimResult r;
  r.n_trials = n_trials;
  r.seed = seed;
  r.outcome_freqs.assign(static_cast<std::size_t>(doses) + 1, 0.0);

  double sum_fatal = 0.0, sum_fatal_sq = 0.0;
  std::uint64_t any_fatal = 0, total_enrolled = 0;
  for (std::uint64_t i = 0; i < n_trials; ++i) {
    SplitMix64 rng = trial_stream(seed, i);
    int fatalities = 0, enrolled = 0;
    const FinalOutcome out =
        detail::run_trial(hz, rng, [](const CohortEvent&) {}, fatalities, enrolled);
    sum_fatal += fatalities;
    sum_fatal_sq += static_cast<double>(fatalities) * fatalities;
    if (fatalities > 0) ++any_fatal;
    total_enrolled += enrolled;
    const std::size_t bucket = out.kind == FinalOutcome::Kind::MtdNotFound
                                   ? static_cast<std::size_t>(doses)
                                   : static_cast<std::size_t>(out.level);
    r.outcome_freqs[bucket] += 1.0;
  }

  const double n = static_cast<double>(n_trials);
  r.mean_fatalities = sum_fatal / n;
  const double var = (sum_fatal_sq - sum_fatal * sum_fatal / n) / (n > 1 ? n - 1 : 1);
  r.se_fatalities = std::sqrt(var > 0.0 ? var / n : 0.0);
  r.frac_any_fatality = static_cast<double>(any_fatal) / n;
  r.mean_enrollment = static_cast<double>(total_enrolled) / n;
  for (double& freq : r.outcome_freqs) freq /= n;
  return r;
}

}  // namespace escalate
