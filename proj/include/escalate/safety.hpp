#pragma once

// Exact evaluation of path probabilities and safety summaries. The primary
// route is the vectorizable log-space form over the stacked design tables;
// the direct per-event product form is kept alongside as a cross-check.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "escalate/pharmacology.hpp"
#include "escalate/trial_paths.hpp"

namespace escalate {

/// One probability per enumerated path, in table row order.
struct PathProbabilities {
  std::vector<double> pi;
};

struct SafetySummary {
  double expected_fatalities = 0.0;
  double prob_any_fatality = 0.0;
  double expected_enrollment = 0.0;
  // Index 0..D-1: DeclareMtd at that level (0 = no tolerable dose);
  // index D: MtdNotFound.
  std::vector<double> mtd_distribution;
};

namespace detail {

inline void require_same_doses(const DesignTables& tables, const DoseHazards& hz,
                               const char* where) {
  if (tables.doses != hz.doses()) {
    throw std::invalid_argument(std::string(where) + ": tables built for " +
                                std::to_string(tables.doses) + " doses, hazards carry " +
                                std::to_string(hz.doses()));
  }
}

// log p / log q stacked as the column vector the exponent matrix multiplies.
struct LogHazards {
  std::vector<double> v;  // [log p_1..log p_D, log q_1..log q_D]
  bool degenerate = false;  // any p in {0,1}: masked accumulation required

  explicit LogHazards(const DoseHazards& hz) {
    const int doses = hz.doses();
    v.resize(2 * static_cast<std::size_t>(doses));
    for (int d = 0; d < doses; ++d) {
      v[d] = std::log(hz.dlt_prob[d]);
      v[doses + d] = std::log(hz.dlt_compl[d]);
      if (hz.dlt_prob[d] == 0.0 || hz.dlt_compl[d] == 0.0) degenerate = true;
    }
  }
};

// log pi_j = b_j + U_j . [log p; log q]. Zero exponents are skipped when a
// hazard is degenerate, implementing the 0 * log 0 = 0 convention exactly.
inline double log_path_probability(const DesignTables& tables, std::size_t j,
                                   const LogHazards& lh) {
  const std::uint8_t* row = tables.exponents_row(j);
  const std::size_t n = lh.v.size();
  double s = tables.log_binom[j];
  if (!lh.degenerate) {
    for (std::size_t k = 0; k < n; ++k) s += row[k] * lh.v[k];
  } else {
    for (std::size_t k = 0; k < n; ++k) {
      if (row[k] != 0) s += row[k] * lh.v[k];
    }
  }
  return s;
}

}  // namespace detail

/// Path probabilities via the log-space matrix form (the primary route).
inline PathProbabilities path_probabilities(const DesignTables& tables, const DoseHazards& hz) {
  detail::require_same_doses(tables, hz, "path_probabilities");
  const detail::LogHazards lh(hz);
  PathProbabilities out;
  out.pi.resize(tables.paths);
  for (std::size_t j = 0; j < tables.paths; ++j) {
    out.pi[j] = std::exp(detail::log_path_probability(tables, j, lh));
  }
  return out;
}

/// Path probabilities as the direct per-event product of binomial terms.
/// Cross-check oracle for the log-space route; exact for degenerate p.
inline PathProbabilities path_probabilities_direct(const std::vector<Path>& paths,
                                                   const DoseHazards& hz) {
  static const double kBinom3[4] = {1.0, 3.0, 3.0, 1.0};
  PathProbabilities out;
  out.pi.reserve(paths.size());
  for (const Path& path : paths) {
    double prob = 1.0;
    for (const CohortEvent& ev : path.events) {
      const double p = hz.dlt_prob[ev.dose - 1];
      const double q = hz.dlt_compl[ev.dose - 1];
      double term = kBinom3[ev.tox];
      for (int i = 0; i < ev.tox; ++i) term *= p;
      for (int i = ev.tox; i < kCohortSize; ++i) term *= q;
      prob *= term;
    }
    out.pi.push_back(prob);
  }
  return out;
}

/// Expected number of fatal toxicities, pi^T Y f.
inline double expected_fatalities(const PathProbabilities& prob, const DesignTables& tables,
                                  const DoseHazards& hz) {
  detail::require_same_doses(tables, hz, "expected_fatalities");
  if (prob.pi.size() != tables.paths) {
    throw std::invalid_argument("expected_fatalities: probability vector length mismatch");
  }
  const int doses = tables.doses;
  // Accumulate expected DLTs per dose first; the metric is then a single
  // dot with the fatal fractions. Kept in this exact order so fused grid
  // evaluation reproduces it bit for bit.
  std::vector<double> dlt_mean(doses, 0.0);
  for (std::size_t j = 0; j < tables.paths; ++j) {
    const std::uint8_t* y = tables.dlt_row(j);
    const double pj = prob.pi[j];
    for (int d = 0; d < doses; ++d) dlt_mean[d] += pj * y[d];
  }
  double total = 0.0;
  for (int d = 0; d < doses; ++d) total += dlt_mean[d] * hz.fatal_frac[d];
  return total;
}

/// Probability that at least one DLT in the trial is fatal, under the
/// threshold model where each DLT at dose d is fatal independently with
/// probability f_d:  1 - sum_j pi_j prod_d (1 - f_d)^{Y_jd}.
inline double prob_any_fatality(const PathProbabilities& prob, const DesignTables& tables,
                                const DoseHazards& hz) {
  detail::require_same_doses(tables, hz, "prob_any_fatality");
  if (prob.pi.size() != tables.paths) {
    throw std::invalid_argument("prob_any_fatality: probability vector length mismatch");
  }
  const int doses = tables.doses;
  // Accumulate sum_j pi_j (1 - prod_d (1-f_d)^{Y_jd}) with the per-path
  // complement taken through expm1 of summed log1p terms: sign-safe, exact
  // at f = 0 and f = 1, and keeps relative accuracy when the result is
  // tiny. Zero exponents are masked so f_d = 1 at an unvisited dose stays
  // harmless.
  std::vector<double> log_keep(doses);
  for (int d = 0; d < doses; ++d) log_keep[d] = std::log1p(-hz.fatal_frac[d]);
  double total = 0.0;
  for (std::size_t j = 0; j < tables.paths; ++j) {
    const std::uint8_t* y = tables.dlt_row(j);
    double s = 0.0;
    for (int d = 0; d < doses; ++d) {
      if (y[d]) s += y[d] * log_keep[d];
    }
    total += prob.pi[j] * -std::expm1(s);
  }
  return total;
}

/// All exact summaries in one pass: expected fatalities, P(>=1 fatality),
/// expected enrollment, and the MTD-declaration distribution.
inline SafetySummary summarize(const DesignTables& tables, const DoseHazards& hz) {
  detail::require_same_doses(tables, hz, "summarize");
  const PathProbabilities prob = path_probabilities(tables, hz);
  const int doses = tables.doses;

  SafetySummary s;
  s.expected_fatalities = expected_fatalities(prob, tables, hz);
  s.prob_any_fatality = prob_any_fatality(prob, tables, hz);
  s.mtd_distribution.assign(static_cast<std::size_t>(doses) + 1, 0.0);
  double enroll = 0.0;
  for (std::size_t j = 0; j < tables.paths; ++j) {
    const std::uint8_t* n = tables.cohort_row(j);
    int cohorts = 0;
    for (int d = 0; d < doses; ++d) cohorts += n[d];
    enroll += prob.pi[j] * (kCohortSize * cohorts);
    const FinalOutcome& out = tables.outcomes[j];
    const std::size_t bucket =
        out.kind == FinalOutcome::Kind::MtdNotFound ? doses : static_cast<std::size_t>(out.level);
    s.mtd_distribution[bucket] += prob.pi[j];
  }
  s.expected_enrollment = enroll;
  return s;
}

}  // namespace escalate
