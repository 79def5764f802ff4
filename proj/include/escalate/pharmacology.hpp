#pragma once

// Log-normal MTD threshold model on a geometric dose grid: maps pharmacology
// scenarios to per-dose DLT probabilities and fatal fractions, in raw
// (mu, sigma, kappa, delta) and normalized (mu', sigma', kappa') form.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace escalate {

/// Scenario in raw units. The dose grid is geometric with log-spacing
/// `delta`; `log_x1` is log of dose 1 and defaults (NaN) to `delta`,
/// i.e. log X_d = d * delta.
struct RawScenario {
  int doses = 0;
  double delta = 0.0;  // log-dose spacing, > 0
  double mu = 0.0;     // mean of log MTD_i
  double sigma = 0.0;  // SD of log MTD_i, > 0
  double kappa = 0.0;  // log therapeutic index, >= 0
  double log_x1 = std::numeric_limits<double>::quiet_NaN();
};

/// Scenario measured in dose-index units (divided by delta). The safety
/// function depends on the raw parameters only through these.
struct NormScenario {
  int doses = 0;
  double mu_prime = 0.0;
  double sigma_prime = 0.0;  // > 0
  double kappa_prime = 0.0;  // >= 0
};

/// Per-dose DLT probability p, its complement q, and the fraction f of
/// DLTs at each dose that are fatal.
struct DoseHazards {
  std::vector<double> dlt_prob;    // p_d, nondecreasing
  std::vector<double> dlt_compl;   // q_d = 1 - p_d
  std::vector<double> fatal_frac;  // f_d in [0,1], nondecreasing

  int doses() const { return static_cast<int>(dlt_prob.size()); }
};

/// Standard normal CDF, absolute error ~1e-15; saturates to 0/1 in the
/// extreme tails.
inline double std_normal_cdf(double x) {
  return 0.5 * std::erfc(-x * M_SQRT1_2);
}

namespace detail {

// log erfc(z) for large positive z, where erfc itself underflows.
// Asymptotic expansion erfc(z) ~ exp(-z^2) / (z sqrt(pi)) * S(z) with
// S(z) = 1 - 1/(2z^2) + 3/(4z^4) - ...; at z >= 20 five terms are
// already below double precision.
inline double log_erfc_asymptotic(double z) {
  const double inv2z2 = 1.0 / (2.0 * z * z);
  double series = 0.0, term = 1.0;
  for (int k = 1; k <= 6; ++k) {
    term *= -(2 * k - 1) * inv2z2;
    series += term;
  }
  return -z * z - std::log(z) - 0.5 * std::log(M_PI) + std::log1p(series);
}

}  // namespace detail

/// log Phi(x), accurate into the deep lower tail (|x| up to a few hundred)
/// where Phi itself underflows.
inline double log_std_normal_cdf(double x) {
  if (x >= -1.0) return std::log(std_normal_cdf(x));
  const double z = -x * M_SQRT1_2;
  // glibc erfc keeps good relative accuracy down to the underflow edge
  // near z ~ 26.5; switch to the asymptotic form before that.
  if (z < 25.0) return std::log(0.5 * std::erfc(z));
  return std::log(0.5) + detail::log_erfc_asymptotic(z);
}

inline NormScenario normalize(const RawScenario& raw) {
  if (!(raw.delta > 0.0)) throw std::invalid_argument("normalize: delta must be > 0");
  if (!(raw.sigma > 0.0)) throw std::invalid_argument("normalize: sigma must be > 0");
  if (!(raw.kappa >= 0.0)) throw std::invalid_argument("normalize: kappa must be >= 0");
  const double log_x1 = std::isnan(raw.log_x1) ? raw.delta : raw.log_x1;
  const double log_x0 = log_x1 - raw.delta;  // grid anchor: log X_d = log_x0 + d*delta
  NormScenario n;
  n.doses = raw.doses;
  n.mu_prime = (raw.mu - log_x0) / raw.delta;
  n.sigma_prime = raw.sigma / raw.delta;
  n.kappa_prime = raw.kappa / raw.delta;
  return n;
}

/// Per-dose hazards under the threshold model:
///   p_d = Phi((d - mu')/sigma'),
///   f_d = Phi((d - mu' - 2 kappa')/sigma') / p_d.
/// When p_d underflows to 0 the dose can produce no DLTs and f_d is
/// defined as 0. When both tail arguments are deep (<= -6) the ratio is
/// taken in log space so f stays accurate where p and its fatal
/// counterpart underflow at different rates.
inline DoseHazards hazards(const NormScenario& scn) {
  if (!(scn.sigma_prime > 0.0)) throw std::invalid_argument("hazards: sigma_prime must be > 0");
  if (!(scn.kappa_prime >= 0.0)) throw std::invalid_argument("hazards: kappa_prime must be >= 0");
  if (scn.doses < 1) throw std::invalid_argument("hazards: dose count must be >= 1");

  DoseHazards hz;
  hz.dlt_prob.resize(scn.doses);
  hz.dlt_compl.resize(scn.doses);
  hz.fatal_frac.resize(scn.doses);
  for (int d = 1; d <= scn.doses; ++d) {
    const double z_dlt = (d - scn.mu_prime) / scn.sigma_prime;
    const double z_fatal = z_dlt - 2.0 * scn.kappa_prime / scn.sigma_prime;
    const double p = std_normal_cdf(z_dlt);
    hz.dlt_prob[d - 1] = p;
    hz.dlt_compl[d - 1] = 1.0 - p;
    double f;
    if (p == 0.0) {
      f = 0.0;
    } else if (z_dlt <= -6.0 && z_fatal <= -6.0) {
      f = std::exp(log_std_normal_cdf(z_fatal) - log_std_normal_cdf(z_dlt));
    } else {
      f = std_normal_cdf(z_fatal) / p;
    }
    hz.fatal_frac[d - 1] = f;
  }
  return hz;
}

}  // namespace escalate
