#pragma once

// Exhaustive enumeration of the standard 3+3 dose-escalation design
// (the variant requiring 6 patients at a dose before declaring it the MTD),
// plus the per-path event matrices and the stacked design constants that
// make exact probability computations a single matrix product.

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace escalate {

inline constexpr int kCohortSize = 3;

// Enumeration above 12 dose levels is refused: the path count roughly
// doubles per added dose (~420k at D=12), and the stacked tables stay
// within tens of MB only up to there.
inline constexpr int kMaxDoses = 12;

enum class CohortKind : std::uint8_t {
  EscalateEnroll,    // first cohort at a newly reached dose
  TopSecondEnroll,   // second cohort at the top dose when escalation is impossible
  ConfirmEnroll,     // confirmation cohort after a 1/3 result
  DeescalateEnroll,  // second cohort enrolled while de-escalating
};

struct CohortEvent {
  std::int8_t dose = 0;  // 1-based dose level
  CohortKind kind = CohortKind::EscalateEnroll;
  std::int8_t tox = 0;   // DLT count in {0,1,2,3}
  friend bool operator==(const CohortEvent&, const CohortEvent&) = default;
};

struct FinalOutcome {
  enum class Kind : std::uint8_t { DeclareMtd, MtdNotFound };
  Kind kind = Kind::MtdNotFound;
  // DeclareMtd: 0..D-1, where 0 means no dose was tolerable.
  // MtdNotFound: always the top dose D.
  std::int8_t level = 0;
  friend bool operator==(const FinalOutcome&, const FinalOutcome&) = default;
};

/// One complete possible realization of a trial: the ordered cohort events
/// and the final declaration.
struct Path {
  std::vector<CohortEvent> events;
  FinalOutcome outcome;
  friend bool operator==(const Path&, const Path&) = default;
};

namespace detail {

class PathEnumerator {
 public:
  explicit PathEnumerator(int doses) : doses_(doses) {}

  std::vector<Path> run() {
    paths_.clear();
    events_.clear();
    escalate_from(0, 0);
    return std::move(paths_);
  }

 private:
  // State argument convention mirrors the design's transition rules:
  // `dose` is the last dose acted on, `lo` the highest dose already known
  // to hold 6 patients with <= 1 DLT (0 when there is none).

  void escalate_from(int dose, int lo) {
    if (dose == doses_) {
      // Escalation impossible: enroll a second cohort at the top dose.
      for (int t = 0; t <= 3; ++t) {
        events_.push_back({std::int8_t(dose), CohortKind::TopSecondEnroll, std::int8_t(t)});
        if (t <= 1) {
          emit({FinalOutcome::Kind::MtdNotFound, std::int8_t(dose)});
        } else {
          deescalate_from(dose, lo);
        }
        events_.pop_back();
      }
      return;
    }
    const int next = dose + 1;
    for (int t = 0; t <= 3; ++t) {
      events_.push_back({std::int8_t(next), CohortKind::EscalateEnroll, std::int8_t(t)});
      if (t == 0) {
        escalate_from(next, lo);
      } else if (t == 1) {
        confirm_at(next, lo);
      } else {
        deescalate_from(next, lo);
      }
      events_.pop_back();
    }
  }

  void confirm_at(int dose, int lo) {
    if (dose == doses_) {
      // 1/3 at the top dose: a clean confirmation cohort still leaves no
      // room to escalate, so the MTD is not found.
      events_.push_back({std::int8_t(dose), CohortKind::ConfirmEnroll, 0});
      emit({FinalOutcome::Kind::MtdNotFound, std::int8_t(dose)});
      events_.pop_back();
    } else {
      events_.push_back({std::int8_t(dose), CohortKind::ConfirmEnroll, 0});
      // Net 1/6: this dose becomes the fallback MTD while escalation resumes.
      escalate_from(dose, dose);
      events_.pop_back();
    }
    for (int t = 1; t <= 3; ++t) {
      events_.push_back({std::int8_t(dose), CohortKind::ConfirmEnroll, std::int8_t(t)});
      deescalate_from(dose, lo);
      events_.pop_back();
    }
  }

  void deescalate_from(int dose, int lo) {
    const int below = dose - 1;
    if (below == lo) {
      // Either no dose is left (lo = 0) or `lo` already holds 6 patients
      // with <= 1 DLT; declare without enrolling.
      emit({FinalOutcome::Kind::DeclareMtd, std::int8_t(lo)});
      return;
    }
    for (int t = 0; t <= 3; ++t) {
      events_.push_back({std::int8_t(below), CohortKind::DeescalateEnroll, std::int8_t(t)});
      if (t <= 1) {
        emit({FinalOutcome::Kind::DeclareMtd, std::int8_t(below)});
      } else {
        deescalate_from(below, lo);
      }
      events_.pop_back();
    }
  }

  void emit(FinalOutcome outcome) { paths_.push_back({events_, outcome}); }

  int doses_;
  std::vector<CohortEvent> events_;
  std::vector<Path> paths_;
};

}  // namespace detail

/// Enumerates every possible path of the standard 3+3 design with `doses`
/// prespecified dose levels. Deterministic: depth-first with the DLT count
/// ascending 0..3 at every branch.
inline std::vector<Path> enumerate_paths(int doses) {
  if (doses < 1 || doses > kMaxDoses) {
    throw std::invalid_argument("enumerate_paths: dose-level count must be in 1.." +
                                std::to_string(kMaxDoses) + ", got " + std::to_string(doses));
  }
  return detail::PathEnumerator(doses).run();
}

/// 2 x D event matrix of one path: cell (c,d) holds the DLT count of the
/// c-th cohort at dose d, or kEmpty where no such cohort was enrolled.
struct PathMatrix {
  static constexpr std::int8_t kEmpty = -1;

  int doses = 0;
  std::vector<std::int8_t> cells;  // row-major, 2 rows x doses columns

  // 0-based: cohort in {0,1}, dose in {0..doses-1}.
  std::int8_t at(int cohort, int dose) const { return cells[cohort * doses + dose]; }
  bool empty_at(int cohort, int dose) const { return at(cohort, dose) == kEmpty; }
};

inline PathMatrix path_to_matrix(const Path& path, int doses) {
  PathMatrix m;
  m.doses = doses;
  m.cells.assign(2 * static_cast<std::size_t>(doses), PathMatrix::kEmpty);
  for (const CohortEvent& ev : path.events) {
    if (ev.dose < 1 || ev.dose > doses) {
      throw std::invalid_argument("path_to_matrix: event at dose " + std::to_string(ev.dose) +
                                  " outside 1.." + std::to_string(doses));
    }
    const int d = ev.dose - 1;
    int cohort;
    if (m.empty_at(0, d)) {
      cohort = 0;
    } else if (m.empty_at(1, d)) {
      cohort = 1;
    } else {
      throw std::invalid_argument("path_to_matrix: third cohort at dose " +
                                  std::to_string(ev.dose));
    }
    m.cells[cohort * doses + d] = ev.tox;
  }
  return m;
}

/// Characteristic constants of the 3+3 design for a fixed dose count:
/// everything needed to evaluate all path probabilities and expected
/// toxicity counts without revisiting the paths themselves.
struct DesignTables {
  int doses = 0;         // D
  std::size_t paths = 0; // J

  // J x 2D, row-major. Left half equals dlt_totals; right half equals
  // 3 * cohort_counts - dlt_totals. These are the exponents multiplying
  // [log p; log q] in the log-probability of each path.
  std::vector<std::uint8_t> exponents;

  // J-vector of summed log binomial coefficients; each cohort contributes
  // log C(3,T), i.e. 0 for T in {0,3} and log 3 for T in {1,2}.
  std::vector<double> log_binom;

  std::vector<std::uint8_t> dlt_totals;     // Y: J x D, DLTs per dose per path
  std::vector<std::uint8_t> cohort_counts;  // n: J x D, cohorts per dose, in {0,1,2}
  std::vector<FinalOutcome> outcomes;       // final declaration, same row order

  const std::uint8_t* exponents_row(std::size_t j) const {
    return exponents.data() + j * 2 * static_cast<std::size_t>(doses);
  }
  const std::uint8_t* dlt_row(std::size_t j) const {
    return dlt_totals.data() + j * static_cast<std::size_t>(doses);
  }
  const std::uint8_t* cohort_row(std::size_t j) const {
    return cohort_counts.data() + j * static_cast<std::size_t>(doses);
  }
};

inline DesignTables build_tables(const std::vector<Path>& paths, int doses) {
  static const double kLog3 = std::log(3.0);

  DesignTables t;
  t.doses = doses;
  t.paths = paths.size();
  const std::size_t d2 = 2 * static_cast<std::size_t>(doses);
  t.exponents.assign(t.paths * d2, 0);
  t.log_binom.assign(t.paths, 0.0);
  t.dlt_totals.assign(t.paths * doses, 0);
  t.cohort_counts.assign(t.paths * doses, 0);
  t.outcomes.reserve(t.paths);

  for (std::size_t j = 0; j < t.paths; ++j) {
    const PathMatrix m = path_to_matrix(paths[j], doses);  // validates the path
    double logb = 0.0;
    for (int d = 0; d < doses; ++d) {
      int dlts = 0, cohorts = 0;
      for (int c = 0; c < 2; ++c) {
        const std::int8_t tox = m.at(c, d);
        if (tox == PathMatrix::kEmpty) continue;
        ++cohorts;
        dlts += tox;
        if (tox == 1 || tox == 2) logb += kLog3;
      }
      t.dlt_totals[j * doses + d] = static_cast<std::uint8_t>(dlts);
      t.cohort_counts[j * doses + d] = static_cast<std::uint8_t>(cohorts);
      t.exponents[j * d2 + d] = static_cast<std::uint8_t>(dlts);
      t.exponents[j * d2 + doses + d] = static_cast<std::uint8_t>(kCohortSize * cohorts - dlts);
    }
    t.log_binom[j] = logb;
    t.outcomes.push_back(paths[j].outcome);
  }
  return t;
}

/// Tables for a given dose count, built once and shared. Thread-safe; the
/// returned reference stays valid for the program lifetime.
inline const DesignTables& cached_design_tables(int doses) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<const DesignTables>> cache;

  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(doses);
  if (it == cache.end()) {
    auto tables = std::make_unique<const DesignTables>(build_tables(enumerate_paths(doses), doses));
    it = cache.emplace(doses, std::move(tables)).first;
  }
  return *it->second;
}

}  // namespace escalate
