#pragma once

// File formats. All numeric output is emitted through fixed printf-style
// formats (17 significant digits for CSV/JSON, 6 for SVG) so artifacts are
// byte-stable across runs and platforms. Input parsing goes through
// nlohmann::json.

#include <charconv>
#include <cstdio>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "escalate/contours.hpp"
#include "escalate/pharmacology.hpp"
#include "escalate/safety.hpp"
#include "escalate/schematic.hpp"
#include "escalate/simulate.hpp"
#include "escalate/trial_paths.hpp"

namespace escalate {

/// Lossless double: up to 17 significant digits, %g trimming.
inline std::string fmt_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Display double for SVG: 6 significant digits.
inline std::string fmt_svg(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

/// Shortest representation that round-trips; used for level identifiers so
/// a level given as 0.1 reads back as "0.1".
inline std::string fmt_shortest(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Paths

inline const char* cohort_kind_tag(CohortKind kind) {
  switch (kind) {
    case CohortKind::EscalateEnroll: return "esc";
    case CohortKind::TopSecondEnroll: return "top";
    case CohortKind::ConfirmEnroll: return "sta";
    case CohortKind::DeescalateEnroll: return "des";
  }
  return "?";
}

inline std::string path_to_json_line(const Path& path) {
  std::string out = "{\"events\":[";
  bool first = true;
  for (const CohortEvent& ev : path.events) {
    if (!first) out += ',';
    first = false;
    out += "{\"dose\":" + std::to_string(ev.dose) + ",\"kind\":\"" + cohort_kind_tag(ev.kind) +
           "\",\"tox\":" + std::to_string(ev.tox) + "}";
  }
  out += "],\"outcome\":{\"kind\":\"";
  out += path.outcome.kind == FinalOutcome::Kind::DeclareMtd ? "declare_mtd" : "mtd_notfound";
  out += "\",\"level\":" + std::to_string(path.outcome.level) + "}}";
  return out;
}

inline void write_paths_jsonl(std::ostream& os, const std::vector<Path>& paths) {
  for (const Path& path : paths) os << path_to_json_line(path) << '\n';
}

/// Matrix CSV: D columns, 2 rows per path, blank for empty cells; each path
/// preceded by a "# path j" comment line (1-based).
inline void write_matrices_csv(std::ostream& os, const std::vector<Path>& paths, int doses) {
  for (std::size_t j = 0; j < paths.size(); ++j) {
    const PathMatrix m = path_to_matrix(paths[j], doses);
    os << "# path " << (j + 1) << '\n';
    for (int c = 0; c < 2; ++c) {
      for (int d = 0; d < doses; ++d) {
        if (d) os << ',';
        if (!m.empty_at(c, d)) os << static_cast<int>(m.at(c, d));
      }
      os << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Safety summaries

inline std::string summary_to_json(const SafetySummary& s) {
  std::string out = "{\"expected_fatalities\":" + fmt_full(s.expected_fatalities) +
                    ",\"prob_any_fatality\":" + fmt_full(s.prob_any_fatality) +
                    ",\"expected_enrollment\":" + fmt_full(s.expected_enrollment) +
                    ",\"mtd_distribution\":{";
  const std::size_t doses = s.mtd_distribution.size() - 1;
  for (std::size_t level = 0; level < doses; ++level) {
    out += "\"" + std::to_string(level) + "\":" + fmt_full(s.mtd_distribution[level]) + ",";
  }
  out += "\"not_found\":" + fmt_full(s.mtd_distribution[doses]) + "}}";
  return out;
}

/// Test-artifact form of a Monte Carlo run; the seed and generator name
/// keep frozen comparisons portable.
inline std::string sim_result_to_json(const SimResult& r) {
  std::string out = "{\"n_trials\":" + std::to_string(r.n_trials) +
                    ",\"mean_fatalities\":" + fmt_full(r.mean_fatalities) +
                    ",\"se_fatalities\":" + fmt_full(r.se_fatalities) +
                    ",\"frac_any_fatality\":" + fmt_full(r.frac_any_fatality) +
                    ",\"mean_enrollment\":" + fmt_full(r.mean_enrollment) + ",\"outcome_freqs\":[";
  for (std::size_t k = 0; k < r.outcome_freqs.size(); ++k) {
    if (k) out += ',';
    out += fmt_full(r.outcome_freqs[k]);
  }
  out += "],\"seed\":" + std::to_string(r.seed) + ",\"generator\":\"" +
         std::string(SimResult::kGenerator) + "\"}";
  return out;
}

// ---------------------------------------------------------------------------
// Scenario input

using ScenarioInput = std::variant<RawScenario, NormScenario>;

/// Accepts exactly one of the two documented forms:
///   {"D":6,"delta":0.5,"mu":...,"sigma":...,"kappa":...[,"log_x1":...]}
///   {"D":6,"mu_prime":2,"sigma_prime":0.5,"kappa_prime":1}
inline ScenarioInput parse_scenario_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  if (!j.is_object() || !j.contains("D")) {
    throw std::invalid_argument("scenario JSON must be an object with a \"D\" key");
  }
  const bool has_raw = j.contains("delta") || j.contains("mu") || j.contains("sigma") ||
                       j.contains("kappa") || j.contains("log_x1");
  const bool has_norm =
      j.contains("mu_prime") || j.contains("sigma_prime") || j.contains("kappa_prime");
  if (has_raw == has_norm) {
    throw std::invalid_argument(
        "scenario JSON must use exactly one of the raw (delta/mu/sigma/kappa) or normalized "
        "(mu_prime/sigma_prime/kappa_prime) forms");
  }
  if (has_raw) {
    RawScenario raw;
    raw.doses = j.at("D").get<int>();
    raw.delta = j.at("delta").get<double>();
    raw.mu = j.at("mu").get<double>();
    raw.sigma = j.at("sigma").get<double>();
    raw.kappa = j.at("kappa").get<double>();
    if (j.contains("log_x1")) raw.log_x1 = j.at("log_x1").get<double>();
    return raw;
  }
  NormScenario norm;
  norm.doses = j.at("D").get<int>();
  norm.mu_prime = j.at("mu_prime").get<double>();
  norm.sigma_prime = j.at("sigma_prime").get<double>();
  norm.kappa_prime = j.at("kappa_prime").get<double>();
  return norm;
}

// ---------------------------------------------------------------------------
// Grids and contours

/// Long-format CSV: one lattice point per line, rows ascending in y then x.
inline void write_grid_csv(std::ostream& os, const FieldGrid& grid) {
  os << "x,y,value\n";
  const std::size_t nx = grid.xs.size();
  for (std::size_t i = 0; i < grid.ys.size(); ++i) {
    for (std::size_t j = 0; j < nx; ++j) {
      os << fmt_full(grid.xs[j]) << ',' << fmt_full(grid.ys[i]) << ','
         << fmt_full(grid.values[i * nx + j]) << '\n';
    }
  }
}

inline std::string contours_to_json(const ContourSet& set) {
  std::string out = "{\"levels\":[";
  for (std::size_t k = 0; k < set.levels.size(); ++k) {
    if (k) out += ',';
    out += fmt_shortest(set.levels[k]);
  }
  out += "],\"polylines\":{";
  for (std::size_t k = 0; k < set.levels.size(); ++k) {
    if (k) out += ',';
    out += "\"" + fmt_shortest(set.levels[k]) + "\":[";
    const auto& lines = set.polylines[k];
    for (std::size_t l = 0; l < lines.size(); ++l) {
      if (l) out += ',';
      out += '[';
      for (std::size_t v = 0; v < lines[l].size(); ++v) {
        if (v) out += ',';
        out += '[' + fmt_full(lines[l][v][0]) + ',' + fmt_full(lines[l][v][1]) + ']';
      }
      out += ']';
    }
    out += ']';
  }
  out += "}}";
  return out;
}

/// Bare-bones SVG: one path element per polyline, the level recorded in the
/// class attribute, viewBox in axis units (y flipped via transform).
inline void write_contours_svg(std::ostream& os, const ContourSet& set, double x_min, double x_max,
                               double y_min, double y_max) {
  const double w = x_max - x_min, h = y_max - y_min;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << fmt_svg(x_min) << ' '
     << fmt_svg(y_min) << ' ' << fmt_svg(w) << ' ' << fmt_svg(h) << "\">\n"
     << "<g fill=\"none\" stroke=\"black\" stroke-width=\"" << fmt_svg(0.004 * (w < h ? w : h))
     << "\" transform=\"translate(0," << fmt_svg(y_max + y_min) << ") scale(1,-1)\">\n";
  for (std::size_t k = 0; k < set.levels.size(); ++k) {
    const std::string level = fmt_shortest(set.levels[k]);
    for (const Polyline& line : set.polylines[k]) {
      os << "<path class=\"level-" << level << "\" d=\"";
      for (std::size_t v = 0; v < line.size(); ++v) {
        os << (v == 0 ? 'M' : 'L') << fmt_svg(line[v][0]) << ' ' << fmt_svg(line[v][1]);
      }
      os << "\"/>\n";
    }
  }
  os << "</g>\n</svg>\n";
}

// ---------------------------------------------------------------------------
// Run manifests

inline std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 8);
  for (const char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out;
}

/// Every file artifact is accompanied by one of these (as a sibling
/// .manifest.json). The timestamp makes manifests the only run-dependent
/// artifact.
inline std::string manifest_json(const std::string& command,
                                 const std::vector<std::pair<std::string, std::string>>& params,
                                 const std::string& version, const std::string& timestamp_utc) {
  std::string out = "{\"command\":\"" + json_escape(command) + "\",\"parameters\":{";
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i) out += ',';
    out += "\"" + json_escape(params[i].first) + "\":\"" + json_escape(params[i].second) + "\"";
  }
  out += "},\"tool_version\":\"" + json_escape(version) + "\",\"timestamp\":\"" +
         json_escape(timestamp_utc) + "\"}";
  return out;
}

}  // namespace escalate
