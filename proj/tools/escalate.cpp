// escalate: exact safety analysis of standard 3+3 dose-escalation designs.
//
// Subcommands:
//   paths      enumerate every possible trial path (jsonl / matrix csv / count)
//   eval       exact safety summary for one pharmacology scenario
//   schematic  sample the safety field over grids and extract contours
//   verify     fast self-checks against the built-in reference values

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "escalate/contours.hpp"
#include "escalate/pharmacology.hpp"
#include "escalate/safety.hpp"
#include "escalate/schematic.hpp"
#include "escalate/serialize.hpp"
#include "escalate/simulate.hpp"
#include "escalate/trial_paths.hpp"
#include "escalate/version.hpp"

namespace {

using namespace escalate;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

using Params = std::vector<std::pair<std::string, std::string>>;

void write_file(const std::string& path, const std::string& body) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << body;
  if (!os) throw std::runtime_error("write failed: " + path);
}

void write_manifest(const std::string& artifact_path, const std::string& command,
                    const Params& params) {
  write_file(artifact_path + ".manifest.json",
             manifest_json(command, params, kVersion, utc_timestamp()) + "\n");
}

int usage_failure(const CLI::App& cmd, const std::string& message) {
  std::cerr << "error: " << message << '\n' << cmd.help() << std::flush;
  return kExitUsage;
}

// Accepts "4", "4,6" and "3..7".
std::vector<int> parse_dose_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    const auto dots = token.find("..");
    if (dots != std::string::npos) {
      const int lo = std::stoi(token.substr(0, dots));
      const int hi = std::stoi(token.substr(dots + 2));
      if (lo > hi) throw std::invalid_argument("empty dose range: " + token);
      for (int d = lo; d <= hi; ++d) out.push_back(d);
    } else {
      out.push_back(std::stoi(token));
    }
  }
  if (out.empty()) throw std::invalid_argument("no dose levels in: " + text);
  for (const int d : out) {
    if (d < 1 || d > kMaxDoses) {
      throw std::invalid_argument("dose level count " + std::to_string(d) + " outside 1.." +
                                  std::to_string(kMaxDoses));
    }
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) out.push_back(std::stod(token));
  if (out.empty()) throw std::invalid_argument("empty list: " + text);
  return out;
}

// ---------------------------------------------------------------------------
// paths

struct PathsArgs {
  int doses = 0;
  std::string format = "jsonl";
  std::string out;
};

int run_paths(const CLI::App& cmd, const PathsArgs& args) {
  const std::vector<Path> paths = enumerate_paths(args.doses);

  std::ostringstream body;
  if (args.format == "jsonl") {
    write_paths_jsonl(body, paths);
  } else if (args.format == "csv") {
    write_matrices_csv(body, paths, args.doses);
  } else if (args.format == "count") {
    const double log_j = std::log(static_cast<double>(paths.size()));
    char line[96];
    if (args.doses == 1) {
      std::snprintf(line, sizeof(line), "%zu %.2f --\n", paths.size(), log_j);
    } else {
      const double prev = std::log(static_cast<double>(enumerate_paths(args.doses - 1).size()));
      std::snprintf(line, sizeof(line), "%zu %.2f %.2f\n", paths.size(), log_j, log_j - prev);
    }
    body << line;
  } else {
    return usage_failure(cmd, "unknown format: " + args.format);
  }

  if (args.out.empty()) {
    std::cout << body.str();
  } else {
    write_file(args.out, body.str());
    write_manifest(args.out, "paths",
                   {{"doses", std::to_string(args.doses)}, {"format", args.format}});
  }
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  int doses = 0;
  std::string scenario_file;
  std::optional<double> mu_prime, sigma_prime, kappa_prime;
  std::optional<double> delta, mu, sigma, kappa, log_x1;
  std::string out;
};

int run_eval(const CLI::App& cmd, const EvalArgs& args) {
  const bool any_norm = args.mu_prime || args.sigma_prime || args.kappa_prime;
  const bool any_raw = args.delta || args.mu || args.sigma || args.kappa || args.log_x1;

  NormScenario scn;
  if (!args.scenario_file.empty()) {
    if (any_norm || any_raw) {
      return usage_failure(cmd, "--scenario excludes inline parameter flags");
    }
    std::ifstream is(args.scenario_file);
    if (!is) {
      std::cerr << "error: cannot read " << args.scenario_file << '\n';
      return kExitRuntime;
    }
    std::stringstream buffer;
    buffer << is.rdbuf();
    ScenarioInput input;
    try {
      input = parse_scenario_json(buffer.str());
    } catch (const std::exception& e) {
      return usage_failure(cmd, std::string("bad scenario file: ") + e.what());
    }
    scn = std::holds_alternative<RawScenario>(input) ? normalize(std::get<RawScenario>(input))
                                                     : std::get<NormScenario>(input);
  } else if (any_norm && !any_raw) {
    if (!(args.mu_prime && args.sigma_prime && args.kappa_prime)) {
      return usage_failure(cmd, "normalized form needs --mu-prime, --sigma-prime, --kappa-prime");
    }
    if (args.doses == 0) return usage_failure(cmd, "--doses is required");
    scn = {args.doses, *args.mu_prime, *args.sigma_prime, *args.kappa_prime};
  } else if (any_raw && !any_norm) {
    if (!(args.delta && args.mu && args.sigma && args.kappa)) {
      return usage_failure(cmd, "raw form needs --delta, --mu, --sigma, --kappa");
    }
    if (args.doses == 0) return usage_failure(cmd, "--doses is required");
    RawScenario raw;
    raw.doses = args.doses;
    raw.delta = *args.delta;
    raw.mu = *args.mu;
    raw.sigma = *args.sigma;
    raw.kappa = *args.kappa;
    if (args.log_x1) raw.log_x1 = *args.log_x1;
    try {
      scn = normalize(raw);
    } catch (const std::exception& e) {
      return usage_failure(cmd, e.what());
    }
  } else if (any_raw && any_norm) {
    return usage_failure(cmd, "give either raw or normalized parameters, not both");
  } else {
    return usage_failure(cmd, "no scenario given (use --scenario or parameter flags)");
  }

  if (scn.doses < 1 || scn.doses > kMaxDoses) {
    return usage_failure(cmd, "dose level count outside 1.." + std::to_string(kMaxDoses));
  }
  DoseHazards hz;
  try {
    hz = hazards(scn);
  } catch (const std::exception& e) {
    return usage_failure(cmd, e.what());
  }
  const SafetySummary summary = summarize(cached_design_tables(scn.doses), hz);
  const std::string body = summary_to_json(summary) + "\n";
  if (args.out.empty()) {
    std::cout << body;
  } else {
    write_file(args.out, body);
    write_manifest(args.out, "eval",
                   {{"doses", std::to_string(scn.doses)},
                    {"mu_prime", fmt_full(scn.mu_prime)},
                    {"sigma_prime", fmt_full(scn.sigma_prime)},
                    {"kappa_prime", fmt_full(scn.kappa_prime)}});
  }
  return 0;
}

// ---------------------------------------------------------------------------
// schematic

struct SchematicArgs {
  std::string figure;  // "", generic, contours46, focused
  std::string doses;
  std::string kappa_list;
  double mu_prime = 2.0;
  std::string x_axis, y_axis;
  double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;
  int x_steps = 0, y_steps = 0;
  bool x_log = false, y_log = false;
  std::string metric = "expected-fatalities";
  std::string levels = "0.02,0.05,0.1,0.2,0.5,1";
  std::string formats = "csv,json";
  std::string out_dir = ".";
  std::string prefix;
};

struct PanelOutput {
  std::string stem;  // file stem without extension
  FieldGrid grid;
  Params params;
};

void emit_panel(const PanelOutput& panel, const std::vector<double>& levels, bool want_csv,
                bool want_json, bool want_svg) {
  const ContourSet contours = extract_contours(panel.grid, levels);
  if (want_csv) {
    std::ostringstream os;
    write_grid_csv(os, panel.grid);
    write_file(panel.stem + "_grid.csv", os.str());
    write_manifest(panel.stem + "_grid.csv", "schematic", panel.params);
  }
  if (want_json) {
    write_file(panel.stem + "_contours.json", contours_to_json(contours) + "\n");
    write_manifest(panel.stem + "_contours.json", "schematic", panel.params);
  }
  if (want_svg) {
    std::ostringstream os;
    write_contours_svg(os, contours, panel.grid.xs.front(), panel.grid.xs.back(),
                       panel.grid.ys.front(), panel.grid.ys.back());
    write_file(panel.stem + ".svg", os.str());
    write_manifest(panel.stem + ".svg", "schematic", panel.params);
  }
}

int run_schematic(const CLI::App& cmd, const SchematicArgs& args) {
  SafetyMetric metric;
  if (args.metric == "expected-fatalities") {
    metric = SafetyMetric::ExpectedFatalities;
  } else if (args.metric == "prob-any-fatality") {
    metric = SafetyMetric::ProbAnyFatality;
  } else {
    return usage_failure(cmd, "unknown metric: " + args.metric);
  }

  std::vector<double> levels;
  std::vector<std::string> formats;
  std::vector<int> dose_list;
  std::vector<double> kappas;
  try {
    levels = parse_double_list(args.levels);
    std::stringstream ss(args.formats);
    std::string token;
    while (std::getline(ss, token, ',')) formats.push_back(token);
    if (!args.doses.empty()) dose_list = parse_dose_list(args.doses);
    if (!args.kappa_list.empty()) kappas = parse_double_list(args.kappa_list);
  } catch (const std::exception& e) {
    return usage_failure(cmd, e.what());
  }
  bool want_csv = false, want_json = false, want_svg = false;
  for (const std::string& f : formats) {
    if (f == "csv") {
      want_csv = true;
    } else if (f == "json") {
      want_json = true;
    } else if (f == "svg") {
      want_svg = true;
    } else {
      return usage_failure(cmd, "unknown format: " + f);
    }
  }

  const std::string fig = args.figure;
  if (!fig.empty() && fig != "generic" && fig != "contours46" && fig != "focused") {
    return usage_failure(cmd, "unknown figure: " + fig);
  }
  const std::string prefix = args.prefix.empty() ? (fig.empty() ? "schematic" : fig) : args.prefix;
  const std::string stem_base = args.out_dir + "/" + prefix;
  {
    std::error_code ec;
    std::filesystem::create_directories(args.out_dir, ec);
    if (ec) {
      std::cerr << "error: cannot create output directory " << args.out_dir << ": "
                << ec.message() << '\n';
      return kExitRuntime;
    }
  }

  auto base_params = [&](int doses) {
    Params p{{"figure", fig.empty() ? "custom" : fig},
             {"doses", std::to_string(doses)},
             {"metric", args.metric},
             {"levels", args.levels}};
    return p;
  };

  try {
    if (fig == "contours46") {
      if (dose_list.empty()) dose_list = {4, 6};
      if (kappas.empty()) kappas = {0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2};
      for (const int d : dose_list) {
        GridSpec spec;
        spec.x_axis = {args.x_axis.empty() ? "mu_p" : args.x_axis,
                       args.x_min != 0.0 || args.x_max != 0.0 ? args.x_min : 1.0,
                       args.x_min != 0.0 || args.x_max != 0.0 ? args.x_max : double(d),
                       args.x_steps > 0 ? args.x_steps : 201, args.x_log};
        spec.y_axis = {args.y_axis.empty() ? "sigma_p" : args.y_axis,
                       args.y_min != 0.0 || args.y_max != 0.0 ? args.y_min : 0.2,
                       args.y_min != 0.0 || args.y_max != 0.0 ? args.y_max : 2.0,
                       args.y_steps > 0 ? args.y_steps : 201, args.y_log};
        spec.doses = d;
        spec.metric = metric;
        const std::vector<FieldGrid> panels = evaluate_grid_stack(spec, kappas);
        for (std::size_t k = 0; k < kappas.size(); ++k) {
          PanelOutput panel;
          panel.stem = stem_base + "_D" + std::to_string(d) + "_kp" + fmt_shortest(kappas[k]);
          panel.grid = panels[k];
          panel.params = base_params(d);
          panel.params.emplace_back("kappa_prime", fmt_shortest(kappas[k]));
          emit_panel(panel, levels, want_csv, want_json, want_svg);
        }
      }
      return 0;
    }

    if (fig == "focused") {
      if (dose_list.empty()) dose_list = {2, 3, 4, 5, 6, 7};
      std::vector<FieldGrid> grids;
      for (const int d : dose_list) {
        GridSpec spec;
        spec.x_axis = {args.x_axis.empty() ? "sigma_p" : args.x_axis,
                       args.x_min != 0.0 || args.x_max != 0.0 ? args.x_min : 0.2,
                       args.x_min != 0.0 || args.x_max != 0.0 ? args.x_max : 2.0,
                       args.x_steps > 0 ? args.x_steps : 201, args.x_log};
        spec.y_axis = {args.y_axis.empty() ? "kappa_p" : args.y_axis,
                       args.y_min != 0.0 || args.y_max != 0.0 ? args.y_min : 0.4,
                       args.y_min != 0.0 || args.y_max != 0.0 ? args.y_max : 1.4,
                       args.y_steps > 0 ? args.y_steps : 201, args.y_log};
        spec.doses = d;
        spec.mu_prime = 2.0;
        spec.metric = metric;
        PanelOutput panel;
        panel.stem = stem_base + "_D" + std::to_string(d);
        panel.grid = evaluate_grid(spec);
        panel.params = base_params(d);
        emit_panel(panel, levels, want_csv, want_json, want_svg);
        grids.push_back(std::move(panel.grid));
      }

      // Cross-D deviation report over the shared lattice.
      double max_dev_high = 0.0;  // among doses >= 3
      double max_dev_all = 0.0;
      for (std::size_t cell = 0; cell < grids.front().values.size(); ++cell) {
        double lo_h = 1e300, hi_h = -1e300, lo_a = 1e300, hi_a = -1e300;
        for (std::size_t g = 0; g < grids.size(); ++g) {
          const double v = grids[g].values[cell];
          lo_a = std::min(lo_a, v);
          hi_a = std::max(hi_a, v);
          if (dose_list[g] >= 3) {
            lo_h = std::min(lo_h, v);
            hi_h = std::max(hi_h, v);
          }
        }
        if (hi_h > 0.0) max_dev_high = std::max(max_dev_high, (hi_h - lo_h) / hi_h);
        if (hi_a > 0.0) max_dev_all = std::max(max_dev_all, (hi_a - lo_a) / hi_a);
      }
      std::string report = "{\"doses\":[";
      for (std::size_t g = 0; g < dose_list.size(); ++g) {
        if (g) report += ',';
        report += std::to_string(dose_list[g]);
      }
      report += "],\"max_rel_deviation_d_ge_3\":" + fmt_full(max_dev_high) +
                ",\"max_rel_deviation_all\":" + fmt_full(max_dev_all) + "}\n";
      write_file(stem_base + "_deviation.json", report);
      write_manifest(stem_base + "_deviation.json", "schematic", base_params(0));
      std::cout << report;
      return 0;
    }

    // generic (default) or fully custom grid
    if (dose_list.empty()) dose_list = {6};
    for (const int d : dose_list) {
      GridSpec spec;
      spec.x_axis = {args.x_axis.empty() ? "kappa_over_sigma" : args.x_axis,
                     args.x_min != 0.0 || args.x_max != 0.0 ? args.x_min : 0.25,
                     args.x_min != 0.0 || args.x_max != 0.0 ? args.x_max : 4.0,
                     args.x_steps > 0 ? args.x_steps : 201, args.x_log};
      spec.y_axis = {args.y_axis.empty() ? "delta_over_sigma" : args.y_axis,
                     args.y_min != 0.0 || args.y_max != 0.0 ? args.y_min : 0.25,
                     args.y_min != 0.0 || args.y_max != 0.0 ? args.y_max : 4.0,
                     args.y_steps > 0 ? args.y_steps : 201, args.y_log};
      spec.doses = d;
      spec.mu_prime = args.mu_prime;
      if (!kappas.empty()) spec.kappa_prime = kappas.front();
      spec.metric = metric;
      PanelOutput panel;
      panel.stem = stem_base + "_D" + std::to_string(d);
      panel.grid = evaluate_grid(spec);
      panel.params = base_params(d);
      emit_panel(panel, levels, want_csv, want_json, want_svg);
    }
    return 0;
  } catch (const std::invalid_argument& e) {
    return usage_failure(cmd, e.what());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

// ---------------------------------------------------------------------------
// verify

struct CheckResult {
  std::string name;
  bool pass;
  std::string detail;
};

int run_verify() {
  std::vector<CheckResult> checks;

  // Path counts against the reference table.
  {
    const long expected[] = {10, 46, 154, 442, 1162, 2890, 6922, 16138, 36874, 82954};
    bool ok = true;
    std::string detail;
    double prev_log = 0.0;
    std::printf("  D        J    log(J)  dlog(J)  expected\n");
    for (int d = 1; d <= 10; ++d) {
      const std::size_t j = enumerate_paths(d).size();
      const double lj = std::log(static_cast<double>(j));
      if (d == 1) {
        std::printf("%3d %8zu %9.2f       -- %9ld\n", d, j, lj, expected[d - 1]);
      } else {
        std::printf("%3d %8zu %9.2f %8.2f %9ld\n", d, j, lj, lj - prev_log, expected[d - 1]);
      }
      prev_log = lj;
      if (j != static_cast<std::size_t>(expected[d - 1])) {
        ok = false;
        detail = "mismatch at D=" + std::to_string(d) + " (got " + std::to_string(j) + ")";
      }
    }
    checks.push_back({"path counts D=1..10", ok, detail});
  }

  // Probabilities sum to one.
  {
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double worst = 0.0;
    for (int rep = 0; rep < 60; ++rep) {
      const int doses = 1 + static_cast<int>(rng() % 6);
      DoseHazards hz;
      hz.dlt_prob.resize(doses);
      for (double& v : hz.dlt_prob) v = unif(rng);
      std::sort(hz.dlt_prob.begin(), hz.dlt_prob.end());
      hz.dlt_compl.resize(doses);
      for (int d = 0; d < doses; ++d) hz.dlt_compl[d] = 1.0 - hz.dlt_prob[d];
      hz.fatal_frac.assign(doses, 0.1);
      const PathProbabilities prob = path_probabilities(cached_design_tables(doses), hz);
      const double total = std::accumulate(prob.pi.begin(), prob.pi.end(), 0.0);
      worst = std::max(worst, std::abs(total - 1.0));
    }
    checks.push_back({"sum(pi) = 1 over random hazards", worst <= 1e-10,
                      "max |sum-1| = " + fmt_full(worst)});
  }

  // Log-space route equals the direct product route.
  {
    const auto paths = enumerate_paths(4);
    const DesignTables& tables = cached_design_tables(4);
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double worst = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
      DoseHazards hz;
      hz.dlt_prob = {unif(rng), unif(rng), unif(rng), unif(rng)};
      std::sort(hz.dlt_prob.begin(), hz.dlt_prob.end());
      if (rep == 3) hz.dlt_prob[0] = 0.0;
      if (rep == 7) hz.dlt_prob[3] = 1.0;
      hz.dlt_compl.resize(4);
      for (int d = 0; d < 4; ++d) hz.dlt_compl[d] = 1.0 - hz.dlt_prob[d];
      hz.fatal_frac.assign(4, 0.2);
      const PathProbabilities a = path_probabilities(tables, hz);
      const PathProbabilities b = path_probabilities_direct(paths, hz);
      for (std::size_t j = 0; j < a.pi.size(); ++j) {
        const double scale = std::max(a.pi[j], b.pi[j]);
        if (scale > 0.0) worst = std::max(worst, std::abs(a.pi[j] - b.pi[j]) / scale);
      }
    }
    checks.push_back({"log-space equals direct product", worst <= 1e-12,
                      "max rel diff = " + fmt_full(worst)});
  }

  // Normalization invariance.
  {
    const double direct = safety_field(4, 2.0, 1.0, 1.0);
    const NormScenario n = normalize({4, 2.0, 4.0, 2.0, 2.0, 2.0});
    const double via_raw = safety_field(4, n.mu_prime, n.sigma_prime, n.kappa_prime);
    const double rel = std::abs(direct - via_raw) / direct;
    checks.push_back(
        {"scale invariance of the field", rel <= 1e-12, "rel diff = " + fmt_full(rel)});
  }

  // Safe corner: sigma < delta < kappa keeps expected fatalities below 0.1.
  {
    bool ok = true;
    std::string detail;
    double worst = 0.0;
    for (const int d : {4, 5, 6}) {
      for (double mu = 1.0; mu <= d + 1e-9; mu += 0.5) {
        const double value = safety_field(d, mu, 0.9, 1.1);
        worst = std::max(worst, value);
        if (value >= 0.1) {
          ok = false;
          detail = "violated at D=" + std::to_string(d) + ", mu'=" + fmt_shortest(mu) +
                   " (value " + fmt_full(value) + ")";
        }
      }
    }
    if (ok) detail = "max expected fatalities = " + fmt_full(worst);
    checks.push_back({"safe corner sweep < 0.1", ok, detail});
  }

  // D-collapse at a representative slice point.
  {
    double lo = 1e300, hi = -1e300;
    for (int d = 3; d <= 7; ++d) {
      const double v = minimax_slice(d, 0.5, 1.0);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double spread = (hi - lo) / hi;
    const double d2 = minimax_slice(2, 0.5, 1.0);
    const double d2_dev = std::abs(d2 - hi) / std::max(d2, hi);
    checks.push_back({"D-collapse: D in 3..7 coincide, D=2 does not",
                      spread < 1e-3 && d2_dev > 10.0 * spread,
                      "spread = " + fmt_full(spread) + ", D=2 deviation = " + fmt_full(d2_dev)});
  }

  bool all = true;
  std::printf("\n");
  for (const CheckResult& c : checks) {
    std::printf("[%s] %-42s %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
    all = all && c.pass;
  }
  return all ? 0 : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact safety analysis of standard 3+3 dose-escalation designs"};
  app.set_version_flag("--version", std::string("escalate ") + kVersion);
  app.require_subcommand(1);

  PathsArgs paths_args;
  CLI::App* paths_cmd = app.add_subcommand("paths", "enumerate all possible trial paths");
  paths_cmd->add_option("--doses", paths_args.doses, "number of prespecified dose levels")
      ->required()
      ->check(CLI::Range(1, kMaxDoses));
  paths_cmd->add_option("--format", paths_args.format, "jsonl | csv | count")
      ->default_val("jsonl");
  paths_cmd->add_option("--out", paths_args.out, "output file (default stdout)");

  EvalArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand("eval", "exact safety summary for one scenario");
  eval_cmd->add_option("--doses", eval_args.doses, "number of prespecified dose levels");
  eval_cmd->add_option("--scenario", eval_args.scenario_file, "scenario JSON file");
  eval_cmd->add_option("--mu-prime", eval_args.mu_prime, "median log-MTD in dose-index units");
  eval_cmd->add_option("--sigma-prime", eval_args.sigma_prime, "sigma / delta");
  eval_cmd->add_option("--kappa-prime", eval_args.kappa_prime, "kappa / delta");
  eval_cmd->add_option("--delta", eval_args.delta, "log spacing of the dose grid");
  eval_cmd->add_option("--mu", eval_args.mu, "mean of log MTD");
  eval_cmd->add_option("--sigma", eval_args.sigma, "SD of log MTD");
  eval_cmd->add_option("--kappa", eval_args.kappa, "log therapeutic index");
  eval_cmd->add_option("--log-x1", eval_args.log_x1, "log of dose 1 (default: delta)");
  eval_cmd->add_option("--out", eval_args.out, "output file (default stdout)");

  SchematicArgs sch_args;
  CLI::App* sch_cmd = app.add_subcommand("schematic", "safety field grids and contours");
  sch_cmd->add_option("--figure", sch_args.figure, "generic | contours46 | focused");
  sch_cmd->add_option("--doses", sch_args.doses, "dose counts, e.g. 6 or 4,6 or 3..7");
  sch_cmd->add_option("--kappa-prime", sch_args.kappa_list,
                      "kappa' panel values for contours46 (comma separated)");
  sch_cmd->add_option("--mu-prime", sch_args.mu_prime, "fixed mu' for custom grids")
      ->default_val(2.0);
  sch_cmd->add_option("--x-axis", sch_args.x_axis,
                      "mu_p | sigma_p | kappa_p | kappa_over_sigma | delta_over_sigma");
  sch_cmd->add_option("--x-min", sch_args.x_min, "x axis lower bound");
  sch_cmd->add_option("--x-max", sch_args.x_max, "x axis upper bound");
  sch_cmd->add_option("--x-steps", sch_args.x_steps, "x axis lattice points");
  sch_cmd->add_flag("--x-log", sch_args.x_log, "log-spaced x axis");
  sch_cmd->add_option("--y-axis", sch_args.y_axis, "see --x-axis");
  sch_cmd->add_option("--y-min", sch_args.y_min, "y axis lower bound");
  sch_cmd->add_option("--y-max", sch_args.y_max, "y axis upper bound");
  sch_cmd->add_option("--y-steps", sch_args.y_steps, "y axis lattice points");
  sch_cmd->add_flag("--y-log", sch_args.y_log, "log-spaced y axis");
  sch_cmd->add_option("--metric", sch_args.metric, "expected-fatalities | prob-any-fatality")
      ->default_val("expected-fatalities");
  sch_cmd->add_option("--levels", sch_args.levels, "contour levels (comma separated)")
      ->default_val("0.02,0.05,0.1,0.2,0.5,1");
  sch_cmd->add_option("--format", sch_args.formats, "any of csv,json,svg (comma separated)")
      ->default_val("csv,json");
  sch_cmd->add_option("--out-dir", sch_args.out_dir, "output directory")->default_val(".");
  sch_cmd->add_option("--prefix", sch_args.prefix, "artifact name prefix (default: figure name)");

  CLI::App* verify_cmd = app.add_subcommand("verify", "fast self-checks; exit 0 iff all pass");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*paths_cmd) return run_paths(*paths_cmd, paths_args);
    if (*eval_cmd) return run_eval(*eval_cmd, eval_args);
    if (*sch_cmd) return run_schematic(*sch_cmd, sch_args);
    if (*verify_cmd) return run_verify();
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
