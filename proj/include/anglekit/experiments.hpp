#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "anglekit/denoise.hpp"
#include "anglekit/io.hpp"
#include "anglekit/learned.hpp"
#include "anglekit/reconstruct.hpp"
#include "anglekit/svg.hpp"

namespace anglekit {

/// Monte-Carlo harness configuration. The JSON config file mirrors these
/// field names exactly; all fields are optional and default as below.
struct ExperimentConfig {
  std::vector<int> n_points{5};
  std::vector<double> side_length{1.0};
  std::vector<double> sigma_a{1e-3};   // angle noise std, radians
  std::vector<double> sigma_d{1e-2};   // distance noise std, length units
  int n_trials = 20;
  std::uint64_t seed = 1;
  std::string constraint_mode = "analytic";  // analytic | learned | both
  int learner_t = 0;                         // 0 = auto: 2 x chamber_rank(N)
  SolverOptions solver;
  double min_angle = kDefaultMinAngle;
  /// Wall-clock times are not reproducible; runtime_s is written as 0 unless
  /// this is set, keeping equal-seed CSV outputs byte-identical.
  bool record_runtime = false;

  void validate() const {
    if (n_points.empty() || side_length.empty() || sigma_a.empty() || sigma_d.empty())
      throw InvalidArgumentError("config: parameter lists must be non-empty");
    if (n_trials < 1) throw InvalidArgumentError("config: n_trials must be at least 1");
    for (const int n : n_points)
      if (n < 4) throw InvalidArgumentError("config: n_points entries must be at least 4");
    for (const double s : side_length)
      if (!(s > 0.0)) throw InvalidArgumentError("config: side_length entries must be positive");
    for (const double s : sigma_a)
      if (s < 0.0) throw InvalidArgumentError("config: sigma_a entries must be non-negative");
    for (const double s : sigma_d)
      if (s < 0.0) throw InvalidArgumentError("config: sigma_d entries must be non-negative");
    if (constraint_mode != "analytic" && constraint_mode != "learned" && constraint_mode != "both")
      throw InvalidArgumentError("config: constraint_mode must be analytic, learned or both");
    if (learner_t < 0) throw InvalidArgumentError("config: learner_t must be non-negative");
    if (!(min_angle > 0.0)) throw InvalidArgumentError("config: min_angle must be positive");
  }

  static ExperimentConfig from_json(const Json& j) {
    ExperimentConfig cfg;
    if (!j.is_object()) throw ParseError("config: expected a JSON object");
    static const std::set<std::string> known = {
        "n_points", "side_length", "sigma_a", "sigma_d",  "n_trials",      "seed",
        "constraint_mode", "learner_t", "solver", "min_angle", "record_runtime"};
    for (const auto& [key, value] : j.items())
      if (!known.count(key)) throw ParseError("config: unknown field \"" + key + "\"");
    try {
      if (j.contains("n_points")) cfg.n_points = j["n_points"].get<std::vector<int>>();
      if (j.contains("side_length")) cfg.side_length = j["side_length"].get<std::vector<double>>();
      if (j.contains("sigma_a")) cfg.sigma_a = j["sigma_a"].get<std::vector<double>>();
      if (j.contains("sigma_d")) cfg.sigma_d = j["sigma_d"].get<std::vector<double>>();
      if (j.contains("n_trials")) cfg.n_trials = j["n_trials"].get<int>();
      if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
      if (j.contains("constraint_mode")) cfg.constraint_mode = j["constraint_mode"].get<std::string>();
      if (j.contains("learner_t")) cfg.learner_t = j["learner_t"].get<int>();
      if (j.contains("min_angle")) cfg.min_angle = j["min_angle"].get<double>();
      if (j.contains("record_runtime")) cfg.record_runtime = j["record_runtime"].get<bool>();
      if (j.contains("solver")) {
        const Json& s = j["solver"];
        if (s.contains("max_iterations")) cfg.solver.max_iterations = s["max_iterations"].get<int>();
        if (s.contains("constraint_tolerance"))
          cfg.solver.constraint_tolerance = s["constraint_tolerance"].get<double>();
        if (s.contains("step_tolerance")) cfg.solver.step_tolerance = s["step_tolerance"].get<double>();
        if (s.contains("bound_margin")) cfg.solver.bound_margin = s["bound_margin"].get<double>();
      }
    } catch (const Json::exception& e) {
      throw ParseError(std::string("config: ") + e.what());
    }
    cfg.validate();
    return cfg;
  }

  static ExperimentConfig from_file(const std::string& path) {
    return from_json(detail::parse_file(path));
  }
};

/// One CSV row of an experiment run.
struct TrialRecord {
  std::string experiment;
  int n_points = 0;
  double side = 0.0;
  double sigma_a = 0.0;
  double sigma_d = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  int n_constraints = 0;
  std::string mode;
  double discrepancy_mae = std::numeric_limits<double>::quiet_NaN();
  double accuracy_mse = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  int iterations = 0;
  double runtime_s = 0.0;

  static const char* csv_header() {
    return "experiment,N,side,sigma_a,sigma_d,trial,seed,n_constraints,mode,"
           "discrepancy_mae,accuracy_mse,converged,iterations,runtime_s";
  }

  std::string to_csv_row() const {
    const auto num = [](double v) {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.10g", v);
      return std::string(buf);
    };
    char seed_buf[32];
    std::snprintf(seed_buf, sizeof(seed_buf), "%llu", static_cast<unsigned long long>(seed));
    char runtime_buf[40];
    std::snprintf(runtime_buf, sizeof(runtime_buf), "%.6f", runtime_s);
    return experiment + "," + std::to_string(n_points) + "," + num(side) + "," + num(sigma_a) +
           "," + num(sigma_d) + "," + std::to_string(trial) + "," + seed_buf + "," +
           std::to_string(n_constraints) + "," + mode + "," + num(discrepancy_mae) + "," +
           num(accuracy_mse) + "," + (converged ? "true" : "false") + "," +
           std::to_string(iterations) + "," + runtime_buf;
  }
};

inline void write_csv(const std::string& path, const std::vector<TrialRecord>& rows) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open " + path + " for writing");
  out << TrialRecord::csv_header() << '\n';
  for (const TrialRecord& r : rows) out << r.to_csv_row() << '\n';
}

inline std::vector<TrialRecord> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  if (line != TrialRecord::csv_header())
    throw ParseError(path + ": line 1: unexpected header");

  std::vector<TrialRecord> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 14)
      throw ParseError(path + ": line " + std::to_string(line_no) + ": expected 14 fields");
    try {
      TrialRecord r;
      r.experiment = fields[0];
      r.n_points = std::stoi(fields[1]);
      r.side = std::stod(fields[2]);
      r.sigma_a = std::stod(fields[3]);
      r.sigma_d = std::stod(fields[4]);
      r.trial = std::stoi(fields[5]);
      r.seed = std::stoull(fields[6]);
      r.n_constraints = std::stoi(fields[7]);
      r.mode = fields[8];
      r.discrepancy_mae = std::stod(fields[9]);
      r.accuracy_mse = std::stod(fields[10]);
      if (fields[11] == "true") {
        r.converged = true;
      } else if (fields[11] == "false") {
        r.converged = false;
      } else {
        throw ParseError("bad boolean");
      }
      r.iterations = std::stoi(fields[12]);
      r.runtime_s = std::stod(fields[13]);
      rows.push_back(std::move(r));
    } catch (const ParseError&) {
      throw ParseError(path + ": line " + std::to_string(line_no) + ": bad boolean field");
    } catch (const std::exception&) {
      throw ParseError(path + ": line " + std::to_string(line_no) + ": bad numeric field");
    }
  }
  return rows;
}

/// theta + N(0, sigma^2) per entry, clamped to [margin, pi - margin].
inline AngleVector add_angle_noise(const AngleVector& theta, double sigma_a, std::uint64_t seed,
                                   double margin = 1e-6) {
  if (sigma_a < 0.0) throw InvalidArgumentError("add_angle_noise: sigma must be non-negative");
  AngleVector out = theta;
  if (sigma_a == 0.0) return out;
  Rng rng(seed);
  for (int i = 0; i < out.size(); ++i)
    out.values[i] = std::clamp(out.values[i] + rng.gaussian(sigma_a), margin, kPi - margin);
  return out;
}

/// Gaussian noise on Euclidean distances (truncated at zero), squared back
/// into a distance matrix.
inline DistanceMatrix add_distance_noise(const DistanceMatrix& d, double sigma_d,
                                         std::uint64_t seed) {
  if (sigma_d < 0.0) throw InvalidArgumentError("add_distance_noise: sigma must be non-negative");
  DistanceMatrix out = d;
  if (sigma_d == 0.0) return out;
  Rng rng(seed);
  const int n = d.size();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double noisy = std::max(0.0, std::sqrt(d.squared(i, j)) + rng.gaussian(sigma_d));
      out.squared(i, j) = noisy * noisy;
      out.squared(j, i) = out.squared(i, j);
    }
  return out;
}

namespace detail {

/// 12 evenly spaced counts from 0 to total plus the breakpoints {0, L, total}.
inline std::vector<int> constraint_grid(int n_linear, int total) {
  std::set<int> grid = {0, n_linear, total};
  for (int i = 0; i <= 11; ++i)
    grid.insert(static_cast<int>(std::lround(static_cast<double>(i) * total / 11.0)));
  return std::vector<int>(grid.begin(), grid.end());
}

struct Stopwatch {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

inline std::vector<std::string> modes_of(const ExperimentConfig& cfg) {
  if (cfg.constraint_mode == "both") return {"analytic", "learned"};
  return {cfg.constraint_mode};
}

}  // namespace detail

/// Discrepancy study: noisy angles, denoise with a growing constraint
/// prefix, rebuild points, record the discrepancy MAE and the aligned
/// accuracy MSE. Failures are recorded per row and never abort the sweep.
inline std::vector<TrialRecord> run_discrepancy_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<TrialRecord> rows;
  const std::vector<std::string> modes = detail::modes_of(cfg);

  for (std::size_t ni = 0; ni < cfg.n_points.size(); ++ni) {
    const int n = cfg.n_points[ni];
    const int n_linear = chamber_rank(n);
    const QuadrilateralConstraintSet quads = enumerate_quads(n);
    const int total = n_linear + quads.size();
    const std::vector<int> grid = detail::constraint_grid(n_linear, total);

    for (std::size_t si = 0; si < cfg.side_length.size(); ++si) {
      for (std::size_t ai = 0; ai < cfg.sigma_a.size(); ++ai) {
        for (int trial = 0; trial < cfg.n_trials; ++trial) {
          const std::uint64_t base = derive_seed(cfg.seed, {1, ni, si, ai,
                                                            static_cast<std::uint64_t>(trial)});
          const auto blank_row = [&](const std::string& mode, int c) {
            TrialRecord r;
            r.experiment = "discrepancy";
            r.n_points = n;
            r.side = cfg.side_length[si];
            r.sigma_a = cfg.sigma_a[ai];
            r.sigma_d = 0.0;
            r.trial = trial;
            r.seed = base;
            r.n_constraints = c;
            r.mode = mode;
            return r;
          };

          PointSet truth;
          AngleVector noisy(4);
          std::map<std::string, LinearConstraintSystem> systems;
          bool setup_ok = true;
          try {
            truth = random_point_set(n, cfg.side_length[si], derive_seed(base, {1}), cfg.min_angle);
            const AngleVector clean = extract_angles(truth, cfg.min_angle);
            noisy = add_angle_noise(clean, cfg.sigma_a[ai], derive_seed(base, {2}),
                                    cfg.solver.bound_margin);
            const EquivalencyClass cls = equivalency_class(truth);
            for (const std::string& mode : modes) {
              if (mode == "analytic") {
                systems[mode] = build_linear_system(cls);
              } else {
                const int t_samples = cfg.learner_t > 0 ? cfg.learner_t : 2 * n_linear;
                const SampleMatrix samples = sample_class_angles(cls, truth, t_samples,
                                                                 derive_seed(base, {3}),
                                                                 cfg.min_angle);
                systems[mode] = learn_constraints(samples, n_linear);
              }
            }
          } catch (const Error&) {
            setup_ok = false;
          }

          for (const std::string& mode : modes) {
            for (const int c : grid) {
              TrialRecord row = blank_row(mode, c);
              if (setup_ok) {
                const detail::Stopwatch watch;
                try {
                  DenoiseProblem prob{noisy, systems[mode], quads, cfg.solver};
                  const DenoiseResult res = denoise_with_constraint_prefix(prob, c);
                  row.converged = res.converged;
                  row.iterations = res.iterations;
                  const PointSet rec = build_up(res.denoised_angles);
                  row.discrepancy_mae = discrepancy(res.denoised_angles, rec);
                  row.accuracy_mse = procrustes_align(rec, truth, true).mse;
                } catch (const Error&) {
                  // leave the metric fields NaN; the row is still recorded
                }
                if (cfg.record_runtime) row.runtime_s = watch.seconds();
              }
              rows.push_back(std::move(row));
            }
          }
        }
      }
    }
  }
  return rows;
}

/// Angle-vs-distance study: for every (side, sigma_d, sigma_a) cell, the
/// angle pipeline (noise, full denoise, build-up, similarity alignment) and
/// the distance pipeline (noisy distances, classic MDS, alignment).
inline std::vector<TrialRecord> run_angle_vs_distance(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<TrialRecord> rows;
  const bool learned_mode = cfg.constraint_mode == "learned";

  for (std::size_t ni = 0; ni < cfg.n_points.size(); ++ni) {
    const int n = cfg.n_points[ni];
    const int n_linear = chamber_rank(n);
    const QuadrilateralConstraintSet quads = enumerate_quads(n);

    for (std::size_t si = 0; si < cfg.side_length.size(); ++si) {
      for (std::size_t di = 0; di < cfg.sigma_d.size(); ++di) {
        for (std::size_t ai = 0; ai < cfg.sigma_a.size(); ++ai) {
          for (int trial = 0; trial < cfg.n_trials; ++trial) {
            const std::uint64_t base = derive_seed(cfg.seed, {2, ni, si, di, ai,
                                                              static_cast<std::uint64_t>(trial)});
            const auto blank_row = [&](const std::string& mode, int c) {
              TrialRecord r;
              r.experiment = "angle-vs-distance";
              r.n_points = n;
              r.side = cfg.side_length[si];
              r.sigma_a = cfg.sigma_a[ai];
              r.sigma_d = cfg.sigma_d[di];
              r.trial = trial;
              r.seed = base;
              r.n_constraints = c;
              r.mode = mode;
              return r;
            };

            TrialRecord angle_row = blank_row("angle", n_linear + quads.size());
            TrialRecord dist_row = blank_row("distance", 0);
            try {
              const PointSet truth =
                  random_point_set(n, cfg.side_length[si], derive_seed(base, {1}), cfg.min_angle);
              const AngleVector clean = extract_angles(truth, cfg.min_angle);

              {
                const detail::Stopwatch watch;
                try {
                  const AngleVector noisy = add_angle_noise(
                      clean, cfg.sigma_a[ai], derive_seed(base, {2}), cfg.solver.bound_margin);
                  const EquivalencyClass cls = equivalency_class(truth);
                  LinearConstraintSystem sys;
                  if (learned_mode) {
                    const int t_samples = cfg.learner_t > 0 ? cfg.learner_t : 2 * n_linear;
                    sys = learn_constraints(sample_class_angles(cls, truth, t_samples,
                                                                derive_seed(base, {4}),
                                                                cfg.min_angle),
                                            n_linear);
                  } else {
                    sys = build_linear_system(cls);
                  }
                  DenoiseProblem prob{noisy, sys, quads, cfg.solver};
                  const DenoiseResult res = denoise(prob);
                  angle_row.converged = res.converged;
                  angle_row.iterations = res.iterations;
                  const PointSet rec = build_up(res.denoised_angles);
                  angle_row.discrepancy_mae = discrepancy(res.denoised_angles, rec);
                  angle_row.accuracy_mse = procrustes_align(rec, truth, true).mse;
                } catch (const Error&) {
                }
                if (cfg.record_runtime) angle_row.runtime_s = watch.seconds();
              }

              {
                const detail::Stopwatch watch;
                try {
                  const DistanceMatrix noisy_d = add_distance_noise(
                      DistanceMatrix::from_points(truth), cfg.sigma_d[di], derive_seed(base, {3}));
                  const MdsResult mds = classic_mds(noisy_d, 2);
                  dist_row.converged = true;
                  dist_row.accuracy_mse = procrustes_align(mds.points, truth, true).mse;
                } catch (const Error&) {
                }
                if (cfg.record_runtime) dist_row.runtime_s = watch.seconds();
              }
            } catch (const Error&) {
              // sampling failed; both rows stay blank
            }
            rows.push_back(std::move(angle_row));
            rows.push_back(std::move(dist_row));
          }
        }
      }
    }
  }
  return rows;
}

namespace detail {

inline double median_of(std::vector<double> v) {
  std::erase_if(v, [](double x) { return !std::isfinite(x); });
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace detail

/// Renders one SVG per experiment found in the CSV. Returns the written
/// paths. Errors out (writing nothing) when the CSV has no data rows.
inline std::vector<std::string> emit_plots(const std::string& csv_path,
                                           const std::string& out_dir) {
  const std::vector<TrialRecord> rows = read_csv(csv_path);
  if (rows.empty()) throw ParseError(csv_path + ": no data rows");

  std::vector<std::string> written;
  std::filesystem::create_directories(out_dir);

  // Discrepancy experiment: median metric vs constraint count per (N, mode).
  {
    std::map<std::pair<int, std::string>, std::map<int, std::vector<double>>> disc, acc;
    for (const TrialRecord& r : rows) {
      if (r.experiment != "discrepancy") continue;
      disc[{r.n_points, r.mode}][r.n_constraints].push_back(r.discrepancy_mae);
      acc[{r.n_points, r.mode}][r.n_constraints].push_back(r.accuracy_mse);
    }
    const auto render = [&](const auto& groups, const std::string& metric,
                            const std::string& file) {
      if (groups.empty()) return;
      ChartSpec spec;
      spec.title = "median " + metric + " vs constraint count";
      spec.x_label = "number of constraints";
      spec.y_label = metric;
      spec.log_y = true;
      for (const auto& [key, by_count] : groups) {
        Series s;
        s.label = "N=" + std::to_string(key.first) + " " + key.second;
        for (const auto& [c, values] : by_count)
          s.points.emplace_back(static_cast<double>(c), detail::median_of(values));
        spec.series.push_back(std::move(s));
      }
      if (!chart_data_range(spec).valid) return;
      const std::string path = (std::filesystem::path(out_dir) / file).string();
      std::ofstream out(path);
      if (!out) throw ParseError("cannot open " + path + " for writing");
      out << render_chart(spec);
      written.push_back(path);
    };
    render(disc, "discrepancy [rad]", "discrepancy_vs_constraints.svg");
    render(acc, "accuracy mse", "accuracy_vs_constraints.svg");
  }

  // Angle-vs-distance experiment: median accuracy vs angle noise, with the
  // distance pipeline as horizontal dashed references.
  {
    std::map<double, std::map<double, std::vector<double>>> angle;          // side -> sa -> mse
    std::map<std::pair<double, double>, std::vector<double>> distance;      // (side, sd) -> mse
    std::set<double> sigma_grid;
    for (const TrialRecord& r : rows) {
      if (r.experiment != "angle-vs-distance") continue;
      if (r.mode == "angle") {
        angle[r.side][r.sigma_a].push_back(r.accuracy_mse);
        sigma_grid.insert(r.sigma_a);
      } else if (r.mode == "distance") {
        distance[{r.side, r.sigma_d}].push_back(r.accuracy_mse);
      }
    }
    if (!angle.empty()) {
      ChartSpec spec;
      spec.title = "point recovery accuracy: angles vs distances";
      spec.x_label = "angle noise sigma_a [rad]";
      spec.y_label = "accuracy mse";
      spec.log_x = true;
      spec.log_y = true;
      for (const auto& [side, by_sigma] : angle) {
        Series s;
        s.label = "angles side=" + detail::short_num(side);
        for (const auto& [sa, values] : by_sigma)
          s.points.emplace_back(sa, detail::median_of(values));
        spec.series.push_back(std::move(s));
      }
      for (const auto& [key, values] : distance) {
        Series s;
        s.dashed = true;
        s.label = "distances side=" + detail::short_num(key.first) + " sd=" +
                  detail::short_num(key.second);
        const double med = detail::median_of(values);
        for (const double sa : sigma_grid) s.points.emplace_back(sa, med);
        spec.series.push_back(std::move(s));
      }
      if (chart_data_range(spec).valid) {
        const std::string path =
            (std::filesystem::path(out_dir) / "accuracy_vs_sigma_a.svg").string();
        std::ofstream out(path);
        if (!out) throw ParseError("cannot open " + path + " for writing");
        out << render_chart(spec);
        written.push_back(path);
      }
    }
  }
  return written;
}

}  // namespace anglekit
