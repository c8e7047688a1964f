#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "anglekit/anglekit.hpp"

using namespace anglekit;

namespace {

int run(CLI::App& app, int argc, char** argv) {
  std::string gen_out;
  int gen_n = 5;
  double gen_side = 1.0;
  std::uint64_t gen_seed = 1;
  double gen_min_angle = kDefaultMinAngle;
  auto* gen = app.add_subcommand("gen", "Sample a random point set into a JSON file");
  gen->add_option("-n,--n-points", gen_n, "Number of points")->capture_default_str();
  gen->add_option("--side", gen_side, "Square side length")->capture_default_str();
  gen->add_option("--seed", gen_seed, "RNG seed")->capture_default_str();
  gen->add_option("--min-angle", gen_min_angle, "Degeneracy filter in radians")
      ->capture_default_str();
  gen->add_option("-o,--out", gen_out, "Output point JSON")->required();

  std::string angles_in, angles_out;
  double angles_min_angle = kDefaultMinAngle;
  auto* angles = app.add_subcommand("angles", "Extract all inner angles of a point set");
  angles->add_option("-i,--in", angles_in, "Input point JSON")->required();
  angles->add_option("--min-angle", angles_min_angle, "Degeneracy filter in radians")
      ->capture_default_str();
  angles->add_option("-o,--out", angles_out, "Output angle JSON")->required();

  std::string noise_in, noise_out;
  double noise_sigma = 1e-3;
  std::uint64_t noise_seed = 1;
  auto* noise = app.add_subcommand("noise", "Add Gaussian noise to an angle file");
  noise->add_option("-i,--in", noise_in, "Input angle JSON")->required();
  noise->add_option("--sigma", noise_sigma, "Noise std in radians")->capture_default_str();
  noise->add_option("--seed", noise_seed, "RNG seed")->capture_default_str();
  noise->add_option("-o,--out", noise_out, "Output angle JSON")->required();

  std::string den_in, den_rep, den_out, den_mode = "analytic", den_constraints = "all";
  std::string den_dump;
  int den_learner_t = 0;
  std::uint64_t den_seed = 1;
  SolverOptions den_opts;
  auto* den = app.add_subcommand("denoise", "Project noisy angles onto the realizable set");
  den->add_option("-i,--in", den_in, "Noisy angle JSON")->required();
  den->add_option("-r,--representative", den_rep,
                  "Point JSON fixing the equivalency class (prior knowledge)")
      ->required();
  den->add_option("--mode", den_mode, "Constraint source: analytic | learned")
      ->check(CLI::IsMember({"analytic", "learned"}))
      ->capture_default_str();
  den->add_option("--constraints", den_constraints, "Prefix count or \"all\"")
      ->capture_default_str();
  den->add_option("--max-iter", den_opts.max_iterations, "Iteration budget")
      ->capture_default_str();
  den->add_option("--tol", den_opts.constraint_tolerance, "Constraint tolerance")
      ->capture_default_str();
  den->add_option("--step-tol", den_opts.step_tolerance, "Step tolerance")
      ->capture_default_str();
  den->add_option("--learner-t", den_learner_t,
                  "Learned mode: sample count (0 = 2x constraint count)")
      ->capture_default_str();
  den->add_option("--seed", den_seed, "Learned mode: sampling seed")->capture_default_str();
  den->add_option("--dump-constraints", den_dump, "Optional constraint-system JSON dump");
  den->add_option("-o,--out", den_out, "Output angle JSON")->required();

  std::string rec_in, rec_out, rec_align;
  auto* rec = app.add_subcommand("reconstruct", "Recover points from a realizable angle file");
  rec->add_option("-i,--in", rec_in, "Input angle JSON")->required();
  rec->add_option("--align-to", rec_align, "Optional reference point JSON to align against");
  rec->add_option("-o,--out", rec_out, "Output point JSON")->required();

  auto* exp = app.add_subcommand("experiment", "Run a simulation study to CSV");
  exp->require_subcommand(1);
  std::string exp_config, exp_out;
  auto* exp_disc = exp->add_subcommand("discrepancy", "Denoising quality vs constraint count");
  auto* exp_avd = exp->add_subcommand("angle-vs-distance",
                                      "Angle pipeline vs classic-MDS distance pipeline");
  for (auto* sub : {exp_disc, exp_avd}) {
    sub->add_option("--config", exp_config, "Experiment config JSON")->required();
    sub->add_option("--out", exp_out, "Output CSV path")->required();
  }

  std::string plot_in, plot_dir;
  auto* plot = app.add_subcommand("plot", "Render SVG charts from an experiment CSV");
  plot->add_option("-i,--in", plot_in, "Input CSV")->required();
  plot->add_option("--out-dir", plot_dir, "Output directory")->required();

  app.require_subcommand(1);
  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) {
    const PointSet p = random_point_set(gen_n, gen_side, gen_seed, gen_min_angle);
    write_point_set(gen_out, p);
    std::cout << "wrote " << gen_out << " (" << p.size() << " points)\n";
    return 0;
  }

  if (angles->parsed()) {
    const PointSet p = read_point_set(angles_in);
    const AngleVector v = extract_angles(p, angles_min_angle);
    write_angles(angles_out, v);
    std::cout << "wrote " << angles_out << " (" << v.size() << " angles)\n";
    return 0;
  }

  if (noise->parsed()) {
    const AngleVector v = read_angles(noise_in);
    write_angles(noise_out, add_angle_noise(v, noise_sigma, noise_seed));
    std::cout << "wrote " << noise_out << " (sigma " << noise_sigma << ")\n";
    return 0;
  }

  if (den->parsed()) {
    const AngleVector noisy = read_angles(den_in);
    const PointSet rep = read_point_set(den_rep);
    if (rep.size() != noisy.n_points())
      throw InvalidSizeError("denoise: representative has " + std::to_string(rep.size()) +
                             " points but the angle file expects " +
                             std::to_string(noisy.n_points()));
    const EquivalencyClass cls = equivalency_class(rep);
    const int n = rep.size();
    LinearConstraintSystem sys;
    if (den_mode == "analytic") {
      sys = build_linear_system(cls);
    } else {
      const int target = chamber_rank(n);
      const int t_samples = den_learner_t > 0 ? den_learner_t : 2 * target;
      sys = learn_constraints(sample_class_angles(cls, rep, t_samples, den_seed), target);
    }
    if (!den_dump.empty()) write_linear_system(den_dump, sys);

    DenoiseProblem prob{noisy, sys, enumerate_quads(n), den_opts};
    DenoiseResult res;
    if (den_constraints == "all") {
      res = denoise(prob);
    } else {
      int count = 0;
      try {
        count = std::stoi(den_constraints);
      } catch (const std::exception&) {
        throw ParseError("denoise: --constraints must be an integer or \"all\"");
      }
      res = denoise_with_constraint_prefix(prob, count);
    }
    write_angles(den_out, res.denoised_angles);
    std::cout << "wrote " << den_out << " converged=" << (res.converged ? "true" : "false")
              << " iterations=" << res.iterations << " violation=" << res.constraint_violation
              << " objective=" << res.objective << "\n";
    return 0;
  }

  if (rec->parsed()) {
    const AngleVector v = read_angles(rec_in);
    PointSet p = build_up(v);
    if (!rec_align.empty()) {
      const PointSet ref = read_point_set(rec_align);
      const ProcrustesResult fit = procrustes_align(p, ref, true);
      p = fit.transform.apply(p);
      std::cout << "aligned to " << rec_align << " mse=" << fit.mse << "\n";
    }
    write_point_set(rec_out, p);
    std::cout << "wrote " << rec_out << "\n";
    return 0;
  }

  if (exp->parsed()) {
    const ExperimentConfig cfg = ExperimentConfig::from_file(exp_config);
    const std::vector<TrialRecord> rows =
        exp_disc->parsed() ? run_discrepancy_experiment(cfg) : run_angle_vs_distance(cfg);
    write_csv(exp_out, rows);
    std::cout << "wrote " << exp_out << " (" << rows.size() << " rows)\n";
    return 0;
  }

  if (plot->parsed()) {
    for (const std::string& path : emit_plots(plot_in, plot_dir))
      std::cout << "wrote " << path << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"anglekit: realizability, denoising and recovery for inner-angle measurements"};
  try {
    return run(app, argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
