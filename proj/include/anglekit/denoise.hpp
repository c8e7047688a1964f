#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "anglekit/constraints.hpp"
#include "anglekit/errors.hpp"
#include "anglekit/geometry.hpp"

namespace anglekit {

struct SolverOptions {
  int max_iterations = 500;
  double constraint_tolerance = 1e-8;
  double step_tolerance = 1e-10;
  /// Iterates are kept inside [bound_margin, pi - bound_margin] so the quad
  /// sines and cotangents stay defined.
  double bound_margin = 1e-6;
};

/// Projection of a noisy angle vector onto the set cut out by the supplied
/// constraints: argmin 0.5 ||theta - noisy||^2 s.t. A theta = b, f_k(theta) = 0.
struct DenoiseProblem {
  AngleVector noisy_angles;
  LinearConstraintSystem linear;     // may be empty or a prefix subset
  QuadrilateralConstraintSet quads;  // may be empty or a prefix subset
  SolverOptions options;
};

struct DenoiseResult {
  AngleVector denoised_angles;
  bool converged = false;
  int iterations = 0;
  double constraint_violation = 0.0;  // infinity norm at exit
  double objective = 0.0;             // ||theta_hat - theta_noisy||_2
};

namespace detail {

/// Flattened constraint evaluator: linear rows first, then quads.
class ConstraintStack {
 public:
  ConstraintStack(const DenoiseProblem& problem)
      : linear_(problem.linear), n_angles_(problem.noisy_angles.size()) {
    n_lin_ = linear_.rows();
    if (n_lin_ > 0 && linear_.n_angles != n_angles_)
      throw IndexError("denoise: linear system indexes a different angle vector size");
    if (problem.quads.size() > 0) {
      if (problem.quads.n_points != problem.noisy_angles.n_points())
        throw IndexError("denoise: quad set built for a different point count");
      const TripletIndexer idx(problem.quads.n_points);
      for (const Quad& q : problem.quads.quads)
        quad_idx_.push_back(quad_angle_indices(idx, q));
    }
  }

  int size() const { return n_lin_ + static_cast<int>(quad_idx_.size()); }
  int n_lin() const { return n_lin_; }

  void value(const Eigen::VectorXd& x, Eigen::VectorXd& c) const {
    c.resize(size());
    if (n_lin_ > 0) c.head(n_lin_) = linear_.a_matrix * x - linear_.b_vector;
    for (std::size_t k = 0; k < quad_idx_.size(); ++k) {
      const auto& qi = quad_idx_[k];
      double prod = 1.0;
      for (int t = 0; t < 3; ++t) prod *= std::sin(x[qi.num[t]]) / std::sin(x[qi.den[t]]);
      c[n_lin_ + static_cast<int>(k)] = prod - 1.0;
    }
    if (!c.allFinite()) throw NumericalFailureError("denoise: constraint value not finite");
  }

  void jacobian(const Eigen::VectorXd& x, Eigen::MatrixXd& jac) const {
    jac.setZero(size(), n_angles_);
    if (n_lin_ > 0) jac.topRows(n_lin_) = linear_.a_matrix;
    for (std::size_t k = 0; k < quad_idx_.size(); ++k) {
      const auto& qi = quad_idx_[k];
      double prod = 1.0;
      for (int t = 0; t < 3; ++t) prod *= std::sin(x[qi.num[t]]) / std::sin(x[qi.den[t]]);
      const int row = n_lin_ + static_cast<int>(k);
      for (int t = 0; t < 3; ++t) {
        jac(row, qi.num[t]) += std::cos(x[qi.num[t]]) / std::sin(x[qi.num[t]]) * prod;
        jac(row, qi.den[t]) -= std::cos(x[qi.den[t]]) / std::sin(x[qi.den[t]]) * prod;
      }
    }
  }

 private:
  const LinearConstraintSystem& linear_;
  std::vector<QuadAngleIndices> quad_idx_;
  int n_angles_;
  int n_lin_ = 0;
};

}  // namespace detail

/// Solves the denoising problem with an augmented-Lagrangian method:
/// Gauss-Newton inner iterations on L(x) = 0.5||x - t||^2 - lambda^T c +
/// 0.5 mu ||c||^2 with projected line search onto the bound box, first-order
/// multiplier updates outside, and a final Gauss-Newton feasibility pass that
/// tightens the constraint residual well below the reporting tolerance
/// (the constraint surfaces can meet the linear rows tangentially, where the
/// feasible-set drift scales with sqrt of the achieved violation).
/// Deterministic; never throws on non-convergence.
inline DenoiseResult denoise(const DenoiseProblem& problem, const Eigen::VectorXd& initial_guess) {
  const SolverOptions& opt = problem.options;
  if (opt.max_iterations < 1 || opt.constraint_tolerance <= 0.0 || opt.step_tolerance <= 0.0 ||
      opt.bound_margin <= 0.0)
    throw InvalidArgumentError("denoise: solver options must be positive");

  const int m = problem.noisy_angles.size();
  if (initial_guess.size() != m) throw IndexError("denoise: initial guess size mismatch");
  const double lo = opt.bound_margin;
  const double hi = kPi - opt.bound_margin;
  const Eigen::VectorXd& target = problem.noisy_angles.values;
  const auto clamp_box = [&](const Eigen::VectorXd& v) {
    return v.cwiseMax(lo).cwiseMin(hi).eval();
  };

  DenoiseResult res{problem.noisy_angles, false, 0, 0.0, 0.0};
  Eigen::VectorXd x = clamp_box(initial_guess);

  const detail::ConstraintStack stack(problem);
  const int n_con = stack.size();
  if (n_con == 0) {
    res.denoised_angles.values = x;
    res.converged = true;
    res.objective = (x - target).norm();
    return res;
  }

  const double kPgTol = 1e-6;
  const double kPolishFloor = 1e-12;

  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(n_con);
  double mu = 10.0;
  double omega = 1e-2;  // inner stationarity tolerance, tightened outside

  Eigen::VectorXd c(n_con), c_new(n_con), grad(m), pg(m);
  Eigen::MatrixXd jac(n_con, m), hess(m, m);

  const auto augmented_value = [&](const Eigen::VectorXd& cv, const Eigen::VectorXd& xv) {
    return 0.5 * (xv - target).squaredNorm() - lambda.dot(cv) + 0.5 * mu * cv.squaredNorm();
  };
  const auto projected_gradient = [&](const Eigen::VectorXd& xv, const Eigen::VectorXd& g) {
    Eigen::VectorXd out = g;
    for (int i = 0; i < m; ++i) {
      if (xv[i] <= lo + 1e-15 && g[i] > 0.0) out[i] = 0.0;
      if (xv[i] >= hi - 1e-15 && g[i] < 0.0) out[i] = 0.0;
    }
    return out;
  };

  double violation = std::numeric_limits<double>::infinity();
  double violation_prev = std::numeric_limits<double>::infinity();
  double pg_norm = std::numeric_limits<double>::infinity();
  bool stalled = false;

  constexpr int kMaxOuter = 60;
  for (int outer = 0; outer < kMaxOuter && !stalled; ++outer) {
    // Inner: approximately minimize the augmented Lagrangian over the box.
    for (int inner = 0; inner < 80 && res.iterations < opt.max_iterations; ++inner) {
      stack.value(x, c);
      stack.jacobian(x, jac);
      grad = (x - target) + jac.transpose() * (mu * c - lambda);
      pg = projected_gradient(x, grad);
      pg_norm = pg.lpNorm<Eigen::Infinity>();
      if (pg_norm <= omega) break;

      hess = mu * (jac.transpose() * jac);
      hess.diagonal().array() += 1.0;
      const Eigen::VectorXd step = hess.ldlt().solve(-grad);

      const double l0 = augmented_value(c, x);
      double alpha = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 50; ++ls) {
        const Eigen::VectorXd x_new = clamp_box(x + alpha * step);
        const Eigen::VectorXd delta = x_new - x;
        if (delta.lpNorm<Eigen::Infinity>() < 1e-18) {
          alpha *= 0.5;
          continue;
        }
        stack.value(x_new, c_new);
        const double l_new = augmented_value(c_new, x_new);
        if (l_new <= l0 + 1e-4 * grad.dot(delta)) {
          const double step_size = delta.lpNorm<Eigen::Infinity>();
          x = x_new;
          ++res.iterations;
          accepted = true;
          if (step_size <= opt.step_tolerance) inner = 1 << 20;  // inner converged
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) break;  // no decrease possible at this lambda, mu
    }

    stack.value(x, c);
    violation = c.lpNorm<Eigen::Infinity>();
    stack.jacobian(x, jac);
    grad = (x - target) + jac.transpose() * (mu * c - lambda);
    pg_norm = projected_gradient(x, grad).lpNorm<Eigen::Infinity>();

    if (violation <= opt.constraint_tolerance && pg_norm <= kPgTol) break;
    if (res.iterations >= opt.max_iterations) break;

    if (violation <= std::max(0.25 * violation_prev, opt.constraint_tolerance)) {
      lambda -= mu * c;
      violation_prev = violation;
      omega = std::max(omega * 0.2, 1e-12);
    } else {
      mu = std::min(mu * 10.0, 1e10);
      omega = std::max(omega * 0.5, 1e-12);
    }
  }

  // Feasibility polish: Gauss-Newton projection onto the constraint set.
  if (violation > kPolishFloor && violation < 1e2) {
    for (int it = 0; it < 60 && res.iterations < opt.max_iterations; ++it) {
      stack.value(x, c);
      const double v = c.lpNorm<Eigen::Infinity>();
      if (v <= kPolishFloor) break;
      stack.jacobian(x, jac);
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(jac);
      const Eigen::VectorXd dx = cod.solve(-c);
      bool improved = false;
      double scale = 1.0;
      for (int ls = 0; ls < 12; ++ls) {
        const Eigen::VectorXd x_new = clamp_box(x + scale * dx);
        stack.value(x_new, c_new);
        if (c_new.lpNorm<Eigen::Infinity>() < v) {
          x = x_new;
          ++res.iterations;
          improved = true;
          break;
        }
        scale *= 0.5;
      }
      if (!improved) break;
    }
    stack.value(x, c);
    violation = c.lpNorm<Eigen::Infinity>();
    stack.jacobian(x, jac);
    grad = (x - target) + jac.transpose() * (mu * c - lambda);
    pg_norm = projected_gradient(x, grad).lpNorm<Eigen::Infinity>();
  }

  res.denoised_angles.values = x;
  res.constraint_violation = violation;
  res.objective = (x - target).norm();
  res.converged = violation <= opt.constraint_tolerance &&
                  pg_norm <= std::max(kPgTol, 1e-4 * (1.0 + res.objective));
  return res;
}

inline DenoiseResult denoise(const DenoiseProblem& problem) {
  const double lo = problem.options.bound_margin;
  const double hi = kPi - problem.options.bound_margin;
  return denoise(problem, problem.noisy_angles.values.cwiseMax(lo).cwiseMin(hi));
}

/// Solves with only the first `n_constraints` constraints in the fixed order:
/// all linear rows first, then quads in enumeration order.
inline DenoiseResult denoise_with_constraint_prefix(const DenoiseProblem& problem,
                                                    int n_constraints) {
  const int total = problem.linear.rows() + problem.quads.size();
  if (n_constraints < 0 || n_constraints > total)
    throw IndexError("denoise_with_constraint_prefix: count out of range [0, " +
                     std::to_string(total) + "]");
  DenoiseProblem sub = problem;
  const int keep_linear = std::min(n_constraints, problem.linear.rows());
  sub.linear = problem.linear.prefix(keep_linear);
  sub.quads = problem.quads.prefix(n_constraints - keep_linear);
  return denoise(sub);
}

}  // namespace anglekit
