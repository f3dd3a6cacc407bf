#include "mdkit/averaging.hpp"

#include <cmath>
#include <limits>

#include "mdkit/errors.hpp"
#include "mdkit/linalg.hpp"
#include "mdkit/ode_core.hpp"

namespace mdkit::averaging {

namespace {

void require_omega(double omega) {
  if (!(std::isfinite(omega) && omega > 0.0)) throw InvalidArgument("omega must be finite and > 0");
}

void require_hypotheses(double alpha, double a1, double b1) {
  if (alpha == 0.0) throw HypothesisViolation("alpha must be nonzero (cubic stiffness hypothesis)");
  if (a1 == 0.0 && b1 == 0.0) {
    throw HypothesisViolation("first-harmonic forcing coefficients a1, b1 must not both vanish");
  }
}

}  // namespace

Mat2 fundamental_matrix_inverse(double omega, double t) {
  require_omega(omega);
  const double c = std::cos(omega * t);
  const double s = std::sin(omega * t);
  return {c, -s / omega, omega * s, c};
}

BifurcationValue bifurcation_fn_closed(double omega, double alpha, double a1, double b1, State z0) {
  require_omega(omega);
  const double w2 = omega * omega;
  const double w3 = w2 * omega;
  const double w5 = w3 * w2;
  const double r = w2 * z0.x * z0.x + z0.y * z0.y;
  return {-kPi / w2 * b1 + 3.0 * kPi * alpha * z0.y * r / (4.0 * w5),
          kPi / omega * a1 - 3.0 * kPi * alpha * z0.x * r / (4.0 * w3)};
}

QuadratureBreakdown bifurcation_quadrature(const ModelParams& p, const ForcingSeries& f, State z0,
                                           int quad_points) {
  p.validate();
  if (!p.is_resonant()) throw InvalidArgument("bifurcation quadrature requires omega_n == omega_p");
  if (quad_points < 64) throw InvalidArgument("quad_points must be >= 64");

  const double w = p.omega_n;
  const double period = kTwoPi / w;
  const double h = period / quad_points;
  QuadratureBreakdown out;
  auto accumulate = [h, w](BifurcationValue& acc, double c, double s, double g) {
    // Y^-1(t) (0, g)^T = (-sin(wt)/w g, cos(wt) g)
    acc.f11 += h * (-s / w * g);
    acc.f21 += h * (c * g);
  };
  for (int k = 0; k < quad_points; ++k) {
    const double theta = kTwoPi * k / quad_points;
    const double t = theta / w;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double x = (w * z0.x * c + z0.y * s) / w;
    accumulate(out.forcing, c, s, eval_forcing(f, w, t));
    accumulate(out.cubic, c, s, p.alpha * x * x * x);
    accumulate(out.parametric, c, s, c * x);
  }
  out.total = {out.forcing.f11 - out.cubic.f11 - out.parametric.f11,
               out.forcing.f21 - out.cubic.f21 - out.parametric.f21};
  return out;
}

double real_cbrt(double u) { return std::cbrt(u); }

const char* to_string(SignConvention c) { return c == SignConvention::positive ? "positive" : "negative"; }

ZeroPrediction predicted_zero_scored(double omega, double alpha, double a1, double b1) {
  require_omega(omega);
  require_hypotheses(alpha, a1, b1);
  const double s = a1 * a1 + b1 * b1;
  const double x = real_cbrt(4.0 * a1 * a1 * a1 / (3.0 * alpha * s));
  const double y = real_cbrt(4.0 * b1 * b1 * b1 * omega * omega * omega / (3.0 * alpha * s));
  ZeroPrediction out;
  out.residual_positive = bifurcation_fn_closed(omega, alpha, a1, b1, {x, y}).norm();
  out.residual_negative = bifurcation_fn_closed(omega, alpha, a1, b1, {-x, -y}).norm();
  if (out.residual_negative < out.residual_positive) {
    out.chosen = SignConvention::negative;
    out.point = {-x, -y};
  } else {
    out.chosen = SignConvention::positive;
    out.point = {x, y};
  }
  return out;
}

Mat2 averaging_jacobian(double omega, double alpha, State z0) {
  require_omega(omega);
  const double w2 = omega * omega;
  const double w3 = w2 * omega;
  const double w5 = w3 * w2;
  const double x = z0.x;
  const double y = z0.y;
  const double cross = 3.0 * kPi * alpha * x * y / (2.0 * w3);
  return {cross, 3.0 * kPi * alpha * (w2 * x * x + 3.0 * y * y) / (4.0 * w5),
          -3.0 * kPi * alpha * (y * y + 3.0 * w2 * x * x) / (4.0 * w3), -cross};
}

double jacobian_det_closed(double omega, double alpha, State z0) {
  require_omega(omega);
  const double w2 = omega * omega;
  const double w8 = w2 * w2 * w2 * w2;
  const double r = z0.y * z0.y + w2 * z0.x * z0.x;
  return 27.0 * kPi * kPi * alpha * alpha / (16.0 * w8) * r * r;
}

AveragingPrediction predict(double omega, double alpha, double a1, double b1, double residual_tol) {
  AveragingPrediction out;
  out.signs = predicted_zero_scored(omega, alpha, a1, b1);
  out.x0_star = out.signs.point.x;
  out.y0_star = out.signs.point.y;
  out.residual_norm = bifurcation_fn_closed(omega, alpha, a1, b1, out.signs.point).norm();
  out.det_jacobian = jacobian_det_closed(omega, alpha, out.signs.point);
  out.verified = out.residual_norm <= residual_tol;
  out.nondegenerate = out.det_jacobian != 0.0;
  return out;
}

Mat2 finite_difference_jacobian(const Objective& g, State z, double h) {
  const State gxp = g({z.x + h, z.y});
  const State gxm = g({z.x - h, z.y});
  const State gyp = g({z.x, z.y + h});
  const State gym = g({z.x, z.y - h});
  return {(gxp.x - gxm.x) / (2 * h), (gyp.x - gym.x) / (2 * h), (gxp.y - gxm.y) / (2 * h),
          (gyp.y - gym.y) / (2 * h)};
}

NewtonResult newton_root(const Objective& g, State guess, const NewtonOptions& opt, const JacobianFn& jacobian) {
  if (!(opt.tol > 0.0)) throw InvalidArgument("newton_root: tol must be > 0");
  State z = guess;
  State r = g(z);
  double rn = r.norm();
  State best = z;
  double best_rn = rn;

  for (int it = 0;; ++it) {
    if (!std::isfinite(rn)) {
      throw NoConvergence(best, best_rn, it, "newton_root: non-finite residual");
    }
    if (rn <= opt.tol) return {z, rn, it};
    if (it >= opt.max_iter) {
      throw NoConvergence(best, best_rn, it, "newton_root: iteration cap reached");
    }
    const Mat2 j = jacobian ? jacobian(z) : finite_difference_jacobian(g, z, opt.fd_step);
    const double scale = std::max(j.max_abs() * j.max_abs(), std::numeric_limits<double>::min());
    const State step = -1.0 * regularized_solve(j, r, 1e-14 * scale);
    if (step.norm() == 0.0 || !step.finite()) {
      throw SingularSystem(best, best_rn, it, "newton_root: singular Jacobian at iterate");
    }
    double lambda = 1.0;
    bool accepted = false;
    for (int k = 0; k <= opt.max_halvings; ++k, lambda *= 0.5) {
      const State trial = z + lambda * step;
      const State rt = g(trial);
      const double rtn = rt.norm();
      if (std::isfinite(rtn) && rtn < rn) {
        z = trial;
        r = rt;
        rn = rtn;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw NoConvergence(best, best_rn, it + 1, "newton_root: no descent along damped Newton direction");
    }
    if (rn < best_rn) {
      best = z;
      best_rn = rn;
    }
  }
}

Objective closed_objective(double omega, double alpha, double a1, double b1) {
  return [=](State z) { return bifurcation_fn_closed(omega, alpha, a1, b1, z).as_state(); };
}

JacobianFn closed_jacobian(double omega, double alpha) {
  return [=](State z) { return averaging_jacobian(omega, alpha, z); };
}

namespace {

GridRow grid_cell(const ModelParams& p, const ForcingSeries& f, double x, double y, int quad_points) {
  GridRow row;
  row.x0 = x;
  row.y0 = y;
  row.closed = bifurcation_fn_closed(p.omega_n, p.alpha, f.a_n(1), f.b_n(1), {x, y});
  row.quadrature = bifurcation_fn_quadrature(p, f, {x, y}, quad_points);
  return row;
}

void check_grid_inputs(const ModelParams& p, int quad_points) {
  p.validate();
  if (!p.is_resonant()) throw InvalidArgument("bifurcation grid requires omega_n == omega_p");
  if (quad_points < 64) throw InvalidArgument("quad_points must be >= 64");
}

}  // namespace

std::vector<GridRow> bifurcation_grid_serial(const ModelParams& p, const ForcingSeries& f,
                                             std::span<const double> xs, std::span<const double> ys,
                                             int quad_points) {
  check_grid_inputs(p, quad_points);
  std::vector<GridRow> rows;
  rows.reserve(xs.size() * ys.size());
  for (double x : xs) {
    for (double y : ys) rows.push_back(grid_cell(p, f, x, y, quad_points));
  }
  return rows;
}

std::vector<GridRow> bifurcation_grid(const ModelParams& p, const ForcingSeries& f, std::span<const double> xs,
                                      std::span<const double> ys, int quad_points) {
  check_grid_inputs(p, quad_points);
  const auto nx = static_cast<long>(xs.size());
  const auto ny = static_cast<long>(ys.size());
  std::vector<GridRow> rows(static_cast<std::size_t>(nx * ny));
#pragma omp parallel for schedule(static)
  for (long idx = 0; idx < nx * ny; ++idx) {
    rows[static_cast<std::size_t>(idx)] =
        grid_cell(p, f, xs[static_cast<std::size_t>(idx / ny)], ys[static_cast<std::size_t>(idx % ny)], quad_points);
  }
  return rows;
}

}  // namespace mdkit::averaging
