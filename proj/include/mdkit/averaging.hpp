#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mdkit/types.hpp"

namespace mdkit::averaging {

/// Components (f11, f21) of the first-order bifurcation function.
struct BifurcationValue {
  double f11 = 0.0;
  double f21 = 0.0;

  [[nodiscard]] double norm() const { return std::hypot(f11, f21); }
  [[nodiscard]] State as_state() const { return {f11, f21}; }
};

/// Inverse fundamental matrix of the harmonic oscillator with frequency omega.
[[nodiscard]] Mat2 fundamental_matrix_inverse(double omega, double t);

/// Closed form of the bifurcation function of the resonant system.
[[nodiscard]] BifurcationValue bifurcation_fn_closed(double omega, double alpha, double a1, double b1, State z0);

/// Quadrature evaluation together with the three partial integrals
/// f1 = forcing - cubic - parametric.
struct QuadratureBreakdown {
  BifurcationValue total;
  BifurcationValue forcing;     ///< integral of Y^-1 (0, f(t))
  BifurcationValue cubic;       ///< integral of Y^-1 (0, alpha x^3)
  BifurcationValue parametric;  ///< integral of Y^-1 (0, cos(omega t) x)
};

inline constexpr int kDefaultQuadPoints = 2048;

/// Composite trapezoid over one exact period. Requires omega_n == omega_p and quad_points >= 64.
[[nodiscard]] QuadratureBreakdown bifurcation_quadrature(const ModelParams& p, const ForcingSeries& f, State z0,
                                                         int quad_points = kDefaultQuadPoints);

[[nodiscard]] inline BifurcationValue bifurcation_fn_quadrature(const ModelParams& p, const ForcingSeries& f,
                                                              State z0, int quad_points = kDefaultQuadPoints) {
  return bifurcation_quadrature(p, f, z0, quad_points).total;
}

/// sign(u) |u|^(1/3).
[[nodiscard]] double real_cbrt(double u);

enum class SignConvention {
  positive,  ///< (x0*, y0*) = (+cbrt(..), +cbrt(..))
  negative,  ///< both components negated
};

[[nodiscard]] const char* to_string(SignConvention c);

struct ZeroPrediction {
  State point;
  SignConvention chosen = SignConvention::positive;
  double residual_positive = 0.0;  ///< |f1| at the positive-sign candidate
  double residual_negative = 0.0;  ///< |f1| at the negated candidate
};

/// Predicted zero of the bifurcation function. Both sign conventions are scored
/// by |f1| and the smaller residual wins.
/// Throws HypothesisViolation for alpha == 0 or a1 == b1 == 0.
[[nodiscard]] ZeroPrediction predicted_zero_scored(double omega, double alpha, double a1, double b1);

[[nodiscard]] inline State predicted_zero(double omega, double alpha, double a1, double b1) {
  return predicted_zero_scored(omega, alpha, a1, b1).point;
}

/// d(f11, f21) / d(x0, y0), analytic.
[[nodiscard]] Mat2 averaging_jacobian(double omega, double alpha, State z0);

/// (27 pi^2 alpha^2 / 16 omega^8) (y0^2 + omega^2 x0^2)^2.
[[nodiscard]] double jacobian_det_closed(double omega, double alpha, State z0);

struct AveragingPrediction {
  double x0_star = 0.0;
  double y0_star = 0.0;
  double det_jacobian = 0.0;
  double residual_norm = 0.0;
  bool verified = false;      ///< residual_norm <= tolerance
  bool nondegenerate = false; ///< det_jacobian != 0
  ZeroPrediction signs;
};

/// predicted_zero plus the certificate data. omega must be > 0.
[[nodiscard]] AveragingPrediction predict(double omega, double alpha, double a1, double b1,
                                          double residual_tol = 1e-10);

// --- Newton root finding -------------------------------------------------------

using Objective = std::function<State(State)>;
using JacobianFn = std::function<Mat2(State)>;

struct NewtonOptions {
  double tol = 1e-12;
  int max_iter = 50;
  int max_halvings = 30;
  double fd_step = 1e-6;  ///< central-difference step when no Jacobian is given
};

struct NewtonResult {
  State root;
  double residual = 0.0;
  int iterations = 0;
};

/// Central finite-difference Jacobian of g at z.
[[nodiscard]] Mat2 finite_difference_jacobian(const Objective& g, State z, double h);

/// Damped Newton with regularized (pseudo) solve. Throws NoConvergence with the best
/// iterate when the cap is hit, SingularSystem when no descent step exists.
[[nodiscard]] NewtonResult newton_root(const Objective& g, State guess, const NewtonOptions& opt = {},
                                       const JacobianFn& jacobian = {});

/// Objective and analytic Jacobian of the closed-form bifurcation function.
[[nodiscard]] Objective closed_objective(double omega, double alpha, double a1, double b1);
[[nodiscard]] JacobianFn closed_jacobian(double omega, double alpha);

// --- grid kernels ------------------------------------------------------------

struct GridRow {
  double x0 = 0.0;
  double y0 = 0.0;
  BifurcationValue closed;
  BifurcationValue quadrature;

  [[nodiscard]] double abs_diff() const {
    return std::max(std::abs(closed.f11 - quadrature.f11), std::abs(closed.f21 - quadrature.f21));
  }
};

/// Closed form and quadrature over the row-major product grid xs x ys (y fastest).
[[nodiscard]] std::vector<GridRow> bifurcation_grid(const ModelParams& p, const ForcingSeries& f,
                                                    std::span<const double> xs, std::span<const double> ys,
                                                    int quad_points = kDefaultQuadPoints);

/// Serial reference for bifurcation_grid.
[[nodiscard]] std::vector<GridRow> bifurcation_grid_serial(const ModelParams& p, const ForcingSeries& f,
                                                           std::span<const double> xs, std::span<const double> ys,
                                                           int quad_points = kDefaultQuadPoints);

}  // namespace mdkit::averaging
