#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mdkit/integrator.hpp"
#include "mdkit/two_timing.hpp"
#include "mdkit/types.hpp"

namespace mdkit::orbit {

struct PeriodicOrbit {
  State z_star;
  double period = 0.0;
  double residual = 0.0;  ///< |phi_T(z*) - z*|
  Mat2 monodromy;
  std::pair<std::complex<double>, std::complex<double>> multipliers;
  int iterations = 0;
};

struct ShootOptions {
  double tol = 1e-10;
  int max_iter = 25;
  int max_halvings = 30;
  double tikhonov = 1e-14;
  IntegratorOptions integrator;
};

/// phi_T(z0) - z0 for the full system, T = 2 pi / omega_p.
[[nodiscard]] State poincare_displacement(const ModelParams& p, const ForcingSeries& f, State z0,
                                          const IntegratorOptions& opt = {});

/// Damped Newton on the displacement map with Jacobian M - I.
/// Throws InvalidArgument for eps == 0, NoConvergence (best iterate attached) otherwise.
[[nodiscard]] PeriodicOrbit shoot_refine(const ModelParams& p, const ForcingSeries& f, State z_init,
                                         const ShootOptions& opt = {});

/// |phi_{periods T}(z*) - z*|.
[[nodiscard]] double reclosure_error(const PeriodicOrbit& orbit, const ModelParams& p, const ForcingSeries& f,
                                     int periods, const IntegratorOptions& opt);

struct ConvergenceRow {
  double epsilon = 0.0;
  double error = 0.0;  ///< |z*(eps) - z_pred|, NaN on failure
  /// Least-squares log-log slope over the successful rows up to and including this one.
  std::optional<double> slope;
  bool ok = false;
  std::string failure;
  State z_star;
  double residual = 0.0;
};

struct ConvergenceStudy {
  State z_pred;
  std::vector<ConvergenceRow> rows;
  std::optional<double> slope;  ///< over all successful rows; empty with fewer than two
};

/// Least-squares slope of log(err) against log(|eps|).
[[nodiscard]] std::optional<double> loglog_slope(std::span<const double> eps, std::span<const double> err);

/// `p` must be resonant; its epsilon is replaced by each list entry. The list must be strictly
/// decreasing in magnitude with no zero entries.
[[nodiscard]] ConvergenceStudy convergence_study(const ModelParams& p, const ForcingSeries& f,
                                                 std::span<const double> eps_list, const ShootOptions& opt = {});

/// max_k |x_orbit(t_k) - reference(t_k)| over `samples` equi-spaced t_k in [0, T].
[[nodiscard]] double max_deviation(const PeriodicOrbit& orbit, const ModelParams& p, const ForcingSeries& f,
                                   const std::function<double(double)>& reference, int samples,
                                   const IntegratorOptions& opt);

/// Position samples x(t_k) along the orbit (same grid as max_deviation).
[[nodiscard]] std::vector<double> sample_positions(const PeriodicOrbit& orbit, const ModelParams& p,
                                                   const ForcingSeries& f, int samples, const IntegratorOptions& opt);

/// Deviation from the zeroth-order two-timing solution.
[[nodiscard]] double compare_two_timing(const PeriodicOrbit& orbit, const ModelParams& p, const ForcingSeries& f,
                                        const two_timing::ResonantEquilibrium& prediction, int samples,
                                        const IntegratorOptions& opt);

}  // namespace mdkit::orbit
