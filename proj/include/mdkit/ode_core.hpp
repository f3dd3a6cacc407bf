#pragma once

#include <variant>

#include "mdkit/integrator.hpp"
#include "mdkit/types.hpp"

namespace mdkit {

/// Reduce an angle into [0, 2pi).
[[nodiscard]] double reduce_angle(double theta);

/// sum_n a_n cos(n omega t) + b_n sin(n omega t). Each argument n*omega*t is
/// reduced modulo 2pi (after reducing t modulo the period) before evaluation.
[[nodiscard]] double eval_forcing(const ForcingSeries& f, double omega, double t);

/// cos(omega t) with the same argument reduction as eval_forcing.
[[nodiscard]] double reduced_cos(double omega, double t);

/// Full forced Mathieu-Duffing vector field; the forcing uses omega_p as base frequency.
[[nodiscard]] State rhs_full(const ModelParams& p, const ForcingSeries& f, double t, State s);

/// Harmonic oscillator x' = y, y' = -omega_n^2 x.
[[nodiscard]] State rhs_unperturbed(const ModelParams& p, State s);

/// Closed-form flow of rhs_unperturbed.
[[nodiscard]] State unperturbed_flow_closed(const ModelParams& p, State z0, double t);

/// Linear Mathieu equation x'' + (omega_n^2 + eps cos omega_p t) x = 0.
struct LinearMathieu {};

/// Variational equation along the full-system orbit through z0.
struct LinearizedAboutOrbit {
  State z0;
};

using MonodromyMode = std::variant<LinearMathieu, LinearizedAboutOrbit>;

/// Integrator settings for one period T = 2 pi / omega_p (fixed-step period is overridden).
[[nodiscard]] IntegratorOptions period_options(const ModelParams& p, IntegratorOptions opt);

/// Time-T fundamental matrix (identity at t = 0), T = 2 pi / omega_p.
[[nodiscard]] Mat2 monodromy(const ModelParams& p, const ForcingSeries& f, const MonodromyMode& mode,
                             const IntegratorOptions& opt = {});

struct PeriodMap {
  State end;     ///< phi_T(z0)
  Mat2 jacobian; ///< D phi_T(z0)
};

/// Integrates the orbit and its variational matrix together over one period.
[[nodiscard]] PeriodMap period_map(const ModelParams& p, const ForcingSeries& f, State z0,
                                   const IntegratorOptions& opt = {});

/// phi_t(z0) of the full system from time 0.
[[nodiscard]] State flow_full(const ModelParams& p, const ForcingSeries& f, State z0, double t,
                              const IntegratorOptions& opt = {});

}  // namespace mdkit
