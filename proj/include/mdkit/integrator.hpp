#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <type_traits>

#include "mdkit/errors.hpp"
#include "mdkit/types.hpp"

namespace mdkit {

enum class StepMethod {
  dormand_prince,  ///< embedded RK 5(4), adaptive, PI step control
  rk4_fixed,       ///< classical RK4, fixed number of steps per period
};

struct IntegratorOptions {
  StepMethod method = StepMethod::dormand_prince;
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;

  // Fixed-step mode: the interval [t0, t1] is split into
  // ceil(steps_per_period * (t1 - t0) / period) equal steps.
  int steps_per_period = 4000;
  double period = kTwoPi;

  long max_steps = 50'000'000;
  double blow_up_limit = 1e8;

  [[nodiscard]] static IntegratorOptions fixed(int steps_per_period, double period) {
    IntegratorOptions o;
    o.method = StepMethod::rk4_fixed;
    o.steps_per_period = steps_per_period;
    o.period = period;
    return o;
  }
};

namespace detail {

template <std::size_t N>
Vec<N> axpy(const Vec<N>& y, double h, const Vec<N>& k) {
  Vec<N> r;
  for (std::size_t i = 0; i < N; ++i) r[i] = y[i] + h * k[i];
  return r;
}

template <std::size_t N>
void check_state(const Vec<N>& y, double t, double limit) {
  for (double v : y) {
    if (!std::isfinite(v)) {
      throw IntegrationError(IntegrationStatus::non_finite, t,
                             "integration produced a non-finite state at t=" + std::to_string(t));
    }
    if (std::abs(v) > limit) {
      throw IntegrationError(IntegrationStatus::blow_up, t,
                             "state magnitude exceeded blow-up limit at t=" + std::to_string(t));
    }
  }
}

template <std::size_t N, class Rhs>
Vec<N> rk4_step(const Rhs& rhs, double t, const Vec<N>& y, double h) {
  const Vec<N> k1 = rhs(t, y);
  const Vec<N> k2 = rhs(t + 0.5 * h, axpy(y, 0.5 * h, k1));
  const Vec<N> k3 = rhs(t + 0.5 * h, axpy(y, 0.5 * h, k2));
  const Vec<N> k4 = rhs(t + h, axpy(y, h, k3));
  Vec<N> r;
  for (std::size_t i = 0; i < N; ++i) {
    r[i] = y[i] + h * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
  }
  return r;
}

// The embedded estimate is held below this fraction of the requested tolerance so that
// errors accumulated over O(10) periods stay at the tolerance scale.
inline constexpr double kToleranceMargin = 0.3;

template <std::size_t N>
double error_norm(const Vec<N>& err, const Vec<N>& y0, const Vec<N>& y1, double atol, double rtol) {
  double worst = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double sk = kToleranceMargin * (atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i])));
    worst = std::max(worst, std::abs(err[i]) / sk);
  }
  return worst;
}

// Dormand-Prince 5(4) tableau.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                        a75 = -2187.0 / 6784, a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

template <std::size_t N, class Rhs>
Vec<N> integrate_fixed(const Rhs& rhs, Vec<N> y, double t0, double t1, const IntegratorOptions& opt) {
  if (opt.steps_per_period < 1 || !(opt.period > 0.0)) {
    throw InvalidArgument("fixed-step integration needs steps_per_period >= 1 and period > 0");
  }
  const double span = t1 - t0;
  const auto steps = static_cast<long>(
      std::max(1.0, std::ceil(opt.steps_per_period * span / opt.period - 1e-9)));
  const double h = span / static_cast<double>(steps);
  for (long i = 0; i < steps; ++i) {
    const double t = t0 + static_cast<double>(i) * h;
    y = rk4_step<N>(rhs, t, y, h);
    check_state(y, t + h, opt.blow_up_limit);
  }
  return y;
}

template <std::size_t N, class Rhs>
Vec<N> integrate_adaptive(const Rhs& rhs, Vec<N> y, double t0, double t1, const IntegratorOptions& opt) {
  constexpr double safety = 0.9;
  constexpr double fac_min = 0.2;  // largest shrink 1/5
  constexpr double fac_max = 10.0;
  constexpr double beta = 0.04;
  constexpr double expo = 0.2 - beta * 0.75;

  const double atol = opt.abs_tol;
  const double rtol = opt.rel_tol;
  const double span = t1 - t0;

  Vec<N> k1 = rhs(t0, y);

  // Initial step guess (Hairer & Wanner, II.4).
  double h;
  {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sk = atol + rtol * std::abs(y[i]);
      d0 += (y[i] / sk) * (y[i] / sk);
      d1 += (k1[i] / sk) * (k1[i] / sk);
    }
    d0 = std::sqrt(d0 / N);
    d1 = std::sqrt(d1 / N);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    const Vec<N> y1 = axpy(y, h0, k1);
    const Vec<N> f1 = rhs(t0 + h0, y1);
    double d2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sk = atol + rtol * std::abs(y[i]);
      const double q = (f1[i] - k1[i]) / sk;
      d2 += q * q;
    }
    d2 = std::sqrt(d2 / N) / h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    h = std::min({100.0 * h0, h1, span});
  }

  double t = t0;
  double fac_old = 1e-4;
  bool last_rejected = false;
  long steps = 0;

  while (t < t1) {
    if (++steps > opt.max_steps) {
      throw IntegrationError(IntegrationStatus::max_steps_exceeded, t, "maximum number of steps exceeded");
    }
    if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
      throw IntegrationError(IntegrationStatus::step_size_underflow, t,
                             "step size underflow at t=" + std::to_string(t));
    }
    bool final_step = false;
    if (t + h >= t1) {
      h = t1 - t;
      final_step = true;
    }

    Vec<N> tmp;
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    const Vec<N> k2 = rhs(t + c2 * h, tmp);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    const Vec<N> k3 = rhs(t + c3 * h, tmp);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    const Vec<N> k4 = rhs(t + c4 * h, tmp);
    for (std::size_t i = 0; i < N; ++i) {
      tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    }
    const Vec<N> k5 = rhs(t + c5 * h, tmp);
    for (std::size_t i = 0; i < N; ++i) {
      tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    }
    const Vec<N> k6 = rhs(t + h, tmp);
    Vec<N> y_new;
    for (std::size_t i = 0; i < N; ++i) {
      y_new[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    }
    const Vec<N> k7 = rhs(t + h, y_new);
    Vec<N> err;
    for (std::size_t i = 0; i < N; ++i) {
      err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    }

    double en = error_norm(err, y, y_new, atol, rtol);
    if (!std::isfinite(en)) en = 1e10;

    const double fac11 = std::pow(en, expo);
    double fac = fac11 / std::pow(fac_old, beta);
    fac = std::clamp(fac / safety, 1.0 / fac_max, 1.0 / fac_min);
    double h_new = h / fac;

    if (en <= 1.0) {
      fac_old = std::max(en, 1e-4);
      t = final_step ? t1 : t + h;
      y = y_new;
      k1 = k7;
      check_state(y, t, opt.blow_up_limit);
      if (last_rejected) h_new = std::min(h_new, h);
      last_rejected = false;
    } else {
      h_new = h / std::min(1.0 / fac_min, fac11 / safety);
      last_rejected = true;
    }
    h = h_new;
  }
  return y;
}

}  // namespace detail

/// Solve y' = rhs(t, y) from (t0, y0) to t1. rhs: (double, const Vec<N>&) -> Vec<N>.
/// Throws IntegrationError on step-size underflow, blow-up, non-finite state or step cap.
template <std::size_t N, class Rhs>
[[nodiscard]] Vec<N> integrate(const Rhs& rhs, const Vec<N>& y0, double t0, double t1,
                               const IntegratorOptions& opt = {}) {
  if (!(t1 >= t0)) throw InvalidArgument("integrate: t1 must not precede t0");
  if (opt.method == StepMethod::dormand_prince && !(opt.abs_tol > 0.0 && opt.rel_tol > 0.0)) {
    throw InvalidArgument("integrate: tolerances must be positive");
  }
  if (t1 == t0) return y0;
  detail::check_state(y0, t0, opt.blow_up_limit);
  if (opt.method == StepMethod::rk4_fixed) return detail::integrate_fixed<N>(rhs, y0, t0, t1, opt);
  return detail::integrate_adaptive<N>(rhs, y0, t0, t1, opt);
}

/// State-valued convenience overload. rhs: (double, State) -> State.
template <class Rhs>
  requires std::is_invocable_r_v<State, Rhs, double, State>
[[nodiscard]] State integrate(const Rhs& rhs, State z0, double t0, double t1,
                              const IntegratorOptions& opt = {}) {
  const auto wrapped = [&rhs](double t, const Vec<2>& v) { return rhs(t, State::from_vec(v)).as_vec(); };
  return State::from_vec(integrate<2>(wrapped, z0.as_vec(), t0, t1, opt));
}

}  // namespace mdkit
