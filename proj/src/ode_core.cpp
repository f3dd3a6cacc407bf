#include "mdkit/ode_core.hpp"

#include <cmath>
#include <string>

#include "mdkit/errors.hpp"

namespace mdkit {

ModelParams ModelParams::resonant(double omega, double epsilon, double alpha) {
  ModelParams p{omega, omega, epsilon, alpha};
  p.validate();
  return p;
}

void ModelParams::validate() const {
  if (!(std::isfinite(omega_n) && omega_n > 0.0)) throw InvalidArgument("omega_n must be finite and > 0");
  if (!(std::isfinite(omega_p) && omega_p > 0.0)) throw InvalidArgument("omega_p must be finite and > 0");
  if (!std::isfinite(epsilon)) throw InvalidArgument("epsilon must be finite");
  if (!std::isfinite(alpha)) throw InvalidArgument("alpha must be finite");
}

double reduce_angle(double theta) {
  double r = std::fmod(theta, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r + 0.0;  // maps -0.0 to +0.0
}

namespace {

// t modulo the period 2pi/omega, in [0, T).
double reduce_time(double omega, double t) {
  const double period = kTwoPi / omega;
  double r = std::fmod(t, period);
  if (r < 0.0) r += period;
  return r;
}

}  // namespace

double reduced_cos(double omega, double t) { return std::cos(reduce_angle(omega * reduce_time(omega, t))); }

double eval_forcing(const ForcingSeries& f, double omega, double t) {
  const double tr = reduce_time(omega, t);
  double sum = 0.0;
  for (std::size_t n = 1; n <= f.harmonics(); ++n) {
    const double a = f.a_n(n);
    const double b = f.b_n(n);
    if (a == 0.0 && b == 0.0) continue;
    const double phase = reduce_angle(static_cast<double>(n) * omega * tr);
    sum += a * std::cos(phase) + b * std::sin(phase);
  }
  return sum;
}

State rhs_full(const ModelParams& p, const ForcingSeries& f, double t, State s) {
  const double forcing = eval_forcing(f, p.omega_p, t);
  const double parametric = reduced_cos(p.omega_p, t);
  return {s.y, -p.omega_n * p.omega_n * s.x +
                   p.epsilon * (forcing - p.alpha * s.x * s.x * s.x - parametric * s.x)};
}

State rhs_unperturbed(const ModelParams& p, State s) { return {s.y, -p.omega_n * p.omega_n * s.x}; }

State unperturbed_flow_closed(const ModelParams& p, State z0, double t) {
  const double w = p.omega_n;
  const double c = std::cos(w * t);
  const double s = std::sin(w * t);
  return {(w * z0.x * c + z0.y * s) / w, -w * z0.x * s + z0.y * c};
}

IntegratorOptions period_options(const ModelParams& p, IntegratorOptions opt) {
  opt.period = p.period();
  return opt;
}

Mat2 monodromy(const ModelParams& p, const ForcingSeries& f, const MonodromyMode& mode,
               const IntegratorOptions& opt) {
  p.validate();
  if (const auto* orbit = std::get_if<LinearizedAboutOrbit>(&mode)) {
    return period_map(p, f, orbit->z0, opt).jacobian;
  }
  const double wn2 = p.omega_n * p.omega_n;
  // Columns (u1, v1), (u2, v2) of the fundamental matrix.
  const auto rhs = [&p, wn2](double t, const Vec<4>& z) -> Vec<4> {
    const double k = wn2 + p.epsilon * reduced_cos(p.omega_p, t);
    return {z[1], -k * z[0], z[3], -k * z[2]};
  };
  const Vec<4> end = integrate<4>(rhs, Vec<4>{1.0, 0.0, 0.0, 1.0}, 0.0, p.period(), period_options(p, opt));
  return {end[0], end[2], end[1], end[3]};
}

PeriodMap period_map(const ModelParams& p, const ForcingSeries& f, State z0, const IntegratorOptions& opt) {
  p.validate();
  const double wn2 = p.omega_n * p.omega_n;
  // Layout: x, y, then fundamental-matrix columns (p11, p21), (p12, p22).
  const auto rhs = [&p, &f, wn2](double t, const Vec<6>& z) -> Vec<6> {
    const State d = rhs_full(p, f, t, {z[0], z[1]});
    const double k = wn2 + p.epsilon * (reduced_cos(p.omega_p, t) + 3.0 * p.alpha * z[0] * z[0]);
    return {d.x, d.y, z[3], -k * z[2], z[5], -k * z[4]};
  };
  const Vec<6> end =
      integrate<6>(rhs, Vec<6>{z0.x, z0.y, 1.0, 0.0, 0.0, 1.0}, 0.0, p.period(), period_options(p, opt));
  return {{end[0], end[1]}, {end[2], end[4], end[3], end[5]}};
}

State flow_full(const ModelParams& p, const ForcingSeries& f, State z0, double t, const IntegratorOptions& opt) {
  p.validate();
  const auto rhs = [&p, &f](double tt, State s) { return rhs_full(p, f, tt, s); };
  return integrate(rhs, z0, 0.0, t, period_options(p, opt));
}

}  // namespace mdkit
