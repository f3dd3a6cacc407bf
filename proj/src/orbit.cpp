#include "mdkit/orbit.hpp"

#include <cmath>
#include <limits>

#include "mdkit/averaging.hpp"
#include "mdkit/errors.hpp"
#include "mdkit/linalg.hpp"
#include "mdkit/ode_core.hpp"

namespace mdkit::orbit {

State poincare_displacement(const ModelParams& p, const ForcingSeries& f, State z0, const IntegratorOptions& opt) {
  return flow_full(p, f, z0, p.period(), opt) - z0;
}

PeriodicOrbit shoot_refine(const ModelParams& p, const ForcingSeries& f, State z_init, const ShootOptions& opt) {
  p.validate();
  if (p.epsilon == 0.0) {
    throw InvalidArgument("shoot_refine: epsilon = 0 makes every orbit T-periodic; refinement is undefined");
  }
  if (!z_init.finite()) throw InvalidArgument("shoot_refine: initial guess must be finite");

  State z = z_init;
  State best = z;
  double best_res = std::numeric_limits<double>::infinity();
  int it = 0;
  try {
    PeriodMap pm = period_map(p, f, z, opt.integrator);
    State r = pm.end - z;
    double rn = r.norm();
    best_res = rn;
    for (;; ++it) {
      if (rn <= opt.tol) {
        PeriodicOrbit orbit;
        orbit.z_star = z;
        orbit.period = p.period();
        orbit.residual = rn;
        orbit.monodromy = pm.jacobian;
        orbit.multipliers = eigenvalues(pm.jacobian);
        orbit.iterations = it;
        return orbit;
      }
      if (it >= opt.max_iter) {
        throw NoConvergence(best, best_res, it, "shoot_refine: iteration cap reached");
      }
      const Mat2 j = pm.jacobian - Mat2::identity();
      const State step = -1.0 * regularized_solve(j, r, opt.tikhonov);
      if (step.norm() == 0.0 || !step.finite()) {
        throw SingularSystem(best, best_res, it, "shoot_refine: singular shooting system");
      }
      double lambda = 1.0;
      bool accepted = false;
      for (int k = 0; k <= opt.max_halvings; ++k, lambda *= 0.5) {
        const State trial = z + lambda * step;
        PeriodMap trial_pm;
        try {
          trial_pm = period_map(p, f, trial, opt.integrator);
        } catch (const IntegrationError&) {
          continue;
        }
        const State rt = trial_pm.end - trial;
        const double rtn = rt.norm();
        if (std::isfinite(rtn) && rtn < rn) {
          z = trial;
          pm = trial_pm;
          r = rt;
          rn = rtn;
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        throw NoConvergence(best, best_res, it + 1, "shoot_refine: damped Newton step found no descent");
      }
      if (rn < best_res) {
        best = z;
        best_res = rn;
      }
    }
  } catch (const IntegrationError& e) {
    throw NoConvergence(best, best_res, it, std::string("shoot_refine: integration failed: ") + e.what());
  }
}

double reclosure_error(const PeriodicOrbit& orbit, const ModelParams& p, const ForcingSeries& f, int periods,
                       const IntegratorOptions& opt) {
  if (periods < 1) throw InvalidArgument("reclosure_error: periods must be >= 1");
  return (flow_full(p, f, orbit.z_star, periods * p.period(), opt) - orbit.z_star).norm();
}

std::optional<double> loglog_slope(std::span<const double> eps, std::span<const double> err) {
  const std::size_t n = std::min(eps.size(), err.size());
  if (n < 2) return std::nullopt;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(std::abs(eps[i]));
    const double ly = std::log(err[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double dn = static_cast<double>(n);
  const double denom = dn * sxx - sx * sx;
  if (denom == 0.0) return std::nullopt;
  return (dn * sxy - sx * sy) / denom;
}

ConvergenceStudy convergence_study(const ModelParams& p, const ForcingSeries& f, std::span<const double> eps_list,
                                   const ShootOptions& opt) {
  p.validate();
  if (!p.is_resonant()) throw InvalidArgument("convergence_study requires omega_n == omega_p");
  if (eps_list.empty()) throw InvalidArgument("convergence_study: empty epsilon list");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (eps_list[i] == 0.0 || !std::isfinite(eps_list[i])) {
      throw InvalidArgument("convergence_study: epsilon entries must be finite and nonzero");
    }
    if (i > 0 && !(std::abs(eps_list[i]) < std::abs(eps_list[i - 1]))) {
      throw InvalidArgument("convergence_study: epsilon list must be strictly decreasing");
    }
  }

  ConvergenceStudy study;
  study.z_pred = averaging::predicted_zero(p.omega_n, p.alpha, f.a_n(1), f.b_n(1));
  std::vector<double> ok_eps;
  std::vector<double> ok_err;
  for (double eps : eps_list) {
    ConvergenceRow row;
    row.epsilon = eps;
    ModelParams pe = p;
    pe.epsilon = eps;
    try {
      const PeriodicOrbit orbit = shoot_refine(pe, f, study.z_pred, opt);
      row.ok = true;
      row.z_star = orbit.z_star;
      row.residual = orbit.residual;
      row.error = (orbit.z_star - study.z_pred).norm();
      ok_eps.push_back(eps);
      ok_err.push_back(row.error);
    } catch (const NoConvergence& e) {
      row.ok = false;
      row.failure = e.what();
      row.error = std::numeric_limits<double>::quiet_NaN();
      row.z_star = e.best_iterate();
      row.residual = e.best_residual();
    }
    row.slope = loglog_slope(ok_eps, ok_err);
    study.rows.push_back(row);
  }
  study.slope = loglog_slope(ok_eps, ok_err);
  return study;
}

std::vector<double> sample_positions(const PeriodicOrbit& orbit, const ModelParams& p, const ForcingSeries& f,
                                     int samples, const IntegratorOptions& opt) {
  if (samples < 2) throw InvalidArgument("sampling needs at least 2 samples");
  const double period = p.period();
  const auto rhs = [&p, &f](double t, State s) { return rhs_full(p, f, t, s); };
  const IntegratorOptions o = period_options(p, opt);
  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(samples));
  State z = orbit.z_star;
  double t_prev = 0.0;
  xs.push_back(z.x);
  for (int k = 1; k < samples; ++k) {
    const double t = period * k / (samples - 1);
    z = integrate(rhs, z, t_prev, t, o);
    xs.push_back(z.x);
    t_prev = t;
  }
  return xs;
}

double max_deviation(const PeriodicOrbit& orbit, const ModelParams& p, const ForcingSeries& f,
                     const std::function<double(double)>& reference, int samples, const IntegratorOptions& opt) {
  const std::vector<double> xs = sample_positions(orbit, p, f, samples, opt);
  const double period = p.period();
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double t = period * k / (samples - 1);
    worst = std::max(worst, std::abs(xs[static_cast<std::size_t>(k)] - reference(t)));
  }
  return worst;
}

double compare_two_timing(const PeriodicOrbit& orbit, const ModelParams& p, const ForcingSeries& f,
                          const two_timing::ResonantEquilibrium& prediction, int samples,
                          const IntegratorOptions& opt) {
  const double omega = p.omega_n;
  return max_deviation(
      orbit, p, f, [&](double t) { return two_timing::zeroth_order_solution(prediction, omega, t); }, samples, opt);
}

}  // namespace mdkit::orbit
