#include "mdkit/two_timing.hpp"

#include <algorithm>
#include <cmath>

#include "mdkit/errors.hpp"
#include "mdkit/ode_core.hpp"

namespace mdkit::two_timing {

SlowState normalize(SlowState s) {
  if (s.amplitude < 0.0) {
    s.amplitude = -s.amplitude;
    s.psi += kPi;
  }
  s.psi = reduce_angle(s.psi);
  return s;
}

CartesianSlowState to_cartesian(SlowState s) {
  return {s.amplitude * std::cos(s.psi), -s.amplitude * std::sin(s.psi)};
}

SlowState to_polar(CartesianSlowState c) { return normalize({std::hypot(c.m, c.n), std::atan2(-c.n, c.m)}); }

SlowRate resonant_slow_rhs(double omega, double alpha, double a1, double b1, SlowState s) {
  if (!(omega > 0.0)) throw InvalidArgument("omega must be > 0");
  if (s.amplitude == 0.0) throw InvalidArgument("resonant slow flow: phase equation undefined at A = 0");
  const double sp = std::sin(s.psi);
  const double cp = std::cos(s.psi);
  const double a = s.amplitude;
  return {-(a1 * sp + b1 * cp) / (2.0 * omega),
          (0.75 * alpha * a * a * a - a1 * cp + b1 * sp) / (2.0 * omega * a)};
}

ResonantEquilibrium resonant_equilibrium(double omega, double alpha, double a1, double b1) {
  if (!(omega > 0.0)) throw InvalidArgument("omega must be > 0");
  if (alpha == 0.0) throw HypothesisViolation("alpha must be nonzero");
  if (a1 == 0.0 && b1 == 0.0) throw HypothesisViolation("a1 and b1 must not both vanish");

  const double s = a1 * a1 + b1 * b1;
  ResonantEquilibrium eq;
  eq.amplitude = std::pow(16.0 * s / (9.0 * alpha * alpha), 1.0 / 6.0);
  // a1 sin psi + b1 cos psi = 0 fixes psi up to pi; the sign of
  // a1 cos psi - b1 sin psi = 3 alpha A^3 / 4 picks the branch.
  double psi = std::atan2(-b1, a1);
  if (alpha < 0.0) psi += kPi;
  eq.psi = reduce_angle(psi);
  eq.x0_star = eq.amplitude * std::cos(eq.psi);
  eq.y0_star = -omega * eq.amplitude * std::sin(eq.psi);
  return eq;
}

double zeroth_order_solution(const ResonantEquilibrium& eq, double omega, double t) {
  const double phase = reduce_angle(omega * t);
  return eq.x0_star * std::cos(phase) + eq.y0_star / omega * std::sin(phase);
}

void TongueParams::validate() const {
  if (!(std::isfinite(omega_p) && omega_p > 0.0)) throw InvalidArgument("omega_p must be finite and > 0");
  if (!std::isfinite(omega_1)) throw InvalidArgument("omega_1 must be finite");
  if (!std::isfinite(alpha) || alpha == 0.0) throw HypothesisViolation("alpha must be finite and nonzero");
  if (!std::isfinite(epsilon)) throw InvalidArgument("epsilon must be finite");
}

SlowRate tongue_slow_rhs_polar(const TongueParams& tp, SlowState s) {
  const double a = s.amplitude;
  return {a * std::sin(2.0 * s.psi) / (2.0 * tp.omega_p),
          (tp.omega_1 + 0.75 * tp.alpha * a * a + 0.5 * std::cos(2.0 * s.psi)) / tp.omega_p};
}

CartesianRate tongue_slow_rhs_cartesian(const TongueParams& tp, CartesianSlowState c) {
  const double r2 = c.m * c.m + c.n * c.n;
  const double cubic = 0.75 * tp.alpha * r2;
  return {(tp.omega_1 * c.n - 0.5 * c.n + cubic * c.n) / tp.omega_p,
          (-tp.omega_1 * c.m - 0.5 * c.m - cubic * c.m) / tp.omega_p};
}

Mat2 tongue_jacobian(const TongueParams& tp, CartesianSlowState c) {
  const double wp = tp.omega_p;
  const double cross = 3.0 * tp.alpha * c.m * c.n / (2.0 * wp);
  return {cross, (tp.omega_1 - 0.5 + 0.75 * tp.alpha * (c.m * c.m + 3.0 * c.n * c.n)) / wp,
          (-tp.omega_1 - 0.5 - 0.75 * tp.alpha * (3.0 * c.m * c.m + c.n * c.n)) / wp, -cross};
}

const char* to_string(Classification c) {
  switch (c) {
    case Classification::center:
      return "center";
    case Classification::saddle:
      return "saddle";
    case Classification::degenerate:
      return "degenerate";
  }
  return "degenerate";
}

const char* to_string(PitchforkKind k) { return k == PitchforkKind::supercritical ? "supercritical" : "subcritical"; }

namespace {

constexpr double kDetZero = 1e-13;

Classification classify(double det) {
  if (det > kDetZero) return Classification::center;
  if (det < -kDetZero) return Classification::saddle;
  return Classification::degenerate;
}

// Squared distance from the origin of the (M, 0) and (0, N) branches.
double branch_m_sq(const TongueParams& tp) { return -4.0 / (3.0 * tp.alpha) * (tp.omega_1 + 0.5); }
double branch_n_sq(const TongueParams& tp) { return -4.0 / (3.0 * tp.alpha) * (tp.omega_1 - 0.5); }

std::size_t census_count(const TongueParams& tp) {
  return 1 + (branch_m_sq(tp) > 0.0 ? 2 : 0) + (branch_n_sq(tp) > 0.0 ? 2 : 0);
}

Equilibrium make_entry(const TongueParams& tp, std::string name, CartesianSlowState c, double det_ref) {
  Equilibrium e;
  e.name = std::move(name);
  e.point = c;
  const Mat2 j = tongue_jacobian(tp, c);
  e.det_j = j.det();
  e.trace_j = j.trace();
  e.det_j_reference = det_ref;
  e.classification = classify(e.det_j);
  return e;
}

std::string regime_label(const TongueParams& tp) {
  if (tp.omega_1 < -0.5) return "omega_1 < -1/2";
  if (tp.omega_1 < 0.5) return "-1/2 < omega_1 < 1/2";
  return "omega_1 > 1/2";
}

}  // namespace

EquilibriumReport tongue_equilibria(const TongueParams& tp) {
  tp.validate();
  EquilibriumReport rep;
  rep.params = tp;
  rep.mirrored_convention = tp.alpha > 0.0;
  if (std::abs(tp.omega_1 - 0.5) <= kBoundaryTolerance || std::abs(tp.omega_1 + 0.5) <= kBoundaryTolerance) {
    rep.degenerate_boundary = true;
    rep.regime = "degenerate boundary omega_1 = " + std::string(tp.omega_1 < 0.0 ? "-1/2" : "+1/2");
    return rep;
  }
  rep.regime = regime_label(tp);
  const double w1 = tp.omega_1;
  const double wp = tp.omega_p;
  rep.equilibria.push_back(make_entry(tp, "M1", {0.0, 0.0}, (4.0 * w1 * w1 - 1.0) / (4.0 * wp)));
  if (const double m2 = branch_m_sq(tp); m2 > 0.0) {
    const double m = std::sqrt(m2);
    const double lit = (2.0 * w1 + 1.0) / (wp * wp);
    rep.equilibria.push_back(make_entry(tp, "M2", {m, 0.0}, lit));
    rep.equilibria.push_back(make_entry(tp, "M3", {-m, 0.0}, lit));
  }
  if (const double n2 = branch_n_sq(tp); n2 > 0.0) {
    const double n = std::sqrt(n2);
    const double lit = (1.0 - 2.0 * w1) / (wp * wp);
    rep.equilibria.push_back(make_entry(tp, "M4", {0.0, n}, lit));
    rep.equilibria.push_back(make_entry(tp, "M5", {0.0, -n}, lit));
  }
  return rep;
}

TransitionPair transition_curves(double omega_p, double epsilon) {
  if (!(omega_p > 0.0)) throw InvalidArgument("omega_p must be > 0");
  if (!(epsilon >= 0.0)) throw InvalidArgument("epsilon must be >= 0");
  const double tip = 0.25 * omega_p * omega_p;
  return {tip - 0.5 * epsilon, tip + 0.5 * epsilon};
}

namespace {

TongueParams at(const TongueParams& base, double w1) {
  TongueParams tp = base;
  tp.omega_1 = w1;
  return tp;
}

// Bisection on the census count between lo < hi with different counts. Appends
// every boundary in (lo, hi) in increasing order.
void locate(const TongueParams& base, double lo, double hi, std::size_t clo, std::size_t chi,
            std::vector<double>& out) {
  if (clo == chi) return;
  if (hi - lo <= 1e-13) {
    out.push_back(0.5 * (lo + hi));
    return;
  }
  const double mid = 0.5 * (lo + hi);
  const std::size_t cm = census_count(at(base, mid));
  locate(base, lo, mid, clo, cm, out);
  locate(base, mid, hi, cm, chi, out);
}

const Equilibrium* find(const EquilibriumReport& rep, const std::string& name) {
  for (const auto& e : rep.equilibria) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

}  // namespace

std::vector<BifurcationEvent> bifurcation_scan(const TongueParams& base, std::span<const double> grid) {
  at(base, 0.0).validate();
  if (grid.size() < 2) return {};
  const bool increasing = grid.back() > grid.front();
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (increasing ? !(grid[i] > grid[i - 1]) : !(grid[i] < grid[i - 1])) {
      throw InvalidArgument("bifurcation_scan: omega_1 grid must be strictly monotone");
    }
  }

  std::vector<double> boundaries;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double lo = std::min(grid[i - 1], grid[i]);
    const double hi = std::max(grid[i - 1], grid[i]);
    std::vector<double> local;
    locate(base, lo, hi, census_count(at(base, lo)), census_count(at(base, hi)), local);
    if (!increasing) std::reverse(local.begin(), local.end());
    boundaries.insert(boundaries.end(), local.begin(), local.end());
  }

  // Probe both sides just outside the degenerate band.
  constexpr double probe = 1e-6;
  std::vector<BifurcationEvent> events;
  for (double b : boundaries) {
    const EquilibriumReport below = tongue_equilibria(at(base, b - probe));
    const EquilibriumReport above = tongue_equilibria(at(base, b + probe));
    BifurcationEvent ev;
    ev.omega_1 = b;
    ev.count_before = below.equilibria.size();
    ev.count_after = above.equilibria.size();
    ev.origin_before = below.equilibria.front().classification;
    ev.origin_after = above.equilibria.front().classification;
    const EquilibriumReport& rich = ev.count_after > ev.count_before ? above : below;
    const EquilibriumReport& poor = ev.count_after > ev.count_before ? below : above;
    for (const auto& e : rich.equilibria) {
      if (find(poor, e.name) == nullptr) {
        ev.born = e.classification;
        break;
      }
    }
    ev.kind = ev.born == Classification::center ? PitchforkKind::supercritical : PitchforkKind::subcritical;
    events.push_back(ev);
  }
  return events;
}

CartesianSlowState integrate_cartesian(const TongueParams& tp, CartesianSlowState c0, double t_end,
                                       const IntegratorOptions& opt) {
  const auto rhs = [&tp](double, const Vec<2>& z) -> Vec<2> {
    const CartesianRate r = tongue_slow_rhs_cartesian(tp, {z[0], z[1]});
    return {r.dm, r.dn};
  };
  const Vec<2> end = integrate<2>(rhs, Vec<2>{c0.m, c0.n}, 0.0, t_end, opt);
  return {end[0], end[1]};
}

SlowState integrate_polar(const TongueParams& tp, SlowState s0, double t_end, const IntegratorOptions& opt) {
  const auto rhs = [&tp](double, const Vec<2>& z) -> Vec<2> {
    const SlowRate r = tongue_slow_rhs_polar(tp, {z[0], z[1]});
    return {r.d_amplitude, r.d_psi};
  };
  const Vec<2> end = integrate<2>(rhs, Vec<2>{s0.amplitude, s0.psi}, 0.0, t_end, opt);
  return {end[0], end[1]};
}

std::vector<TrajectorySample> sample_cartesian(const TongueParams& tp, CartesianSlowState c0, double t_end,
                                               int samples, const IntegratorOptions& opt) {
  if (samples < 2) throw InvalidArgument("trajectory needs at least 2 samples");
  if (!(t_end > 0.0)) throw InvalidArgument("trajectory t_end must be > 0");
  std::vector<TrajectorySample> out;
  out.reserve(static_cast<std::size_t>(samples));
  CartesianSlowState c = c0;
  double t_prev = 0.0;
  out.push_back({0.0, c});
  for (int k = 1; k < samples; ++k) {
    const double t = t_end * k / (samples - 1);
    // Each segment is integrated as an autonomous flow from 0 to dt.
    c = integrate_cartesian(tp, c, t - t_prev, opt);
    out.push_back({t, c});
    t_prev = t;
  }
  return out;
}

}  // namespace mdkit::two_timing
