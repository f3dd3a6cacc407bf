#include "mdkit/floquet_chart.hpp"

#include <cmath>
#include <string>

#include "mdkit/errors.hpp"
#include "mdkit/ode_core.hpp"

namespace mdkit::floquet {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::stable:
      return "stable";
    case Verdict::unstable:
      return "unstable";
    case Verdict::boundary:
      return "boundary";
    case Verdict::failed:
      return "failed";
  }
  return "failed";
}

Verdict classify_point(const Mat2& m, double margin) {
  const double det = m.det();
  if (!(std::abs(det - 1.0) <= kDetQualityTolerance)) {
    throw IntegrationQualityError(det, "monodromy determinant " + std::to_string(det) + " deviates from 1");
  }
  const double tr = std::abs(m.trace());
  if (tr < 2.0 - margin) return Verdict::stable;
  if (tr > 2.0 + margin) return Verdict::unstable;
  return Verdict::boundary;
}

Mat2 mathieu_monodromy(double delta, double epsilon, double omega_p, const IntegratorOptions& opt) {
  if (!(omega_p > 0.0)) throw InvalidArgument("omega_p must be > 0");
  const double period = kTwoPi / omega_p;
  const auto rhs = [=](double t, const Vec<4>& z) -> Vec<4> {
    const double k = delta + epsilon * reduced_cos(omega_p, t);
    return {z[1], -k * z[0], z[3], -k * z[2]};
  };
  IntegratorOptions o = opt;
  o.period = period;
  const Vec<4> end = integrate<4>(rhs, Vec<4>{1.0, 0.0, 0.0, 1.0}, 0.0, period, o);
  return {end[0], end[2], end[1], end[3]};
}

double Axis::at(int i) const {
  if (i == count - 1) return max;
  return min + (max - min) * static_cast<double>(i) / static_cast<double>(count - 1);
}

void Axis::validate(const char* name) const {
  const std::string n(name);
  if (count < 2) throw InvalidArgument(n + " axis needs count >= 2");
  if (!std::isfinite(min) || !std::isfinite(max)) throw InvalidArgument(n + " axis bounds must be finite");
  if (!(min < max)) throw InvalidArgument(n + " axis must be strictly increasing (min < max)");
}

ChartCell compute_cell(double delta, double epsilon, double omega_p, double margin, const IntegratorOptions& opt) {
  ChartCell cell;
  cell.delta = delta;
  cell.epsilon = epsilon;
  try {
    const Mat2 m = mathieu_monodromy(delta, epsilon, omega_p, opt);
    cell.trace = m.trace();
    cell.det = m.det();
    cell.det_ok = std::abs(cell.det - 1.0) <= 1e-9;
    cell.verdict = classify_point(m, margin);
  } catch (const IntegrationError& e) {
    cell.verdict = Verdict::failed;
    cell.failure = e.what();
  } catch (const IntegrationQualityError& e) {
    cell.verdict = Verdict::failed;
    cell.failure = e.what();
  }
  return cell;
}

namespace {

ChartGrid empty_grid(const ChartSpec& spec) {
  spec.delta.validate("delta");
  spec.epsilon.validate("epsilon");
  if (!(spec.omega_p > 0.0)) throw InvalidArgument("omega_p must be > 0");
  ChartGrid grid;
  grid.delta = spec.delta;
  grid.epsilon = spec.epsilon;
  grid.omega_p = spec.omega_p;
  grid.cells.resize(static_cast<std::size_t>(spec.delta.count) * static_cast<std::size_t>(spec.epsilon.count));
  return grid;
}

}  // namespace

ChartGrid sweep_chart_serial(const ChartSpec& spec) {
  ChartGrid grid = empty_grid(spec);
  const int nd = spec.delta.count;
  for (int j = 0; j < spec.epsilon.count; ++j) {
    for (int i = 0; i < nd; ++i) {
      grid.cells[static_cast<std::size_t>(j) * nd + i] =
          compute_cell(spec.delta.at(i), spec.epsilon.at(j), spec.omega_p, spec.margin, spec.integrator);
    }
  }
  return grid;
}

ChartGrid sweep_chart(const ChartSpec& spec) {
  ChartGrid grid = empty_grid(spec);
  const long nd = spec.delta.count;
  const long total = nd * spec.epsilon.count;
#pragma omp parallel for schedule(dynamic, 8)
  for (long idx = 0; idx < total; ++idx) {
    const int i = static_cast<int>(idx % nd);
    const int j = static_cast<int>(idx / nd);
    grid.cells[static_cast<std::size_t>(idx)] =
        compute_cell(spec.delta.at(i), spec.epsilon.at(j), spec.omega_p, spec.margin, spec.integrator);
  }
  return grid;
}

double tongue_boundary_bisect(double epsilon, double omega_p, double lo, double hi, const BisectOptions& opt) {
  if (!(lo < hi)) throw InvalidArgument("bisection bracket must satisfy lo < hi");
  if (!(opt.tol > 0.0)) throw InvalidArgument("bisection tol must be > 0");
  const auto g = [&](double delta) {
    return std::abs(mathieu_monodromy(delta, epsilon, omega_p, opt.integrator).trace()) - 2.0;
  };
  double glo = g(lo);
  const double ghi = g(hi);
  if (glo == 0.0) return lo;
  if (ghi == 0.0) return hi;

  if ((glo < 0.0) != (ghi < 0.0)) {
    while (hi - lo > opt.tol) {
      const double mid = 0.5 * (lo + hi);
      const double gm = g(mid);
      if (gm == 0.0) return mid;
      if ((gm < 0.0) == (glo < 0.0)) {
        lo = mid;
        glo = gm;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  }

  // Golden-section search for a touching zero.
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double gc = g(c);
  double gd = g(d);
  while (b - a > opt.tol) {
    if (gc > gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - inv_phi * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + inv_phi * (b - a);
      gd = g(d);
    }
  }
  const double x = 0.5 * (a + b);
  if (std::abs(g(x)) <= opt.tangency_tol) return x;
  throw NoSignChange("|tr M| - 2 does not change sign over [" + std::to_string(lo) + ", " + std::to_string(hi) +
                     "]");
}

TongueBoundary first_tongue_boundaries(double epsilon, double omega_p, const BisectOptions& opt) {
  if (!(omega_p > 0.0)) throw InvalidArgument("omega_p must be > 0");
  const double tip = 0.25 * omega_p * omega_p;
  const double width = std::max(std::abs(epsilon), 0.05 * tip);
  return {tongue_boundary_bisect(epsilon, omega_p, tip - width, tip, opt),
          tongue_boundary_bisect(epsilon, omega_p, tip, tip + width, opt)};
}

}  // namespace mdkit::floquet
