#pragma once

#include <string>
#include <vector>

#include "mdkit/integrator.hpp"
#include "mdkit/types.hpp"

namespace mdkit::floquet {

enum class Verdict { stable, unstable, boundary, failed };

[[nodiscard]] const char* to_string(Verdict v);

inline constexpr double kDefaultMargin = 1e-9;
inline constexpr double kDetQualityTolerance = 1e-6;

/// |tr| < 2 - margin: stable; |tr| > 2 + margin: unstable; otherwise boundary.
/// Throws IntegrationQualityError if |det M - 1| > 1e-6.
[[nodiscard]] Verdict classify_point(const Mat2& m, double margin = kDefaultMargin);

/// Linear Mathieu monodromy for delta = omega_n^2 (may be <= 0).
[[nodiscard]] Mat2 mathieu_monodromy(double delta, double epsilon, double omega_p, const IntegratorOptions& opt);

struct Axis {
  double min = 0.0;
  double max = 1.0;
  int count = 2;

  [[nodiscard]] double at(int i) const;
  /// count >= 2, finite, min < max.
  void validate(const char* name) const;
};

struct ChartCell {
  double delta = 0.0;
  double epsilon = 0.0;
  double trace = 0.0;
  double det = 0.0;
  Verdict verdict = Verdict::failed;
  bool det_ok = false;  ///< |det - 1| <= 1e-9
  std::string failure;  ///< non-empty when verdict == failed
};

struct ChartSpec {
  Axis delta{0.0, 3.0, 101};
  Axis epsilon{0.0, 1.0, 21};
  double omega_p = 2.0;
  double margin = kDefaultMargin;
  IntegratorOptions integrator = IntegratorOptions::fixed(4000, kPi);
};

struct ChartGrid {
  Axis delta;
  Axis epsilon;
  double omega_p = 2.0;
  std::vector<ChartCell> cells;  ///< row-major: epsilon rows, delta fastest

  [[nodiscard]] const ChartCell& cell(int delta_index, int epsilon_index) const {
    return cells[static_cast<std::size_t>(epsilon_index) * static_cast<std::size_t>(delta.count) +
                 static_cast<std::size_t>(delta_index)];
  }
};

[[nodiscard]] ChartCell compute_cell(double delta, double epsilon, double omega_p, double margin,
                                     const IntegratorOptions& opt);

/// OpenMP sweep over cells; identical output to sweep_chart_serial.
[[nodiscard]] ChartGrid sweep_chart(const ChartSpec& spec);

/// Single-threaded reference sweep.
[[nodiscard]] ChartGrid sweep_chart_serial(const ChartSpec& spec);

struct BisectOptions {
  double tol = 1e-10;
  double tangency_tol = 1e-8;  ///< accept a touching (non-crossing) maximum of |tr| - 2 within this
  IntegratorOptions integrator = IntegratorOptions::fixed(4000, kPi);
};

/// Root of |tr M(delta)| - 2 in [lo, hi]. With no sign change, a tangential zero
/// (eps = 0 tongue tip) is located by golden-section maximization; otherwise NoSignChange.
[[nodiscard]] double tongue_boundary_bisect(double epsilon, double omega_p, double lo, double hi,
                                            const BisectOptions& opt = {});

struct TongueBoundary {
  double delta_minus = 0.0;
  double delta_plus = 0.0;
};

/// Both first-tongue boundaries, brackets seeded from the analytic curves.
[[nodiscard]] TongueBoundary first_tongue_boundaries(double epsilon, double omega_p, const BisectOptions& opt = {});

}  // namespace mdkit::floquet
