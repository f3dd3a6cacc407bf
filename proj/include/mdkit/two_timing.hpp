#pragma once

#include <span>
#include <string>
#include <vector>

#include "mdkit/integrator.hpp"
#include "mdkit/types.hpp"

namespace mdkit::two_timing {

/// Amplitude/phase of x0 = A cos(w T0 + psi).
struct SlowState {
  double amplitude = 0.0;
  double psi = 0.0;
};

/// M = A cos psi, N = -A sin psi.
struct CartesianSlowState {
  double m = 0.0;
  double n = 0.0;

  [[nodiscard]] double norm() const { return std::hypot(m, n); }
};

/// Maps an arbitrary (A, psi) to A >= 0 and psi in [0, 2pi).
[[nodiscard]] SlowState normalize(SlowState s);
[[nodiscard]] CartesianSlowState to_cartesian(SlowState s);
[[nodiscard]] SlowState to_polar(CartesianSlowState c);

struct SlowRate {
  double d_amplitude = 0.0;
  double d_psi = 0.0;
};

// --- resonant case (omega_n == omega_p == omega) --------------------------------

/// Amplitude/phase modulation from eliminating secular terms.
/// Throws InvalidArgument if A == 0 (phase equation divides by A).
[[nodiscard]] SlowRate resonant_slow_rhs(double omega, double alpha, double a1, double b1, SlowState s);

struct ResonantEquilibrium {
  double amplitude = 0.0;  ///< A0 = (16 (a1^2 + b1^2) / (9 alpha^2))^(1/6)
  double psi = 0.0;        ///< in [0, 2pi)
  double x0_star = 0.0;    ///< A0 cos psi0
  double y0_star = 0.0;    ///< velocity: -omega A0 sin psi0
};

/// Throws HypothesisViolation for alpha == 0 or a1 == b1 == 0.
[[nodiscard]] ResonantEquilibrium resonant_equilibrium(double omega, double alpha, double a1, double b1);

/// x0* cos(omega t) + (y0* / omega) sin(omega t).
[[nodiscard]] double zeroth_order_solution(const ResonantEquilibrium& eq, double omega, double t);

// --- first instability tongue ------------------------------------------------

/// omega_n^2 = omega_p^2 / 4 + eps * omega_1.
struct TongueParams {
  double omega_p = 2.0;
  double omega_1 = 0.0;
  double alpha = -1.0;
  double epsilon = 0.1;

  void validate() const;
};

[[nodiscard]] SlowRate tongue_slow_rhs_polar(const TongueParams& tp, SlowState s);

struct CartesianRate {
  double dm = 0.0;
  double dn = 0.0;

  [[nodiscard]] double norm() const { return std::hypot(dm, dn); }
};

[[nodiscard]] CartesianRate tongue_slow_rhs_cartesian(const TongueParams& tp, CartesianSlowState c);

[[nodiscard]] Mat2 tongue_jacobian(const TongueParams& tp, CartesianSlowState c);

enum class Classification { center, saddle, degenerate };

[[nodiscard]] const char* to_string(Classification c);

struct Equilibrium {
  std::string name;  ///< "M1".."M5"
  CartesianSlowState point;
  double det_j = 0.0;
  double trace_j = 0.0;
  /// Commonly quoted closed form of det(J) at this equilibrium, kept for comparison; its
  /// origin form (4 w1^2 - 1) / (4 omega_p) carries one power of omega_p where det_j has two.
  double det_j_reference = 0.0;
  Classification classification = Classification::degenerate;
};

struct EquilibriumReport {
  TongueParams params;
  bool degenerate_boundary = false;  ///< |omega_1 +- 1/2| <= 1e-9, no census
  bool mirrored_convention = false;  ///< alpha > 0 (sign-mirrored existence conditions)
  std::string regime;
  std::vector<Equilibrium> equilibria;
};

inline constexpr double kBoundaryTolerance = 1e-9;

[[nodiscard]] EquilibriumReport tongue_equilibria(const TongueParams& tp);

/// (omega_p^2/4 - eps/2, omega_p^2/4 + eps/2).
struct TransitionPair {
  double delta_minus = 0.0;
  double delta_plus = 0.0;
};

[[nodiscard]] TransitionPair transition_curves(double omega_p, double epsilon);

enum class PitchforkKind { supercritical, subcritical };

[[nodiscard]] const char* to_string(PitchforkKind k);

struct BifurcationEvent {
  double omega_1 = 0.0;  ///< located boundary
  PitchforkKind kind = PitchforkKind::supercritical;
  std::size_t count_before = 0;  ///< census count on the lower-omega_1 side
  std::size_t count_after = 0;
  Classification origin_before = Classification::degenerate;
  Classification origin_after = Classification::degenerate;
  Classification born = Classification::degenerate;  ///< type of the newly created pair
};

/// Walks a monotone omega_1 grid, locating census-count changes by bisection.
/// `base` supplies omega_p, alpha, epsilon; its omega_1 is ignored.
[[nodiscard]] std::vector<BifurcationEvent> bifurcation_scan(const TongueParams& base,
                                                             std::span<const double> omega_1_grid);

/// Integrate the Cartesian slow flow (M, N) over slow time [0, t_end].
[[nodiscard]] CartesianSlowState integrate_cartesian(const TongueParams& tp, CartesianSlowState c0, double t_end,
                                                     const IntegratorOptions& opt = {});

/// Integrate the polar slow flow; psi is left unwrapped.
[[nodiscard]] SlowState integrate_polar(const TongueParams& tp, SlowState s0, double t_end,
                                        const IntegratorOptions& opt = {});

/// Samples of the Cartesian slow flow at `samples` equi-spaced slow times including 0 and t_end.
struct TrajectorySample {
  double t = 0.0;
  CartesianSlowState point;
};

[[nodiscard]] std::vector<TrajectorySample> sample_cartesian(const TongueParams& tp, CartesianSlowState c0,
                                                             double t_end, int samples,
                                                             const IntegratorOptions& opt = {});

}  // namespace mdkit::two_timing
