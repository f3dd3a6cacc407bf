#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mdkit/averaging.hpp"
#include "mdkit/errors.hpp"
#include "mdkit/ode_core.hpp"

using namespace mdkit;
using namespace mdkit::averaging;

namespace {

// Independent oracle: composite Simpson rule on the bifurcation integrand, assembled in
// the test from the closed-form unperturbed flow and the explicit inverse fundamental matrix.
BifurcationValue simpson_oracle(double w, double alpha, const ForcingSeries& f, State z0, int n = 4000) {
  const double T = kTwoPi / w;
  const ModelParams p = ModelParams::resonant(w, 0.0, alpha);
  const auto integrand = [&](double t) {
    const double x = unperturbed_flow_closed(p, z0, t).x;
    const double g = eval_forcing(f, w, t) - alpha * x * x * x - std::cos(w * t) * x;
    // Second column of Y^-1 = [[cos, -sin/w], [w sin, cos]].
    return State{-std::sin(w * t) / w * g, std::cos(w * t) * g};
  };
  const double h = T / n;
  State acc = integrand(0.0) + integrand(T);
  for (int k = 1; k < n; ++k) acc = acc + (k % 2 == 1 ? 4.0 : 2.0) * integrand(k * h);
  acc = (h / 3.0) * acc;
  return {acc.x, acc.y};
}

double cbrt_oracle(double u) { return u < 0 ? -std::pow(-u, 1.0 / 3.0) : std::pow(u, 1.0 / 3.0); }

}  // namespace

TEST_SUITE("averaging") {
  TEST_CASE("fundamental_matrix_inverse examples") {
    CHECK((fundamental_matrix_inverse(1.7, 0.0) - Mat2::identity()).max_abs() == 0.0);
    for (const double t : {0.3, 1.1, 5.0}) CHECK(fundamental_matrix_inverse(2.0, t).det() == doctest::Approx(1.0));
    const Mat2 q = fundamental_matrix_inverse(1.0, kPi / 2);
    CHECK(std::abs(q.m11) < 1e-15);
    CHECK(q.m12 == doctest::Approx(-1.0));
    CHECK(q.m21 == doctest::Approx(1.0));
    CHECK(std::abs(q.m22) < 1e-15);
  }

  TEST_CASE("bifurcation_fn_closed examples") {
    const BifurcationValue o = bifurcation_fn_closed(2.0, 1.0, 0.4, -0.7, {0.0, 0.0});
    CHECK(o.f11 == doctest::Approx(kPi * 0.7 / 4.0));
    CHECK(o.f21 == doctest::Approx(kPi * 0.4 / 2.0));
    const BifurcationValue z = bifurcation_fn_closed(1.0, 1.0, 1.0, 0.0, {std::cbrt(4.0 / 3.0), 0.0});
    CHECK(std::abs(z.f11) < 1e-14);
    CHECK(std::abs(z.f21) < 1e-14);
    const BifurcationValue a = bifurcation_fn_closed(1.3, 0.0, 0.2, 0.5, {0.3, 0.9});
    const BifurcationValue b = bifurcation_fn_closed(1.3, 0.0, 0.2, 0.5, {-2.0, 4.0});
    CHECK(a.f11 == b.f11);
    CHECK(a.f21 == b.f21);
  }

  TEST_CASE("quadrature partial integrals") {
    const ModelParams p = ModelParams::resonant(1.0, 0.01, 1.0);
    const QuadratureBreakdown q = bifurcation_quadrature(p, {{1.0}, {}}, {0.0, 0.0});
    CHECK(std::abs(q.forcing.f11 - 0.0) <= 1e-10);
    CHECK(std::abs(q.forcing.f21 - kPi) <= 1e-10);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int k = 0; k < 20; ++k) {
      const ModelParams pk = ModelParams::resonant(k % 2 ? 2.0 : 1.0, 0.01, u(rng));
      const QuadratureBreakdown b = bifurcation_quadrature(pk, {{u(rng), u(rng)}, {u(rng)}}, {u(rng), u(rng)});
      CHECK(std::abs(b.parametric.f11) <= 1e-10);
      CHECK(std::abs(b.parametric.f21) <= 1e-10);
      CHECK(b.total.f11 == doctest::Approx(b.forcing.f11 - b.cubic.f11 - b.parametric.f11).epsilon(1e-14));
    }
  }

  TEST_CASE("quadrature matches closed form on random cases") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    const double omegas[] = {1.0, 2.0};
    const double alphas[] = {1.0, -1.0, 0.5};
    for (int k = 0; k < 20; ++k) {
      const double w = omegas[k % 2];
      const double alpha = alphas[k % 3];
      const double a1 = u(rng), b1 = u(rng);
      const State z0{u(rng), u(rng)};
      const ModelParams p = ModelParams::resonant(w, 0.01, alpha);
      const ForcingSeries f{{a1}, {b1}};
      const BifurcationValue q = bifurcation_fn_quadrature(p, f, z0, 2048);
      const BifurcationValue c = bifurcation_fn_closed(w, alpha, a1, b1, z0);
      CHECK(std::abs(q.f11 - c.f11) <= 1e-9);
      CHECK(std::abs(q.f21 - c.f21) <= 1e-9);
      const BifurcationValue s = simpson_oracle(w, alpha, f, z0);
      CHECK(std::abs(q.f11 - s.f11) <= 1e-9);
      CHECK(std::abs(q.f21 - s.f21) <= 1e-9);
    }
  }

  TEST_CASE("higher harmonics do not change the result") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 10; ++k) {
      const ModelParams p = ModelParams::resonant(k % 2 ? 2.0 : 1.0, 0.01, 1.0);
      const State z0{u(rng), u(rng)};
      const ForcingSeries base{{u(rng)}, {u(rng)}};
      ForcingSeries rich = base;
      for (int n = 2; n <= 8; ++n) {
        rich.a.push_back(u(rng));
        rich.b.push_back(u(rng));
      }
      const BifurcationValue q0 = bifurcation_fn_quadrature(p, base, z0);
      const BifurcationValue q1 = bifurcation_fn_quadrature(p, rich, z0);
      CHECK(std::abs(q0.f11 - q1.f11) < 1e-9);
      CHECK(std::abs(q0.f21 - q1.f21) < 1e-9);
    }
  }

  TEST_CASE("quadrature preconditions") {
    CHECK_THROWS_AS((void)bifurcation_fn_quadrature({1.0, 2.0, 0.1, 1.0}, {{1.0}, {}}, {0.0, 0.0}), InvalidArgument);
    CHECK_THROWS_AS((void)bifurcation_fn_quadrature(ModelParams::resonant(1.0, 0.1, 1.0), {{1.0}, {}}, {0.0, 0.0}, 32),
                    InvalidArgument);
  }

  TEST_CASE("real_cbrt") {
    CHECK(real_cbrt(-8.0) == doctest::Approx(-2.0).epsilon(1e-15));
    CHECK(real_cbrt(27.0) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(real_cbrt(0.0) == 0.0);
  }

  TEST_CASE("predicted_zero examples") {
    const State z = predicted_zero(1.0, 1.0, 1.0, 0.0);
    CHECK(z.x == doctest::Approx(1.10064).epsilon(1e-5));
    CHECK(z.x == doctest::Approx(std::cbrt(4.0 / 3.0)).epsilon(1e-15));
    CHECK(z.y == 0.0);
    const BifurcationValue r = bifurcation_fn_closed(1.0, 1.0, 1.0, 0.0, z);
    CHECK(r.norm() <= 1e-10);

    const State z2 = predicted_zero(1.0, 1.0, 0.0, 1.0);
    CHECK(z2.x == 0.0);
    CHECK(z2.y == doctest::Approx(std::cbrt(4.0 / 3.0)).epsilon(1e-15));
    CHECK(bifurcation_fn_closed(1.0, 1.0, 0.0, 1.0, z2).norm() <= 1e-10);

    const State zp = predicted_zero(1.7, 0.8, 0.3, -0.6);
    const State zn = predicted_zero(1.7, -0.8, 0.3, -0.6);
    CHECK(zn.x == doctest::Approx(-zp.x).epsilon(1e-14));
    CHECK(zn.y == doctest::Approx(-zp.y).epsilon(1e-14));
  }

  TEST_CASE("sign conventions are scored by residual") {
    const ZeroPrediction s = predicted_zero_scored(1.0, 1.0, 1.0, 0.0);
    CHECK(s.chosen == SignConvention::positive);
    CHECK(s.residual_positive <= 1e-10);
    CHECK(s.residual_negative > 1.0);
    const BifurcationValue neg = bifurcation_fn_closed(1.0, 1.0, 1.0, 0.0, {-s.point.x, -s.point.y});
    CHECK(neg.norm() == doctest::Approx(s.residual_negative));
  }

  TEST_CASE("root residual, cube-root algebra and scaling on random inputs") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-2.0, 2.0), wv(0.5, 2.5), lam(0.1, 10.0);
    for (int k = 0; k < 50; ++k) {
      const double w = wv(rng), alpha = u(rng), a1 = u(rng), b1 = u(rng);
      const State z = predicted_zero(w, alpha, a1, b1);
      CHECK(bifurcation_fn_closed(w, alpha, a1, b1, z).norm() <= 1e-10);
      const double s2 = a1 * a1 + b1 * b1;
      CHECK(z.x * z.x * z.x * 3.0 * alpha * s2 == doctest::Approx(4.0 * a1 * a1 * a1).epsilon(1e-12));
      CHECK(z.y * z.y * z.y * 3.0 * alpha * s2 == doctest::Approx(4.0 * b1 * b1 * b1 * w * w * w).epsilon(1e-12));
      CHECK(z.x == doctest::Approx(cbrt_oracle(4.0 * a1 * a1 * a1 / (3.0 * alpha * s2))).epsilon(1e-13));
      const double l = lam(rng);
      const State zl = predicted_zero(w, alpha, l * a1, l * b1);
      CHECK(zl.x == doctest::Approx(std::cbrt(l) * z.x).epsilon(1e-12));
      CHECK(zl.y == doctest::Approx(std::cbrt(l) * z.y).epsilon(1e-12));
    }
  }

  TEST_CASE("hypothesis violations") {
    CHECK_THROWS_AS((void)predicted_zero(1.0, 0.0, 1.0, 0.0), HypothesisViolation);
    CHECK_THROWS_AS((void)predicted_zero(1.0, 1.0, 0.0, 0.0), HypothesisViolation);
    CHECK_THROWS_AS((void)predict(1.0, 0.0, 1.0, 0.0), HypothesisViolation);
  }

  TEST_CASE("averaging_jacobian examples") {
    CHECK(averaging_jacobian(1.3, 0.0, {0.4, 0.2}).max_abs() == 0.0);
    const Mat2 j = averaging_jacobian(1.0, 1.0, {1.0, 0.0});
    CHECK(j.m11 == 0.0);
    CHECK(j.m22 == 0.0);
    CHECK(j.m12 == doctest::Approx(0.75 * kPi));
    CHECK(j.m21 == doctest::Approx(-3.0 * 0.75 * kPi));
  }

  TEST_CASE("averaging_jacobian matches finite differences") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-2.0, 2.0), wv(0.5, 2.5);
    for (int k = 0; k < 50; ++k) {
      const double w = wv(rng), alpha = u(rng), a1 = u(rng), b1 = u(rng);
      const State z0{u(rng), u(rng)};
      const Mat2 j = averaging_jacobian(w, alpha, z0);
      const Mat2 fd = finite_difference_jacobian(closed_objective(w, alpha, a1, b1), z0, 1e-5);
      const double scale = std::max(j.max_abs(), 1e-12);
      CHECK((j - fd).max_abs() / scale <= 1e-5);
    }
  }

  TEST_CASE("jacobian determinant") {
    CHECK(jacobian_det_closed(1.0, 1.0, {0.0, 0.0}) == 0.0);
    CHECK(jacobian_det_closed(1.0, 1.0, {1.0, 0.0}) == doctest::Approx(27.0 * kPi * kPi / 16.0).epsilon(1e-14));
    CHECK(averaging_jacobian(1.0, 1.0, {1.0, 0.0}).det() == doctest::Approx(27.0 * kPi * kPi / 16.0).epsilon(1e-12));
    const State zs{std::cbrt(4.0 / 3.0), 0.0};
    CHECK(jacobian_det_closed(1.0, 1.0, zs) == doctest::Approx(24.44).epsilon(1e-3));
    const Mat2 fd = finite_difference_jacobian(closed_objective(1.0, 1.0, 1.0, 0.0), zs, 1e-5);
    CHECK(fd.det() == doctest::Approx(jacobian_det_closed(1.0, 1.0, zs)).epsilon(1e-6));

    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-2.0, 2.0), wv(0.5, 2.5);
    for (int k = 0; k < 100; ++k) {
      const double w = wv(rng), alpha = u(rng);
      const State z0{u(rng), u(rng)};
      const double d = jacobian_det_closed(w, alpha, z0);
      CHECK(averaging_jacobian(w, alpha, z0).det() == doctest::Approx(d).epsilon(1e-10));
      CHECK(d > 0.0);
    }
  }

  TEST_CASE("predict certificate") {
    const AveragingPrediction p = predict(1.0, 1.0, 1.0, 0.0);
    CHECK(p.verified);
    CHECK(p.nondegenerate);
    CHECK(p.residual_norm <= 1e-10);
    CHECK(p.det_jacobian == doctest::Approx(24.4415).epsilon(1e-4));
  }

  TEST_CASE("newton_root examples") {
    const auto g = closed_objective(1.0, 1.0, 1.0, 0.0);
    const State z0 = predicted_zero(1.0, 1.0, 1.0, 0.0);
    const NewtonResult at = newton_root(g, z0, {}, closed_jacobian(1.0, 1.0));
    CHECK(at.iterations <= 2);
    const NewtonResult r = newton_root(g, {1.0, 0.2}, {}, closed_jacobian(1.0, 1.0));
    CHECK((r.root - State{std::cbrt(4.0 / 3.0), 0.0}).norm() <= 1e-10);
    const NewtonResult rfd = newton_root(g, {1.0, 0.2});
    CHECK((rfd.root - State{std::cbrt(4.0 / 3.0), 0.0}).norm() <= 1e-10);

    // Singular Jacobian at the origin: either a certified root or an explicit failure.
    try {
      const NewtonResult s = newton_root(g, {0.0, 0.0}, {}, closed_jacobian(1.0, 1.0));
      CHECK(s.residual <= 1e-12);
    } catch (const NoConvergence& e) {
      CHECK(std::isfinite(e.best_residual()));
    }
  }

  TEST_CASE("newton recovers the predicted root from perturbed guesses") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-1.5, 1.5), d(-0.2, 0.2), wv(0.7, 2.0);
    for (int k = 0; k < 20; ++k) {
      double a1 = u(rng), b1 = u(rng);
      const double w = wv(rng), alpha = (k % 2 ? 1.0 : -1.0) * (0.5 + std::abs(u(rng)));
      const State z = predicted_zero(w, alpha, a1, b1);
      const State guess = z + State{d(rng) * std::max(std::abs(z.x), 0.1), d(rng) * std::max(std::abs(z.y), 0.1)};
      const NewtonResult r = newton_root(closed_objective(w, alpha, a1, b1), guess, {}, closed_jacobian(w, alpha));
      CHECK((r.root - z).norm() <= 1e-10);
    }
  }

  TEST_CASE("serial and parallel grids agree exactly") {
    const ModelParams p = ModelParams::resonant(1.0, 0.01, 1.0);
    const ForcingSeries f{{1.0, 0.2}, {0.3}};
    std::vector<double> xs, ys;
    for (int i = 0; i < 9; ++i) xs.push_back(-1.0 + 0.25 * i);
    for (int i = 0; i < 7; ++i) ys.push_back(-0.9 + 0.3 * i);
    const auto a = bifurcation_grid(p, f, xs, ys, 512);
    const auto b = bifurcation_grid_serial(p, f, xs, ys, 512);
    REQUIRE(a.size() == xs.size() * ys.size());
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].x0 == b[i].x0);
      CHECK(a[i].y0 == b[i].y0);
      CHECK(a[i].quadrature.f11 == b[i].quadrature.f11);
      CHECK(a[i].quadrature.f21 == b[i].quadrature.f21);
      CHECK(a[i].abs_diff() <= 1e-9);
    }
    CHECK(a[1].y0 == ys[1]);
    CHECK(a[ys.size()].x0 == xs[1]);
  }
}
