#include <doctest.h>

#include <cmath>
#include <random>

#include "mdkit/errors.hpp"
#include "mdkit/integrator.hpp"
#include "mdkit/ode_core.hpp"

using namespace mdkit;

namespace {

ModelParams resonant(double w, double eps = 0.0, double alpha = 1.0) { return ModelParams::resonant(w, eps, alpha); }

}  // namespace

TEST_SUITE("ode_core") {
  TEST_CASE("eval_forcing examples") {
    CHECK(eval_forcing({{1.0}, {0.0}}, 1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(eval_forcing({{1.0}, {1.0}}, 1.0, kPi / 2) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(eval_forcing({{0.0, 1.0}, {}}, 1.0, kPi / 4)) < 1e-15);
    CHECK(eval_forcing({}, 1.0, 0.3) == 0.0);
  }

  TEST_CASE("eval_forcing periodicity under one-period shift") {
    const ForcingSeries f{{0.3, -1.2, 0.5}, {0.7, 0.0, -0.25}};
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    for (const double w : {0.5, 1.0, 2.0, 3.0}) {
      const double T = kTwoPi / w;
      for (int k = 0; k < 100; ++k) {
        const double t = u(rng);
        CHECK(std::abs(eval_forcing(f, w, t + T) - eval_forcing(f, w, t)) < 1e-13);
      }
    }
  }

  TEST_CASE("rhs_full examples") {
    const ModelParams p0{1.3, 2.0, 0.0, 1.0};
    const State d0 = rhs_full(p0, {{1.0}, {}}, 0.7, {0.4, -0.2});
    CHECK(d0.x == -0.2);
    CHECK(d0.y == doctest::Approx(-1.69 * 0.4).epsilon(1e-15));

    const ModelParams p = resonant(1.0, 0.1, 1.0);
    const State d = rhs_full(p, {{1.0}, {}}, 0.0, {1.0, 0.0});
    CHECK(d.x == 0.0);
    CHECK(d.y == doctest::Approx(-1.1).epsilon(1e-15));

    const State z = rhs_full(p, {}, 0.42, {0.0, 0.0});
    CHECK(z.x == 0.0);
    CHECK(z.y == 0.0);
  }

  TEST_CASE("rhs_unperturbed examples") {
    const State a = rhs_unperturbed(resonant(2.0), {1.0, 0.0});
    CHECK(a.x == 0.0);
    CHECK(a.y == -4.0);
    const State b = rhs_unperturbed(resonant(1.0), {0.0, 1.0});
    CHECK(b.x == 1.0);
    CHECK(b.y == 0.0);
    const State c = rhs_unperturbed(resonant(1.0), {0.0, 0.0});
    CHECK(c.x == 0.0);
    CHECK(c.y == 0.0);
  }

  TEST_CASE("unperturbed_flow_closed examples") {
    const ModelParams p = resonant(2.0);
    const State z0{0.3, -0.8};
    const State at0 = unperturbed_flow_closed(p, z0, 0.0);
    CHECK(at0.x == z0.x);
    CHECK(at0.y == z0.y);
    const State atT = unperturbed_flow_closed(p, z0, kTwoPi / 2.0);
    CHECK((atT - z0).norm() < 1e-14);
    const State q = unperturbed_flow_closed(p, {1.0, 0.0}, kPi / 4);
    CHECK(std::abs(q.x) < 1e-15);
    CHECK(q.y == doctest::Approx(-2.0).epsilon(1e-15));
  }

  TEST_CASE("integrate examples") {
    const ModelParams p = resonant(1.0);
    const auto rhs = [&](double, State s) { return rhs_unperturbed(p, s); };
    const State full = integrate(rhs, State{1.0, 0.0}, 0.0, kTwoPi, IntegratorOptions{});
    CHECK((full - State{1.0, 0.0}).norm() < 1e-9);
    const State same = integrate(rhs, State{0.25, -3.0}, 1.5, 1.5, IntegratorOptions{});
    CHECK(same.x == 0.25);
    CHECK(same.y == -3.0);
    const State quarter = integrate(rhs, State{1.0, 0.0}, 0.0, kPi / 2, IntegratorOptions{});
    CHECK((quarter - State{0.0, -1.0}).norm() < 1e-9);
  }

  TEST_CASE("integrate rejects bad arguments") {
    const auto rhs = [](double, State s) { return State{s.y, -s.x}; };
    CHECK_THROWS_AS((void)integrate(rhs, State{1.0, 0.0}, 1.0, 0.0, IntegratorOptions{}), InvalidArgument);
    IntegratorOptions bad;
    bad.abs_tol = 0.0;
    CHECK_THROWS_AS((void)integrate(rhs, State{1.0, 0.0}, 0.0, 1.0, bad), InvalidArgument);
  }

  TEST_CASE("integrate reports blow-up and step underflow as distinct failures") {
    // x' = x^2 blows up at t = 1 from x = 1.
    const auto blow = [](double, const Vec<2>& z) { return Vec<2>{z[0] * z[0], 0.0}; };
    try {
      (void)integrate<2>(blow, Vec<2>{1.0, 0.0}, 0.0, 2.0, IntegratorOptions{});
      FAIL("expected an IntegrationError");
    } catch (const IntegrationError& e) {
      CHECK((e.status() == IntegrationStatus::blow_up || e.status() == IntegrationStatus::step_size_underflow));
    }
    IntegratorOptions fixed = IntegratorOptions::fixed(100, 1.0);
    try {
      (void)integrate<2>(blow, Vec<2>{1.0, 0.0}, 0.0, 2.0, fixed);
      FAIL("expected an IntegrationError");
    } catch (const IntegrationError& e) {
      CHECK((e.status() == IntegrationStatus::blow_up || e.status() == IntegrationStatus::non_finite));
    }
  }

  TEST_CASE("integrate matches the closed-form flow over ten periods") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (const double w : {0.5, 1.0, 2.0}) {
      const ModelParams p = resonant(w);
      const auto rhs = [&](double, State s) { return rhs_unperturbed(p, s); };
      for (int trial = 0; trial < 3; ++trial) {
        const State z0{u(rng), u(rng)};
        const double span = 10.0 * kTwoPi / w;
        double worst = 0.0;
        State z = z0;
        double t = 0.0;
        for (int k = 1; k <= 200; ++k) {
          const double tk = span * k / 200.0;
          z = integrate(rhs, z, t, tk, IntegratorOptions{});
          t = tk;
          worst = std::max(worst, (z - unperturbed_flow_closed(p, z0, tk)).norm());
        }
        CHECK(worst < 1e-9);
      }
    }
  }

  TEST_CASE("energy drift along unperturbed trajectories") {
    for (const double w : {0.5, 1.0, 2.0}) {
      const ModelParams p = resonant(w);
      const auto rhs = [&](double, State s) { return rhs_unperturbed(p, s); };
      const State z0{0.7, -1.3};
      const auto energy = [&](State s) { return w * w * s.x * s.x + s.y * s.y; };
      const State z = integrate(rhs, z0, 0.0, 10.0 * kTwoPi / w, IntegratorOptions{});
      CHECK(std::abs(energy(z) - energy(z0)) / energy(z0) < 1e-9);
    }
  }

  TEST_CASE("fixed-step RK4 reproduces the flow") {
    const ModelParams p = resonant(1.0);
    const auto rhs = [&](double, State s) { return rhs_unperturbed(p, s); };
    const State z = integrate(rhs, State{1.0, 0.0}, 0.0, kTwoPi, IntegratorOptions::fixed(4000, kTwoPi));
    CHECK((z - State{1.0, 0.0}).norm() < 1e-12);
  }

  TEST_CASE("monodromy examples") {
    const Mat2 id = monodromy({1.0, 1.0, 0.0, 1.0}, {}, LinearMathieu{});
    CHECK((id - Mat2::identity()).max_abs() < 1e-9);
    const Mat2 half = monodromy({1.0, 2.0, 0.0, 1.0}, {}, LinearMathieu{});
    CHECK((half - (Mat2::zero() - Mat2::identity())).max_abs() < 1e-9);
    CHECK(half.trace() == doctest::Approx(-2.0).epsilon(1e-9));
  }

  TEST_CASE("monodromy determinant is one") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> wn(0.3, 2.0), eps(-0.8, 0.8), wp(0.5, 3.0);
    for (int k = 0; k < 20; ++k) {
      const ModelParams p{wn(rng), wp(rng), eps(rng), 1.0};
      CAPTURE(p.omega_n);
      CAPTURE(p.omega_p);
      CAPTURE(p.epsilon);
      CHECK(std::abs(monodromy(p, {}, LinearMathieu{}).det() - 1.0) < 1e-9);
      const ForcingSeries f{{0.5}, {0.2}};
      // Hardening cubic (eps * alpha > 0) keeps the forced orbit bounded.
      const ModelParams hard{p.omega_n, p.omega_p, std::abs(p.epsilon), 1.0};
      const Mat2 m = monodromy(hard, f, LinearizedAboutOrbit{{0.3, -0.1}});
      CHECK(std::abs(m.det() - 1.0) < 1e-8);
    }
  }

  TEST_CASE("period_map Jacobian matches finite differences of the flow") {
    const ModelParams p = resonant(1.0, 0.05, 1.0);
    const ForcingSeries f{{1.0}, {0.3}};
    const State z0{0.8, 0.1};
    IntegratorOptions opt;
    opt.abs_tol = opt.rel_tol = 1e-12;
    const PeriodMap pm = period_map(p, f, z0, opt);
    const double T = p.period();
    const double h = 1e-5;
    const State dx =
        (0.5 / h) * (flow_full(p, f, z0 + State{h, 0.0}, T, opt) - flow_full(p, f, z0 - State{h, 0.0}, T, opt));
    const State dy =
        (0.5 / h) * (flow_full(p, f, z0 + State{0.0, h}, T, opt) - flow_full(p, f, z0 - State{0.0, h}, T, opt));
    CHECK(pm.jacobian.m11 == doctest::Approx(dx.x).epsilon(1e-6));
    CHECK(pm.jacobian.m21 == doctest::Approx(dx.y).epsilon(1e-6));
    CHECK(pm.jacobian.m12 == doctest::Approx(dy.x).epsilon(1e-6));
    CHECK(pm.jacobian.m22 == doctest::Approx(dy.y).epsilon(1e-6));
    CHECK((pm.end - flow_full(p, f, z0, T, opt)).norm() < 1e-10);
  }

  TEST_CASE("model validation") {
    CHECK_THROWS_AS(ModelParams({0.0, 1.0, 0.0, 1.0}).validate(), InvalidArgument);
    CHECK_THROWS_AS(ModelParams({1.0, -1.0, 0.0, 1.0}).validate(), InvalidArgument);
    CHECK(ModelParams::resonant(2.0, 0.1, 1.0).is_resonant());
  }

  TEST_CASE("results are bit-identical across repeated calls") {
    const ModelParams p = resonant(1.0, 0.02, 1.0);
    const ForcingSeries f{{1.0, 0.3}, {0.1}};
    const State a = flow_full(p, f, {1.0, 0.2}, 7.3);
    const State b = flow_full(p, f, {1.0, 0.2}, 7.3);
    CHECK(a == b);
  }
}
