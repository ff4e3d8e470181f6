#include <cmath>

#include "doctest.h"
#include "lemma_oracle.hpp"
#include "logz/errors.hpp"
#include "logz/potential.hpp"
#include "logz/schedule.hpp"

using namespace logz;

namespace {

Potential gauss(int d) {
  Vector q = Vector::Ones(d);
  q[0] = 2.0;
  return gaussian_potential_diag(q);
}

RunConfig theoretical(double eps, double mu, Regime regime, bool a3) {
  RunConfig c;
  c.eps = eps;
  c.mu = mu;
  c.regime = regime;
  c.use_hessian_lipschitz = a3;
  return c;
}

}  // namespace

TEST_CASE("initial variance") {
  // 2 log(31/30) / 10, mpmath.
  CHECK(initial_variance(0.1, 10, 1.0, 2.0) == doctest::Approx(0.0065579645645981741032).epsilon(1e-14));
  CHECK(initial_variance(0.1, 20, 1.0, 2.0) == doctest::Approx(0.5 * initial_variance(0.1, 10, 1.0, 2.0)));
  CHECK(initial_variance(0.1, 10, 1.0, 3.0) == doctest::Approx(0.5 * initial_variance(0.1, 10, 1.0, 2.0)));
  CHECK_THROWS_AS(initial_variance(0.1, 10, 2.0, 2.0), ClosedFormTarget);
}

TEST_CASE("dyadic chunk is exact at band edges") {
  const double s0 = 0.0065579645645981741;
  CHECK(dyadic_chunk(s0, s0) == 0);
  CHECK(dyadic_chunk(std::nextafter(2.0 * s0, 0.0), s0) == 0);
  CHECK(dyadic_chunk(2.0 * s0, s0) == 1);
  CHECK(dyadic_chunk(std::ldexp(s0, 7), s0) == 7);
  CHECK(dyadic_chunk(std::nextafter(std::ldexp(s0, 7), 0.0), s0) == 6);
}

TEST_CASE("strong recurrence") {
  const double s0 = initial_variance(0.1, 10, 1.0, 2.0);
  const ExtendedReal next = next_variance_strong(s0, s0, 10, 1.0);
  REQUIRE_FALSE(next.is_infinite());
  CHECK(next.value() == doctest::Approx(0.0066787929853265793982).epsilon(1e-13));
  CHECK(next.value() / s0 == doctest::Approx(1.018).epsilon(1e-3));

  for (double t = s0; t < 27.0; t *= 1.37) {
    const ExtendedReal v = next_variance_strong(t, s0, 10, 1.0);
    REQUIRE_FALSE(v.is_infinite());
    CHECK(v.value() / t >= 56.0 / 55.0);
  }
  CHECK(next_variance_strong(27.0, s0, 10, 1.0).is_infinite());
  CHECK(next_variance_strong(27.0, s0, 10, 1.0).reciprocal() == 0.0);
  CHECK_THROWS_AS(next_variance_strong(0.5 * s0, s0, 10, 1.0), DomainError);
}

TEST_CASE("convex recurrence and truncation radius") {
  const Truncation t = truncation_radius(0.1, 10, 1.0, 0.5);
  CHECK(t.tau == doctest::Approx(std::sqrt(16.0 * std::log(60.0) / 10.0)));
  CHECK(t.D == doctest::Approx(10.0 * (t.tau + 1.0) + 0.5));
  const double D2 = t.D * t.D;
  const double s0 = 0.01;
  for (double x = s0; x < D2; x *= 1.9) {
    const ExtendedReal v = next_variance_convex(x, s0, 10, D2);
    REQUIRE_FALSE(v.is_infinite());
    CHECK(v.value() / x >= 56.0 / 55.0);
  }
  CHECK(next_variance_convex(D2, s0, 10, D2).is_infinite());
  CHECK_THROWS_AS(truncation_radius(0.1, 10, 0.0, 0.5), ValidationError);
}

TEST_CASE("schedule dump fields for the Gaussian benchmark") {
  const Potential p = gauss(10);
  RunConfig c;
  c.preset = Preset::kGaussianFig1;
  const Schedule s = build_schedule(p, c);
  CHECK(s.M() == 188);
  CHECK(s.sigma2_0 == doctest::Approx(0.0065579645645981741));
  CHECK(s.final_phase().a == doctest::Approx(0.5 / s.final_phase().sigma2));
  CHECK(s.final_phase().chunk == kFinalPhaseChunk);
  CHECK(s.final_phase().sigma2 >= 27.0);
  CHECK(s.phases[s.M() - 2].sigma2 < 27.0);
  for (const auto& ph : s.phases) {
    CHECK(ph.gamma == doctest::Approx(1e-2 / (ph.m + ph.L)));
    CHECK(ph.n == 1e5);
    CHECK(ph.burn_in == 1e4);
  }
  CHECK(schedule_invariant_violations(s).empty());
}

TEST_CASE("practical presets") {
  Vector q = Vector::Ones(2);
  q[1] = 20.0;
  const Potential p = gaussian_potential_diag(q);
  RunConfig c;
  c.preset = Preset::kRegressionFig2;
  const Schedule s = build_schedule(p, c);
  const PhaseParams& ph = s.phases[0];
  CHECK(ph.gamma == doctest::Approx(1e-2 * ph.kappa * ph.sigma2 * ph.m / (s.dim * ph.L * ph.L)));
  CHECK(ph.burn_in == std::ceil(1e3 / (ph.kappa * ph.gamma)));
  CHECK(ph.n == std::ceil(1e4 * std::sqrt(ph.m) / (ph.kappa * ph.kappa * std::sqrt(ph.sigma2) * ph.gamma)));
  for (const auto& x : s.phases) CHECK(x.gamma <= 1.0 / (x.m + x.L));

  c.preset = Preset::kLogisticFig4;
  c.stride = 5;
  const Schedule l = build_schedule(p, c);
  for (const auto& x : l.phases) {
    const bool early = x.index <= 30;
    CHECK(x.gamma == doctest::Approx((early ? 1e-2 : 1e-1) / (x.m + x.L)));
    CHECK(x.n == (early ? 1e6 : 1e5));
    CHECK(x.burn_in == 1e4);
  }
  CHECK(schedule_invariant_violations(l).empty());
  CHECK_THROWS_AS(tune_phase_practical(s, 0, Preset::kTheoretical), ConfigError);
}

TEST_CASE("stride shortens the ladder but keeps invariants") {
  const Potential p = gauss(10);
  RunConfig c;
  c.preset = Preset::kGaussianFig1;
  const Schedule one = build_schedule(p, c);
  c.stride = 5;
  const Schedule five = build_schedule(p, c);
  CHECK(five.M() < one.M());
  CHECK(schedule_invariant_violations(five).empty());
}

TEST_CASE("regime consistency errors") {
  const Potential flat("flat", 1, [](const Vector& x) { return std::abs(x[0]); },
                       [](const Vector& x, Vector& g) { g = Vector::Constant(1, x[0] > 0 ? 1.0 : -1.0); },
                       Regularity{0.0, 1.0, {}, {}});
  RunConfig c;
  CHECK_THROWS_AS(build_schedule(flat, c), ConfigError);  // strong regime with m = 0
  c.regime = Regime::kConvex;
  CHECK_THROWS_AS(build_schedule(flat, c), ConfigError);  // no growth constants
  RunConfig a3 = theoretical(0.1, 0.1, Regime::kStronglyConvex, true);
  Regularity r{1.0, 2.0, std::nullopt, GrowthBound{1.0, 0.5}};
  const Potential noL = gauss(3).with_regularity(r);
  CHECK_THROWS_AS(build_schedule(noL, a3), ConfigError);
}

// Property suite: every structural invariant and every parameter inequality
// of the governing lemma, over dimensions, accuracies, regimes and A3.
TEST_CASE("theoretical schedules satisfy invariants and lemma inequalities") {
  int schedules = 0;
  for (int d : {1, 2, 5, 10, 25}) {
    std::vector<Potential> models = {logcosh_potential(d)};
    if (d > 1) {
      models.push_back(gauss(d));
    } else {
      CHECK_THROWS_AS(build_schedule(gauss(d), RunConfig{}), ClosedFormTarget);
    }
    for (const Potential& p : models) {
      for (Regime regime : {Regime::kStronglyConvex, Regime::kConvex}) {
        for (bool a3 : {false, true}) {
          for (double eps : {0.05, 0.1, 0.25}) {
            for (double mu : {0.05, 0.1, 0.25}) {
              CAPTURE(p.name());
              CAPTURE(d);
              CAPTURE(eps);
              CAPTURE(mu);
              CAPTURE(a3);
              CAPTURE(static_cast<int>(regime));
              const Schedule s = build_schedule(p, theoretical(eps, mu, regime, a3));
              ++schedules;
              const auto bad = schedule_invariant_violations(s);
              for (const auto& b : bad) MESSAGE(b);
              CHECK(bad.empty());

              CHECK(s.eta == doctest::Approx(eps * std::sqrt(mu) / 8.0));
              const oracle::LemmaContext ctx{regime == Regime::kConvex, a3,
                                             p.regularity().hessian_lipschitz.value_or(0.0), s.eta, s.K};
              int lemma_failures = 0;
              for (const auto& ph : s.phases) {
                const oracle::PhaseInput in{d, s.m, p.L(), ph.sigma2, ph.a, ph.gamma, ph.n, ph.burn_in,
                                            ph.index == s.M() - 1};
                lemma_failures += static_cast<int>(oracle::lemma_violations(in, ctx).size());
              }
              CHECK(lemma_failures == 0);
              if (regime == Regime::kConvex) {
                CHECK(s.final_phase().sigma2 >= s.truncation->D * s.truncation->D);
                CHECK(s.final_phase().sigma2 <= 10.0 / 9.0 * s.truncation->D * s.truncation->D);
              }
            }
          }
        }
      }
    }
  }
  CHECK(schedules == 324);
}

TEST_CASE("cost bound: closed form, monotonicity, realized cost") {
  const Potential p = gauss(10);
  RunConfig c = theoretical(0.25, 0.25, Regime::kStronglyConvex, false);
  const double C = cost_bound_chunk_constant(p, c);
  const double e2mu = 0.25 * 0.25 * 0.25;
  const double expect = (6272.0 * C / e2mu + std::log(5.0 * C * 100.0)) * std::pow(1088.0 * C, 2) * 100.0 * 14.0 /
                        e2mu * std::pow(3.0 / 2.0, 3) * (C + 3.0);
  CHECK(cost_bound(p, c) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(build_schedule(p, c).K <= C);

  RunConfig tighter = c;
  tighter.eps = 0.1;
  CHECK(cost_bound(p, tighter) > cost_bound(p, c));
  tighter = c;
  tighter.mu = 0.1;
  CHECK(cost_bound(p, tighter) > cost_bound(p, c));
}
