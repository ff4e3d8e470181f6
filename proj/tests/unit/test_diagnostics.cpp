#include <cmath>

#include "doctest.h"
#include "lemma_oracle.hpp"
#include "logz/diagnostics.hpp"
#include "logz/errors.hpp"
#include "logz/schedule.hpp"

using namespace logz;

namespace {

RunConfig theoretical(Regime regime, bool a3, double eps = 0.1, double mu = 0.1) {
  RunConfig c;
  c.eps = eps;
  c.mu = mu;
  c.regime = regime;
  c.use_hessian_lipschitz = a3;
  return c;
}

oracle::PhaseInput input_of(const Schedule& s, const PhaseParams& ph, double L) {
  return {s.dim, s.m, L, ph.sigma2, ph.a, ph.gamma, ph.n, ph.burn_in, ph.index == s.M() - 1};
}

}  // namespace

TEST_CASE("bounds agree with the independent oracle") {
  for (const Potential& p : {logcosh_potential(3), gaussian_potential_diag(Vector{{2.0, 1.0, 1.0, 1.0, 1.0}})}) {
    for (Regime regime : {Regime::kStronglyConvex, Regime::kConvex}) {
      for (bool a3 : {false, true}) {
        const Schedule s = build_schedule(p, theoretical(regime, a3));
        const auto report = mse_bound_report(s, p);
        REQUIRE(report.size() == s.phases.size());
        for (const auto& ph : s.phases) {
          // Only the final phase may fall outside the conditions of the bounds.
          if (ph.index == s.M() - 1 && !report[ph.index]) continue;
          REQUIRE(report[ph.index].has_value());
          const MseBoundEntry& e = *report[ph.index];
          const oracle::BoundPair ref = oracle::ratio_bounds(
              input_of(s, ph, p.L()), a3 ? p.regularity().hessian_lipschitz : std::nullopt);
          CHECK(e.bias2 == doctest::Approx(ref.bias2).epsilon(1e-12));
          CHECK(e.variance == doctest::Approx(ref.variance).epsilon(1e-12));
          CHECK(e.mse == doctest::Approx(e.bias2 + e.variance));
          CHECK(e.B0.has_value() == a3);
        }
      }
    }
  }
}

TEST_CASE("theoretical tuning meets the per-phase error targets") {
  // Relative bias <= eta / (K |I_k|) and relative variance <= eta^2 / (K |I_k|)
  // for non-final phases, eta and eta^2 for the final one.
  for (const Potential& p : {logcosh_potential(2), gaussian_potential_diag(Vector{{2.0, 1.0, 1.0}})}) {
    for (Regime regime : {Regime::kStronglyConvex, Regime::kConvex}) {
      for (bool a3 : {false, true}) {
        const Schedule s = build_schedule(p, theoretical(regime, a3, 0.25, 0.25));
        for (const auto& entry : mse_bound_report(s, p)) {
          if (!entry) continue;
          const MseBoundEntry& e = *entry;
          const PhaseParams& ph = s.phases[e.phase];
          const bool final = ph.index == s.M() - 1;
          const double share = final ? 1.0 : s.K * s.chunk_size(ph.chunk);
          CAPTURE(ph.index);
          CAPTURE(a3);
          CHECK(std::sqrt(e.bias2) <= s.eta / share * (1.0 + 1e-9));
          CHECK(e.variance <= s.eta * s.eta / share * (1.0 + 1e-9));
        }
      }
    }
  }
}

TEST_CASE("bound properties") {
  const Potential p = logcosh_potential(4);
  const Schedule s = build_schedule(p, theoretical(Regime::kStronglyConvex, true));
  PhaseParams ph = s.phases[3];

  const MseBoundEntry base = mse_bound(ph, 4, false, std::nullopt);
  // The refined discretization term is never larger on these tunings.
  const MseBoundEntry refined = mse_bound(ph, 4, true, p.regularity().hessian_lipschitz);
  CHECK(refined.bias2 <= base.bias2);
  CHECK(refined.variance == base.variance);

  PhaseParams doubled = ph;
  doubled.n *= 2.0;
  CHECK(mse_bound(doubled, 4, false, std::nullopt).variance <= 0.5 * base.variance);

  PhaseParams flat = ph;
  flat.a = 0.0;
  const MseBoundEntry zero = mse_bound(flat, 4, false, std::nullopt);
  CHECK(zero.bias2 == 0.0);
  CHECK(zero.variance == 0.0);
  CHECK(zero.log10_mse == -HUGE_VAL);

  PhaseParams steep = ph;
  steep.gamma = 2.0 / (ph.m + ph.L);
  CHECK_THROWS_AS(mse_bound(steep, 4, false, std::nullopt), ValidationError);
  PhaseParams hot = ph;
  hot.a = ph.m;
  CHECK_THROWS_AS(mse_bound(hot, 4, false, std::nullopt), ValidationError);
  CHECK_THROWS_AS(mse_bound(ph, 4, true, std::nullopt), ValidationError);
}

TEST_CASE("the lemma oracle catches perturbed tunings") {
  const Potential p = logcosh_potential(3);
  const Schedule s = build_schedule(p, theoretical(Regime::kStronglyConvex, false));
  const oracle::LemmaContext ctx{false, false, 0.0, s.eta, s.K};
  const PhaseParams& ph = s.phases[2];
  oracle::PhaseInput in = input_of(s, ph, p.L());
  CHECK(oracle::lemma_violations(in, ctx).empty());
  in.gamma *= 1.01;
  CHECK_FALSE(oracle::lemma_violations(in, ctx).empty());
  in = input_of(s, ph, p.L());
  in.n = std::floor(in.n * 0.99);
  CHECK_FALSE(oracle::lemma_violations(in, ctx).empty());
  in = input_of(s, ph, p.L());
  in.N = std::floor(in.N * 0.99);
  CHECK_FALSE(oracle::lemma_violations(in, ctx).empty());
}

TEST_CASE("realized cost stays under the closed-form bound") {
  for (const Potential& p : {logcosh_potential(2), gaussian_potential_diag(Vector{{2.0, 1.0, 1.0, 1.0}})}) {
    for (Regime regime : {Regime::kStronglyConvex, Regime::kConvex}) {
      for (bool a3 : {false, true}) {
        const RunConfig c = theoretical(regime, a3, 0.25, 0.25);
        const Schedule s = build_schedule(p, c);
        double sum = 0.0;
        for (const auto& ph : s.phases) sum += ph.n + ph.burn_in;
        CHECK(cost_actual(s) == sum);
        CHECK(cost_actual(s) <= cost_bound(p, c));
      }
    }
  }
}

TEST_CASE("replicate report") {
  const Potential p = logcosh_potential(1);
  RunConfig c;
  c.preset = Preset::kGaussianFig1;
  c.stride = 5;
  c.eps = 0.5;
  c.workers = 1;
  const std::vector<std::uint64_t> seeds = {1, 2, 3};
  const ReplicateTable t = replicate_report(p, c, seeds);
  CHECK(t.rows.size() == static_cast<std::size_t>(build_schedule(p, c).M()));
  CHECK(t.log_z.size() == 3);
  for (const auto& r : t.rows) {
    CHECK(r.mean >= 1.0);
    CHECK(r.std >= 0.0);
    CHECK(std::abs(std::log(r.mean) - r.log_ratio_mean) < 0.05);
  }
  CHECK(t.cost == 3 * static_cast<std::uint64_t>(cost_actual(build_schedule(p, c))));
  CHECK(t.log_evidence[0] == t.log_z[0]);

  CHECK_THROWS_AS(replicate_report(p, c, std::vector<std::uint64_t>{1}), ConfigError);
  CHECK_THROWS_AS(replicate_report(p, c, std::vector<std::uint64_t>{4, 4}), ConfigError);
  CHECK_THROWS_AS(replicate_report(p, c, 1, 0), ConfigError);
  CHECK_THROWS_AS(replicate_report(gaussian_potential_diag(Vector::Ones(2)), c, 2, 0), ClosedFormTarget);

  const ReplicateTable u = replicate_report(p, c, 2, 5);
  CHECK(u.log_z.size() == 2);
  CHECK(u.log_z[0] != u.log_z[1]);
}
