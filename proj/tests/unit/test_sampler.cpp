#include <cmath>
#include <cstring>
#include <set>
#include <sstream>

#include "doctest.h"
#include "logz/errors.hpp"
#include "logz/potential.hpp"
#include "logz/rng.hpp"
#include "logz/sampler.hpp"

using namespace logz;

namespace {

// Batch-means standard error of the mean of xs.
double batch_se(const std::vector<double>& xs, int batches = 50) {
  const std::size_t len = xs.size() / batches;
  std::vector<double> means;
  double grand = 0.0;
  for (int b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < len; ++i) s += xs[b * len + i];
    means.push_back(s / len);
    grand += s / len;
  }
  grand /= batches;
  double v = 0.0;
  for (double m : means) v += (m - grand) * (m - grand);
  return std::sqrt(v / (batches - 1) / batches);
}

PhaseParams flat_phase(double gamma, double n, double burn) {
  PhaseParams ph;
  ph.index = 0;
  ph.sigma2 = 1e300;  // tilt 1e-300, i.e. none
  ph.gamma = gamma;
  ph.n = n;
  ph.burn_in = burn;
  return ph;
}

}  // namespace

TEST_CASE("philox known-answer vectors") {
  const PhiloxCounter zero = philox4x32({0, 0, 0, 0}, {0, 0});
  CHECK(zero == PhiloxCounter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  const std::uint32_t f = 0xffffffffu;
  const PhiloxCounter ones = philox4x32({f, f, f, f}, {f, f});
  CHECK(ones == PhiloxCounter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  const PhiloxCounter pi = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                      {0xa4093822u, 0x299f31d0u});
  CHECK(pi == PhiloxCounter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("counter layout") {
  const GaussianStream s(7, 3, 2);
  const PhiloxCounter c = s.counter(0x123456789abcdefull, 5);
  CHECK(c[0] == 0x89abcdefu);
  CHECK(c[1] == 0x01234567u);
  CHECK(c[2] == 3u);
  CHECK(c[3] == 5u);
}

TEST_CASE("stream keys never collide across seeds and replicates") {
  std::set<PhiloxKey> keys;
  int made = 0;
  for (std::uint64_t seed = 0; seed < 64; ++seed) {
    for (std::uint32_t r = 0; r < 64; ++r) {
      keys.insert(GaussianStream(seed, 0, r).key());
      ++made;
    }
  }
  CHECK(static_cast<int>(keys.size()) == made);
  // The phase lives in the counter, not the key.
  CHECK(GaussianStream(1, 0, 0).key() == GaussianStream(1, 9, 0).key());
}

TEST_CASE("fill is a pure function of (seed, phase, replicate, step)") {
  const GaussianStream a(11, 2, 0);
  Vector x(10), y(10), z(10);
  a.fill(5, x);
  a.fill(5, y);
  CHECK(x == y);
  a.fill(6, z);
  CHECK(x != z);
  GaussianStream(11, 3, 0).fill(5, z);
  CHECK(x != z);
  GaussianStream(11, 2, 1).fill(5, z);
  CHECK(x != z);
  GaussianStream(12, 2, 0).fill(5, z);
  CHECK(x != z);

  // Words are read in order, so a short fill is a prefix of a long one.
  Vector small(3), big(40);
  a.fill(9, small);
  a.fill(9, big);
  CHECK(small == big.head(3));

  const double u = a.uniform(5);
  CHECK(u > 0.0);
  CHECK(u < 1.0);
  CHECK(u == a.uniform(5));
}

TEST_CASE("normals have standard moments") {
  const GaussianStream s(3, 0, 0);
  Vector x(8);
  double m1 = 0, m2 = 0, m4 = 0, below = 0;
  const int steps = 50000;
  for (int k = 0; k < steps; ++k) {
    s.fill(k, x);
    for (double v : x) {
      m1 += v;
      m2 += v * v;
      m4 += v * v * v * v;
      below += v < -1.0;
    }
  }
  const double n = steps * 8.0;
  CHECK(std::abs(m1 / n) < 5.0 / std::sqrt(n));
  CHECK(std::abs(m2 / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(m4 / n - 3.0) < 5.0 * std::sqrt(96.0 / n));
  CHECK(std::abs(below / n - 0.15865525393145705) < 5.0 * std::sqrt(0.1335 / n));
}

TEST_CASE("ula_step") {
  ChainState s{Vector{{1.0, 0.0}}, 4};
  const ChainState t = ula_step(s, Vector{{2.0, -1.0}}, 0.5, Vector{{0.0, 1.0}});
  CHECK(t.position[0] == doctest::Approx(0.0));
  CHECK(t.position[1] == doctest::Approx(1.5));
  CHECK(t.step_count == 5);
  CHECK_THROWS_AS(ula_step(s, Vector{{NAN, 0.0}}, 0.5, Vector::Zero(2)), DivergenceError);
}

TEST_CASE("step counts") {
  CHECK(step_count(12.0, "n", 0) == 12u);
  CHECK_THROWS_AS(step_count(1.5, "n", 0), ConfigError);
  CHECK_THROWS_AS(step_count(-1.0, "n", 0), ConfigError);
  CHECK_THROWS_AS(step_count(1e20, "n", 0), ConfigError);
}

TEST_CASE("run_chain counts, observes and traces") {
  const Potential p = gaussian_potential_diag(Vector{{1.0, 2.0}});
  PhaseParams ph = flat_phase(0.1, 5, 3);
  ph.sigma2 = 4.0;
  const GaussianStream stream(1, 0, 0);
  std::vector<Vector> seen;
  std::ostringstream trace;
  const ChainReport r = run_chain(p, ph, stream, [&](const Vector& x) { seen.push_back(x); }, &trace);
  CHECK(r.steps == 8);
  CHECK(r.observed == 5);
  CHECK(seen.size() == 5);
  CHECK(trace.str().size() == 8 * 2 * 8);

  // Replay by hand on U_i = U + |x|^2/(2 sigma^2).
  ChainState s{Vector::Zero(2), 0};
  for (int k = 0; k < 8; ++k) {
    Vector noise(2);
    stream.fill(k, noise);
    const Vector g = p.gradient(s.position) + s.position / ph.sigma2;
    s = ula_step(s, g, ph.gamma, noise);
    if (k >= 3) CHECK((seen[k - 3] - s.position).norm() < 1e-14);
  }
  CHECK(r.final_norm == doctest::Approx(s.position.norm()));

  double first;
  std::memcpy(&first, trace.str().data(), 8);
  Vector n0(2);
  stream.fill(0, n0);
  CHECK(first == doctest::Approx(std::sqrt(0.2) * n0[0]));
}

TEST_CASE("run_chain reports divergence with the phase") {
  const Potential p = gaussian_potential_diag(Vector{{1.0}});
  PhaseParams ph = flat_phase(3.0, 2000, 0);  // |1 - gamma q| = 2
  ph.index = 4;
  try {
    run_chain(p, ph, GaussianStream(1, 4, 0), [](const Vector&) {});
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.phase() == 4);
    CHECK(e.step() > 0);
  }
}

TEST_CASE("ULA stationary variance on a 1-d Gaussian") {
  // x' = (1 - gamma q) x + sqrt(2 gamma) xi has variance 1/(q (1 - gamma q / 2)).
  const double q = 1.0, gamma = 0.1;
  const Potential p = gaussian_potential_diag(Vector::Constant(1, q));
  std::vector<double> sq;
  run_chain(p, flat_phase(gamma, 200000, 1000), GaussianStream(21, 0, 0),
            [&](const Vector& x) { sq.push_back(x[0] * x[0]); });
  double mean = 0.0;
  for (double v : sq) mean += v;
  mean /= sq.size();
  const double target = 1.0 / (q * (1.0 - gamma * q / 2.0));
  CHECK(target == doctest::Approx(1.0526315789473684211));
  CHECK(std::abs(mean - target) < 4.0 * batch_se(sq));
}

TEST_CASE("MALA removes the discretization bias") {
  const double gamma = 0.5;
  const Potential p = gaussian_potential_diag(Vector::Constant(1, 1.0));
  const GaussianStream stream(5, 0, 0);
  ChainState s{Vector::Zero(1), 0};
  std::vector<double> sq;
  int accepted = 0;
  for (int k = 0; k < 200000; ++k) {
    const MalaOutcome o = mala_step(s, p, gamma, stream);
    CHECK_UNARY(o.log_acceptance <= 0.0);
    accepted += o.accepted;
    s = o.state;
    sq.push_back(s.position[0] * s.position[0]);
  }
  CHECK(s.step_count == 200000);
  CHECK(accepted > 150000);
  double mean = 0.0;
  for (double v : sq) mean += v;
  mean /= sq.size();
  // ULA would settle at 1/(1 - 1/4) = 4/3.
  CHECK(std::abs(mean - 1.0) < 4.0 * batch_se(sq));

  // Tiny steps are essentially always accepted.
  const MalaOutcome tiny = mala_step(ChainState{Vector::Constant(1, 0.3), 0}, p, 1e-8, stream);
  CHECK(tiny.log_acceptance > -1e-6);
}
