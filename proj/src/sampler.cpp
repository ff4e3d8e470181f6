#include "logz/sampler.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <string>

#include "logz/errors.hpp"

namespace logz {

namespace {

void write_le(std::ostream& os, const Vector& x) {
  static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    std::uint64_t bits;
    std::memcpy(&bits, &x[j], sizeof bits);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    char buf[8];
    std::memcpy(buf, &bits, sizeof buf);
    os.write(buf, sizeof buf);
  }
}

[[noreturn]] void diverged(int phase, std::uint64_t step) {
  throw DivergenceError("chain diverged: non-finite position in phase " + std::to_string(phase) +
                            " at step " + std::to_string(step),
                        phase, step);
}

}  // namespace

ChainState ula_step(const ChainState& state, const Vector& grad, double gamma, const Vector& noise) {
  ChainState next;
  next.position = state.position - gamma * grad + std::sqrt(2.0 * gamma) * noise;
  next.step_count = state.step_count + 1;
  if (!next.position.allFinite()) diverged(-1, next.step_count);
  return next;
}

std::uint64_t step_count(double count, const char* what, int phase) {
  if (!(count >= 0.0) || count != std::floor(count) || count >= 0x1.0p63) {
    throw ConfigError(std::string(what) + " of phase " + std::to_string(phase) +
                      " is not a representable step count");
  }
  return static_cast<std::uint64_t>(count);
}

ChainReport run_chain(const Potential& p, const PhaseParams& phase, const GaussianStream& stream,
                      const ChainObserver& observer, std::ostream* trace) {
  const std::uint64_t burn = step_count(phase.burn_in, "burn-in", phase.index);
  const std::uint64_t n = step_count(phase.n, "sample count", phase.index);
  const int d = p.dim();
  const double gamma = phase.gamma;
  const double tilt = 1.0 / phase.sigma2;
  const double noise_scale = std::sqrt(2.0 * gamma);

  Vector x = Vector::Zero(d);
  Vector grad(d);
  Vector noise(d);
  ChainReport report;
  const std::uint64_t total = burn + n;
  for (std::uint64_t k = 0; k < total; ++k) {
    p.gradient(x, grad);
    grad += tilt * x;
    stream.fill(k, noise);
    x = x - gamma * grad + noise_scale * noise;
    if (!x.allFinite()) diverged(phase.index, k + 1);
    if (trace) write_le(*trace, x);
    if (k >= burn) {
      observer(x);
      ++report.observed;
    }
  }
  report.steps = total;
  report.final_norm = x.norm();
  return report;
}

MalaOutcome mala_step(const ChainState& state, const Potential& p, double gamma,
                      const GaussianStream& stream, double tilt) {
  const int d = p.dim();
  auto energy = [&](const Vector& x) { return p.energy(x) + 0.5 * tilt * x.squaredNorm(); };
  auto gradient = [&](const Vector& x) {
    Vector g(d);
    p.gradient(x, g);
    return Vector(g + tilt * x);
  };
  // log q(to | from) up to a constant shared by both directions.
  auto log_q = [&](const Vector& to, const Vector& from, const Vector& grad_from) {
    return -(to - from + gamma * grad_from).squaredNorm() / (4.0 * gamma);
  };

  Vector noise(d);
  stream.fill(state.step_count, noise);
  const Vector& x = state.position;
  const Vector gx = gradient(x);
  const Vector y = x - gamma * gx + std::sqrt(2.0 * gamma) * noise;
  if (!y.allFinite()) diverged(-1, state.step_count + 1);
  const Vector gy = gradient(y);

  MalaOutcome out;
  out.log_acceptance =
      std::min(0.0, energy(x) - energy(y) + log_q(x, y, gy) - log_q(y, x, gx));
  out.accepted = std::log(stream.uniform(state.step_count)) < out.log_acceptance;
  out.state.position = out.accepted ? y : x;
  out.state.step_count = state.step_count + 1;
  return out;
}

}  // namespace logz
