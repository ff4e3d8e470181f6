#pragma once

#include <cstdint>
#include <functional>
#include <ostream>

#include "logz/potential.hpp"
#include "logz/rng.hpp"
#include "logz/schedule.hpp"

namespace logz {

struct ChainState {
  Vector position;
  std::uint64_t step_count = 0;
};

/// One Euler step of the overdamped Langevin diffusion:
/// x' = x - gamma * grad + sqrt(2 gamma) * noise. Throws DivergenceError when
/// the new position has a non-finite coordinate (phase -1 here; run_chain
/// fills in the phase).
ChainState ula_step(const ChainState& state, const Vector& grad, double gamma, const Vector& noise);

struct ChainReport {
  std::uint64_t steps = 0;
  std::uint64_t observed = 0;
  double final_norm = 0.0;
};

/// Receives every post-burn-in state in order.
using ChainObserver = std::function<void(const Vector&)>;

/// Converts an integer-valued double count into a step count, throwing
/// ConfigError when it does not fit.
std::uint64_t step_count(double count, const char* what, int phase);

/// Runs the phase chain on U_i(x) = U(x) + |x|^2/(2 sigma_i^2) from the
/// origin: burn_in steps, then n steps each handed to observer. Step k of the
/// chain consumes the noise stream.fill(k). When trace is non-null every
/// state after every step is written as little-endian float64, row-major.
ChainReport run_chain(const Potential& p, const PhaseParams& phase, const GaussianStream& stream,
                      const ChainObserver& observer, std::ostream* trace = nullptr);

struct MalaOutcome {
  ChainState state;
  bool accepted = false;
  double log_acceptance = 0.0;
};

/// Metropolis-adjusted Langevin step on U(x) + tilt |x|^2/2, drawing the
/// proposal noise from stream.fill(step) and the acceptance uniform from
/// stream.uniform(step) with step = state.step_count.
MalaOutcome mala_step(const ChainState& state, const Potential& p, double gamma,
                      const GaussianStream& stream, double tilt = 0.0);

}  // namespace logz
