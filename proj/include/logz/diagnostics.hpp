#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "logz/potential.hpp"
#include "logz/run_config.hpp"
#include "logz/schedule.hpp"

namespace logz {

/// Non-asymptotic bounds on the squared bias and the variance of the phase
/// estimator, with the constants they are built from.
struct MseBoundEntry {
  int phase = 0;
  double C0 = 0.0, C1 = 0.0, C2 = 0.0;
  double A0 = 0.0, A1 = 0.0;
  std::optional<double> B0, B1;  // only with the Hessian Lipschitz refinement
  double burn_in_term = 0.0;       // 4d/(n m kappa gamma) exp(-N kappa gamma / 2)
  double discretization_term = 0.0;  // 2/kappa (A0 g + A1 g^2) or 2/kappa (B0 g^2 + B1 g^3)
  double bias2 = 0.0;
  double variance = 0.0;
  double mse = 0.0;
  double log10_bias2 = 0.0;
  double log10_variance = 0.0;
  double log10_mse = 0.0;
};

/// Evaluates the bounds for one phase. Throws ValidationError naming the
/// violated condition when gamma > 1/(m_i + L_i) or a_i lies outside
/// [0, m_i/(4(d+4)) min 1/(2 sigma_i^2)].
MseBoundEntry mse_bound(const PhaseParams& phase, int d, bool use_hessian_lipschitz,
                        std::optional<double> hessian_lipschitz);

/// mse_bound for every phase of a schedule; nullopt where the conditions of
/// the bounds do not hold (typically the final phase, where a = 1/(2 sigma^2)).
std::vector<std::optional<MseBoundEntry>> mse_bound_report(const Schedule& schedule, const Potential& p);

/// sum over phases of N_i + n_i, as an integer-valued double.
double cost_actual(const Schedule& schedule);

struct ReplicateRow {
  int phase = 0;
  double mean = 0.0;  // of pi_hat_i(g_i) = exp(log ratio)
  double std = 0.0;   // sample standard deviation, n - 1 denominator
  double log_ratio_mean = 0.0;
  double log_ratio_std = 0.0;
};

struct ReplicateTable {
  std::vector<ReplicateRow> rows;
  std::vector<double> log_z;  // one per replicate
  std::vector<double> log_evidence;
  std::uint64_t cost = 0;
};

/// Runs one pipeline per seed (replicate stream 0) and aggregates per-phase
/// statistics. Throws ConfigError for fewer than two seeds or repeated seeds.
ReplicateTable replicate_report(const Potential& p, const RunConfig& cfg, std::span<const std::uint64_t> seeds);

/// R pipelines under one master seed, using replicate streams 0..R-1.
ReplicateTable replicate_report(const Potential& p, const RunConfig& cfg, int replicates, std::uint64_t seed);

}  // namespace logz
