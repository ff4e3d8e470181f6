#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "logz/potential.hpp"
#include "logz/run_config.hpp"
#include "logz/schedule.hpp"

namespace logz {

/// Streaming log((1/n) sum exp(e_k)) that never leaves log space: keeps the
/// running maximum and a compensated sum of exp(e_k - max).
class LogMeanAccumulator {
 public:
  void add(double exponent);
  void merge(const LogMeanAccumulator& other);
  std::uint64_t count() const { return count_; }
  /// Throws ContractViolation when empty.
  double value() const;

 private:
  double max_ = 0.0;
  double sum_ = 0.0;
  double compensation_ = 0.0;
  std::uint64_t count_ = 0;
};

/// log of the mean of exp(a |x|^2) over the observations.
double phase_log_ratio(const PhaseParams& phase, std::span<const Vector> observations);
/// Same with exponent a min(|x|^2, D^2).
double truncated_phase_log_ratio(const PhaseParams& phase, double D, std::span<const Vector> observations);

/// (d/2)(log(2 pi sigma2_0) - log(1 + sigma2_0 m)) + sum of log ratios.
double assemble_log_Z(double sigma2_0, double m, int d, std::span<const double> log_ratios);

struct EstimateResult {
  double log_z_hat = 0.0;
  double log_evidence = 0.0;  // log_z_hat + the potential's normalizer offset
  std::vector<double> per_phase_log_ratios;
  std::uint64_t cost = 0;  // sum of burn-in and observed steps actually run
  std::uint64_t seed = 0;
  std::uint32_t replicate = 0;
  int phases = 0;
  bool closed_form = false;
  double wall_seconds = 0.0;
  std::vector<double> replicate_log_z;  // filled by median_estimate
};

/// Debug hook: dump every state of one phase chain to `out`.
struct TraceRequest {
  int phase = 0;
  std::ostream* out = nullptr;
};

/// Full pipeline for one replicate: schedule, phase chains (spread over
/// cfg.workers threads), log ratios, assembly. Returns the exact constant at
/// zero cost when m == L.
EstimateResult estimate(const Potential& p, const RunConfig& cfg, std::uint64_t seed,
                        std::uint32_t replicate = 0, const TraceRequest* trace = nullptr);

/// Same pipeline on a prebuilt schedule.
EstimateResult estimate_with_schedule(const Potential& p, const Schedule& schedule, const RunConfig& cfg,
                                      std::uint64_t seed, std::uint32_t replicate = 0,
                                      const TraceRequest* trace = nullptr);

/// 2 ceil(4 log(1/mu_tilde)) + 1.
int median_replicate_count(double mu_tilde);

/// Runs median_replicate_count(mu_tilde) replicates with inner mu = 1/4 and
/// returns the median one with every replicate value attached. Replicate r
/// uses stream id replicate_ids[r]; the default ids are 0..R-1. The returned
/// cost is summed over all replicates.
EstimateResult median_estimate(const Potential& p, const RunConfig& cfg, double mu_tilde,
                               std::uint64_t seed);
EstimateResult median_estimate(const Potential& p, const RunConfig& cfg, double mu_tilde,
                               std::uint64_t seed, std::span<const std::uint32_t> replicate_ids);

}  // namespace logz
