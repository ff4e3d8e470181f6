#pragma once

#include <optional>
#include <string>
#include <vector>

#include "logz/potential.hpp"
#include "logz/run_config.hpp"

namespace logz {

/// Positive real or +infinity. Infinity is a flag, never an IEEE inf fed into
/// arithmetic.
class ExtendedReal {
 public:
  static ExtendedReal finite(double v) { return ExtendedReal(v, false); }
  static ExtendedReal infinity() { return ExtendedReal(0.0, true); }

  bool is_infinite() const { return infinite_; }
  /// Only meaningful when finite.
  double value() const { return value_; }
  /// 1/x with the convention 1/inf = 0.
  double reciprocal() const { return infinite_ ? 0.0 : 1.0 / value_; }

 private:
  ExtendedReal(double v, bool inf) : value_(v), infinite_(inf) {}
  double value_;
  bool infinite_;
};

inline constexpr int kFinalPhaseChunk = -1;

/// Per-phase quantities of the annealing. n and burn_in are integer valued
/// but stored as doubles: theoretical sample counts routinely exceed 2^64.
struct PhaseParams {
  int index = 0;
  double sigma2 = 0.0;
  double a = 0.0;      // exponent rate of g_i(x) = exp(a |x|^2)
  double m = 0.0;      // m + 1/sigma2
  double L = 0.0;      // L + 1/sigma2
  double kappa = 0.0;  // 2 m L / (m + L)
  double gamma = 0.0;
  double n = 0.0;
  double burn_in = 0.0;
  int chunk = kFinalPhaseChunk;
};

struct Truncation {
  double tau = 0.0;
  double D = 0.0;
};

struct Schedule {
  std::vector<PhaseParams> phases;
  std::vector<std::vector<int>> chunks;  // I_k for k < K
  int K = 0;
  double eta = 0.0;
  double sigma2_0 = 0.0;
  double threshold = 0.0;  // stopping variance: (2d+7)/m or D^2
  int dim = 0;
  double m = 0.0;  // strong convexity used by the schedule (0 in the convex regime)
  double L = 0.0;
  Regime regime = Regime::kStronglyConvex;
  Preset preset = Preset::kTheoretical;
  int stride = 1;
  bool use_hessian_lipschitz = false;
  double eps = 0.0;
  double mu = 0.0;
  std::optional<Truncation> truncation;

  int M() const { return static_cast<int>(phases.size()); }
  const PhaseParams& final_phase() const { return phases.back(); }
  /// |I_k|; 0 for the final-phase sentinel.
  int chunk_size(int k) const;
};

/// sigma_0^2 = 2 log(1 + eps/3) / (d (L - m)). Throws ClosedFormTarget when
/// L <= m.
double initial_variance(double eps, int d, double m, double L);

/// k(t) = floor(log2(t / sigma2_0)), snapped so that
/// 2^k sigma2_0 <= t < 2^(k+1) sigma2_0 holds exactly.
int dyadic_chunk(double t, double sigma2_0);

/// Strongly convex recurrence; +inf once t >= (2d+7)/m.
ExtendedReal next_variance_strong(double t, double sigma2_0, int d, double m);

/// Convex recurrence; +inf once t >= D^2.
ExtendedReal next_variance_convex(double t, double sigma2_0, int d, double D2);

/// tau = (16 log(6/eps) / d)^(1/2), D = (d (tau + 1) + rho2) / rho1.
Truncation truncation_radius(double eps, int d, double rho1, double rho2);

struct PhaseTuning {
  double gamma = 0.0;
  double n = 0.0;
  double burn_in = 0.0;
};

/// Step size, sample count and burn-in from the error-control inequalities
/// of the regime (strongly convex or convex, with or without the Hessian
/// Lipschitz constant), taken at equality and rounded up.
PhaseTuning tune_phase_theoretical(const Schedule& schedule, int i, const Potential& p);

/// Fixed benchmark recipes. Throws ConfigError for kTheoretical.
PhaseTuning tune_phase_practical(const Schedule& schedule, int i, Preset preset);

/// Builds the variance ladder, the chunks and the per-phase tuning. Throws
/// ClosedFormTarget when m == L, ConfigError for inconsistent regimes.
Schedule build_schedule(const Potential& p, const RunConfig& cfg);

/// Closed-form upper bound on the total iteration count of the theoretical
/// preset for the regime and flags in cfg.
double cost_bound(const Potential& p, const RunConfig& cfg);

/// The C constant of the cost bounds (an upper bound on K).
double cost_bound_chunk_constant(const Potential& p, const RunConfig& cfg);

/// Structural checks on a built schedule: monotone variances, growth ratio,
/// stopping bracket, chunk membership and chunk identity, per-phase constants,
/// step size ceiling, kappa * sigma^2 bounds. Returns one message per
/// violation.
std::vector<std::string> schedule_invariant_violations(const Schedule& schedule);

}  // namespace logz
