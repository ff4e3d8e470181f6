#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace logz {

class Potential;

enum class Regime { kStronglyConvex, kConvex };

/// Per-phase tuning recipe. kTheoretical sets step size, sample count and
/// burn-in so that the error-control inequalities hold with equality; the
/// others are the fixed recipes used for the benchmark experiments.
enum class Preset { kTheoretical, kGaussianFig1, kRegressionFig2, kLogisticFig4 };

std::string_view to_string(Regime regime);
std::string_view to_string(Preset preset);
/// Accepts "strong" / "strongly-convex" and "convex".
Regime parse_regime(std::string_view name);
/// Accepts "theoretical", "gaussian-fig1", "regression-fig2", "logistic-fig4".
Preset parse_preset(std::string_view name);

struct RunConfig {
  double eps = 0.1;  // relative accuracy
  double mu = 0.1;   // failure probability
  Regime regime = Regime::kStronglyConvex;
  bool use_hessian_lipschitz = false;
  Preset preset = Preset::kTheoretical;
  int stride = 1;  // recurrence compositions per phase
  std::uint64_t seed = 0;
  int workers = 0;  // 0 means available hardware parallelism
  // Shift log Z by -log(1 + eps/3)/2, the log-midpoint of the bracket on the
  // Gaussian reference constant. Off by default.
  bool correct_reference_bias = false;
  std::optional<double> mu_tilde;  // median trick target failure probability

  /// Throws ConfigError naming the first offending field.
  void validate() const;
};

/// Strongly convex when m > 0, convex otherwise.
Regime auto_regime(const Potential& p);

/// Number of worker threads to use for a config value (0 = hardware).
int resolve_workers(int requested);

}  // namespace logz
