#include "logz/run_config.hpp"

#include <cmath>
#include <thread>

#include "logz/errors.hpp"
#include "logz/potential.hpp"

namespace logz {

std::string_view to_string(Regime regime) {
  return regime == Regime::kStronglyConvex ? "strong" : "convex";
}

std::string_view to_string(Preset preset) {
  switch (preset) {
    case Preset::kTheoretical:
      return "theoretical";
    case Preset::kGaussianFig1:
      return "gaussian-fig1";
    case Preset::kRegressionFig2:
      return "regression-fig2";
    case Preset::kLogisticFig4:
      return "logistic-fig4";
  }
  return "theoretical";
}

Regime parse_regime(std::string_view name) {
  if (name == "strong" || name == "strongly-convex") return Regime::kStronglyConvex;
  if (name == "convex") return Regime::kConvex;
  throw ConfigError("regime: unknown value '" + std::string(name) + "'");
}

Preset parse_preset(std::string_view name) {
  if (name == "theoretical") return Preset::kTheoretical;
  if (name == "gaussian-fig1") return Preset::kGaussianFig1;
  if (name == "regression-fig2") return Preset::kRegressionFig2;
  if (name == "logistic-fig4") return Preset::kLogisticFig4;
  throw ConfigError("preset: unknown preset '" + std::string(name) + "'");
}

void RunConfig::validate() const {
  auto open_unit = [](double v) { return v > 0.0 && v < 1.0; };
  if (!open_unit(eps)) throw ConfigError("eps must lie in (0, 1), got " + std::to_string(eps));
  if (!open_unit(mu)) throw ConfigError("mu must lie in (0, 1), got " + std::to_string(mu));
  if (mu_tilde && !open_unit(*mu_tilde))
    throw ConfigError("mu_tilde must lie in (0, 1), got " + std::to_string(*mu_tilde));
  if (stride < 1) throw ConfigError("stride must be a positive integer");
  if (workers < 0) throw ConfigError("workers must be a positive integer");
}

Regime auto_regime(const Potential& p) {
  return p.m() > 0.0 ? Regime::kStronglyConvex : Regime::kConvex;
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace logz
