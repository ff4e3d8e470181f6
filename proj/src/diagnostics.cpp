#include "logz/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "logz/errors.hpp"
#include "logz/estimator.hpp"

namespace logz {

namespace {

constexpr double kRel = 1e-12;

double safe_log10(double v) { return v > 0.0 ? std::log10(v) : -HUGE_VAL; }

struct Moments {
  double mean = 0.0;
  double std = 0.0;
};

Moments moments(const std::vector<double>& v) {
  Moments out;
  for (double x : v) out.mean += x;
  out.mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - out.mean) * (x - out.mean);
  out.std = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  return out;
}

ReplicateTable aggregate(const std::vector<EstimateResult>& runs) {
  ReplicateTable table;
  const std::size_t M = runs.front().per_phase_log_ratios.size();
  for (std::size_t i = 0; i < M; ++i) {
    std::vector<double> logs, linear;
    for (const auto& r : runs) {
      logs.push_back(r.per_phase_log_ratios[i]);
      linear.push_back(std::exp(r.per_phase_log_ratios[i]));
    }
    const Moments lm = moments(logs);
    const Moments pm = moments(linear);
    table.rows.push_back({static_cast<int>(i), pm.mean, pm.std, lm.mean, lm.std});
  }
  for (const auto& r : runs) {
    table.log_z.push_back(r.log_z_hat);
    table.log_evidence.push_back(r.log_evidence);
    table.cost += r.cost;
  }
  return table;
}

}  // namespace

MseBoundEntry mse_bound(const PhaseParams& ph, int d, bool use_a3, std::optional<double> lt) {
  const double a = ph.a, g = ph.gamma, mi = ph.m, Li = ph.L, k = ph.kappa;
  const double n = ph.n, N = ph.burn_in;
  std::ostringstream bad;
  bad.precision(17);
  if (!(g > 0.0) || g > (1.0 + kRel) / (mi + Li))
    bad << "gamma = " << g << " outside (0, 1/(m_i + L_i)] = (0, " << 1.0 / (mi + Li) << "]; ";
  const double a_cap = std::min(mi / (4.0 * (d + 4.0)), 0.5 / ph.sigma2);
  if (a < 0.0 || a > a_cap * (1.0 + kRel))
    bad << "a_i = " << a << " outside [0, m_i/(4(d+4)) min 1/(2 sigma_i^2)] = [0, " << a_cap << "]; ";
  if (!(n >= 1.0)) bad << "n_i must be positive; ";
  if (use_a3 && !lt) bad << "Hessian Lipschitz constant required; ";
  if (!bad.str().empty()) {
    throw ValidationError("phase " + std::to_string(ph.index) + ": " + bad.str());
  }

  MseBoundEntry e;
  e.phase = ph.index;
  e.C0 = std::exp(4.0 * a * (d + 2.0) / (k - 8.0 * a));
  e.C1 = 2.0 * d * (1.0 - 8.0 * a * g) / (k - 8.0 * a);
  e.C2 = 4.0 * d / mi;
  e.A0 = 2.0 * Li * Li / k * d;
  e.A1 = 2.0 * d * Li * Li +
         d * std::pow(Li, 4) * (1.0 / k + 1.0 / (mi + Li)) * (1.0 / mi + 1.0 / (6.0 * (mi + Li)));
  e.burn_in_term = 4.0 * d / (n * mi * k * g) * std::exp(-N * k * g / 2.0);
  if (use_a3) {
    e.B0 = d * (2.0 * Li * Li + (d * *lt * *lt / 3.0 + 4.0 * std::pow(Li, 4) / (3.0 * mi)) / k);
    e.B1 = d * std::pow(Li, 4) * (1.0 / k + 1.0 / (6.0 * (mi + Li)) + 1.0 / mi);
    e.discretization_term = 2.0 / k * (*e.B0 * g * g + *e.B1 * g * g * g);
  } else {
    e.discretization_term = 2.0 / k * (e.A0 * g + e.A1 * g * g);
  }
  e.bias2 = 4.0 * a * a * (e.C2 + e.C0 * e.C1) * (e.burn_in_term + e.discretization_term);
  e.variance = 32.0 * a * a * e.C0 * e.C1 / (k * k * n * g) * (1.0 + 2.0 / (k * n * g));
  e.mse = e.bias2 + e.variance;
  e.log10_bias2 = safe_log10(e.bias2);
  e.log10_variance = safe_log10(e.variance);
  e.log10_mse = safe_log10(e.mse);
  return e;
}

std::vector<std::optional<MseBoundEntry>> mse_bound_report(const Schedule& s, const Potential& p) {
  std::vector<std::optional<MseBoundEntry>> out;
  out.reserve(s.phases.size());
  for (const auto& ph : s.phases) {
    try {
      out.push_back(mse_bound(ph, s.dim, s.use_hessian_lipschitz, p.regularity().hessian_lipschitz));
    } catch (const ValidationError&) {
      out.push_back(std::nullopt);
    }
  }
  return out;
}

double cost_actual(const Schedule& s) {
  double total = 0.0;
  for (const auto& ph : s.phases) total += ph.burn_in + ph.n;
  return total;
}

ReplicateTable replicate_report(const Potential& p, const RunConfig& cfg, std::span<const std::uint64_t> seeds) {
  if (seeds.size() < 2) throw ConfigError("replicates: at least two replicates are needed");
  std::set<std::uint64_t> distinct(seeds.begin(), seeds.end());
  if (distinct.size() != seeds.size()) throw ConfigError("replicates: seeds must differ");
  if (p.m() >= p.L()) throw ClosedFormTarget("m == L: the target has a closed-form constant, nothing to replicate");
  const Schedule s = build_schedule(p, cfg);
  std::vector<EstimateResult> runs;
  for (auto seed : seeds) runs.push_back(estimate_with_schedule(p, s, cfg, seed, 0));
  return aggregate(runs);
}

ReplicateTable replicate_report(const Potential& p, const RunConfig& cfg, int replicates, std::uint64_t seed) {
  if (replicates < 2) throw ConfigError("replicates: at least two replicates are needed");
  if (p.m() >= p.L()) throw ClosedFormTarget("m == L: the target has a closed-form constant, nothing to replicate");
  const Schedule s = build_schedule(p, cfg);
  std::vector<EstimateResult> runs;
  for (int r = 0; r < replicates; ++r)
    runs.push_back(estimate_with_schedule(p, s, cfg, seed, static_cast<std::uint32_t>(r)));
  return aggregate(runs);
}

}  // namespace logz
