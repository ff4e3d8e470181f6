#include "logz/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "logz/errors.hpp"

namespace logz {

namespace {

constexpr int kMaxPhases = 50'000'000;

double strong_threshold(int d, double m) { return (2.0 * d + 7.0) / m; }

void fill_phase_constants(PhaseParams& ph, double m, double L) {
  ph.m = m + 1.0 / ph.sigma2;
  ph.L = L + 1.0 / ph.sigma2;
  ph.kappa = 2.0 * ph.m * ph.L / (ph.m + ph.L);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

int Schedule::chunk_size(int k) const {
  if (k < 0 || k >= static_cast<int>(chunks.size())) return 0;
  return static_cast<int>(chunks[static_cast<std::size_t>(k)].size());
}

double initial_variance(double eps, int d, double m, double L) {
  if (!(L > m)) throw ClosedFormTarget("L <= m: the target is Gaussian with a closed-form constant");
  if (d <= 0) throw DomainError("dimension must be positive");
  return 2.0 * std::log1p(eps / 3.0) / (d * (L - m));
}

int dyadic_chunk(double t, double sigma2_0) {
  int k = static_cast<int>(std::floor(std::log2(t / sigma2_0)));
  while (k > 0 && t < std::ldexp(sigma2_0, k)) --k;
  while (t >= std::ldexp(sigma2_0, k + 1)) ++k;
  return std::max(k, 0);
}

ExtendedReal next_variance_strong(double t, double sigma2_0, int d, double m) {
  if (!(t >= sigma2_0)) throw DomainError("variance recurrence needs t >= sigma2_0");
  if (m > 0.0 && t >= strong_threshold(d, m)) return ExtendedReal::infinity();
  const int k = dyadic_chunk(t, sigma2_0);
  const double band = std::ldexp(sigma2_0, k + 1);
  const double decrement = (m + 1.0 / band) / (2.0 * (d + 4.0));
  return ExtendedReal::finite(1.0 / (1.0 / t - decrement));
}

ExtendedReal next_variance_convex(double t, double sigma2_0, int d, double D2) {
  if (!(t >= sigma2_0)) throw DomainError("variance recurrence needs t >= sigma2_0");
  if (t >= D2) return ExtendedReal::infinity();
  const int k = dyadic_chunk(t, sigma2_0);
  const double band = std::ldexp(sigma2_0, k + 1);
  return ExtendedReal::finite(1.0 / (1.0 / t - 1.0 / (2.0 * (d + 4.0) * band)));
}

Truncation truncation_radius(double eps, int d, double rho1, double rho2) {
  if (!(rho1 > 0.0)) throw ValidationError("truncation radius needs rho1 > 0");
  if (d <= 0) throw DomainError("dimension must be positive");
  Truncation t;
  t.tau = std::sqrt(16.0 * std::log(6.0 / eps) / d);
  t.D = (d * (t.tau + 1.0) + rho2) / rho1;
  if (!(t.D > 0.0)) throw ValidationError("truncation radius is not positive; check rho2");
  return t;
}

PhaseTuning tune_phase_theoretical(const Schedule& s, int i, const Potential& p) {
  const PhaseParams& ph = s.phases.at(static_cast<std::size_t>(i));
  const bool final = i == s.M() - 1;
  const double d = s.dim;
  const double eta = s.eta;
  const double eta2 = eta * eta;
  const double K = s.K;
  const double sigma = std::sqrt(ph.sigma2);
  const double mi = ph.m;
  const double Li = ph.L;
  const double kappa = ph.kappa;
  double lt2 = 0.0;
  if (s.use_hessian_lipschitz) {
    const auto& lt = p.regularity().hessian_lipschitz;
    if (!lt) throw ConfigError("a3: the potential declares no Hessian Lipschitz constant");
    lt2 = *lt * *lt;
  }

  PhaseTuning out;
  if (s.regime == Regime::kStronglyConvex) {
    if (!final) {
      if (s.use_hessian_lipschitz) {
        out.gamma = std::sqrt(3.0 / 7.0) * eta * kappa * std::sqrt(mi) * ph.sigma2 / (8.0 * K * d) /
                    std::sqrt(d * lt2 + 10.0 * std::pow(Li, 4) / mi);
      } else {
        out.gamma = eta2 * kappa * kappa * ph.sigma2 * ph.sigma2 * mi / (2285.0 * K * K * d * d * Li * Li);
      }
    } else if (s.use_hessian_lipschitz) {
      out.gamma = std::sqrt(3.0 / 7.0) * eta * kappa / (4.0 * std::sqrt(mi)) /
                  std::sqrt(d * lt2 + 10.0 * std::pow(Li, 4) / mi);
    } else {
      out.gamma = eta2 * mi / (40.0 * Li * Li);
    }
  } else {
    if (!final) {
      if (s.use_hessian_lipschitz) {
        out.gamma = std::sqrt(3.0 / 7.0) * eta / (sigma * 8.0 * K * d) /
                    std::sqrt(d * lt2 + 10.0 * std::pow(Li, 4) * ph.sigma2);
      } else {
        out.gamma = eta2 / (462.0 * Li * Li * ph.sigma2 * K * K * d * d);
      }
    } else if (s.use_hessian_lipschitz) {
      out.gamma = std::sqrt(3.0 / (8.0 * std::exp(1.0))) * eta * kappa * sigma / std::sqrt(d) /
                  std::sqrt(d * lt2 + 10.0 * std::pow(Li, 4) * ph.sigma2);
    } else {
      out.gamma = eta2 * kappa / (26.0 * d * Li * Li);
    }
  }
  // The inequalities also require gamma <= 1/(m_i + L_i); the formulas above
  // satisfy it on valid schedules, the clamp only guards degenerate input.
  out.gamma = std::min(out.gamma, 1.0 / (mi + Li));

  const double kg = kappa * out.gamma;
  if (s.regime == Regime::kStronglyConvex) {
    if (!final) {
      out.n = std::ceil(196.0 * K / eta2 * std::sqrt(mi) / (kappa * sigma) / kg);
      out.burn_in = std::ceil(2.0 / kg * std::log(5.0 * K * d * d));
    } else {
      out.n = std::ceil(19.0 / (kg * eta2));
      out.burn_in = std::ceil(1.0 / kg);
    }
  } else {
    if (!final) {
      out.n = std::ceil(453.0 * K / eta2 / kg);
      out.burn_in = std::ceil(2.0 / kg * std::log(K * d * d));
    } else {
      out.n = std::ceil(29.0 / eta2 / kg);
      out.burn_in = std::ceil(2.0 / kg * std::log(d));
    }
  }
  out.n = std::max(out.n, 1.0);
  out.burn_in = std::max(out.burn_in, 0.0);
  return out;
}

PhaseTuning tune_phase_practical(const Schedule& s, int i, Preset preset) {
  const PhaseParams& ph = s.phases.at(static_cast<std::size_t>(i));
  PhaseTuning out;
  switch (preset) {
    case Preset::kGaussianFig1:
      out.gamma = 1e-2 / (ph.m + ph.L);
      out.burn_in = 1e4;
      out.n = 1e5;
      break;
    case Preset::kRegressionFig2: {
      const double sigma = std::sqrt(ph.sigma2);
      out.gamma = 1e-2 * ph.kappa * ph.sigma2 * ph.m / (s.dim * ph.L * ph.L);
      out.burn_in = std::ceil(1e3 / (ph.kappa * out.gamma));
      out.n = std::ceil(1e4 * std::sqrt(ph.m) / (ph.kappa * ph.kappa * sigma * out.gamma));
      break;
    }
    case Preset::kLogisticFig4:
      out.burn_in = 1e4;
      if (i <= 30) {
        out.n = 1e6;
        out.gamma = 1e-2 / (ph.m + ph.L);
      } else {
        out.n = 1e5;
        out.gamma = 1e-1 / (ph.m + ph.L);
      }
      break;
    case Preset::kTheoretical:
      throw ConfigError("preset: 'theoretical' is not a practical preset");
  }
  return out;
}

Schedule build_schedule(const Potential& p, const RunConfig& cfg) {
  cfg.validate();
  const int d = p.dim();
  Schedule s;
  s.dim = d;
  s.L = p.L();
  s.regime = cfg.regime;
  s.preset = cfg.preset;
  s.stride = cfg.stride;
  s.use_hessian_lipschitz = cfg.use_hessian_lipschitz;
  s.eps = cfg.eps;
  s.mu = cfg.mu;
  s.eta = cfg.eps * std::sqrt(cfg.mu) / 8.0;

  if (p.m() >= p.L()) {
    throw ClosedFormTarget("m == L: the target is Gaussian with a closed-form constant");
  }
  if (cfg.use_hessian_lipschitz && !p.regularity().hessian_lipschitz) {
    throw ConfigError("a3: the potential declares no Hessian Lipschitz constant");
  }

  if (cfg.regime == Regime::kStronglyConvex) {
    if (!(p.m() > 0.0)) throw ConfigError("regime: strongly convex schedule needs m > 0");
    s.m = p.m();
    s.threshold = strong_threshold(d, s.m);
  } else {
    const auto& growth = p.regularity().growth;
    if (!growth) throw ConfigError("regime: convex schedule needs growth constants rho1, rho2");
    s.m = 0.0;
    s.truncation = truncation_radius(cfg.eps, d, growth->rho1, growth->rho2);
    s.threshold = s.truncation->D * s.truncation->D;
  }
  s.sigma2_0 = initial_variance(cfg.eps, d, s.m, s.L);

  auto next = [&](double t) {
    return cfg.regime == Regime::kStronglyConvex ? next_variance_strong(t, s.sigma2_0, d, s.m)
                                                 : next_variance_convex(t, s.sigma2_0, d, s.threshold);
  };

  std::vector<double> variances{s.sigma2_0};
  while (variances.back() < s.threshold) {
    double t = variances.back();
    for (int c = 0; c < cfg.stride; ++c) {
      const ExtendedReal v = next(t);
      if (v.is_infinite()) break;
      t = v.value();
      if (t >= s.threshold) break;
    }
    variances.push_back(t);
    if (static_cast<int>(variances.size()) > kMaxPhases) {
      throw ConfigError("schedule exceeds " + std::to_string(kMaxPhases) + " phases");
    }
  }

  const int M = static_cast<int>(variances.size());
  s.phases.resize(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) {
    PhaseParams& ph = s.phases[static_cast<std::size_t>(i)];
    ph.index = i;
    ph.sigma2 = variances[static_cast<std::size_t>(i)];
    fill_phase_constants(ph, s.m, s.L);
    if (i + 1 < M) {
      ph.a = 0.5 * (1.0 / ph.sigma2 - 1.0 / variances[static_cast<std::size_t>(i + 1)]);
      ph.chunk = dyadic_chunk(ph.sigma2, s.sigma2_0);
      const auto k = static_cast<std::size_t>(ph.chunk);
      if (s.chunks.size() <= k) s.chunks.resize(k + 1);
      s.chunks[k].push_back(i);
    } else {
      ph.a = 0.5 / ph.sigma2;
      ph.chunk = kFinalPhaseChunk;
    }
  }
  // K is the first empty chunk.
  s.K = 0;
  while (s.K < static_cast<int>(s.chunks.size()) && !s.chunks[static_cast<std::size_t>(s.K)].empty())
    ++s.K;

  for (int i = 0; i < M; ++i) {
    const PhaseTuning t = cfg.preset == Preset::kTheoretical ? tune_phase_theoretical(s, i, p)
                                                             : tune_phase_practical(s, i, cfg.preset);
    PhaseParams& ph = s.phases[static_cast<std::size_t>(i)];
    ph.gamma = t.gamma;
    ph.n = t.n;
    ph.burn_in = t.burn_in;
  }
  return s;
}

double cost_bound_chunk_constant(const Potential& p, const RunConfig& cfg) {
  const double d = p.dim();
  const double log_ratio = std::log1p(cfg.eps / 3.0);
  if (cfg.regime == Regime::kStronglyConvex) {
    if (!(p.m() > 0.0) || !(p.L() > p.m())) throw ConfigError("cost bound needs 0 < m < L");
    return std::ceil(std::log2(d * (d + 3.5) * (p.L() / p.m() - 1.0) / log_ratio));
  }
  const auto& growth = p.regularity().growth;
  if (!growth) throw ConfigError("regime: convex cost bound needs growth constants");
  const Truncation t = truncation_radius(cfg.eps, p.dim(), growth->rho1, growth->rho2);
  const double r = d * (t.tau + 1.0) + growth->rho2;
  return std::ceil(std::log2(d * p.L() * r * r / (2.0 * growth->rho1 * growth->rho1 * log_ratio)));
}

double cost_bound(const Potential& p, const RunConfig& cfg) {
  cfg.validate();
  const double d = p.dim();
  const double eps = cfg.eps;
  const double mu = cfg.mu;
  const double C = cost_bound_chunk_constant(p, cfg);
  double lt = 0.0;
  if (cfg.use_hessian_lipschitz) {
    const auto& h = p.regularity().hessian_lipschitz;
    if (!h) throw ConfigError("a3: the potential declares no Hessian Lipschitz constant");
    lt = *h;
  }
  const double L = p.L();

  if (cfg.regime == Regime::kStronglyConvex) {
    const double m = p.m();
    const double lead = 6272.0 * C / (eps * eps * mu) + std::log(5.0 * C * d * d);
    const double cond = (m + L) / (2.0 * m);
    if (!cfg.use_hessian_lipschitz) {
      return lead * std::pow(1088.0 * C, 2) * d * d * (d + 4.0) / (eps * eps * mu) *
             std::pow(cond, 3) * (C + 3.0);
    }
    return lead * std::sqrt(7.0 / 3.0) * 512.0 * C * std::pow(d, 1.5) / (eps * std::sqrt(mu)) *
           (d + 4.0) * (C + 3.0) *
           (lt * std::pow(2.0, 1.5) / std::pow(m, 1.5) + std::sqrt(10.0) * cond * cond);
  }

  const auto& growth = p.regularity().growth;
  const Truncation t = truncation_radius(eps, p.dim(), growth->rho1, growth->rho2);
  const double rho1 = growth->rho1;
  const double r = d * (t.tau + 1.0) + growth->rho2;
  const double lead = 17728.0 * C / (eps * eps * mu) + std::log(C * d * d);
  const double quad = 6.0 * L * r * r / (rho1 * rho1);
  const double quart = 8.0 * L * L * std::pow(r, 4) / (3.0 * std::pow(rho1, 4));
  if (!cfg.use_hessian_lipschitz) {
    return lead * std::pow(487.0 * C, 2) * d * d * (d + 4.0) / (eps * eps * mu) * (C + quad + quart);
  }
  const double spread =
      std::max(5.0 * rho1 / r, std::pow(5.0 / 9.0 + rho1 * rho1 / (r * r * L), 2));
  const double cubic = std::sqrt(d) * lt * std::pow(r, 3) / (std::sqrt(10.0) * std::pow(rho1, 3)) * spread;
  return 2474.0 * lead * (C + 1.0) * d * (d + 4.0) / (eps * std::sqrt(mu)) * (quart + cubic + quad + C);
}

std::vector<std::string> schedule_invariant_violations(const Schedule& s) {
  std::vector<std::string> out;
  auto fail = [&](int i, const std::string& what) {
    out.push_back("phase " + std::to_string(i) + ": " + what);
  };
  constexpr double kRel = 1e-12;
  const int M = s.M();
  const double d = s.dim;
  if (M == 0) {
    out.push_back("schedule has no phases");
    return out;
  }
  const double growth = (4.0 * d + 16.0) / (4.0 * d + 15.0);
  for (int i = 0; i < M; ++i) {
    const PhaseParams& ph = s.phases[static_cast<std::size_t>(i)];
    const bool final = i == M - 1;
    if (ph.index != i) fail(i, "index mismatch");
    if (i + 1 < M) {
      const double next = s.phases[static_cast<std::size_t>(i + 1)].sigma2;
      if (!(next > ph.sigma2)) fail(i, "variances not strictly increasing");
      if (next / ph.sigma2 < growth * (1.0 - kRel)) fail(i, "growth ratio below (4d+16)/(4d+15)");
    }
    const double mi = s.m + 1.0 / ph.sigma2;
    const double Li = s.L + 1.0 / ph.sigma2;
    if (std::abs(ph.m - mi) > kRel * mi) fail(i, "m_i != m + 1/sigma_i^2");
    if (std::abs(ph.L - Li) > kRel * Li) fail(i, "L_i != L + 1/sigma_i^2");
    if (std::abs(ph.kappa - 2.0 * mi * Li / (mi + Li)) > kRel * ph.kappa) fail(i, "kappa_i mismatch");
    if (!(ph.gamma > 0.0) || ph.gamma > (1.0 + kRel) / (ph.m + ph.L))
      fail(i, "step size " + fmt(ph.gamma) + " outside (0, 1/(m_i + L_i)]");
    if (!(ph.n >= 1.0) || ph.n != std::floor(ph.n)) fail(i, "sample count is not a positive integer");
    if (!(ph.burn_in >= 0.0) || ph.burn_in != std::floor(ph.burn_in))
      fail(i, "burn-in is not a nonnegative integer");

    if (final) {
      if (std::abs(ph.a - 0.5 / ph.sigma2) > kRel * ph.a) fail(i, "final a != 1/(2 sigma^2)");
      if (ph.chunk != kFinalPhaseChunk) fail(i, "final phase carries a chunk index");
      continue;
    }
    if (ph.a < 0.0) fail(i, "negative a_i");
    if (ph.a > s.stride * ph.m / (4.0 * (d + 4.0)) * (1.0 + kRel)) fail(i, "a_i above m_i/(4(d+4))");
    const double lo = std::ldexp(s.sigma2_0, ph.chunk);
    const double hi = std::ldexp(s.sigma2_0, ph.chunk + 1);
    if (ph.chunk < 0 || ph.sigma2 < lo || ph.sigma2 >= hi) fail(i, "variance outside its dyadic chunk");
    if (s.regime == Regime::kStronglyConvex && ph.kappa * ph.sigma2 > 4.0 * d + 16.0)
      fail(i, "kappa_i sigma_i^2 above 4d+16");
  }

  // Stopping rule.
  const double last = s.phases.back().sigma2;
  if (last < s.threshold) out.push_back("final variance below the stopping threshold");
  if (M >= 2 && s.phases[static_cast<std::size_t>(M - 2)].sigma2 >= s.threshold)
    out.push_back("stopping threshold reached before the final phase");

  if (s.regime == Regime::kConvex) {
    for (const auto& ph : s.phases) {
      const double ks = ph.kappa * ph.sigma2;
      if (ks < 1.0 - kRel || ks > 2.0 + kRel) fail(ph.index, "kappa_i sigma_i^2 outside [1, 2]");
    }
    if (s.stride == 1 && last > (10.0 / 9.0) * s.threshold * (1.0 + kRel))
      out.push_back("final variance above (10/9) D^2");
  }

  // Chunks: partition of the non-final phases, K bound and chunk identity.
  const double k_bound = std::ceil(std::log2(s.threshold / s.sigma2_0));
  if (s.K > std::max(k_bound, 0.0)) out.push_back("K exceeds ceil(log2(threshold / sigma2_0))");
  for (int k = 0; k < static_cast<int>(s.chunks.size()); ++k) {
    const auto& members = s.chunks[static_cast<std::size_t>(k)];
    const double band = std::ldexp(s.sigma2_0, k + 1);
    double sum_a = 0.0;
    for (int i : members) {
      const auto& ph = s.phases[static_cast<std::size_t>(i)];
      if (ph.chunk != k) fail(i, "listed in the wrong chunk");
      sum_a += ph.a;
      if (s.stride == 1 && band * ph.a * static_cast<double>(members.size()) > 1.0 + kRel)
        fail(i, "2^(k+1) sigma2_0 a_i |I_k| > 1");
    }
    if (band * sum_a > 1.0 + kRel) out.push_back("chunk " + std::to_string(k) + ": a_i sum too large");
  }
  return out;
}

}  // namespace logz
