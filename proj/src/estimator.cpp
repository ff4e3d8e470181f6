#include "logz/estimator.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <numbers>
#include <thread>

#include "logz/errors.hpp"
#include "logz/rng.hpp"
#include "logz/sampler.hpp"

namespace logz {

namespace {

constexpr double kCenteringSlack = 1e-6;

void add_compensated(double& sum, double& comp, double v) {
  const double t = sum + v;
  if (std::abs(sum) >= std::abs(v)) {
    comp += (sum - t) + v;
  } else {
    comp += (v - t) + sum;
  }
  sum = t;
}

template <class Exponent>
double log_ratio_of(std::span<const Vector> observations, Exponent exponent) {
  if (observations.empty()) throw ContractViolation("log ratio of an empty observation stream");
  LogMeanAccumulator acc;
  for (const auto& x : observations) acc.add(exponent(x));
  return acc.value();
}

// Runs fn(i) for i in [0, count) on up to `workers` threads. Exceptions are
// collected per index and the lowest-index one is rethrown after the join, so
// failures are reported deterministically.
template <class Fn>
void parallel_for(int count, int workers, Fn fn) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (int i = next++; i < count; i = next++) {
      if (failed.load()) continue;
      try {
        fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
        failed = true;
      }
    }
  };
  const int threads = std::clamp(workers, 1, std::max(count, 1));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

void LogMeanAccumulator::add(double e) {
  if (count_ == 0) {
    max_ = e;
    sum_ = 1.0;
    compensation_ = 0.0;
  } else if (e > max_) {
    const double scale = std::exp(max_ - e);
    sum_ *= scale;
    compensation_ *= scale;
    max_ = e;
    add_compensated(sum_, compensation_, 1.0);
  } else {
    add_compensated(sum_, compensation_, std::exp(e - max_));
  }
  ++count_;
}

void LogMeanAccumulator::merge(const LogMeanAccumulator& other) {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  if (other.max_ > max_) {
    const double scale = std::exp(max_ - other.max_);
    sum_ *= scale;
    compensation_ *= scale;
    max_ = other.max_;
    add_compensated(sum_, compensation_, other.sum_);
    add_compensated(sum_, compensation_, other.compensation_);
  } else {
    const double scale = std::exp(other.max_ - max_);
    add_compensated(sum_, compensation_, other.sum_ * scale);
    add_compensated(sum_, compensation_, other.compensation_ * scale);
  }
  count_ += other.count_;
}

double LogMeanAccumulator::value() const {
  if (count_ == 0) throw ContractViolation("mean of an empty accumulator");
  return max_ + std::log(sum_ + compensation_) - std::log(static_cast<double>(count_));
}

double phase_log_ratio(const PhaseParams& phase, std::span<const Vector> observations) {
  const double a = phase.a;
  return log_ratio_of(observations, [a](const Vector& x) { return a * x.squaredNorm(); });
}

double truncated_phase_log_ratio(const PhaseParams& phase, double D, std::span<const Vector> observations) {
  const double a = phase.a;
  const double D2 = D * D;
  return log_ratio_of(observations,
                      [a, D2](const Vector& x) { return a * std::min(x.squaredNorm(), D2); });
}

double assemble_log_Z(double sigma2_0, double m, int d, std::span<const double> log_ratios) {
  double total = 0.5 * d * (std::log(2.0 * std::numbers::pi * sigma2_0) - std::log1p(sigma2_0 * m));
  for (double r : log_ratios) total += r;
  return total;
}

EstimateResult estimate_with_schedule(const Potential& p, const Schedule& s, const RunConfig& cfg,
                                      std::uint64_t seed, std::uint32_t replicate,
                                      const TraceRequest* trace) {
  const auto start = std::chrono::steady_clock::now();
  const int M = s.M();
  const double D2 = s.truncation ? s.truncation->D * s.truncation->D : 0.0;
  const bool truncate_final = s.regime == Regime::kConvex;

  std::vector<double> ratios(static_cast<std::size_t>(M), 0.0);
  std::vector<std::uint64_t> steps(static_cast<std::size_t>(M), 0);
  parallel_for(M, resolve_workers(cfg.workers), [&](int i) {
    const PhaseParams& ph = s.phases[static_cast<std::size_t>(i)];
    const GaussianStream stream(seed, static_cast<std::uint32_t>(i), replicate);
    LogMeanAccumulator acc;
    const double a = ph.a;
    const bool truncated = truncate_final && i == M - 1;
    std::ostream* sink = trace && trace->phase == i ? trace->out : nullptr;
    ChainReport report;
    try {
      if (truncated) {
        report = run_chain(p, ph, stream, [&](const Vector& x) { acc.add(a * std::min(x.squaredNorm(), D2)); }, sink);
      } else {
        report = run_chain(p, ph, stream, [&](const Vector& x) { acc.add(a * x.squaredNorm()); }, sink);
      }
    } catch (const DivergenceError& e) {
      throw DivergenceError(std::string(e.what()) + " (step size " + std::to_string(ph.gamma) + ")",
                            e.phase(), e.step());
    }
    ratios[static_cast<std::size_t>(i)] = acc.value();
    steps[static_cast<std::size_t>(i)] = report.steps;
  });

  EstimateResult r;
  r.per_phase_log_ratios = std::move(ratios);
  r.log_z_hat = assemble_log_Z(s.sigma2_0, s.m, s.dim, r.per_phase_log_ratios);
  if (cfg.correct_reference_bias) r.log_z_hat -= 0.5 * std::log1p(cfg.eps / 3.0);
  r.log_evidence = r.log_z_hat + p.log_normalizer_offset();
  for (auto c : steps) r.cost += c;
  r.seed = seed;
  r.replicate = replicate;
  r.phases = M;
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

EstimateResult estimate(const Potential& p, const RunConfig& cfg, std::uint64_t seed, std::uint32_t replicate,
                        const TraceRequest* trace) {
  cfg.validate();
  validate_centering(p, kCenteringSlack * std::max(1.0, p.L()));
  if (p.m() >= p.L()) {
    EstimateResult r;
    r.closed_form = true;
    r.log_z_hat = 0.5 * p.dim() * std::log(2.0 * std::numbers::pi / p.m());
    r.log_evidence = r.log_z_hat + p.log_normalizer_offset();
    r.seed = seed;
    r.replicate = replicate;
    return r;
  }
  return estimate_with_schedule(p, build_schedule(p, cfg), cfg, seed, replicate, trace);
}

int median_replicate_count(double mu_tilde) {
  if (!(mu_tilde > 0.0 && mu_tilde < 1.0)) throw ConfigError("mu_tilde must lie in (0, 1)");
  return 2 * static_cast<int>(std::ceil(4.0 * std::log(1.0 / mu_tilde))) + 1;
}

EstimateResult median_estimate(const Potential& p, const RunConfig& cfg, double mu_tilde, std::uint64_t seed) {
  const int R = median_replicate_count(mu_tilde);
  std::vector<std::uint32_t> ids(static_cast<std::size_t>(R));
  for (int r = 0; r < R; ++r) ids[static_cast<std::size_t>(r)] = static_cast<std::uint32_t>(r);
  return median_estimate(p, cfg, mu_tilde, seed, ids);
}

EstimateResult median_estimate(const Potential& p, const RunConfig& cfg, double mu_tilde, std::uint64_t seed,
                               std::span<const std::uint32_t> replicate_ids) {
  const int R = median_replicate_count(mu_tilde);
  if (static_cast<int>(replicate_ids.size()) != R) {
    throw ConfigError("median estimate needs " + std::to_string(R) + " replicate ids, got " +
                      std::to_string(replicate_ids.size()));
  }
  RunConfig inner = cfg;
  inner.mu = 0.25;
  inner.mu_tilde.reset();
  inner.validate();

  const auto start = std::chrono::steady_clock::now();
  std::vector<EstimateResult> runs;
  runs.reserve(replicate_ids.size());
  for (auto id : replicate_ids) runs.push_back(estimate(p, inner, seed, id));

  std::vector<std::size_t> order(runs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (runs[x].log_z_hat != runs[y].log_z_hat) return runs[x].log_z_hat < runs[y].log_z_hat;
    return runs[x].replicate < runs[y].replicate;
  });
  EstimateResult out = runs[order[order.size() / 2]];
  out.cost = 0;
  for (const auto& r : runs) {
    out.replicate_log_z.push_back(r.log_z_hat);
    out.cost += r.cost;
  }
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace logz
