// logz command-line driver. Talks to the library only through logz.h.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "logz/logz.h"

namespace {

struct Options {
  std::string config;
  std::optional<std::string> seed, eps, mu, mu_tilde, preset, stride, workers, out, format, regime, trace;
  std::optional<int> replicates;
  bool a3 = false;
};

class Failure {
 public:
  explicit Failure(logz_status s) : status(s) {}
  logz_status status;
};

int exit_code(logz_status s) {
  switch (s) {
    case LOGZ_OK: return 0;
    case LOGZ_ERR_CONFIG:
    case LOGZ_ERR_VALIDATION:
    case LOGZ_ERR_PARSE:
    case LOGZ_ERR_DOMAIN:
    case LOGZ_ERR_IO:
    case LOGZ_ERR_CLOSED_FORM:
      return 2;
    case LOGZ_ERR_DIVERGENCE: return 3;
    case LOGZ_ERR_ORACLE_UNAVAILABLE: return 4;
    default: return 1;
  }
}

void check(logz_status s) {
  if (s != LOGZ_OK) throw Failure(s);
}

// Owns a string returned by the library.
struct Text {
  char* p = nullptr;
  ~Text() { logz_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  ~Handle() { Free(p); }
};
using Config = Handle<logz_config, logz_config_free>;
using Model = Handle<logz_model, logz_model_free>;
using ScheduleH = Handle<logz_schedule, logz_schedule_free>;
using Result = Handle<logz_result, logz_result_free>;
using Table = Handle<logz_replicate_table, logz_replicate_free>;

void set(logz_config* cfg, const char* key, const std::optional<std::string>& v) {
  if (v) check(logz_config_set(cfg, key, v->c_str()));
}

void load(const Options& o, Config& cfg) {
  if (o.config.empty()) {
    cfg.p = logz_config_default();
    if (!cfg.p) throw Failure(LOGZ_ERR_INTERNAL);
  } else {
    check(logz_config_load(o.config.c_str(), &cfg.p));
  }
  std::optional<std::string> workers = o.workers;
  if (!workers) {
    if (const char* env = std::getenv("LOGZ_WORKERS"); env && *env) workers = env;
  }
  set(cfg.p, "run.seed", o.seed);
  set(cfg.p, "run.eps", o.eps);
  set(cfg.p, "run.mu", o.mu);
  set(cfg.p, "run.mu_tilde", o.mu_tilde);
  set(cfg.p, "run.preset", o.preset);
  set(cfg.p, "run.stride", o.stride);
  set(cfg.p, "run.regime", o.regime);
  set(cfg.p, "run.workers", workers);
  set(cfg.p, "output.path", o.out);
  set(cfg.p, "output.format", o.format);
  set(cfg.p, "output.trace", o.trace);
  if (o.replicates) check(logz_config_set(cfg.p, "run.replicates", std::to_string(*o.replicates).c_str()));
  if (o.a3) check(logz_config_set(cfg.p, "run.a3", "true"));
  check(logz_config_validate(cfg.p));
}

void emit(const logz_config* cfg, const std::string& text) {
  Text path;
  check(logz_config_output(cfg, &path.p, nullptr));
  if (!path.p) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(path.p);
  if (!f || !(f << text)) {
    std::cerr << "logz: cannot write '" << path.p << "'\n";
    throw Failure(LOGZ_ERR_IO);
  }
}

logz_format format_of(const logz_config* cfg) {
  logz_format f = LOGZ_FORMAT_JSON;
  check(logz_config_output(cfg, nullptr, &f));
  return f;
}

int cmd_schedule(const Options& o, bool default_csv) {
  Config cfg;
  load(o, cfg);
  if (!o.format && default_csv) check(logz_config_set(cfg.p, "output.format", "csv"));
  Model model;
  check(logz_model_create(cfg.p, &model.p));
  ScheduleH s;
  check(logz_schedule_build(cfg.p, model.p, &s.p));
  int M = 0, bad = 0;
  double realized = 0.0, bound = 0.0;
  check(logz_schedule_phase_count(s.p, &M));
  check(logz_schedule_violations(s.p, &bad));
  check(logz_schedule_cost(s.p, &realized, &bound));
  Text out;
  check(logz_schedule_render(s.p, format_of(cfg.p), &out.p));
  emit(cfg.p, out.str());
  std::fprintf(stderr, "schedule: M = %d phases, cost %.6g (theoretical bound %.6g), %d invariant violations\n",
               M, realized, bound, bad);
  return 0;
}

int cmd_estimate(const Options& o) {
  Config cfg;
  load(o, cfg);
  Model model;
  check(logz_model_create(cfg.p, &model.p));
  Result r;
  check(logz_estimate(cfg.p, model.p, &r.p));
  Text out;
  check(logz_result_render(r.p, format_of(cfg.p), &out.p));
  emit(cfg.p, out.str());
  double lz = 0.0, le = 0.0;
  std::uint64_t cost = 0;
  int reps = 0;
  check(logz_result_values(r.p, &lz, &le, &cost));
  check(logz_result_replicate_count(r.p, &reps));
  std::fprintf(stderr, "estimate: log Z = %.10g, log evidence = %.10g, cost = %llu", lz, le,
               static_cast<unsigned long long>(cost));
  if (reps > 0) std::fprintf(stderr, ", median of %d replicates", reps);
  std::fprintf(stderr, "\n");
  return 0;
}

int cmd_replicate(const Options& o) {
  Config cfg;
  load(o, cfg);
  if (!o.format) check(logz_config_set(cfg.p, "output.format", "csv"));
  Model model;
  check(logz_model_create(cfg.p, &model.p));
  int R = 0;
  check(logz_config_replicates(cfg.p, &R));
  Table t;
  check(logz_replicate(cfg.p, model.p, R, &t.p));
  Text out;
  check(logz_replicate_render(t.p, format_of(cfg.p), &out.p));
  emit(cfg.p, out.str());
  int rows = 0;
  check(logz_replicate_rows(t.p, &rows));
  std::fprintf(stderr, "replicate: %d pipelines, %d phases\n", R, rows);
  return 0;
}

int cmd_oracle(const Options& o) {
  Config cfg;
  load(o, cfg);
  Model model;
  check(logz_model_create(cfg.p, &model.p));
  double lz = 0.0, le = 0.0;
  Text method;
  check(logz_oracle(model.p, &lz, &le, &method.p));
  Text digest;
  check(logz_config_digest(cfg.p, &digest.p));
  char buf[512];
  if (format_of(cfg.p) == LOGZ_FORMAT_CSV) {
    std::snprintf(buf, sizeof buf, "method,log_z,log_evidence,config_digest\n%s,%.17g,%.17g,%s\n",
                  method.str().c_str(), lz, le, digest.str().c_str());
  } else {
    std::snprintf(buf, sizeof buf,
                  "{\n  \"method\": \"%s\",\n  \"log_z\": %.17g,\n  \"log_evidence\": %.17g,\n"
                  "  \"config_digest\": \"%s\"\n}\n",
                  method.str().c_str(), lz, le, digest.str().c_str());
  }
  emit(cfg.p, buf);
  std::fprintf(stderr, "oracle (%s): log Z = %.12g\n", method.str().c_str(), lz);
  return 0;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config,-c", o.config, "TOML run configuration");
  sub->add_option("--seed", o.seed, "master seed (64-bit)");
  sub->add_option("--eps", o.eps, "relative accuracy in (0, 1)");
  sub->add_option("--mu", o.mu, "failure probability in (0, 1)");
  sub->add_option("--mu-tilde", o.mu_tilde, "median trick failure probability");
  sub->add_option("--preset", o.preset, "theoretical | gaussian-fig1 | regression-fig2 | logistic-fig4");
  sub->add_option("--stride", o.stride, "recurrence compositions per phase");
  sub->add_option("--regime", o.regime, "auto | strong | convex");
  sub->add_flag("--a3", o.a3, "use the Hessian Lipschitz constant in the tuning");
  sub->add_option("--workers", o.workers, "worker threads (env LOGZ_WORKERS)");
  sub->add_option("--out,-o", o.out, "output file (default stdout)");
  sub->add_option("--format", o.format, "json | csv");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Normalizing constants of log-concave densities by annealed Langevin chains"};
  app.require_subcommand(1);
  Options o;
  auto* schedule = app.add_subcommand("schedule", "build and dump the annealing schedule (CSV by default)");
  auto* estimate = app.add_subcommand("estimate", "run the estimator and print the result JSON");
  auto* replicate = app.add_subcommand("replicate", "per-phase statistics over independent runs (CSV by default)");
  auto* oracle = app.add_subcommand("oracle", "reference log normalizing constant");
  for (auto* sub : {schedule, estimate, replicate, oracle}) add_common(sub, o);
  estimate->add_option("--trace", o.trace, "debug: dump phase-0 chain states as little-endian float64");
  replicate->add_option("--replicates,-R", o.replicates, "number of independent pipelines");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*schedule) return cmd_schedule(o, true);
    if (*estimate) return cmd_estimate(o);
    if (*replicate) return cmd_replicate(o);
    if (*oracle) return cmd_oracle(o);
  } catch (const Failure& f) {
    const char* msg = logz_last_error();
    std::fprintf(stderr, "logz: %s\n", msg && *msg ? msg : "failed");
    return exit_code(f.status);
  }
  return 1;
}
