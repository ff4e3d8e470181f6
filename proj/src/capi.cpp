#include "logz/logz.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>

#include "logz/config.hpp"
#include "logz/diagnostics.hpp"
#include "logz/errors.hpp"
#include "logz/estimator.hpp"
#include "logz/models.hpp"
#include "logz/oracle.hpp"
#include "logz/schedule.hpp"
#include "logz/serialize.hpp"

struct logz_config {
  logz::FileConfig cfg;
};

struct logz_model {
  logz::BuiltModel model;
};

struct logz_schedule {
  logz::Schedule schedule;
  double bound = 0.0;
};

struct logz_result {
  logz::EstimateResult result;
  std::string digest;
};

struct logz_replicate_table {
  logz::ReplicateTable table;
  std::vector<std::optional<logz::MseBoundEntry>> bounds;
  std::string digest;
};

namespace {

thread_local std::string g_last_error;

logz_status status_of(logz::ErrorCode code) {
  switch (code) {
    case logz::ErrorCode::kConfig: return LOGZ_ERR_CONFIG;
    case logz::ErrorCode::kValidation: return LOGZ_ERR_VALIDATION;
    case logz::ErrorCode::kParse: return LOGZ_ERR_PARSE;
    case logz::ErrorCode::kDomain: return LOGZ_ERR_DOMAIN;
    case logz::ErrorCode::kOptimization: return LOGZ_ERR_OPTIMIZATION;
    case logz::ErrorCode::kDivergence: return LOGZ_ERR_DIVERGENCE;
    case logz::ErrorCode::kOracleUnavailable: return LOGZ_ERR_ORACLE_UNAVAILABLE;
    case logz::ErrorCode::kContract: return LOGZ_ERR_CONTRACT;
    case logz::ErrorCode::kIo: return LOGZ_ERR_IO;
    case logz::ErrorCode::kClosedForm: return LOGZ_ERR_CLOSED_FORM;
  }
  return LOGZ_ERR_INTERNAL;
}

template <class Fn>
logz_status guarded(Fn&& fn) {
  try {
    fn();
    return LOGZ_OK;
  } catch (const logz::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    g_last_error = std::string("internal error: ") + e.what();
    return LOGZ_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "internal error: unknown exception";
    return LOGZ_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) throw logz::ContractViolation(std::string(what) + " is null");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string digest_of(const logz_config* cfg) { return logz::config_digest_hex(cfg->cfg); }

}  // namespace

extern "C" {

const char* logz_version(void) { return "1.0.0"; }

const char* logz_last_error(void) { return g_last_error.c_str(); }

void logz_string_free(char* s) { std::free(s); }

logz_status logz_config_load(const char* path, logz_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto c = std::make_unique<logz_config>();
    c->cfg = logz::load_config(path);
    *out = c.release();
  });
}

logz_status logz_config_parse(const char* text, const char* base_dir, logz_config** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    auto c = std::make_unique<logz_config>();
    c->cfg = logz::parse_config(text, base_dir ? base_dir : "");
    *out = c.release();
  });
}

logz_config* logz_config_default(void) { return new (std::nothrow) logz_config(); }

logz_status logz_config_set(logz_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg, "config");
    require(key, "key");
    require(value, "value");
    logz::apply_setting(cfg->cfg, key, logz::TomlValue(std::string(value)), std::filesystem::current_path());
  });
}

logz_status logz_config_validate(const logz_config* cfg) {
  return guarded([&] {
    require(cfg, "config");
    cfg->cfg.run.validate();
  });
}

logz_status logz_config_digest(const logz_config* cfg, char** hex_out) {
  return guarded([&] {
    require(cfg, "config");
    require(hex_out, "out");
    *hex_out = dup(digest_of(cfg));
  });
}

logz_status logz_config_output(const logz_config* cfg, char** path_out, logz_format* format_out) {
  return guarded([&] {
    require(cfg, "config");
    if (path_out) *path_out = cfg->cfg.output_path ? dup(cfg->cfg.output_path->string()) : nullptr;
    if (format_out)
      *format_out = cfg->cfg.format == logz::OutputFormat::kCsv ? LOGZ_FORMAT_CSV : LOGZ_FORMAT_JSON;
  });
}

logz_status logz_config_replicates(const logz_config* cfg, int* out) {
  return guarded([&] {
    require(cfg, "config");
    require(out, "out");
    *out = cfg->cfg.replicates;
  });
}

logz_status logz_config_mu_tilde(const logz_config* cfg, double* out, int* present) {
  return guarded([&] {
    require(cfg, "config");
    require(present, "present");
    *present = cfg->cfg.run.mu_tilde.has_value() ? 1 : 0;
    if (out && *present) *out = *cfg->cfg.run.mu_tilde;
  });
}

void logz_config_free(logz_config* cfg) { delete cfg; }

logz_status logz_model_create(const logz_config* cfg, logz_model** out) {
  return guarded([&] {
    require(cfg, "config");
    require(out, "out");
    *out = new logz_model{logz::build_model(cfg->cfg.model)};
  });
}

logz_status logz_model_create_callback(int dim, logz_energy_fn energy, logz_gradient_fn gradient, void* user,
                                       double m, double L, double hessian_lipschitz, double rho1, double rho2,
                                       logz_model** out) {
  return guarded([&] {
    require(reinterpret_cast<const void*>(energy), "energy callback");
    require(reinterpret_cast<const void*>(gradient), "gradient callback");
    require(out, "out");
    logz::Regularity reg;
    reg.m = m;
    reg.L = L;
    if (hessian_lipschitz >= 0.0) reg.hessian_lipschitz = hessian_lipschitz;
    if (rho1 > 0.0) reg.growth = logz::GrowthBound{rho1, rho2};
    else if (m > 0.0) reg.growth = logz::growth_from_strong_convexity(m);
    logz::Potential p(
        "callback", dim, [=](const logz::Vector& x) { return energy(x.data(), dim, user); },
        [=](const logz::Vector& x, logz::Vector& g) {
          g.resize(dim);
          gradient(x.data(), dim, g.data(), user);
        },
        reg);
    *out = new logz_model{logz::BuiltModel{std::move(p), std::nullopt, std::nullopt}};
  });
}

logz_status logz_model_info(const logz_model* model, int* dim, double* m, double* L) {
  return guarded([&] {
    require(model, "model");
    if (dim) *dim = model->model.potential.dim();
    if (m) *m = model->model.potential.m();
    if (L) *L = model->model.potential.L();
  });
}

void logz_model_free(logz_model* model) { delete model; }

logz_status logz_schedule_build(const logz_config* cfg, const logz_model* model, logz_schedule** out) {
  return guarded([&] {
    require(cfg, "config");
    require(model, "model");
    require(out, "out");
    const auto& p = model->model.potential;
    const logz::RunConfig run = logz::effective_run_config(cfg->cfg, p);
    auto s = std::make_unique<logz_schedule>();
    s->schedule = logz::build_schedule(p, run);
    logz::RunConfig theory = run;
    theory.preset = logz::Preset::kTheoretical;
    s->bound = logz::cost_bound(p, theory);
    *out = s.release();
  });
}

logz_status logz_schedule_phase_count(const logz_schedule* s, int* out) {
  return guarded([&] {
    require(s, "schedule");
    require(out, "out");
    *out = s->schedule.M();
  });
}

logz_status logz_schedule_cost(const logz_schedule* s, double* realized, double* bound) {
  return guarded([&] {
    require(s, "schedule");
    if (realized) *realized = logz::cost_actual(s->schedule);
    if (bound) *bound = s->bound;
  });
}

logz_status logz_schedule_violations(const logz_schedule* s, int* count) {
  return guarded([&] {
    require(s, "schedule");
    require(count, "out");
    *count = static_cast<int>(logz::schedule_invariant_violations(s->schedule).size());
  });
}

logz_status logz_schedule_render(const logz_schedule* s, logz_format format, char** out) {
  return guarded([&] {
    require(s, "schedule");
    require(out, "out");
    *out = dup(format == LOGZ_FORMAT_CSV ? logz::schedule_csv(s->schedule) : logz::schedule_json(s->schedule));
  });
}

void logz_schedule_free(logz_schedule* s) { delete s; }

logz_status logz_estimate(const logz_config* cfg, const logz_model* model, logz_result** out) {
  return guarded([&] {
    require(cfg, "config");
    require(model, "model");
    require(out, "out");
    const auto& fc = cfg->cfg;
    const auto& p = model->model.potential;
    const logz::RunConfig run = logz::effective_run_config(fc, p);
    auto r = std::make_unique<logz_result>();
    r->digest = digest_of(cfg);
    if (run.mu_tilde) {
      r->result = logz::median_estimate(p, run, *run.mu_tilde, run.seed);
    } else if (fc.trace_path) {
      std::ofstream trace(*fc.trace_path, std::ios::binary);
      if (!trace) throw logz::IoError("cannot open trace file '" + fc.trace_path->string() + "'");
      const logz::TraceRequest request{fc.trace_phase, &trace};
      r->result = logz::estimate(p, run, run.seed, 0, &request);
    } else {
      r->result = logz::estimate(p, run, run.seed);
    }
    *out = r.release();
  });
}

logz_status logz_result_values(const logz_result* r, double* log_z_hat, double* log_evidence, uint64_t* cost) {
  return guarded([&] {
    require(r, "result");
    if (log_z_hat) *log_z_hat = r->result.log_z_hat;
    if (log_evidence) *log_evidence = r->result.log_evidence;
    if (cost) *cost = r->result.cost;
  });
}

logz_status logz_result_replicate_count(const logz_result* r, int* out) {
  return guarded([&] {
    require(r, "result");
    require(out, "out");
    *out = static_cast<int>(r->result.replicate_log_z.size());
  });
}

logz_status logz_result_render(const logz_result* r, logz_format format, char** out) {
  return guarded([&] {
    require(r, "result");
    require(out, "out");
    *out = dup(format == LOGZ_FORMAT_CSV ? logz::result_csv(r->result, r->digest)
                                         : logz::result_json(r->result, r->digest));
  });
}

void logz_result_free(logz_result* r) { delete r; }

logz_status logz_replicate(const logz_config* cfg, const logz_model* model, int replicates,
                           logz_replicate_table** out) {
  return guarded([&] {
    require(cfg, "config");
    require(model, "model");
    require(out, "out");
    const auto& p = model->model.potential;
    const logz::RunConfig run = logz::effective_run_config(cfg->cfg, p);
    auto t = std::make_unique<logz_replicate_table>();
    t->table = logz::replicate_report(p, run, replicates, run.seed);
    const logz::Schedule s = logz::build_schedule(p, run);
    t->bounds = logz::mse_bound_report(s, p);
    t->digest = digest_of(cfg);
    *out = t.release();
  });
}

logz_status logz_replicate_rows(const logz_replicate_table* t, int* out) {
  return guarded([&] {
    require(t, "table");
    require(out, "out");
    *out = static_cast<int>(t->table.rows.size());
  });
}

logz_status logz_replicate_render(const logz_replicate_table* t, logz_format format, char** out) {
  return guarded([&] {
    require(t, "table");
    require(out, "out");
    *out = dup(format == LOGZ_FORMAT_CSV ? logz::replicate_csv(t->table, t->bounds)
                                         : logz::replicate_json(t->table, t->digest));
  });
}

void logz_replicate_free(logz_replicate_table* t) { delete t; }

logz_status logz_oracle(const logz_model* model, double* log_z, double* log_evidence, char** method_out) {
  return guarded([&] {
    require(model, "model");
    const logz::OracleValue v = logz::reference_log_evidence(model->model);
    if (log_z) *log_z = v.log_z;
    if (log_evidence) *log_evidence = v.log_evidence;
    if (method_out) *method_out = dup(v.method);
  });
}

}  // extern "C"
