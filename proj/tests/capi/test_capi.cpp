// Exercises the shared library through its C header only.
#include <cmath>
#include <cstring>
#include <string>

#include "doctest.h"
#include "logz/logz.h"

namespace {

double quad_energy(const double* x, int dim, void*) {
  double e = 0.0;
  for (int j = 0; j < dim; ++j) e += 0.5 * (j == 0 ? 2.0 : 1.0) * x[j] * x[j];
  return e;
}

void quad_gradient(const double* x, int dim, double* g, void*) {
  for (int j = 0; j < dim; ++j) g[j] = (j == 0 ? 2.0 : 1.0) * x[j];
}

logz_config* cheap_logcosh() {
  logz_config* cfg = nullptr;
  REQUIRE(logz_config_parse("[model]\nkind = \"logcosh\"\ndim = 1\n[run]\neps = 0.5\npreset = \"gaussian-fig1\"\n"
                            "stride = 5\nseed = 2\nworkers = 1\n",
                            ".", &cfg) == LOGZ_OK);
  return cfg;
}

}  // namespace

TEST_CASE("version and error reporting") {
  CHECK(std::strlen(logz_version()) > 0);
  logz_config* cfg = nullptr;
  CHECK(logz_config_parse("[run]\neps = 1.5\n", ".", &cfg) == LOGZ_ERR_CONFIG);
  CHECK(cfg == nullptr);
  CHECK(std::string(logz_last_error()).find("eps") != std::string::npos);
  CHECK(logz_config_load("/nonexistent.toml", &cfg) == LOGZ_ERR_IO);
  CHECK(logz_config_parse(nullptr, ".", &cfg) == LOGZ_ERR_CONTRACT);
}

TEST_CASE("config setters share validation with files") {
  logz_config* cfg = logz_config_default();
  REQUIRE(cfg != nullptr);
  CHECK(logz_config_set(cfg, "run.eps", "0.2") == LOGZ_OK);
  CHECK(logz_config_set(cfg, "run.eps", "abc") == LOGZ_ERR_CONFIG);
  CHECK(logz_config_set(cfg, "run.nope", "1") == LOGZ_ERR_CONFIG);
  CHECK(logz_config_set(cfg, "run.mu_tilde", "0.1") == LOGZ_OK);
  double mt = 0.0;
  int present = 0;
  CHECK(logz_config_mu_tilde(cfg, &mt, &present) == LOGZ_OK);
  CHECK(present == 1);
  CHECK(mt == 0.1);
  char* digest = nullptr;
  CHECK(logz_config_digest(cfg, &digest) == LOGZ_OK);
  CHECK(std::strlen(digest) == 16);
  logz_string_free(digest);
  logz_config_free(cfg);
}

TEST_CASE("schedule, estimate and oracle through handles") {
  logz_config* cfg = cheap_logcosh();
  logz_model* model = nullptr;
  REQUIRE(logz_model_create(cfg, &model) == LOGZ_OK);
  int dim = 0;
  double m = 0.0, L = 0.0;
  CHECK(logz_model_info(model, &dim, &m, &L) == LOGZ_OK);
  CHECK(dim == 1);
  CHECK(m == 1.0);
  CHECK(L == 2.0);

  logz_schedule* s = nullptr;
  REQUIRE(logz_schedule_build(cfg, model, &s) == LOGZ_OK);
  int phases = 0, violations = -1;
  CHECK(logz_schedule_phase_count(s, &phases) == LOGZ_OK);
  CHECK(phases == 5);
  CHECK(logz_schedule_violations(s, &violations) == LOGZ_OK);
  CHECK(violations == 0);
  char* csv = nullptr;
  CHECK(logz_schedule_render(s, LOGZ_FORMAT_CSV, &csv) == LOGZ_OK);
  CHECK(std::string(csv).rfind("i,k,sigma2", 0) == 0);
  logz_string_free(csv);
  logz_schedule_free(s);

  logz_result* r = nullptr;
  REQUIRE(logz_estimate(cfg, model, &r) == LOGZ_OK);
  double lz = 0.0, le = 0.0;
  uint64_t cost = 0;
  CHECK(logz_result_values(r, &lz, &le, &cost) == LOGZ_OK);
  CHECK(cost == 550000u);
  double olz = 0.0, ole = 0.0;
  char* method = nullptr;
  CHECK(logz_oracle(model, &olz, &ole, &method) == LOGZ_OK);
  CHECK(std::string(method) == "quadrature");
  CHECK(std::abs(lz - olz) < 0.2);
  logz_string_free(method);
  logz_result_free(r);

  logz_replicate_table* t = nullptr;
  REQUIRE(logz_replicate(cfg, model, 2, &t) == LOGZ_OK);
  int rows = 0;
  CHECK(logz_replicate_rows(t, &rows) == LOGZ_OK);
  CHECK(rows == 5);
  logz_replicate_free(t);

  logz_model_free(model);
  logz_config_free(cfg);
}

TEST_CASE("callback models") {
  logz_model* model = nullptr;
  REQUIRE(logz_model_create_callback(3, quad_energy, quad_gradient, nullptr, 1.0, 2.0, -1.0, 0.0, 0.0, &model) ==
          LOGZ_OK);
  double olz = 0.0, ole = 0.0;
  char* method = nullptr;
  CHECK(logz_oracle(model, &olz, &ole, &method) == LOGZ_OK);
  // 1.5 log(2 pi) - log(2)/2
  CHECK(olz == doctest::Approx(1.5 * std::log(2.0 * M_PI) - 0.5 * std::log(2.0)).epsilon(1e-9));
  logz_string_free(method);
  logz_model_free(model);

  CHECK(logz_model_create_callback(0, quad_energy, quad_gradient, nullptr, 1.0, 2.0, -1.0, 0.0, 0.0, &model) !=
        LOGZ_OK);
  CHECK(logz_model_create_callback(2, quad_energy, quad_gradient, nullptr, 3.0, 2.0, -1.0, 0.0, 0.0, &model) !=
        LOGZ_OK);
}
