#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "logz/dataset.hpp"
#include "logz/errors.hpp"
#include "logz/models.hpp"
#include "logz/potential.hpp"
#include "test_paths.hpp"

using namespace logz;

namespace {

std::vector<Potential> builtins() {
  std::vector<Potential> out;
  Vector q = Vector::Ones(10);
  q[0] = 2.0;
  out.push_back(gaussian_potential_diag(q));
  out.push_back(logcosh_potential(1));
  out.push_back(logcosh_potential(3));
  for (int v : {1, 2}) {
    ModelSpec r;
    r.kind = "radiata";
    r.variant = v;
    r.data = test_data("radiata.csv");
    out.push_back(build_model(r).potential);
    ModelSpec p;
    p.kind = "pima";
    p.variant = v;
    p.data = test_data("pima.csv");
    out.push_back(build_model(p).potential);
  }
  return out;
}

}  // namespace

TEST_CASE("gaussian potential evaluates and reports extreme eigenvalues") {
  Vector q = Vector::Ones(10);
  q[0] = 2.0;
  const Potential p = gaussian_potential_diag(q);
  CHECK(p.m() == doctest::Approx(1.0));
  CHECK(p.L() == doctest::Approx(2.0));
  CHECK(*p.regularity().hessian_lipschitz == 0.0);

  const Potential small = gaussian_potential_diag(Vector{{4.0, 1.0}});
  const Vector x{{1.0, 1.0}};
  CHECK(small.energy(x) == doctest::Approx(2.5));
  const Vector g = small.gradient(x);
  CHECK(g[0] == doctest::Approx(4.0));
  CHECK(g[1] == doctest::Approx(1.0));

  const Potential unit = gaussian_potential(Matrix::Identity(1, 1));
  CHECK(unit.energy(Vector::Constant(1, 3.0)) == doctest::Approx(4.5));
  CHECK(unit.m() == unit.L());
}

TEST_CASE("gaussian potential rejects indefinite precision") {
  Matrix q(2, 2);
  q << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(gaussian_potential(q), ValidationError);
}

TEST_CASE("centering a shifted quadratic recovers the offset") {
  Matrix q(2, 2);
  q << 3.0, 1.0, 1.0, 2.0;
  const Vector c{{1.5, -2.0}};
  const Potential raw("shifted", 2,
                      [q, c](const Vector& x) { return 0.5 * (x - c).dot(q * (x - c)) + 7.0; },
                      [q, c](const Vector& x, Vector& out) { out = q * (x - c); },
                      Regularity{1.381966, 3.618034, 0.0, std::nullopt});
  const Potential p = center_at_mode(raw);
  CHECK(p.energy(Vector::Zero(2)) == 0.0);
  CHECK(p.gradient(Vector::Zero(2)).norm() <= 1e-8);
  CHECK((p.mode() - c).norm() < 1e-8);
  CHECK(p.log_normalizer_offset() == doctest::Approx(-7.0));

  // Idempotent: a second pass starts at the mode and moves nowhere.
  const Potential again = center_at_mode(p);
  CHECK(again.gradient(Vector::Zero(2)).norm() <= 1e-8);
  CHECK((again.mode() - c).norm() < 1e-8);
  CHECK(again.log_normalizer_offset() == doctest::Approx(-7.0));
}

TEST_CASE("centering failure carries the best iterate") {
  const Potential raw("slope", 1, [](const Vector& x) { return x[0]; },
                      [](const Vector&, Vector& out) { out = Vector::Ones(1); }, Regularity{0.0, 1.0, {}, {}});
  CenteringOptions opt;
  opt.max_iterations = 5;
  try {
    center_at_mode(raw, opt);
    FAIL("expected OptimizationFailure");
  } catch (const OptimizationFailure& e) {
    CHECK(e.best_iterate().size() == 1);
    CHECK(e.gradient_norm() == doctest::Approx(1.0));
  } catch (const Error&) {
    // A stalled line search is the other legitimate outcome on a linear function.
  }
}

TEST_CASE("radiata model is centered at the conjugate posterior mean") {
  // Values from numpy's dense solve of (lambda X'X + Q0) theta = lambda X'y + Q0 mu0
  // and eigvalsh of the same matrix, frozen.
  ModelSpec spec;
  spec.kind = "radiata";
  spec.variant = 1;
  spec.data = test_data("radiata.csv");
  const BuiltModel m = build_model(spec);
  CHECK(m.potential.dim() == 2);
  CHECK(m.potential.mode()[0] == doctest::Approx(2991.9163100332867).epsilon(1e-9));
  CHECK(m.potential.mode()[1] == doctest::Approx(184.55602510750433).epsilon(1e-9));
  CHECK(m.potential.m() == doctest::Approx(0.00042060000000000003).epsilon(1e-10));
  CHECK(m.potential.L() == doctest::Approx(0.008342411904761905).epsilon(1e-10));
  CHECK(m.linear.has_value());

  spec.variant = 2;
  const BuiltModel m2 = build_model(spec);
  CHECK(m2.potential.mode()[1] == doctest::Approx(176.88506579130794).epsilon(1e-9));
  CHECK(m2.potential.L() == doctest::Approx(0.00922324761904762).epsilon(1e-10));
}

TEST_CASE("isotropic regression with a flat prior has m equal to L") {
  RegressionDataset data;
  data.covariates = Matrix::Zero(4, 1);
  data.covariates << 0.5, -0.5, 0.5, -0.5;  // unit norm column
  data.responses = Vector{{1.0, 0.0, 2.0, -1.0}};
  const Potential p = linear_regression_potential(data, Vector::Zero(1), Matrix::Zero(1, 1), 3.0);
  CHECK(p.m() == doctest::Approx(3.0));
  CHECK(p.L() == doctest::Approx(3.0));
}

TEST_CASE("pima models: dimensions and constants against numpy") {
  ModelSpec spec;
  spec.kind = "pima";
  spec.data = test_data("pima.csv");
  spec.variant = 1;
  const Potential p1 = build_model(spec).potential;
  CHECK(p1.dim() == 5);
  CHECK(p1.m() == doctest::Approx(0.01));
  CHECK(p1.L() == doctest::Approx(185.68465437237273).epsilon(1e-10));
  CHECK(*p1.regularity().hessian_lipschitz == doctest::Approx(688.2182501399051).epsilon(1e-10));
  spec.variant = 2;
  const Potential p2 = build_model(spec).potential;
  CHECK(p2.dim() == 6);
  CHECK(p2.L() == doctest::Approx(240.0051372253041).epsilon(1e-10));
  CHECK(*p2.regularity().hessian_lipschitz == doctest::Approx(890.9062668708378).epsilon(1e-10));
}

TEST_CASE("logistic potential without data is the prior") {
  RegressionDataset data;
  data.covariates = Matrix::Zero(0, 3);
  data.responses = Vector::Zero(0);
  const Potential p = logistic_regression_potential(data, 1.0);
  CHECK(p.m() == doctest::Approx(1.0));
  CHECK(p.L() == doctest::Approx(1.0));
  CHECK(p.energy(Vector::Constant(3, 2.0)) == doctest::Approx(6.0));
}

TEST_CASE("logistic potential rejects non-binary responses") {
  RegressionDataset data;
  data.covariates = Matrix::Ones(2, 1);
  data.responses = Vector{{0.0, 2.0}};
  CHECK_THROWS_AS(logistic_regression_potential(data, 1.0), ValidationError);
}

TEST_CASE("gradients match central differences on every built-in") {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> z;
  for (const Potential& p : builtins()) {
    CAPTURE(p.name());
    for (int k = 0; k < 20; ++k) {
      Vector x(p.dim());
      for (auto& v : x) v = z(gen) / std::sqrt(std::max(p.L(), 1e-12));
      const Vector g = p.gradient(x);
      for (int j = 0; j < p.dim(); ++j) {
        const double h = 1e-5 * std::max(1.0, std::abs(x[j]));
        Vector xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        const double fd = (p.energy(xp) - p.energy(xm)) / (2.0 * h);
        CHECK(fd == doctest::Approx(g[j]).epsilon(1e-5).scale(std::max(1.0, g.norm())));
      }
    }
  }
}

TEST_CASE("secant bounds hold for every built-in") {
  for (const Potential& p : builtins()) {
    CAPTURE(p.name());
    const RegularityReport r = spot_check_regularity(p, 100, 10.0, 17);
    CHECK(r.pairs_checked == 100);
    for (const auto& v : r.violations) MESSAGE(v);
    CHECK(r.ok());
  }
}

TEST_CASE("spot check refutes an understated Lipschitz constant") {
  Vector q = Vector::Ones(3);
  q[2] = 5.0;
  const Potential p = gaussian_potential_diag(q);
  Regularity wrong = p.regularity();
  wrong.L = 2.0;
  CHECK_FALSE(spot_check_regularity(p.with_regularity(wrong), 100, 10.0, 3).ok());
}

TEST_CASE("validate_centering flags an uncentered potential") {
  const Potential p("off", 1, [](const Vector& x) { return 0.5 * (x[0] - 1) * (x[0] - 1); },
                    [](const Vector& x, Vector& out) { out = Vector::Constant(1, x[0] - 1); },
                    Regularity{1.0, 1.0, {}, {}});
  CHECK_THROWS_AS(validate_centering(p, 1e-6), ValidationError);
}

TEST_CASE("datasets: row counts and parse errors") {
  CHECK(load_dataset(test_data("radiata.csv"), radiata_descriptor(1)).rows() == 42);
  const RegressionDataset pima = load_dataset(test_data("pima.csv"), pima_descriptor(1));
  CHECK(pima.rows() == 532);
  // Standardized covariates, untouched intercept.
  CHECK(pima.covariates.col(0).minCoeff() == 1.0);
  CHECK(pima.covariates.col(0).maxCoeff() == 1.0);
  for (Eigen::Index j = 1; j < pima.cols(); ++j) {
    CHECK(std::abs(pima.covariates.col(j).mean()) < 1e-12);
    CHECK(pima.covariates.col(j).squaredNorm() / 531.0 == doctest::Approx(1.0));
  }

  std::istringstream bad("y,x\n1,2\n3,abc\n");
  CsvDescriptor fmt{"y", {"x"}, true, ColumnTransform::kNone};
  try {
    parse_dataset(bad, fmt, "bad.csv");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.row() == 3);
    CHECK(e.column() == 2);
    CHECK(std::string(e.what()).find("abc") != std::string::npos);
  }

  std::istringstream missing("y,z\n1,2\n");
  CHECK_THROWS_AS(parse_dataset(missing, fmt), ParseError);
}
