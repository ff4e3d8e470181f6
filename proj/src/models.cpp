#include "logz/models.hpp"

#include <cmath>

#include "logz/dataset.hpp"
#include "logz/errors.hpp"
#include "logz/oracle.hpp"

namespace logz {

namespace {

constexpr double kRadiataNoisePrecision = 1e-5;
constexpr double kPimaPriorPrecision = 0.01;

int quadrature_points(int d) {
  switch (d) {
    case 1:
      return 20001;
    case 2:
      return 1201;
    default:
      return 201;
  }
}

}  // namespace

BuiltModel build_model(const ModelSpec& spec) {
  if (spec.kind == "gaussian") {
    Vector diag;
    if (spec.precision_diag.empty()) {
      if (spec.dim < 1) throw ConfigError("model.dim must be positive");
      diag = Vector::Ones(spec.dim);
      diag[0] = 2.0;
    } else {
      diag = Eigen::Map<const Vector>(spec.precision_diag.data(),
                                      static_cast<Eigen::Index>(spec.precision_diag.size()));
    }
    Matrix Q = diag.asDiagonal();
    return {gaussian_potential_diag(diag), Q, std::nullopt};
  }
  if (spec.kind == "logcosh") {
    if (spec.dim < 1) throw ConfigError("model.dim must be positive");
    return {logcosh_potential(spec.dim), std::nullopt, std::nullopt};
  }
  if (spec.kind == "radiata") {
    if (spec.data.empty()) throw ConfigError("model.data: radiata needs a CSV path");
    LinearModelInputs in;
    in.data = load_dataset(spec.data, radiata_descriptor(spec.variant));
    in.noise_precision = spec.noise_precision.value_or(kRadiataNoisePrecision);
    if (!(in.noise_precision > 0.0)) throw ConfigError("model.noise_precision must be positive");
    in.prior_mean = Vector(2);
    in.prior_mean << 3000.0, 185.0;
    in.prior_precision = Matrix::Zero(2, 2);
    in.prior_precision(0, 0) = in.noise_precision * 0.06;
    in.prior_precision(1, 1) = in.noise_precision * 6.0;
    Potential pot = linear_regression_potential(in.data, in.prior_mean, in.prior_precision, in.noise_precision);
    return {std::move(pot), std::nullopt, std::move(in)};
  }
  if (spec.kind == "pima") {
    if (spec.data.empty()) throw ConfigError("model.data: pima needs a CSV path");
    const double tau = spec.prior_precision.value_or(kPimaPriorPrecision);
    if (!(tau > 0.0)) throw ConfigError("model.prior_precision must be positive");
    RegressionDataset data = load_dataset(spec.data, pima_descriptor(spec.variant));
    return {logistic_regression_potential(data, tau), std::nullopt, std::nullopt};
  }
  throw ConfigError("model.kind: unknown model '" + spec.kind + "'");
}

double quadrature_radius(const Potential& p) {
  for (double r = 1.0; r < 1e6; r *= 1.25) {
    if (quadrature_tail_bound(p, r) < 0.01 * kQuadratureTailTolerance) return r;
  }
  throw OracleUnavailable("no tail envelope bound for '" + p.name() + "'");
}

OracleValue reference_log_evidence(const BuiltModel& model) {
  const Potential& p = model.potential;
  OracleValue v;
  if (model.gaussian_precision) {
    v.log_z = gaussian_log_evidence(*model.gaussian_precision);
    v.log_evidence = v.log_z + p.log_normalizer_offset();
    v.method = "gaussian-closed-form";
    return v;
  }
  if (model.linear) {
    const auto& in = *model.linear;
    v.log_evidence = conjugate_linear_log_evidence(in.data, in.prior_mean, in.prior_precision, in.noise_precision);
    v.log_z = v.log_evidence - p.log_normalizer_offset();
    v.method = "conjugate-linear";
    return v;
  }
  if (p.dim() <= 3) {
    const double r = quadrature_radius(p);
    v.log_z = quadrature_log_Z(p, r, quadrature_points(p.dim()));
    v.log_evidence = v.log_z + p.log_normalizer_offset();
    v.method = "quadrature";
    return v;
  }
  throw OracleUnavailable("no oracle available for '" + p.name() + "' in dimension " + std::to_string(p.dim()));
}

}  // namespace logz
