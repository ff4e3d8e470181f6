#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "logz/potential.hpp"

namespace logz {

/// Declarative description of a built-in model, as read from a run config.
///   gaussian: dim, precision_diag (default diag(2, 1, ..., 1))
///   logcosh:  dim
///   radiata:  variant 1|2, data (CSV), noise_precision (default 1e-5)
///   pima:     variant 1|2, data (CSV), prior_precision (default 0.01)
struct ModelSpec {
  std::string kind = "gaussian";
  int dim = 10;
  std::vector<double> precision_diag;
  int variant = 1;
  std::filesystem::path data;
  std::optional<double> noise_precision;
  std::optional<double> prior_precision;
};

struct LinearModelInputs {
  RegressionDataset data;
  Vector prior_mean;
  Matrix prior_precision;
  double noise_precision = 0.0;
};

struct BuiltModel {
  Potential potential;
  std::optional<Matrix> gaussian_precision;  // set for the Gaussian model
  std::optional<LinearModelInputs> linear;   // set for the conjugate linear model
};

/// Throws ConfigError for unknown kinds or bad parameters, IoError / ParseError
/// for dataset problems.
BuiltModel build_model(const ModelSpec& spec);

struct OracleValue {
  double log_z = 0.0;         // log of the integral of exp(-U) for the centered potential
  double log_evidence = 0.0;  // log_z plus the potential's normalizer offset
  std::string method;         // "gaussian-closed-form", "conjugate-linear", "quadrature"
};

/// Dispatches to the closed form, the conjugate evidence or (d <= 3)
/// quadrature. Throws OracleUnavailable otherwise.
OracleValue reference_log_evidence(const BuiltModel& model);

/// Radius for quadrature_log_Z meeting the tail tolerance; throws
/// OracleUnavailable when no envelope bound applies.
double quadrature_radius(const Potential& p);

}  // namespace logz
