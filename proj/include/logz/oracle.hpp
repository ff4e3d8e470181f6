#pragma once

#include "logz/potential.hpp"

namespace logz {

/// (d/2) log(2 pi) - (1/2) log det Q through a Cholesky factor. Throws
/// ValidationError when Q is not symmetric positive definite.
double gaussian_log_evidence(const Matrix& precision);

/// Exact log marginal likelihood of y ~ N(X theta, I/noise_precision) with
/// theta ~ N(prior_mean, prior_precision^{-1}). Throws ValidationError when
/// the prior or posterior precision is not positive definite.
double conjugate_linear_log_evidence(const RegressionDataset& data, const Vector& prior_mean,
                                     const Matrix& prior_precision, double noise_precision);

/// Relative mass of exp(-U) outside [-radius, radius]^d, bounded through the
/// Gaussian envelope when m > 0 and through the linear growth bound otherwise.
/// Returns +inf when no envelope applies.
double quadrature_tail_bound(const Potential& p, double radius);

/// log of the tensor Simpson rule for the integral of exp(-U) over
/// [-radius, radius]^d with points_per_dim nodes per axis, summed in log
/// space. Throws OracleUnavailable for d > 3, DomainError for an even or too
/// small node count and when the tail bound exceeds 1e-12.
double quadrature_log_Z(const Potential& p, double radius, int points_per_dim);

inline constexpr double kQuadratureTailTolerance = 1e-12;

}  // namespace logz
