#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace logz {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Linear lower bound U(x) >= rho1 * |x| - rho2, needed by the convex regime.
struct GrowthBound {
  double rho1 = 0.0;
  double rho2 = 0.0;
};

/// Regularity constants declared by whoever builds the potential. They are
/// never estimated from the energy; spot_check_regularity can only refute them.
struct Regularity {
  double m = 0.0;  // strong convexity, 0 for merely convex targets
  double L = 0.0;  // gradient Lipschitz constant
  std::optional<double> hessian_lipschitz;
  std::optional<GrowthBound> growth;
};

/// Any strongly convex U with U(0) = 0, grad U(0) = 0 satisfies
/// U(x) >= m|x|^2/2 >= sqrt(m)|x| - 1/2.
GrowthBound growth_from_strong_convexity(double m);

/// An immutable potential U on R^d with gradient access. Copies share the
/// underlying callables, so values are cheap to pass around and safe to use
/// from several threads as long as the callables are reentrant.
class Potential {
 public:
  using EnergyFn = std::function<double(const Vector&)>;
  using GradientFn = std::function<void(const Vector&, Vector&)>;
  using HessianFn = std::function<void(const Vector&, Matrix&)>;

  Potential(std::string name, int dim, EnergyFn energy, GradientFn gradient, Regularity regularity,
            HessianFn hessian = {});

  const std::string& name() const { return impl_->name; }
  int dim() const { return impl_->dim; }
  const Regularity& regularity() const { return impl_->regularity; }
  double m() const { return impl_->regularity.m; }
  double L() const { return impl_->regularity.L; }

  double energy(const Vector& x) const { return impl_->energy(x); }
  void gradient(const Vector& x, Vector& out) const { impl_->gradient(x, out); }
  Vector gradient(const Vector& x) const;

  bool has_hessian() const { return static_cast<bool>(impl_->hessian); }
  void hessian(const Vector& x, Matrix& out) const;

  /// log of the constant c such that the model evidence equals c * integral
  /// of exp(-U). Zero for bare potentials; set by centering and by the
  /// regression builders.
  double log_normalizer_offset() const { return impl_->log_offset; }

  /// Minimizer of the raw potential in its original coordinates. Zero unless
  /// the potential came out of center_at_mode.
  const Vector& mode() const { return impl_->mode; }

  Potential with_regularity(Regularity regularity) const;
  Potential with_log_normalizer_offset(double offset) const;
  Potential with_mode(Vector mode) const;

 private:
  struct Impl {
    std::string name;
    int dim = 0;
    EnergyFn energy;
    GradientFn gradient;
    HessianFn hessian;
    Regularity regularity;
    double log_offset = 0.0;
    Vector mode;
  };
  explicit Potential(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

  std::shared_ptr<const Impl> impl_;
};

struct CenteringOptions {
  double tolerance = 1e-8;
  int max_iterations = 100000;
};

/// Shifts raw so that its minimizer sits at the origin with value 0:
/// x -> U(x + x*) - U(x*). Uses damped Newton when a Hessian is available and
/// gradient descent with Armijo backtracking otherwise. Throws
/// OptimizationFailure carrying the best iterate when the gradient norm does
/// not reach the tolerance within the iteration budget.
Potential center_at_mode(const Potential& raw, const CenteringOptions& options = {});

/// Throws ValidationError unless U(0) == 0 and |grad U(0)| <= tolerance.
void validate_centering(const Potential& p, double tolerance);

struct RegularityReport {
  int pairs_checked = 0;
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Samples random pairs in a ball and checks the secant inequalities for m
/// and L, and the growth bound when declared. Advisory only.
RegularityReport spot_check_regularity(const Potential& p, int pairs, double radius,
                                       std::uint64_t seed, double relative_slack = 1e-9);

// Built-in potentials ------------------------------------------------------

/// U(x) = x'Qx/2 with m, L the extreme eigenvalues of Q and zero Hessian
/// Lipschitz constant. Q must be symmetric positive definite.
Potential gaussian_potential(const Matrix& precision);

/// Diagonal precision helper; diag(2, 1, ..., 1) reproduces the
/// benchmark Gaussian.
Potential gaussian_potential_diag(const Vector& precision_diag);

/// Separable U(x) = sum_j x_j^2/2 + log cosh x_j, with m = 1, L = 2.
Potential logcosh_potential(int dim);

struct RegressionDataset {
  Vector responses;
  Matrix covariates;  // p x q
  std::vector<std::string> column_names;

  Eigen::Index rows() const { return covariates.rows(); }
  Eigen::Index cols() const { return covariates.cols(); }
};

/// Negative log posterior of y ~ N(X theta, I / noise_precision),
/// theta ~ N(prior_mean, prior_precision^{-1}), centered at its mode.
/// m and L are the extreme eigenvalues of noise_precision * X'X + prior_precision.
/// A singular prior precision is treated as a flat prior (no normalization).
Potential linear_regression_potential(const RegressionDataset& data, const Vector& prior_mean,
                                      const Matrix& prior_precision, double noise_precision,
                                      const CenteringOptions& centering = {});

/// Negative log posterior of Bernoulli-logit responses with a N(0, I/tau)
/// prior, centered at its mode. m = tau, L = lambda_max(X'X)/4 + tau and the
/// Hessian Lipschitz constant is sum_i |X_i|^3 / (6 sqrt 3).
Potential logistic_regression_potential(const RegressionDataset& data, double prior_precision,
                                        const CenteringOptions& centering = {});

}  // namespace logz
