#include "logz/potential.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "logz/errors.hpp"

namespace logz {

GrowthBound growth_from_strong_convexity(double m) {
  if (!(m > 0.0)) throw ValidationError("growth bound from strong convexity needs m > 0");
  return {std::sqrt(m), 0.5};
}

Potential::Potential(std::string name, int dim, EnergyFn energy, GradientFn gradient,
                     Regularity regularity, HessianFn hessian) {
  if (dim <= 0) throw ValidationError("potential dimension must be positive");
  if (!energy || !gradient) throw ValidationError("potential needs energy and gradient");
  const auto& r = regularity;
  if (!(r.L > 0.0) || !std::isfinite(r.L)) throw ValidationError("L must be positive and finite");
  if (!(r.m >= 0.0) || r.m > r.L) throw ValidationError("need 0 <= m <= L");
  if (r.hessian_lipschitz && !(*r.hessian_lipschitz >= 0.0))
    throw ValidationError("Hessian Lipschitz constant must be nonnegative");
  if (r.growth && !(r.growth->rho1 > 0.0)) throw ValidationError("growth bound needs rho1 > 0");

  auto impl = std::make_shared<Impl>();
  impl->name = std::move(name);
  impl->dim = dim;
  impl->energy = std::move(energy);
  impl->gradient = std::move(gradient);
  impl->hessian = std::move(hessian);
  impl->regularity = regularity;
  impl->mode = Vector::Zero(dim);
  impl_ = std::move(impl);
}

Vector Potential::gradient(const Vector& x) const {
  Vector g(dim());
  impl_->gradient(x, g);
  return g;
}

void Potential::hessian(const Vector& x, Matrix& out) const {
  if (!impl_->hessian) throw ContractViolation("potential '" + name() + "' has no Hessian");
  impl_->hessian(x, out);
}

Potential Potential::with_regularity(Regularity regularity) const {
  Potential p(name(), dim(), impl_->energy, impl_->gradient, regularity, impl_->hessian);
  auto impl = std::make_shared<Impl>(*p.impl_);
  impl->log_offset = impl_->log_offset;
  impl->mode = impl_->mode;
  return Potential(std::move(impl));
}

Potential Potential::with_log_normalizer_offset(double offset) const {
  auto impl = std::make_shared<Impl>(*impl_);
  impl->log_offset = offset;
  return Potential(std::move(impl));
}

Potential Potential::with_mode(Vector mode) const {
  if (mode.size() != dim()) throw ValidationError("mode has wrong dimension");
  auto impl = std::make_shared<Impl>(*impl_);
  impl->mode = std::move(mode);
  return Potential(std::move(impl));
}

namespace {

// Armijo backtracking along a descent direction. Returns the accepted step
// length, or 0 when no decrease could be found.
double backtrack(const Potential& p, const Vector& x, double fx, const Vector& grad,
                 const Vector& direction, double initial_step, Vector& x_next, double& f_next) {
  const double slope = grad.dot(direction);
  double t = initial_step;
  for (int k = 0; k < 60; ++k) {
    x_next = x + t * direction;
    f_next = p.energy(x_next);
    if (std::isfinite(f_next) && f_next <= fx + 1e-4 * t * slope) return t;
    t *= 0.5;
  }
  return 0.0;
}

}  // namespace

Potential center_at_mode(const Potential& raw, const CenteringOptions& options) {
  if (!(options.tolerance > 0.0)) throw ValidationError("centering tolerance must be positive");
  const int d = raw.dim();
  Vector x = Vector::Zero(d);
  double fx = raw.energy(x);
  Vector g = raw.gradient(x);
  Vector x_next(d);
  double f_next = 0.0;
  Matrix h(d, d);
  double step = 1.0 / std::max(raw.L(), 1e-300);

  Vector best = x;
  double best_norm = g.norm();
  int it = 0;
  while (g.norm() > options.tolerance) {
    if (it++ >= options.max_iterations) {
      throw OptimizationFailure("mode search did not converge for '" + raw.name() +
                                    "': gradient norm " + std::to_string(best_norm),
                                best, best_norm);
    }
    Vector direction = -g;
    double initial = std::min(2.0 * step, 1e300);
    bool newton = false;
    if (raw.has_hessian()) {
      raw.hessian(x, h);
      Eigen::LDLT<Matrix> ldlt(h);
      if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
        Vector newton_direction = -ldlt.solve(g);
        if (newton_direction.allFinite() && g.dot(newton_direction) < 0.0) {
          direction = newton_direction;
          initial = 1.0;
          newton = true;
        }
      }
    }
    double t = 0.0;
    if (newton) {
      // Close to the mode Armijo compares energies that differ by less than
      // their rounding error, so a full Newton step that shrinks the
      // gradient is taken without it.
      x_next = x + direction;
      f_next = raw.energy(x_next);
      if (std::isfinite(f_next) &&
          (f_next <= fx + 1e-4 * g.dot(direction) || raw.gradient(x_next).norm() < g.norm())) {
        t = 1.0;
      }
    }
    if (t == 0.0) t = backtrack(raw, x, fx, g, direction, initial, x_next, f_next);
    if (t == 0.0) {
      // Floating-point stall: near the mode the energy decrease drops below
      // rounding, so judge the full Newton step (or else a plain gradient
      // step) by the gradient norm instead.
      x_next = newton ? Vector(x + direction) : Vector(x - step * g);
      Vector g_next = raw.gradient(x_next);
      if (!(g_next.norm() < g.norm())) {
        throw OptimizationFailure("line search stalled while centering '" + raw.name() + "'",
                                  best, best_norm);
      }
      f_next = raw.energy(x_next);
    } else if (!newton) {
      step = t;
    }
    x = x_next;
    fx = f_next;
    raw.gradient(x, g);
    if (g.norm() < best_norm) {
      best_norm = g.norm();
      best = x;
    }
  }

  const Vector shift = x;
  const double value_at_mode = raw.energy(shift);
  auto energy = [raw, shift, value_at_mode](const Vector& y) -> double {
    return raw.energy(y + shift) - value_at_mode;
  };
  // Chains call the gradient once per step; reuse one buffer per thread.
  auto gradient = [raw, shift](const Vector& y, Vector& out) {
    thread_local Vector moved;
    moved.resize(y.size());
    moved.noalias() = y + shift;
    raw.gradient(moved, out);
  };
  Potential::HessianFn hessian;
  if (raw.has_hessian()) {
    hessian = [raw, shift](const Vector& y, Matrix& out) { raw.hessian(y + shift, out); };
  }
  Potential centered(raw.name(), d, std::move(energy), std::move(gradient), raw.regularity(),
                     std::move(hessian));
  return centered.with_log_normalizer_offset(raw.log_normalizer_offset() - value_at_mode)
      .with_mode(raw.mode() + shift);
}

void validate_centering(const Potential& p, double tolerance) {
  const Vector zero = Vector::Zero(p.dim());
  const double u0 = p.energy(zero);
  const double g0 = p.gradient(zero).norm();
  if (std::abs(u0) > tolerance || !(g0 <= tolerance)) {
    std::ostringstream os;
    os << "potential '" << p.name() << "' is not centered: U(0) = " << u0
       << ", |grad U(0)| = " << g0 << " (tolerance " << tolerance << ")";
    throw ValidationError(os.str());
  }
}

RegularityReport spot_check_regularity(const Potential& p, int pairs, double radius,
                                       std::uint64_t seed, double relative_slack) {
  RegularityReport report;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  const int d = p.dim();
  auto draw = [&] {
    Vector v(d);
    for (int j = 0; j < d; ++j) v[j] = normal(rng);
    const double r = radius * std::pow(uniform(rng), 1.0 / d);
    return Vector(v * (r / v.norm()));
  };
  const double m = p.m();
  const double L = p.L();
  for (int k = 0; k < pairs; ++k) {
    const Vector x = draw();
    const Vector y = draw();
    const Vector diff = x - y;
    const Vector gdiff = p.gradient(x) - p.gradient(y);
    const double dist2 = diff.squaredNorm();
    const double inner = gdiff.dot(diff);
    if (inner < m * dist2 * (1.0 - relative_slack)) {
      report.violations.push_back("strong convexity: <grad diff, x - y> = " +
                                  std::to_string(inner) + " < m|x - y|^2 = " +
                                  std::to_string(m * dist2));
    }
    if (gdiff.norm() > L * std::sqrt(dist2) * (1.0 + relative_slack)) {
      report.violations.push_back("gradient Lipschitz: |grad diff| = " +
                                  std::to_string(gdiff.norm()) + " > L|x - y| = " +
                                  std::to_string(L * std::sqrt(dist2)));
    }
    if (const auto& growth = p.regularity().growth) {
      const double u = p.energy(x);
      const double lower = growth->rho1 * x.norm() - growth->rho2;
      if (u < lower - relative_slack * std::abs(lower)) {
        report.violations.push_back("linear growth: U(x) = " + std::to_string(u) + " < " +
                                    std::to_string(lower));
      }
    }
    ++report.pairs_checked;
  }
  return report;
}

// Built-ins ---------------------------------------------------------------

Potential gaussian_potential(const Matrix& precision) {
  const Eigen::Index d = precision.rows();
  if (d == 0 || precision.cols() != d) throw ValidationError("precision matrix must be square");
  if (!precision.isApprox(precision.transpose(), 1e-12))
    throw ValidationError("precision matrix must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(precision, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) throw ValidationError("precision matrix must be positive definite");

  Regularity r;
  r.m = lo;
  r.L = hi;
  r.hessian_lipschitz = 0.0;
  r.growth = growth_from_strong_convexity(lo);
  if (precision.isDiagonal()) {
    const Vector diag = precision.diagonal();
    return Potential(
        "gaussian", static_cast<int>(d),
        [diag](const Vector& x) { return 0.5 * x.dot(diag.cwiseProduct(x)); },
        [diag](const Vector& x, Vector& out) { out = diag.cwiseProduct(x); }, r,
        [diag](const Vector&, Matrix& out) { out = diag.asDiagonal(); });
  }
  const Matrix q = 0.5 * (precision + precision.transpose());
  return Potential(
      "gaussian", static_cast<int>(d), [q](const Vector& x) { return 0.5 * x.dot(q * x); },
      [q](const Vector& x, Vector& out) { out.noalias() = q * x; }, r,
      [q](const Vector&, Matrix& out) { out = q; });
}

Potential gaussian_potential_diag(const Vector& precision_diag) {
  return gaussian_potential(Matrix(precision_diag.asDiagonal()));
}

Potential logcosh_potential(int dim) {
  if (dim <= 0) throw ValidationError("dimension must be positive");
  // log cosh x = |x| + log1p(exp(-2|x|)) - log 2, stable for large |x|.
  auto logcosh = [](double x) {
    const double a = std::abs(x);
    return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
  };
  Regularity r;
  r.m = 1.0;
  r.L = 2.0;
  // |d^3/dx^3 log cosh x| = 2 sech^2 x |tanh x| <= 4 / (3 sqrt 3).
  r.hessian_lipschitz = 4.0 / (3.0 * std::sqrt(3.0));
  r.growth = growth_from_strong_convexity(1.0);
  return Potential(
      "logcosh", dim,
      [logcosh](const Vector& x) {
        double s = 0.0;
        for (Eigen::Index j = 0; j < x.size(); ++j) s += 0.5 * x[j] * x[j] + logcosh(x[j]);
        return s;
      },
      [](const Vector& x, Vector& out) { out = x + x.array().tanh().matrix(); }, r,
      [](const Vector& x, Matrix& out) {
        const Eigen::ArrayXd c = x.array().cosh();
        out = (1.0 + 1.0 / (c * c)).matrix().asDiagonal();
      });
}

namespace {

double softplus(double s) { return s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)); }

double sigmoid(double s) {
  if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

std::pair<double, double> extreme_eigenvalues(const Matrix& sym) {
  if (sym.rows() == 0) return {0.0, 0.0};
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  return {eig.eigenvalues().minCoeff(), eig.eigenvalues().maxCoeff()};
}

}  // namespace

Potential linear_regression_potential(const RegressionDataset& data, const Vector& prior_mean,
                                      const Matrix& prior_precision, double noise_precision,
                                      const CenteringOptions& centering) {
  const Eigen::Index q = data.cols();
  if (q == 0) throw ValidationError("regression needs at least one covariate");
  if (data.responses.size() != data.rows())
    throw ValidationError("responses and covariates disagree on the number of rows");
  if (prior_mean.size() != q || prior_precision.rows() != q || prior_precision.cols() != q)
    throw ValidationError("prior dimensions do not match the covariates");
  if (!(noise_precision > 0.0)) throw ValidationError("noise precision must be positive");

  const Matrix hessian = noise_precision * data.covariates.transpose() * data.covariates +
                         0.5 * (prior_precision + prior_precision.transpose());
  const auto [lo, hi] = extreme_eigenvalues(hessian);
  if (!(lo > 1e-14 * std::max(hi, 1.0))) throw ValidationError("singular regression design");

  // Normalizing constants of likelihood and (proper) prior.
  const double p = static_cast<double>(data.rows());
  constexpr double kLog2Pi = 1.8378770664093454836;
  double log_norm = 0.5 * p * (std::log(noise_precision) - kLog2Pi);
  Eigen::LLT<Matrix> prior_llt(prior_precision);
  if (prior_llt.info() == Eigen::Success) {
    const double logdet = 2.0 * prior_llt.matrixLLT().diagonal().array().log().sum();
    log_norm += 0.5 * logdet - 0.5 * static_cast<double>(q) * kLog2Pi;
  }

  const Matrix x = data.covariates;
  const Vector y = data.responses;
  const Vector mu0 = prior_mean;
  const Matrix p0 = prior_precision;
  const double lambda = noise_precision;

  Regularity r;
  r.m = lo;
  r.L = hi;
  r.hessian_lipschitz = 0.0;
  r.growth = growth_from_strong_convexity(lo);
  Potential raw(
      "linear_regression", static_cast<int>(q),
      [x, y, mu0, p0, lambda](const Vector& theta) {
        const Vector resid = y - x * theta;
        const Vector dev = theta - mu0;
        return 0.5 * lambda * resid.squaredNorm() + 0.5 * dev.dot(p0 * dev);
      },
      [x, y, mu0, p0, lambda](const Vector& theta, Vector& out) {
        out.noalias() = lambda * (x.transpose() * (x * theta - y));
        out.noalias() += p0 * (theta - mu0);
      },
      r, [hessian](const Vector&, Matrix& out) { out = hessian; });
  const Potential centered = center_at_mode(raw.with_log_normalizer_offset(log_norm), centering);

  // Around the mode the potential is exactly g0.y + y'Hy/2, with g0 the
  // (tiny) gradient left by the optimizer. Sampling uses this form, which
  // avoids a pass over the data per step.
  Vector g0(q);
  centered.gradient(Vector::Zero(q), g0);
  Potential quadratic(
      "linear_regression", static_cast<int>(q),
      [hessian, g0](const Vector& y) { return g0.dot(y) + 0.5 * y.dot(hessian * y); },
      [hessian, g0](const Vector& y, Vector& out) {
        out.noalias() = hessian * y;
        out += g0;
      },
      r, [hessian](const Vector&, Matrix& out) { out = hessian; });
  return quadratic.with_log_normalizer_offset(centered.log_normalizer_offset()).with_mode(centered.mode());
}

Potential logistic_regression_potential(const RegressionDataset& data, double prior_precision,
                                        const CenteringOptions& centering) {
  const Eigen::Index q = data.cols();
  if (q == 0) throw ValidationError("regression needs at least one covariate");
  if (data.responses.size() != data.rows())
    throw ValidationError("responses and covariates disagree on the number of rows");
  if (!(prior_precision > 0.0)) throw ValidationError("prior precision must be positive");
  for (Eigen::Index i = 0; i < data.responses.size(); ++i) {
    const double v = data.responses[i];
    if (v != 0.0 && v != 1.0) {
      throw ValidationError("logistic responses must be 0 or 1; row " + std::to_string(i + 1) +
                            " has " + std::to_string(v));
    }
  }

  const Matrix x = data.covariates;
  const Vector y = data.responses;
  const double tau = prior_precision;
  const Matrix gram = x.transpose() * x;
  const double gram_max = data.rows() == 0 ? 0.0 : extreme_eigenvalues(gram).second;

  double cubed_norms = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) cubed_norms += std::pow(x.row(i).norm(), 3);

  Regularity r;
  r.m = tau;
  r.L = gram_max / 4.0 + tau;
  r.hessian_lipschitz = cubed_norms / (6.0 * std::sqrt(3.0));
  r.growth = growth_from_strong_convexity(tau);

  constexpr double kLog2Pi = 1.8378770664093454836;
  const double log_prior_norm = 0.5 * static_cast<double>(q) * (std::log(tau) - kLog2Pi);

  Potential raw(
      "logistic_regression", static_cast<int>(q),
      [x, y, tau](const Vector& theta) {
        const Vector s = x * theta;
        double total = 0.5 * tau * theta.squaredNorm();
        for (Eigen::Index i = 0; i < s.size(); ++i) total += softplus(s[i]) - y[i] * s[i];
        return total;
      },
      [x, y, tau](const Vector& theta, Vector& out) {
        Vector s = x * theta;
        for (Eigen::Index i = 0; i < s.size(); ++i) s[i] = sigmoid(s[i]) - y[i];
        out.noalias() = x.transpose() * s;
        out += tau * theta;
      },
      r,
      [x, tau](const Vector& theta, Matrix& out) {
        Vector w = x * theta;
        for (Eigen::Index i = 0; i < w.size(); ++i) {
          const double sg = sigmoid(w[i]);
          w[i] = sg * (1.0 - sg);
        }
        out.noalias() = x.transpose() * w.asDiagonal() * x;
        out.diagonal().array() += tau;
      });
  return center_at_mode(raw.with_log_normalizer_offset(log_prior_norm), centering);
}

}  // namespace logz
