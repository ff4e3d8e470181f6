#include "logz/oracle.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include <Eigen/Cholesky>

#include "logz/errors.hpp"

namespace logz {

namespace {

double log_det_spd(const Matrix& A, const char* what) {
  if (A.rows() != A.cols()) throw ValidationError(std::string(what) + " is not square");
  if (!A.isApprox(A.transpose(), 1e-12)) throw ValidationError(std::string(what) + " is not symmetric");
  Eigen::LLT<Matrix> llt(A);
  if (llt.info() != Eigen::Success) throw ValidationError(std::string(what) + " is not positive definite");
  const Matrix& Lf = llt.matrixLLT();
  double s = 0.0;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    if (!(Lf(i, i) > 0.0)) throw ValidationError(std::string(what) + " is not positive definite");
    s += std::log(Lf(i, i));
  }
  return 2.0 * s;
}

}  // namespace

double gaussian_log_evidence(const Matrix& Q) {
  const double d = static_cast<double>(Q.rows());
  return 0.5 * d * std::log(2.0 * std::numbers::pi) - 0.5 * log_det_spd(Q, "precision matrix");
}

double conjugate_linear_log_evidence(const RegressionDataset& data, const Vector& mu0, const Matrix& P0,
                                     double lambda) {
  const Eigen::Index p = data.rows();
  const Eigen::Index q = data.cols();
  if (!(lambda > 0.0)) throw ValidationError("noise precision must be positive");
  if (mu0.size() != q || P0.rows() != q || data.responses.size() != p)
    throw ValidationError("conjugate evidence: inconsistent dimensions");
  const Matrix& X = data.covariates;
  const Matrix H = lambda * X.transpose() * X + P0;
  const Vector b = lambda * X.transpose() * data.responses + P0 * mu0;
  const double logdet_p0 = log_det_spd(P0, "prior precision");
  const double logdet_h = log_det_spd(H, "posterior precision");
  const Vector theta = H.llt().solve(b);
  // Residual form of lambda|y|^2 + mu0'P0mu0 - b'H^{-1}b, free of cancellation.
  const Vector r = data.responses - X * theta;
  const Vector dt = theta - mu0;
  const double quad = lambda * r.squaredNorm() + dt.dot(P0 * dt);
  return 0.5 * static_cast<double>(p) * std::log(lambda / (2.0 * std::numbers::pi)) +
         0.5 * logdet_p0 - 0.5 * logdet_h - 0.5 * quad;
}

double quadrature_tail_bound(const Potential& p, double r) {
  const int d = p.dim();
  const double L = p.L();
  if (p.m() > 0.0) {
    const double m = p.m();
    return d * std::pow(L / m, 0.5 * d) * std::erfc(r * std::sqrt(0.5 * m));
  }
  const auto& g = p.regularity().growth;
  if (!g || !(g->rho1 > 0.0)) return std::numeric_limits<double>::infinity();
  // Mass of exp(rho2 - rho1 |x|) outside the ball of radius r, over the
  // lower bound (2 pi / L)^(d/2) on Z.
  const double x = g->rho1 * r;
  double series = 0.0, term = 1.0;
  for (int k = 0; k < d; ++k) {
    if (k > 0) term *= x / k;
    series += term;
  }
  const double upper_gamma = std::tgamma(d) * std::exp(-x) * series;  // Gamma(d, x)
  const double sphere = 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
  const double tail = std::exp(g->rho2) * sphere * upper_gamma / std::pow(g->rho1, d);
  return tail / std::pow(2.0 * std::numbers::pi / L, 0.5 * d);
}

double quadrature_log_Z(const Potential& p, double radius, int points) {
  const int d = p.dim();
  if (d > 3) throw OracleUnavailable("quadrature oracle supports d <= 3, got d = " + std::to_string(d));
  if (points < 3 || points % 2 == 0) throw DomainError("Simpson rule needs an odd node count >= 3");
  if (!(radius > 0.0)) throw DomainError("quadrature radius must be positive");
  const double tail = quadrature_tail_bound(p, radius);
  if (!(tail < kQuadratureTailTolerance)) {
    std::ostringstream os;
    os << "quadrature radius " << radius << " too small: tail mass bound " << tail << " exceeds "
       << kQuadratureTailTolerance;
    throw DomainError(os.str());
  }

  const double h = 2.0 * radius / (points - 1);
  std::vector<double> nodes(static_cast<std::size_t>(points));
  std::vector<double> log_w(static_cast<std::size_t>(points));
  for (int j = 0; j < points; ++j) {
    nodes[static_cast<std::size_t>(j)] = -radius + h * j;
    const double w = (j == 0 || j == points - 1) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
    log_w[static_cast<std::size_t>(j)] = std::log(w * h / 3.0);
  }

  // Two passes: the maximum first, then the scaled sum.
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  Vector x(d);
  auto visit = [&](auto&& fn) {
    std::fill(idx.begin(), idx.end(), 0);
    while (true) {
      double lw = 0.0;
      for (int k = 0; k < d; ++k) {
        x[k] = nodes[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
        lw += log_w[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
      }
      fn(lw - p.energy(x));
      int k = 0;
      while (k < d && ++idx[static_cast<std::size_t>(k)] == points) idx[static_cast<std::size_t>(k++)] = 0;
      if (k == d) break;
    }
  };
  double mx = -std::numeric_limits<double>::infinity();
  visit([&](double v) { mx = std::max(mx, v); });
  if (!std::isfinite(mx)) throw DomainError("integrand is not finite on the grid");
  double sum = 0.0, comp = 0.0;
  visit([&](double v) {
    const double y = std::exp(v - mx) - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  });
  return mx + std::log(sum);
}

}  // namespace logz
