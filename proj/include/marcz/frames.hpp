#pragma once

// Dirichlet kernel D(x, y) = sum_k u_k(x) u_k(y) of a subspace and the
// frames it generates at a point set.

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <vector>

#include "marcz/core.hpp"
#include "marcz/domain.hpp"
#include "marcz/norms.hpp"

namespace marcz {

/// D restricted to rows x cols.
inline Eigen::MatrixXd kernel_matrix(const OrthonormalSystem& sys, const IndexSet& rows,
                                     const IndexSet& cols) {
  const auto n = static_cast<Eigen::Index>(sys.dim());
  Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), n);
  Eigen::MatrixXd b(static_cast<Eigen::Index>(cols.size()), n);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] >= sys.size()) throw DomainError("kernel_matrix: index out of range");
    a.row(static_cast<Eigen::Index>(k)) = sys.eval().row(static_cast<Eigen::Index>(rows[k]));
  }
  for (std::size_t k = 0; k < cols.size(); ++k) {
    if (cols[k] >= sys.size()) throw DomainError("kernel_matrix: index out of range");
    b.row(static_cast<Eigen::Index>(k)) = sys.eval().row(static_cast<Eigen::Index>(cols[k]));
  }
  return a * b.transpose();
}

/// Full M x M kernel, Phi Phi^T.
inline Eigen::MatrixXd kernel_matrix(const OrthonormalSystem& sys) {
  return sys.eval() * sys.eval().transpose();
}

/// Max |D_Phi - D_{Phi O}| over all entries, in row blocks so M x M is never
/// held in memory.
inline double kernel_deviation(const OrthonormalSystem& sys, const Eigen::MatrixXd& rotation) {
  const auto n = static_cast<Eigen::Index>(sys.dim());
  if (rotation.rows() != n || rotation.cols() != n)
    throw DomainError("kernel_deviation: rotation must be n x n");
  const Eigen::MatrixXd& phi = sys.eval();
  const Eigen::MatrixXd psi = phi * rotation;
  const Eigen::Index M = phi.rows();
  constexpr Eigen::Index block = 256;
  double worst = 0.0;
  for (Eigen::Index r0 = 0; r0 < M; r0 += block) {
    const Eigen::Index h = std::min(block, M - r0);
    const Eigen::MatrixXd d1 = phi.middleRows(r0, h) * phi.transpose();
    const Eigen::MatrixXd d2 = psi.middleRows(r0, h) * psi.transpose();
    worst = std::max(worst, (d1 - d2).cwiseAbs().maxCoeff());
  }
  return worst;
}

/// Haar-like random orthogonal matrix: QR of a Gaussian matrix with the
/// signs of diag(R) folded into Q.
inline Eigen::MatrixXd random_orthogonal(std::size_t n, std::uint64_t seed) {
  const auto nn = static_cast<Eigen::Index>(n);
  Rng rng(seed);
  Eigen::MatrixXd g(nn, nn);
  for (Eigen::Index j = 0; j < nn; ++j)
    for (Eigen::Index i = 0; i < nn; ++i) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(nn, nn);
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < nn; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

/// The kernel does not depend on the orthonormal basis chosen for X_n.
inline bool basis_invariance_check(const OrthonormalSystem& sys, std::uint64_t seed, double tol) {
  return kernel_deviation(sys, random_orthogonal(sys.dim(), seed)) <= tol;
}

/// max_i |sum_j mu_j D(x_i, x_j) g(x_j) - g(x_i)| for arbitrary values g,
/// computed as Phi (Phi^T diag(mu) g).
inline double reproducing_error(const OrthonormalSystem& sys, const Eigen::VectorXd& values) {
  if (values.size() != static_cast<Eigen::Index>(sys.size()))
    throw DomainError("reproducing_error: need one value per domain point");
  const Eigen::VectorXd mu = sys.domain().weight_vector();
  const Eigen::VectorXd proj = sys.eval() * (sys.eval().transpose() * mu.cwiseProduct(values));
  return (proj - values).cwiseAbs().maxCoeff();
}

/// Reproduction of f = sum_k c_k u_k within tol.
inline bool reproducing_check(const OrthonormalSystem& sys, const Eigen::VectorXd& coeffs, double tol) {
  if (coeffs.size() != static_cast<Eigen::Index>(sys.dim()))
    throw DomainError("reproducing_check: need n coefficients");
  return reproducing_error(sys, sys.eval() * coeffs) <= tol;
}

enum class FrameDerivation { from_discretization, direct };

inline const char* to_string(FrameDerivation d) {
  return d == FrameDerivation::from_discretization ? "from_discretization" : "direct";
}

struct FrameReport {
  IndexSet points;
  std::optional<std::vector<double>> weights;
  double p = 2.0;
  double frame_lower = 0.0;
  double frame_upper = 0.0;
  FrameDerivation derivation = FrameDerivation::from_discretization;
  DiscretizationCertificate certificate;  // the discretization constants used
};

/// Frame constants of {D(., xi_j)} in X_n. Since <f, D(., xi)> = f(xi) for
/// f in X_n, unweighted constants are m (A_disc, B_disc); with weights the
/// extremes of sum_j lambda_j |f(xi_j)|^p / |f|_p^p are used directly.
inline FrameReport frame_constants(const OrthonormalSystem& sys, const IndexSet& points, double p,
                                   const std::optional<std::vector<double>>& weights = {},
                                   CertifyOptions opt = {}) {
  if (points.empty()) throw DomainError("frame_constants: empty point set");
  if (weights)
    for (double w : *weights)
      if (!(w >= 0.0)) throw DomainError("frame_constants: weights must be nonnegative");
  opt.weights = weights;
  FrameReport r;
  r.points = points;
  r.weights = weights;
  r.p = p;
  r.certificate = certify(sys, points, p, std::nullopt, opt);
  if (weights) {
    r.derivation = FrameDerivation::direct;
    r.frame_lower = r.certificate.lower_A;
    r.frame_upper = r.certificate.upper_B;
  } else {
    const double m = static_cast<double>(points.size());
    r.frame_lower = r.certificate.lower_A * m;
    r.frame_upper = r.certificate.upper_B * m;
  }
  return r;
}

/// p = 2 frame bounds computed from kernel translates psi_j = D(., xi_j):
/// the analysis map c -> (<Phi c, psi_j>_mu)_j is formed block by block and
/// its Gram matrix diagonalized. Independent of frame_constants.
inline std::pair<double, double> frame_bounds_direct_l2(const OrthonormalSystem& sys,
                                                        const IndexSet& points) {
  if (points.empty()) throw DomainError("frame_bounds_direct_l2: empty point set");
  const auto n = static_cast<Eigen::Index>(sys.dim());
  const Eigen::MatrixXd& phi = sys.eval();
  const Eigen::MatrixXd mu_phi = sys.domain().weight_vector().asDiagonal() * phi;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  constexpr std::size_t block = 512;
  for (std::size_t s = 0; s < points.size(); s += block) {
    const std::size_t h = std::min(block, points.size() - s);
    const IndexSet chunk(points.begin() + static_cast<std::ptrdiff_t>(s),
                         points.begin() + static_cast<std::ptrdiff_t>(s + h));
    IndexSet all(sys.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const Eigen::MatrixXd translates = kernel_matrix(sys, chunk, all);  // h x M
    const Eigen::MatrixXd analysis = translates * mu_phi;                // h x n
    gram.noalias() += analysis.transpose() * analysis;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

}  // namespace marcz
