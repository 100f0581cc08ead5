#pragma once

// Finite domains with probability measures, mu-orthonormal subspace bases and
// Christoffel profiles.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <initializer_list>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "marcz/core.hpp"

namespace marcz {

/// M points (optionally with real coordinates) carrying a probability
/// measure. Points of zero measure are kept and counted by null_atoms().
class Domain {
 public:
  Domain() = default;

  std::size_t size() const { return weights_.size(); }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& coords() const { return coords_; }
  bool has_coords() const { return !coords_.empty(); }
  double weight(std::size_t i) const { return weights_[i]; }

  std::size_t null_atoms() const {
    return static_cast<std::size_t>(
        std::count(weights_.begin(), weights_.end(), 0.0));
  }

  /// True when every point carries the same weight 1/M.
  bool is_uniform() const {
    const double w0 = 1.0 / static_cast<double>(size());
    return std::all_of(weights_.begin(), weights_.end(),
                       [w0](double w) { return std::abs(w - w0) <= 1e-15; });
  }

  Eigen::Map<const Eigen::VectorXd> weight_vector() const {
    return {weights_.data(), static_cast<Eigen::Index>(weights_.size())};
  }

 private:
  friend Domain build_domain(std::vector<double>, std::vector<double>);
  std::vector<double> weights_;
  std::vector<double> coords_;
};

/// Equispaced or Chebyshev-Gauss grid with the uniform measure.
struct GridSpec {
  enum class Kind { equispaced, chebyshev_gauss };
  std::size_t points = 0;
  double lo = 0.0;
  double hi = 2.0 * std::numbers::pi;
  Kind kind = Kind::equispaced;
};

/// Explicit weights (renormalized to sum 1) and optional coordinates.
inline Domain build_domain(std::vector<double> weights, std::vector<double> coords = {}) {
  if (weights.empty()) throw DomainError("build_domain: empty point list");
  if (!coords.empty() && coords.size() != weights.size())
    throw DomainError("build_domain: coordinate count does not match weight count");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw DomainError("build_domain: weights must be finite and nonnegative");
    total += w;
  }
  if (total <= 0.0) throw DomainError("build_domain: all weights are zero");
  for (double& w : weights) w /= total;
  Domain d;
  d.weights_ = std::move(weights);
  d.coords_ = std::move(coords);
  return d;
}

inline Domain build_domain(std::initializer_list<double> weights) {
  return build_domain(std::vector<double>(weights));
}

/// Uniform grid. Equispaced points are lo + (hi - lo) i / M (half-open), so
/// the default spec is the periodic grid 2 pi i / M on [0, 2 pi).
inline Domain build_domain(const GridSpec& spec) {
  if (spec.points == 0) throw DomainError("build_domain: empty point list");
  const std::size_t m = spec.points;
  std::vector<double> coords(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double t = static_cast<double>(i);
    if (spec.kind == GridSpec::Kind::equispaced) {
      coords[i] = spec.lo + (spec.hi - spec.lo) * t / static_cast<double>(m);
    } else {
      // Chebyshev-Gauss nodes mapped onto [lo, hi].
      const double x = std::cos(std::numbers::pi * (t + 0.5) / static_cast<double>(m));
      coords[i] = 0.5 * (spec.lo + spec.hi) + 0.5 * (spec.hi - spec.lo) * x;
    }
  }
  return build_domain(std::vector<double>(m, 1.0), std::move(coords));
}

namespace family {
/// 1, sqrt2 cos(kx), sqrt2 sin(kx) for k = 1..degree; n = 2 degree + 1.
struct Trigonometric {
  int degree = 0;
};
/// T_0..T_{n-1} on coordinates in [-1, 1].
struct Chebyshev {
  int n = 0;
};
/// P_0..P_{n-1} on coordinates in [-1, 1].
struct Legendre {
  int n = 0;
};
/// Gaussian M x n matrix drawn from `seed`.
struct RandomOrthonormal {
  int n = 0;
  std::uint64_t seed = 0;
};
/// Caller-supplied evaluation matrix (M x n).
struct Explicit {
  Eigen::MatrixXd matrix;
};
}  // namespace family

using SystemFamily = std::variant<family::Trigonometric, family::Chebyshev, family::Legendre,
                                  family::RandomOrthonormal, family::Explicit>;

/// An n-dimensional subspace X_n of functions on a Domain, stored as the
/// M x n evaluation matrix of a mu-orthonormal basis: Phi(i, j) = u_j(x_i).
class OrthonormalSystem {
 public:
  const Domain& domain() const { return domain_; }
  const Eigen::MatrixXd& eval() const { return phi_; }
  std::size_t dim() const { return static_cast<std::size_t>(phi_.cols()); }
  std::size_t size() const { return static_cast<std::size_t>(phi_.rows()); }

  /// Values of f = sum_j c_j u_j at every point.
  Eigen::VectorXd evaluate(const Eigen::VectorXd& coeffs) const { return phi_ * coeffs; }

  /// Max entry of |Phi^T diag(mu) Phi - I|.
  double orthonormality_defect() const {
    const Eigen::MatrixXd g = phi_.transpose() * domain_.weight_vector().asDiagonal() * phi_;
    return (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
  }

 private:
  friend OrthonormalSystem build_system(const SystemFamily&, const Domain&);
  Domain domain_;
  Eigen::MatrixXd phi_;
};

namespace detail {

// Phi <- Phi G^{-1/2} with G = Phi^T diag(mu) Phi. Throws when a singular
// value of diag(mu)^{1/2} Phi falls below 1e-10 times the largest.
inline void symmetric_orthonormalize(Eigen::MatrixXd& phi, const Eigen::VectorXd& mu) {
  const Eigen::MatrixXd gram = phi.transpose() * mu.asDiagonal() * phi;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  const Eigen::VectorXd& lambda = es.eigenvalues();
  const double top = lambda.maxCoeff();
  if (!(top > 0.0) || lambda.minCoeff() <= 1e-20 * top)
    throw RankError("build_system: basis is rank-deficient on this domain");
  const Eigen::VectorXd inv_sqrt = lambda.cwiseSqrt().cwiseInverse();
  phi = phi * (es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose());
}

inline std::vector<double> require_interval_coords(const Domain& d, const char* name) {
  if (!d.has_coords())
    throw DomainError(std::string("build_system: ") + name + " family needs point coordinates");
  for (double x : d.coords())
    if (x < -1.0 - 1e-12 || x > 1.0 + 1e-12)
      throw DomainError(std::string("build_system: ") + name + " family needs coordinates in [-1, 1]");
  return d.coords();
}

inline Eigen::MatrixXd raw_basis(const family::Trigonometric& f, const Domain& d) {
  if (f.degree < 0) throw DomainError("build_system: negative trigonometric degree");
  const std::size_t m = d.size();
  const auto n = static_cast<std::size_t>(2 * f.degree + 1);
  if (m < n) throw DomainError("build_system: trigonometric degree d needs M >= 2d+1");
  if (!d.is_uniform()) throw DomainError("build_system: trigonometric family needs a uniform grid");
  const double two_pi = 2.0 * std::numbers::pi;
  Eigen::MatrixXd phi(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    const double x = two_pi * static_cast<double>(i) / static_cast<double>(m);
    if (d.has_coords() && std::abs(std::remainder(d.coords()[i] - x, two_pi)) > 1e-9)
      throw DomainError("build_system: trigonometric family needs the grid 2 pi i / M");
    phi(i, 0) = 1.0;
    for (int k = 1; k <= f.degree; ++k) {
      phi(i, 2 * k - 1) = std::numbers::sqrt2 * std::cos(k * x);
      phi(i, 2 * k) = std::numbers::sqrt2 * std::sin(k * x);
    }
  }
  return phi;
}

inline Eigen::MatrixXd raw_basis(const family::Chebyshev& f, const Domain& d) {
  const auto xs = require_interval_coords(d, "chebyshev");
  if (f.n < 1) throw DomainError("build_system: dimension must be positive");
  Eigen::MatrixXd phi(d.size(), f.n);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = std::clamp(xs[i], -1.0, 1.0);
    double prev = 1.0, cur = x;
    phi(i, 0) = 1.0;
    for (int k = 1; k < f.n; ++k) {
      phi(i, k) = cur;
      const double next = 2.0 * x * cur - prev;
      prev = cur;
      cur = next;
    }
  }
  return phi;
}

inline Eigen::MatrixXd raw_basis(const family::Legendre& f, const Domain& d) {
  const auto xs = require_interval_coords(d, "legendre");
  if (f.n < 1) throw DomainError("build_system: dimension must be positive");
  Eigen::MatrixXd phi(d.size(), f.n);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = xs[i];
    double prev = 1.0, cur = x;
    phi(i, 0) = 1.0;
    for (int k = 1; k < f.n; ++k) {
      phi(i, k) = cur;
      const double next = ((2.0 * k + 1.0) * x * cur - k * prev) / (k + 1.0);
      prev = cur;
      cur = next;
    }
  }
  return phi;
}

inline Eigen::MatrixXd raw_basis(const family::RandomOrthonormal& f, const Domain& d) {
  if (f.n < 1) throw DomainError("build_system: dimension must be positive");
  Rng rng(f.seed);
  Eigen::MatrixXd phi(d.size(), f.n);
  for (Eigen::Index j = 0; j < phi.cols(); ++j)
    for (Eigen::Index i = 0; i < phi.rows(); ++i) phi(i, j) = rng.normal();
  return phi;
}

inline Eigen::MatrixXd raw_basis(const family::Explicit& f, const Domain& d) {
  if (static_cast<std::size_t>(f.matrix.rows()) != d.size())
    throw DomainError("build_system: explicit matrix row count must equal M");
  if (f.matrix.cols() < 1) throw DomainError("build_system: dimension must be positive");
  return f.matrix;
}

}  // namespace detail

/// Evaluates the family on the domain and mu-orthonormalizes the columns by
/// the symmetric inverse square root of their Gram matrix. An already
/// orthonormal basis comes back unchanged up to rounding.
inline OrthonormalSystem build_system(const SystemFamily& fam, const Domain& d) {
  Eigen::MatrixXd phi = std::visit([&](const auto& f) { return detail::raw_basis(f, d); }, fam);
  if (static_cast<std::size_t>(phi.cols()) > d.size())
    throw DomainError("build_system: dimension n exceeds domain size M");
  const Eigen::VectorXd mu = d.weight_vector();
  detail::symmetric_orthonormalize(phi, mu);
  // A second pass removes the residual from an ill-conditioned raw basis.
  const Eigen::MatrixXd g = phi.transpose() * mu.asDiagonal() * phi;
  if ((g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() > 1e-14)
    detail::symmetric_orthonormalize(phi, mu);
  OrthonormalSystem sys;
  sys.domain_ = d;
  sys.phi_ = std::move(phi);
  return sys;
}

/// w(x_i)^2 = sum_j u_j(x_i)^2 and the Nikol'skii constant K with
/// K n = max_i w(x_i)^2.
struct ChristoffelProfile {
  std::vector<double> values;
  double nikolskii_K = 0.0;
};

inline ChristoffelProfile christoffel(const OrthonormalSystem& sys) {
  ChristoffelProfile out;
  const Eigen::VectorXd sq = sys.eval().rowwise().squaredNorm();
  out.values.assign(sq.data(), sq.data() + sq.size());
  out.nikolskii_K = sq.maxCoeff() / static_cast<double>(sys.dim());
  return out;
}

/// Plain-text matrix format: "M n", then M rows "weight u_1 ... u_n".
inline void write_system(std::ostream& os, const OrthonormalSystem& sys) {
  std::ostringstream buf;
  buf << std::setprecision(17);
  buf << sys.size() << ' ' << sys.dim() << '\n';
  for (std::size_t i = 0; i < sys.size(); ++i) {
    buf << sys.domain().weight(i);
    for (std::size_t j = 0; j < sys.dim(); ++j)
      buf << ' ' << sys.eval()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    buf << '\n';
  }
  os << buf.str();
}

inline OrthonormalSystem read_system(std::istream& is) {
  std::size_t m = 0, n = 0;
  if (!(is >> m >> n) || m == 0 || n == 0)
    throw DomainError("read_system: malformed header, expected \"M n\"");
  std::vector<double> weights(m);
  Eigen::MatrixXd phi(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(is >> weights[i])) throw DomainError("read_system: truncated row " + std::to_string(i));
    for (std::size_t j = 0; j < n; ++j)
      if (!(is >> phi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))))
        throw DomainError("read_system: truncated row " + std::to_string(i));
  }
  return build_system(family::Explicit{std::move(phi)}, build_domain(std::move(weights)));
}

}  // namespace marcz
