#pragma once

// Discrete restricted norms and certification of the extreme ratios
//
//   r(f) = (1/|I|) sum_{i in I} |f(x_i)|^p  /  ||f||^p_{L_p(mu)},  f in X_n.
//
// p = 2 is solved exactly as a symmetric eigenproblem. For p < 2 the extremes
// are estimated by optimized probes (one-sided: the estimated minimum is never
// below the true minimum and the estimated maximum never above the true
// maximum). A dense sphere sweep for n <= 3 serves as an independent oracle.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "marcz/core.hpp"
#include "marcz/domain.hpp"

namespace marcz {

enum class Normalization { mean, sum };

inline std::string format_double(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

/// Power mean over a subset (with multiplicity). p = infinity gives
/// max_{i in I} |values[i]|.
inline double discrete_norm(std::span<const double> values, const IndexSet& subset, double p,
                            Normalization norm = Normalization::mean) {
  if (subset.empty()) throw DomainError("discrete_norm: empty subset");
  if (!(p >= 1.0)) throw DomainError("discrete_norm: exponent must be >= 1");
  for (std::size_t i : subset)
    if (i >= values.size()) throw DomainError("discrete_norm: index out of range");
  if (std::isinf(p)) {
    double best = 0.0;
    for (std::size_t i : subset) best = std::max(best, std::abs(values[i]));
    return best;
  }
  double total = 0.0;
  for (std::size_t i : subset) total += std::pow(std::abs(values[i]), p);
  if (norm == Normalization::mean) total /= static_cast<double>(subset.size());
  return std::pow(total, 1.0 / p);
}

enum class Exactness { spectral_exact, probe_estimate, oracle_exact };

inline const char* to_string(Exactness e) {
  switch (e) {
    case Exactness::spectral_exact: return "spectral_exact";
    case Exactness::probe_estimate: return "probe_estimate";
    case Exactness::oracle_exact: return "oracle_exact";
  }
  return "unknown";
}

inline Exactness parse_exactness(const std::string& s) {
  if (s == "spectral_exact") return Exactness::spectral_exact;
  if (s == "probe_estimate") return Exactness::probe_estimate;
  if (s == "oracle_exact") return Exactness::oracle_exact;
  throw DomainError("unknown exactness tag: " + s);
}

/// Two-sided ratio bounds (A, B) for a point set at exponent p.
struct DiscretizationCertificate {
  double p = 2.0;
  IndexSet subset;
  double lower_A = 0.0;
  double upper_B = 0.0;
  Exactness exactness = Exactness::spectral_exact;
  std::size_t probe_budget = 0;
  std::uint64_t seed = 0;
  std::optional<double> epsilon_target;
  std::optional<bool> passed;

  std::size_t m() const { return subset.size(); }
};

/// Key/value text record; the subset itself is exported separately.
inline std::string to_record(const DiscretizationCertificate& c) {
  std::ostringstream os;
  os << "p=" << format_double(c.p) << '\n'
     << "m=" << c.m() << '\n'
     << "A=" << format_double(c.lower_A) << '\n'
     << "B=" << format_double(c.upper_B) << '\n'
     << "exactness=" << to_string(c.exactness) << '\n'
     << "epsilon=" << (c.epsilon_target ? format_double(*c.epsilon_target) : "none") << '\n'
     << "passed=" << (c.passed ? (*c.passed ? "true" : "false") : "none") << '\n'
     << "probe_budget=" << c.probe_budget << '\n'
     << "seed=" << c.seed << '\n';
  return os.str();
}

/// Parsed form of to_record. `subset` is left empty; `m` is returned through
/// the out parameter when given.
inline DiscretizationCertificate parse_record(const std::string& text, std::size_t* m = nullptr) {
  DiscretizationCertificate c;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    if (key == "p") c.p = std::stod(value);
    else if (key == "m" && m) *m = std::stoull(value);
    else if (key == "A") c.lower_A = std::stod(value);
    else if (key == "B") c.upper_B = std::stod(value);
    else if (key == "exactness") c.exactness = parse_exactness(value);
    else if (key == "epsilon" && value != "none") c.epsilon_target = std::stod(value);
    else if (key == "passed" && value != "none") c.passed = (value == "true");
    else if (key == "probe_budget") c.probe_budget = std::stoull(value);
    else if (key == "seed") c.seed = std::stoull(value);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Ratio problems
// ---------------------------------------------------------------------------

/// r(c) = sum_i num_i |rows_i . c|^p / sum_i den_i |rows_i . c|^p.
/// Numerator weights may be signed; denominator weights are nonnegative.
struct RatioProblem {
  Eigen::MatrixXd rows;
  Eigen::VectorXd num;
  Eigen::VectorXd den;
  double p = 2.0;

  std::size_t dim() const { return static_cast<std::size_t>(rows.cols()); }
};

/// Collapses two index multisets over the same system into a RatioProblem:
/// each distinct index becomes one row with summed weights. Rows where both
/// weights vanish are dropped.
inline RatioProblem make_ratio_problem(const Eigen::MatrixXd& phi,
                                       const std::map<std::size_t, double>& num,
                                       const std::map<std::size_t, double>& den, double p) {
  std::map<std::size_t, std::pair<double, double>> merged;
  for (const auto& [i, w] : num) merged[i].first += w;
  for (const auto& [i, w] : den) merged[i].second += w;
  std::vector<std::size_t> keep;
  for (const auto& [i, w] : merged)
    if (w.first != 0.0 || w.second != 0.0) keep.push_back(i);
  RatioProblem prob;
  prob.p = p;
  prob.rows.resize(static_cast<Eigen::Index>(keep.size()), phi.cols());
  prob.num.resize(static_cast<Eigen::Index>(keep.size()));
  prob.den.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const auto ri = static_cast<Eigen::Index>(r);
    prob.rows.row(ri) = phi.row(static_cast<Eigen::Index>(keep[r]));
    prob.num(ri) = merged[keep[r]].first;
    prob.den(ri) = merged[keep[r]].second;
  }
  return prob;
}

namespace detail {

inline void check_subset(const OrthonormalSystem& sys, const IndexSet& subset, const char* who) {
  if (subset.empty()) throw DomainError(std::string(who) + ": empty subset");
  for (std::size_t i : subset)
    if (i >= sys.size()) throw DomainError(std::string(who) + ": index out of range");
}

inline std::map<std::size_t, double> subset_weights(const IndexSet& subset,
                                                    const std::optional<std::vector<double>>& lambda) {
  std::map<std::size_t, double> w;
  if (lambda) {
    if (lambda->size() != subset.size())
      throw DomainError("weights must have one entry per selected point");
    for (std::size_t k = 0; k < subset.size(); ++k) {
      if (!((*lambda)[k] >= 0.0)) throw DomainError("weights must be nonnegative");
      w[subset[k]] += (*lambda)[k];
    }
  } else {
    const double share = 1.0 / static_cast<double>(subset.size());
    for (std::size_t i : subset) w[i] += share;
  }
  return w;
}

}  // namespace detail

/// Numerator: mean over the subset (or user weights lambda_j); denominator:
/// the L_p(mu) norm over the whole domain.
inline RatioProblem certification_problem(const OrthonormalSystem& sys, const IndexSet& subset,
                                          double p,
                                          const std::optional<std::vector<double>>& lambda = {}) {
  detail::check_subset(sys, subset, "certification_problem");
  std::map<std::size_t, double> den;
  for (std::size_t i = 0; i < sys.size(); ++i)
    if (sys.domain().weight(i) > 0.0) den[i] = sys.domain().weight(i);
  return make_ratio_problem(sys.eval(), detail::subset_weights(subset, lambda), den, p);
}

namespace detail {

// |x|^p with fast paths for the exponents the pipeline uses.
struct PowAbs {
  double p;
  int kind;  // 1, 2, 3 (= 1.5), 0 general
  explicit PowAbs(double p_) : p(p_), kind(p_ == 1.0 ? 1 : p_ == 2.0 ? 2 : p_ == 1.5 ? 3 : 0) {}
  double operator()(double x) const {
    const double a = std::abs(x);
    switch (kind) {
      case 1: return a;
      case 2: return a * a;
      case 3: return a * std::sqrt(a);
      default: return std::pow(a, p);
    }
  }
  // d/dx |x|^p, with 0 at x = 0.
  double derivative(double x) const {
    if (x == 0.0) return 0.0;
    const double s = x > 0.0 ? 1.0 : -1.0;
    const double a = std::abs(x);
    switch (kind) {
      case 1: return s;
      case 2: return 2.0 * x;
      case 3: return 1.5 * s * std::sqrt(a);
      default: return p * s * std::pow(a, p - 1.0);
    }
  }
};

// Numerator and denominator sums at values cos(t) f + sin(t) g.
template <int Kind>
inline std::pair<double, double> ratio_sums_kind(const RatioProblem& prob, double p, const double* fp,
                                                 const double* gp, Eigen::Index rows, double ct,
                                                 double st) {
  double num = 0.0, den = 0.0;
  const double* wn = prob.num.data();
  const double* wd = prob.den.data();
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double x = gp ? ct * fp[i] + st * gp[i] : fp[i];
    const double a = std::abs(x);
    double v;
    if constexpr (Kind == 1) v = a;
    else if constexpr (Kind == 2) v = a * a;
    else if constexpr (Kind == 3) v = a * std::sqrt(a);
    else v = std::pow(a, p);
    num += wn[i] * v;
    den += wd[i] * v;
  }
  return {num, den};
}

inline std::pair<double, double> ratio_sums(const RatioProblem& prob, const PowAbs& pw,
                                            const Eigen::VectorXd& f, const Eigen::VectorXd* g,
                                            double ct, double st) {
  const double* gp = g ? g->data() : nullptr;
  switch (pw.kind) {
    case 1: return ratio_sums_kind<1>(prob, pw.p, f.data(), gp, f.size(), ct, st);
    case 2: return ratio_sums_kind<2>(prob, pw.p, f.data(), gp, f.size(), ct, st);
    case 3: return ratio_sums_kind<3>(prob, pw.p, f.data(), gp, f.size(), ct, st);
    default: return ratio_sums_kind<0>(prob, pw.p, f.data(), gp, f.size(), ct, st);
  }
}

inline double ratio_of(std::pair<double, double> s) {
  return s.second > 0.0 ? s.first / s.second : std::numeric_limits<double>::quiet_NaN();
}

// Local refinement on the unit sphere. `sense` = +1 ascends, -1 descends.
// Each iteration runs a geodesic line search over 32 log-spaced step lengths
// along a Polak-Ribiere conjugate direction built from the tangent gradient.
// When that stalls, the line search runs in both orientations along every
// coordinate direction projected onto the tangent space (|.|^p has kinks at
// zeros where the gradient is misleading). Stops when no direction improves r by more
// than `rel_tol` relative, or after `max_iterations`.
inline double refine_ratio(const RatioProblem& prob, Eigen::VectorXd c, int sense,
                           int max_iterations, double rel_tol) {
  const PowAbs pw(prob.p);
  const auto n = static_cast<Eigen::Index>(prob.dim());
  c.normalize();
  Eigen::VectorXd f = prob.rows * c;
  double val = ratio_of(ratio_sums(prob, pw, f, nullptr, 1.0, 0.0));
  if (std::isnan(val)) return val;

  static const std::vector<double> steps = [] {
    std::vector<double> s;
    for (int k = 0; k < 32; ++k) s.push_back(0.5 * std::numbers::pi * std::ldexp(1.0, -k));
    return s;
  }();

  Eigen::VectorXd fd(f.size()), h(f.size());
  // Steps are scanned from long to short; the scan of one orientation stops
  // at the first step that is worse than an improvement already found.
  auto try_direction = [&](Eigen::VectorXd d, bool both_signs) -> bool {
    d -= d.dot(c) * c;
    const double norm = d.norm();
    if (!(norm > 1e-14)) return false;
    d /= norm;
    fd.noalias() = prob.rows * d;
    double best = val, best_t = 0.0;
    for (double sign : {1.0, -1.0}) {
      if (sign < 0.0 && !both_signs) break;
      bool found = false;
      for (double t0 : steps) {
        const double t = sign * t0;
        const double v = ratio_of(ratio_sums(prob, pw, f, &fd, std::cos(t), std::sin(t)));
        const bool better = !std::isnan(v) && sense * (v - best) > 0.0;
        if (better) {
          best = v;
          best_t = t;
          found = true;
        } else if (found) {
          break;
        }
      }
    }
    if (sense * (best - val) <= rel_tol * std::abs(val)) return false;
    c = std::cos(best_t) * c + std::sin(best_t) * d;
    c.normalize();
    f.noalias() = prob.rows * c;
    val = ratio_of(ratio_sums(prob, pw, f, nullptr, 1.0, 0.0));
    return true;
  };

  Eigen::VectorXd grad_prev, dir;
  for (int it = 0; it < max_iterations && n > 1; ++it) {
    const auto sums = ratio_sums(prob, pw, f, nullptr, 1.0, 0.0);
    const double r = sums.first / sums.second;
    for (Eigen::Index i = 0; i < f.size(); ++i)
      h(i) = pw.derivative(f(i)) * (prob.num(i) - r * prob.den(i)) / sums.second;
    Eigen::VectorXd grad = sense * (prob.rows.transpose() * h);
    grad -= grad.dot(c) * c;
    if (dir.size() == n && grad_prev.size() == n && grad_prev.squaredNorm() > 0.0) {
      const double beta = std::max(0.0, grad.dot(grad - grad_prev) / grad_prev.squaredNorm());
      dir = grad + beta * (dir - dir.dot(c) * c);
      if (dir.dot(grad) <= 0.0) dir = grad;
    } else {
      dir = grad;
    }
    grad_prev = grad;
    bool improved = try_direction(dir, false);
    if (!improved) {
      dir.resize(0);
      for (Eigen::Index k = 0; k < n; ++k)
        improved = try_direction(Eigen::VectorXd::Unit(n, k), true) || improved;
    }
    if (!improved) break;
  }
  return val;
}

}  // namespace detail

struct RatioExtremes {
  double lower = 0.0;
  double upper = 0.0;
};

/// Value of the ratio functional at coefficient vector c.
inline double ratio_value(const RatioProblem& prob, const Eigen::VectorXd& c) {
  const Eigen::VectorXd f = prob.rows * c;
  return detail::ratio_of(detail::ratio_sums(prob, detail::PowAbs(prob.p), f, nullptr, 1.0, 0.0));
}

/// Exact extremes for p = 2: generalized eigenvalues of the pencil
/// (rows^T diag(num) rows, rows^T diag(den) rows). Throws RankError when the
/// denominator form is singular on X_n.
inline RatioExtremes ratio_extremes_spectral(const RatioProblem& prob) {
  if (prob.p != 2.0) throw DomainError("ratio_extremes_spectral: p must be 2");
  const Eigen::MatrixXd a = prob.rows.transpose() * prob.num.asDiagonal() * prob.rows;
  const Eigen::MatrixXd b = prob.rows.transpose() * prob.den.asDiagonal() * prob.rows;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> bs(b, Eigen::EigenvaluesOnly);
  const double btop = bs.eigenvalues().maxCoeff();
  if (!(btop > 0.0) || bs.eigenvalues().minCoeff() <= 1e-12 * btop)
    throw RankError("parent set rank-deficient");
  if (a.rows() == 1) return {a(0, 0) / b(0, 0), a(0, 0) / b(0, 0)};
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(a, b, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

struct ProbeOptions {
  std::size_t budget = 32;
  std::uint64_t seed = 0;
  int max_iterations = 100;
  double rel_tol = 1e-9;
};

/// Probe-based extremes: `budget` random unit starts plus the n coordinate
/// directions, each refined upward (for B) and downward (for A). Start k
/// draws from stream derive_seed(seed, k), so the result does not depend on
/// the worker count.
inline RatioExtremes ratio_extremes_probe(const RatioProblem& prob, const ProbeOptions& opt) {
  if (opt.budget == 0) throw DomainError("ratio_extremes_probe: probe_budget must be >= 1");
  const auto n = static_cast<Eigen::Index>(prob.dim());
  const std::size_t starts = opt.budget + static_cast<std::size_t>(n);
  std::vector<double> results(2 * starts);
  parallel_for(2 * starts, [&](std::size_t task) {
    const std::size_t k = task / 2;
    const int sense = (task % 2 == 0) ? -1 : 1;
    Eigen::VectorXd c(n);
    if (k < opt.budget) {
      Rng rng(derive_seed(opt.seed, k));
      do {
        for (Eigen::Index j = 0; j < n; ++j) c(j) = rng.normal();
      } while (c.norm() == 0.0);
    } else {
      c = Eigen::VectorXd::Unit(n, static_cast<Eigen::Index>(k - opt.budget));
    }
    results[task] = detail::refine_ratio(prob, c, sense, opt.max_iterations, opt.rel_tol);
  });
  RatioExtremes out{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (std::size_t task = 0; task < results.size(); ++task) {
    const double v = results[task];
    if (std::isnan(v)) continue;
    if (task % 2 == 0) out.lower = std::min(out.lower, v);
    else out.upper = std::max(out.upper, v);
  }
  if (!std::isfinite(out.lower) || !std::isfinite(out.upper))
    throw RankError("ratio_extremes_probe: denominator vanishes on every probe");
  return out;
}

/// Exact extremes of the mean-normalized ratio for p = 2: eigenvalues of
/// G_I = (1/|I|) Phi_I^T Phi_I, or sum_j lambda_j Phi_{xi_j}^T Phi_{xi_j}.
inline RatioExtremes ratio_extremes_l2(const OrthonormalSystem& sys, const IndexSet& subset,
                                       const std::optional<std::vector<double>>& lambda = {}) {
  detail::check_subset(sys, subset, "ratio_extremes_l2");
  const auto w = detail::subset_weights(subset, lambda);
  const auto n = static_cast<Eigen::Index>(sys.dim());
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [i, wi] : w) {
    const auto row = sys.eval().row(static_cast<Eigen::Index>(i));
    g.noalias() += wi * row.transpose() * row;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

/// Probe estimate of the mean-normalized ratio extremes for p in [1, 2).
inline RatioExtremes ratio_extremes_lp(const OrthonormalSystem& sys, const IndexSet& subset, double p,
                                       std::size_t probe_budget, std::uint64_t seed,
                                       const std::optional<std::vector<double>>& lambda = {}) {
  if (!(p >= 1.0)) throw DomainError("ratio_extremes_lp: exponent must be >= 1");
  if (probe_budget == 0) throw DomainError("ratio_extremes_lp: probe_budget must be >= 1");
  return ratio_extremes_probe(certification_problem(sys, subset, p, lambda),
                              ProbeOptions{probe_budget, seed});
}

/// Dense sweep of the unit coefficient sphere for n <= 3. Since r is even in
/// f only a half-sphere is swept: n = 2 uses angles pi k / resolution; n = 3
/// uses a polar angle on [0, pi/2] and an azimuth on [0, 2 pi), each with
/// `resolution` points. The error is O(1/resolution) by Lipschitz continuity
/// of r on the sphere. Computes sums straight from the evaluation matrix.
inline RatioExtremes brute_force_extremes(const OrthonormalSystem& sys, const IndexSet& subset,
                                          double p, std::size_t resolution) {
  detail::check_subset(sys, subset, "brute_force_extremes");
  const std::size_t n = sys.dim();
  if (n > 3) throw DomainError("brute_force_extremes: n must be <= 3");
  if (resolution == 0) throw DomainError("brute_force_extremes: resolution must be positive");
  const Eigen::MatrixXd& phi = sys.eval();
  const auto& mu = sys.domain().weights();
  const double inv_m = 1.0 / static_cast<double>(subset.size());
  auto ratio = [&](const Eigen::VectorXd& f) {
    double num = 0.0, den = 0.0;
    for (std::size_t i : subset) num += std::pow(std::abs(f(static_cast<Eigen::Index>(i))), p);
    for (std::size_t i = 0; i < mu.size(); ++i)
      den += mu[i] * std::pow(std::abs(f(static_cast<Eigen::Index>(i))), p);
    return num * inv_m / den;
  };
  RatioExtremes out{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  auto visit = [&](double v) {
    out.lower = std::min(out.lower, v);
    out.upper = std::max(out.upper, v);
  };
  if (n == 1) {
    visit(ratio(phi.col(0)));
  } else if (n == 2) {
    for (std::size_t k = 0; k < resolution; ++k) {
      const double t = std::numbers::pi * static_cast<double>(k) / static_cast<double>(resolution);
      visit(ratio(std::cos(t) * phi.col(0) + std::sin(t) * phi.col(1)));
    }
  } else {
    for (std::size_t a = 0; a < resolution; ++a) {
      const double polar = resolution == 1 ? 0.0
                                           : 0.5 * std::numbers::pi * static_cast<double>(a) /
                                                 static_cast<double>(resolution - 1);
      for (std::size_t b = 0; b < resolution; ++b) {
        const double az = 2.0 * std::numbers::pi * static_cast<double>(b) / static_cast<double>(resolution);
        const Eigen::VectorXd f = std::cos(polar) * phi.col(0) +
                                  std::sin(polar) * (std::cos(az) * phi.col(1) + std::sin(az) * phi.col(2));
        visit(ratio(f));
        if (a == 0) break;  // the pole is a single point
      }
    }
  }
  return out;
}

enum class CertifyMode { automatic, oracle };

struct CertifyOptions {
  CertifyMode mode = CertifyMode::automatic;
  std::size_t probe_budget = 32;
  std::uint64_t seed = 0;
  std::size_t resolution = 20000;
  std::optional<std::vector<double>> weights;
};

/// Certifies (1 - eps) ||f||^p <= (1/m) sum |f(xi_j)|^p <= (1 + eps) ||f||^p
/// over X_n. Dispatches to the spectral route (p = 2), the probe route
/// (p < 2) or the sphere sweep (mode = oracle, n <= 3).
inline DiscretizationCertificate certify(const OrthonormalSystem& sys, const IndexSet& subset, double p,
                                         std::optional<double> epsilon, const CertifyOptions& opt = {}) {
  if (epsilon && !(*epsilon > 0.0 && *epsilon < 1.0))
    throw DomainError("certify: epsilon must lie in (0, 1)");
  if (!(p >= 1.0 && p <= 2.0)) throw DomainError("certify: exponent must lie in [1, 2]");
  DiscretizationCertificate cert;
  cert.p = p;
  cert.subset = subset;
  cert.epsilon_target = epsilon;
  RatioExtremes ext;
  if (opt.mode == CertifyMode::oracle) {
    if (opt.weights) throw DomainError("certify: oracle mode does not take weights");
    ext = brute_force_extremes(sys, subset, p, opt.resolution);
    cert.exactness = Exactness::oracle_exact;
  } else if (p == 2.0) {
    ext = ratio_extremes_l2(sys, subset, opt.weights);
    cert.exactness = Exactness::spectral_exact;
  } else {
    ext = ratio_extremes_lp(sys, subset, p, opt.probe_budget, opt.seed, opt.weights);
    cert.exactness = Exactness::probe_estimate;
    cert.probe_budget = opt.probe_budget;
    cert.seed = opt.seed;
  }
  cert.lower_A = std::max(0.0, ext.lower);
  cert.upper_B = std::max(cert.lower_A, ext.upper);
  if (epsilon) cert.passed = cert.lower_A >= 1.0 - *epsilon && cert.upper_B <= 1.0 + *epsilon;
  return cert;
}

}  // namespace marcz
