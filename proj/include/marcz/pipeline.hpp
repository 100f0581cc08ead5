#pragma once

// End-to-end construction: a certified i.i.d. preliminary sample, scheduled
// halving down to the stopping index, and final certification.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "marcz/core.hpp"
#include "marcz/domain.hpp"
#include "marcz/halving.hpp"
#include "marcz/norms.hpp"
#include "marcz/schedule.hpp"

namespace marcz {

enum class Mode { mt1, mt2 };

inline const char* to_string(Mode m) { return m == Mode::mt1 ? "mt1" : "mt2"; }

struct PreliminaryPolicy {
  std::optional<std::size_t> initial_m;  // default ceil(4 n log(n+1) / eps0^2)
  double growth = 2.0;
  std::size_t max_retries = 6;
};

struct PipelineConfig {
  double kappa1 = 0.5;
  std::optional<double> kappa2;  // solved from kappa1 when unset
  double c5 = 1.0;
  double cp = 1.0;
  ScheduleConstants constants;
  std::optional<double> delta_override;
  PreliminaryPolicy preliminary;
  std::size_t max_attempts = 256;
  std::size_t probe_budget = 16;          // certification
  std::size_t halving_probe_budget = 8;   // deviation during halving
  std::uint64_t seed = 0;
};

/// (1 - k1 e) exp(-c3 k2 e) >= 1 - e and (1 + k1 e) exp(c3 k2 e) / (1 - k2 e) <= 1 + e.
inline bool config_invariant_holds(double eps, double kappa1, double kappa2, double c3) {
  const double t = kappa2 * eps;
  if (!(t < 1.0)) return false;
  const double lower = (1.0 - kappa1 * eps) * std::exp(-c3 * t);
  const double upper = (1.0 + kappa1 * eps) * std::exp(c3 * t) / (1.0 - t);
  return lower >= 1.0 - eps && upper <= 1.0 + eps;
}

/// Largest kappa2 in (0, 1) satisfying the invariant for the given kappa1,
/// by bisection. Throws ConfigError when none exists.
inline double solve_kappa2(double eps, double kappa1, double c3) {
  if (!config_invariant_holds(eps, kappa1, 1e-12, c3))
    throw ConfigError("kappa1 = " + format_double(kappa1) + " leaves no admissible kappa2");
  double lo = 1e-12, hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (config_invariant_holds(eps, kappa1, mid, c3) ? lo : hi) = mid;
  }
  return lo;
}

namespace detail {

inline void check_epsilon(double eps) {
  if (!(eps > 0.0 && eps < 1.0))
    throw ConfigError("epsilon must lie in (0, 1), got " + format_double(eps));
}

inline double resolved_kappa2(double eps, const PipelineConfig& cfg) {
  if (!(cfg.kappa1 > 0.0 && cfg.kappa1 < 1.0)) throw ConfigError("kappa1 must lie in (0, 1)");
  if (!cfg.kappa2) return solve_kappa2(eps, cfg.kappa1, cfg.constants.c3);
  if (!(*cfg.kappa2 > 0.0 && *cfg.kappa2 < 1.0)) throw ConfigError("kappa2 must lie in (0, 1)");
  if (!config_invariant_holds(eps, cfg.kappa1, *cfg.kappa2, cfg.constants.c3))
    throw ConfigError("kappa1/kappa2 violate the epsilon-splitting inequalities");
  return *cfg.kappa2;
}

inline void check_config(const PipelineConfig& cfg) {
  if (!(cfg.c5 > 0.0) || !(cfg.cp > 0.0)) throw ConfigError("C5 and Cp must be positive");
  if (!(cfg.preliminary.growth > 1.0)) throw ConfigError("preliminary growth factor must exceed 1");
  if (cfg.max_attempts == 0) throw ConfigError("max_attempts must be >= 1");
  if (cfg.probe_budget == 0 || cfg.halving_probe_budget == 0)
    throw ConfigError("probe budgets must be >= 1");
  if (cfg.delta_override && !(*cfg.delta_override > 0.0 && *cfg.delta_override < 0.25))
    throw ConfigError("delta override must lie in (0, 1/4)");
}

// Inverse-CDF draw from the domain measure.
inline IndexSet draw_iid(const Domain& d, std::size_t m, std::uint64_t seed) {
  std::vector<double> cum(d.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) cum[i] = (acc += d.weight(i));
  Rng rng(seed);
  IndexSet out(m);
  for (auto& x : out) {
    const double u = rng.uniform() * acc;
    const auto it = std::upper_bound(cum.begin(), cum.end(), u);
    x = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cum.begin(),
                                                           static_cast<std::ptrdiff_t>(d.size()) - 1));
  }
  return out;
}

// p = 2 is certified first; probe exponents are skipped once it fails.
inline std::map<double, DiscretizationCertificate> certify_all(
    const OrthonormalSystem& sys, const IndexSet& subset, const std::map<double, double>& eps_by_p,
    std::size_t probe_budget, std::uint64_t seed, bool stop_on_failure) {
  std::map<double, DiscretizationCertificate> out;
  std::vector<double> order;
  if (eps_by_p.count(2.0)) order.push_back(2.0);
  for (const auto& [p, e] : eps_by_p)
    if (p != 2.0) order.push_back(p);
  for (double p : order) {
    CertifyOptions opt;
    opt.probe_budget = probe_budget;
    opt.seed = seed;
    out[p] = certify(sys, subset, p, eps_by_p.at(p), opt);
    if (stop_on_failure && !*out[p].passed) break;
  }
  return out;
}

inline bool all_passed(const std::map<double, DiscretizationCertificate>& certs, std::size_t expected) {
  if (certs.size() != expected) return false;
  for (const auto& [p, c] : certs)
    if (!c.passed || !*c.passed) return false;
  return true;
}

}  // namespace detail

struct PreliminaryResult {
  IndexSet subset;
  std::vector<std::size_t> sizes_tried;
  std::map<double, DiscretizationCertificate> certificates;  // of the returned draw
  bool ok = false;
};

/// Draws m i.i.d. points from mu (repeats kept) and certifies every p at
/// eps0; on failure grows m by the policy factor. Attempt r uses stream
/// derive_seed(seed, r).
inline PreliminaryResult preliminary_subsample(const OrthonormalSystem& sys, const std::vector<double>& ps,
                                               double eps0, const PreliminaryPolicy& policy,
                                               std::uint64_t seed, std::size_t probe_budget = 16) {
  if (!(eps0 > 0.0 && eps0 < 0.25))
    throw DomainError("preliminary_subsample: eps0 must lie in (0, 1/4)");
  if (ps.empty()) throw DomainError("preliminary_subsample: no exponents");
  const double n = static_cast<double>(sys.dim());
  double m = policy.initial_m ? static_cast<double>(*policy.initial_m)
                              : std::ceil(4.0 * n * std::log(n + 1.0) / (eps0 * eps0));
  m = std::max(m, 1.0);
  std::map<double, double> eps_by_p;
  for (double p : ps) eps_by_p[p] = eps0;
  PreliminaryResult out;
  for (std::size_t r = 0; r <= policy.max_retries; ++r) {
    const auto size = static_cast<std::size_t>(m);
    out.sizes_tried.push_back(size);
    const std::uint64_t s = derive_seed(seed, r);
    out.subset = detail::draw_iid(sys.domain(), size, s);
    out.certificates = detail::certify_all(sys, out.subset, eps_by_p, probe_budget,
                                           derive_seed(s, "certify"), true);
    if (detail::all_passed(out.certificates, eps_by_p.size())) {
      out.ok = true;
      return out;
    }
    m = std::ceil(m * policy.growth);
  }
  return out;
}

enum class Status { certified, probe_passed, failed };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::certified: return "certified";
    case Status::probe_passed: return "probe_passed";
    case Status::failed: return "failed";
  }
  return "?";
}

enum class Theorem { mt1, mt2, prelim_l63 };

/// Closed-form point budgets with user constant C:
///   mt1         C e^-2 K n log n
///   mt2         C e^-2 K n (log Kn + log 1/e) (log 1/e + log log Kn)^2
///   prelim_l63  C K e^-2 log(2/e) n^2 log n
inline double theoretical_budget(Theorem th, double K, double n, double eps, double C = 1.0) {
  if (!(K > 0.0) || !(n >= 1.0)) throw DomainError("theoretical_budget: need K > 0 and n >= 1");
  if (!(eps > 0.0 && eps <= 1.0)) throw DomainError("theoretical_budget: epsilon must lie in (0, 1]");
  const double inv = 1.0 / (eps * eps);
  switch (th) {
    case Theorem::mt1: return C * inv * K * n * std::log(n);
    case Theorem::mt2: {
      const double kn = K * n;
      if (!(std::log(kn) > 0.0)) throw DomainError("theoretical_budget: mt2 needs K n > 1");
      const double inner = std::log(1.0 / eps) + std::log(std::log(kn));
      return C * inv * kn * (std::log(kn) + std::log(1.0 / eps)) * inner * inner;
    }
    case Theorem::prelim_l63: return C * K * inv * std::log(2.0 / eps) * n * n * std::log(n);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

struct PipelineResult {
  Mode mode = Mode::mt1;
  double p = 1.0;  // the L_p exponent besides 2
  double epsilon = 0.0;
  double epsilon0 = 0.0;
  double epsilon_l2 = 0.0;  // target for the final L_2 certificate
  double kappa1 = 0.0, kappa2 = 0.0;
  std::size_t n = 0, domain_size = 0;
  double K = 0.0;
  std::uint64_t seed = 0;

  PreliminaryResult preliminary;
  double delta = 0.0, theta = 0.0, kappa = 1.0;
  bool already_small = false;
  std::optional<IterationSchedule> schedule;
  std::vector<SplitProposal> trajectory;
  bool stopped_early = false;

  IndexSet points;
  std::map<double, DiscretizationCertificate> certificates;
  std::optional<FinalWindow> window;
  std::optional<bool> in_window;
  double budget = 0.0;          // theoretical, C = 1
  double fitted_constant = 0.0;  // m / (formula without C)
  Status status = Status::failed;
  std::string note;

  std::vector<double> exponents() const { return {p, 2.0}; }
  std::size_t m() const { return points.size(); }
  /// |J| before each step and after the last accepted one.
  std::vector<std::size_t> trajectory_sizes() const {
    std::vector<std::size_t> sizes;
    for (const auto& t : trajectory) {
      if (sizes.empty()) sizes.push_back(t.parent.size());
      if (t.accepted) sizes.push_back(t.child.size());
    }
    return sizes;
  }
};

namespace detail {

struct LoopParams {
  double delta, theta;
  std::function<SigmaTargets(double alpha_j, std::size_t parent_size)> targets;
};

inline void halving_loop(const OrthonormalSystem& sys, PipelineResult& r, const PipelineConfig& cfg,
                         const LoopParams& lp) {
  r.delta = lp.delta;
  r.theta = lp.theta;
  IndexSet current = r.preliminary.subset;
  if (lp.delta >= lp.theta * lp.theta) {
    r.already_small = true;
    r.points = std::move(current);
    return;
  }
  try {
    r.schedule = alpha_schedule(lp.delta, lp.theta, cfg.constants);
    if (r.mode == Mode::mt2) companion_sequences(*r.schedule, r.kappa);
  } catch (const DomainError& e) {
    throw StageError("schedule", e.what());
  }
  const double M = static_cast<double>(r.preliminary.subset.size());
  r.window = predict_final_m(M, lp.delta, lp.theta, cfg.constants);
  HalvingOptions hopt{cfg.max_attempts, cfg.halving_probe_budget};
  for (std::size_t j = 0; j < r.schedule->steps(); ++j) {
    if (current.size() < 4) {
      r.stopped_early = true;
      r.note = "retained set too small to halve";
      break;
    }
    SplitProposal step;
    try {
      step = halve(sys, current, lp.targets(r.schedule->alphas[j], current.size()),
                   derive_seed(derive_seed(cfg.seed, "halve"), j), hopt);
    } catch (const Error& e) {
      throw StageError("halving step " + std::to_string(j), e.what());
    }
    const bool ok = step.accepted;
    if (ok) current = step.child;
    r.trajectory.push_back(std::move(step));
    if (!ok) {
      r.stopped_early = true;
      r.note = "halving step " + std::to_string(j) + " not accepted";
      break;
    }
  }
  r.points = std::move(current);
}

inline void finish(const OrthonormalSystem& sys, PipelineResult& r, const PipelineConfig& cfg) {
  std::map<double, double> eps_by_p{{r.p, r.epsilon}, {2.0, r.epsilon_l2}};
  try {
    r.certificates = certify_all(sys, r.points, eps_by_p, cfg.probe_budget,
                                 derive_seed(cfg.seed, "certify"), false);
  } catch (const Error& e) {
    throw StageError("certify", e.what());
  }
  bool exact = true;
  for (const auto& [p, c] : r.certificates) exact = exact && c.exactness != Exactness::probe_estimate;
  if (!all_passed(r.certificates, 2)) r.status = Status::failed;
  else r.status = exact ? Status::certified : Status::probe_passed;
  if (r.window && r.schedule && !r.stopped_early) {
    const double m = static_cast<double>(r.m());
    r.in_window = m >= r.window->low && m <= r.window->high;
  }
  const double n = static_cast<double>(r.n);
  const double eps2 = 1.0 / (r.epsilon * r.epsilon);
  if (r.mode == Mode::mt1) {
    r.budget = theoretical_budget(Theorem::mt1, r.K, n, r.epsilon);
    r.fitted_constant = n > 1.0 ? static_cast<double>(r.m()) / (eps2 * n * std::log(n))
                                : std::numeric_limits<double>::quiet_NaN();
  } else {
    r.budget = theoretical_budget(Theorem::mt2, r.K, n, r.epsilon);
    r.fitted_constant = static_cast<double>(r.m()) / r.budget;
  }
}

inline PipelineResult start(const OrthonormalSystem& sys, Mode mode, double p, double eps,
                            const PipelineConfig& cfg) {
  PipelineResult r;
  r.mode = mode;
  r.p = p;
  r.epsilon = eps;
  r.kappa1 = cfg.kappa1;
  r.kappa2 = resolved_kappa2(eps, cfg);
  r.n = sys.dim();
  r.domain_size = sys.size();
  r.K = christoffel(sys).nikolskii_K;
  r.seed = cfg.seed;
  return r;
}

inline void run_preliminary(const OrthonormalSystem& sys, PipelineResult& r, const PipelineConfig& cfg) {
  if (!(r.epsilon0 > 0.0 && r.epsilon0 < 0.25))
    throw ConfigError("eps0 = " + format_double(r.epsilon0) + " must lie in (0, 1/4)");
  try {
    r.preliminary = preliminary_subsample(sys, {r.p, 2.0}, r.epsilon0, cfg.preliminary,
                                          derive_seed(cfg.seed, "prelim"), cfg.probe_budget);
  } catch (const Error& e) {
    throw StageError("preliminary", e.what());
  }
}

}  // namespace detail

/// Simultaneous L_1 / L_2 construction at accuracy eps.
inline PipelineResult run_mt1(const OrthonormalSystem& sys, double eps, const PipelineConfig& cfg = {}) {
  detail::check_epsilon(eps);
  detail::check_config(cfg);
  PipelineResult r = detail::start(sys, Mode::mt1, 1.0, eps, cfg);
  r.epsilon0 = cfg.kappa1 * eps;
  r.epsilon_l2 = eps;
  detail::run_preliminary(sys, r, cfg);
  if (!r.preliminary.ok) {
    r.status = Status::failed;
    r.note = "preliminary sample not certified within the retry budget";
    r.points = r.preliminary.subset;
    return r;
  }
  if (r.n == 1) {
    // log n = 0: every nonempty set is exact for constants.
    r.points = {r.preliminary.subset.front()};
    r.note = "one-dimensional subspace";
    detail::finish(sys, r, cfg);
    return r;
  }
  const double M = static_cast<double>(r.preliminary.subset.size());
  const double nd = static_cast<double>(r.n);
  const double delta =
      cfg.delta_override.value_or(cfg.c5 * cfg.c5 * r.K * nd * std::log(nd) / M);
  const double theta = r.kappa2 * eps;
  detail::LoopParams lp{delta, theta, [&](double alpha_j, std::size_t) {
                          SigmaTargets t{cfg.c5, cfg.cp, {}};
                          const double s = sigma1_target(cfg.c5, r.K, r.n, alpha_j, M);
                          t.by_p = {{1.0, s}, {2.0, s}};
                          return t;
                        }};
  detail::halving_loop(sys, r, cfg, lp);
  detail::finish(sys, r, cfg);
  return r;
}

/// L_p (1 < p < 2) construction at eps that also certifies L_2 at
/// eps / log log(2 K n).
inline PipelineResult run_mt2(const OrthonormalSystem& sys, double p, double eps,
                              const PipelineConfig& cfg = {}) {
  if (!(p > 1.0 && p < 2.0)) throw ConfigError("mt2 needs 1 < p < 2, got " + format_double(p));
  detail::check_epsilon(eps);
  detail::check_config(cfg);
  PipelineResult r = detail::start(sys, Mode::mt2, p, eps, cfg);
  const double kn = r.K * static_cast<double>(r.n);
  const double ll4 = std::log(std::log(4.0 * kn));
  const double ll2 = std::log(std::log(2.0 * kn));
  if (!(ll4 > 0.0) || !(ll2 > 0.0))
    throw ConfigError("log log(2 K n) must be positive (K n = " + format_double(kn) + ")");
  r.epsilon0 = cfg.kappa1 * eps / ll4;
  r.epsilon_l2 = eps / ll2;
  if (!(r.epsilon_l2 < 1.0))
    throw ConfigError("L2 target eps / log log(2 K n) = " + format_double(r.epsilon_l2) +
                      " is not below 1");
  detail::run_preliminary(sys, r, cfg);
  if (!r.preliminary.ok) {
    r.status = Status::failed;
    r.note = "preliminary sample not certified within the retry budget";
    r.points = r.preliminary.subset;
    return r;
  }
  const double M = static_cast<double>(r.preliminary.subset.size());
  const double C = std::max(cfg.c5, cfg.cp);
  const double delta = cfg.delta_override.value_or(C * C * kn * std::log(M) / M);
  r.kappa = std::log(2.0 + M / kn);
  const double theta = r.kappa2 * eps / r.kappa;
  if (!(r.kappa * theta < 0.5)) throw ConfigError("kappa * theta must be below 1/2");
  detail::LoopParams lp{delta, theta, [&](double alpha_j, std::size_t parent) {
                          SigmaTargets t{cfg.c5, cfg.cp, {}};
                          t.by_p = {{p, sigma2_target(cfg.cp, r.K, r.n, parent, alpha_j, M)},
                                    {2.0, sigma1_target(cfg.c5, r.K, r.n, alpha_j, M)}};
                          return t;
                        }};
  detail::halving_loop(sys, r, cfg, lp);
  detail::finish(sys, r, cfg);
  return r;
}

struct ScalingRow {
  std::size_t n = 0;
  std::size_t repetition = 0;
  std::uint64_t seed = 0;
  std::optional<PipelineResult> result;
  std::string error;
};

struct ScalingTable {
  std::vector<ScalingRow> rows;
  double slope = 0.0;  // least squares m ~ slope * n log n over rows with n > 1
};

/// Runs the pipeline for each dimension and repetition. Row k uses master
/// seed derive_seed(seed, k); failures are kept as rows with `error` set.
inline ScalingTable scaling_study(const std::function<OrthonormalSystem(std::size_t)>& build,
                                  const std::vector<std::size_t>& dims, std::size_t repetitions,
                                  Mode mode, double p, double eps, const PipelineConfig& cfg) {
  if (dims.empty()) throw DomainError("scaling_study: dims must be nonempty");
  if (repetitions == 0) throw DomainError("scaling_study: repetitions must be >= 1");
  ScalingTable table;
  for (std::size_t n : dims)
    for (std::size_t rep = 0; rep < repetitions; ++rep)
      table.rows.push_back({n, rep, derive_seed(cfg.seed, table.rows.size()), std::nullopt, {}});
  parallel_for(table.rows.size(), [&](std::size_t k) {
    auto& row = table.rows[k];
    PipelineConfig c = cfg;
    c.seed = row.seed;
    try {
      const auto sys = build(row.n);
      row.result = mode == Mode::mt1 ? run_mt1(sys, eps, c) : run_mt2(sys, p, eps, c);
    } catch (const Error& e) {
      row.error = e.what();
    }
  });
  double sxy = 0.0, sxx = 0.0;
  for (const auto& row : table.rows) {
    if (!row.result || row.result->n <= 1) continue;
    const double x = static_cast<double>(row.result->n) * std::log(static_cast<double>(row.result->n));
    sxy += x * static_cast<double>(row.result->m());
    sxx += x * x;
  }
  table.slope = sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
  return table;
}

struct SignProcessEstimate {
  double mean = 0.0;
  std::vector<double> draws;
  double envelope = 0.0;
};

/// Monte Carlo over sign vectors of sup |sum_i eps_i |f(i)|^p| on
/// {f in X_n : sum_i |f(i)|^p <= 1}. Exact per draw for p = 2 (extreme
/// generalized eigenvalues), probe-based for p < 2. The envelope is
/// sqrt(K n log n / M) for p in {1, 2} and
/// sqrt(K n log M / M) log(M/(K n) + 2) otherwise.
inline SignProcessEstimate talagrand_rudelson_probe(const OrthonormalSystem& sys, double p,
                                                    std::size_t draws, std::uint64_t seed,
                                                    std::size_t probe_budget = 8) {
  if (sys.dim() > sys.size()) throw DomainError("talagrand_rudelson_probe: n must be <= M");
  if (!(p >= 1.0 && p <= 2.0)) throw DomainError("talagrand_rudelson_probe: p must lie in [1, 2]");
  if (draws == 0) throw DomainError("talagrand_rudelson_probe: draws must be >= 1");
  SignProcessEstimate out;
  out.draws.resize(draws);
  const std::size_t M = sys.size();
  parallel_for(draws, [&](std::size_t t) {
    Rng rng(derive_seed(seed, t));
    RatioProblem prob;
    prob.p = p;
    prob.rows = sys.eval();
    prob.num.resize(static_cast<Eigen::Index>(M));
    prob.den = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(M));
    for (std::size_t i = 0; i < M; ++i) prob.num(static_cast<Eigen::Index>(i)) = rng.sign();
    const auto ext = p == 2.0 ? ratio_extremes_spectral(prob)
                              : ratio_extremes_probe(prob, ProbeOptions{probe_budget,
                                                                        derive_seed(derive_seed(seed, t), "probe")});
    out.draws[t] = std::max(std::abs(ext.lower), std::abs(ext.upper));
  });
  for (double v : out.draws) out.mean += v;
  out.mean /= static_cast<double>(draws);
  const double kn = christoffel(sys).nikolskii_K * static_cast<double>(sys.dim());
  const double Md = static_cast<double>(M);
  if (p == 1.0 || p == 2.0)
    out.envelope = std::sqrt(kn * std::log(static_cast<double>(sys.dim())) / Md);
  else
    out.envelope = std::sqrt(kn * std::log(Md) / Md) * std::log(Md / kn + 2.0);
  return out;
}

}  // namespace marcz
