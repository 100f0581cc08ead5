#pragma once

// One randomized halving step: fair signs split a parent multiset J, the
// positive half I is kept when |I| sits in the cardinality window and the
// deviation |2 |R_I f|_p^p / |R_J f|_p^p - 1| stays under its target.

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "marcz/core.hpp"
#include "marcz/domain.hpp"
#include "marcz/norms.hpp"

namespace marcz {

struct SplitProposal {
  IndexSet parent;
  IndexSet child;
  std::vector<int> signs;  // one per position of parent
  bool cardinality_ok = false;
  std::map<double, double> deviations;  // p -> measured sigma
  std::map<double, double> targets;     // p -> target sigma
  bool accepted = false;
  std::size_t attempts_used = 0;
  std::uint64_t seed = 0;  // seed of the returned attempt
};

/// sigma1 = C5 sqrt(K n log n / (alpha_J M)).
inline double sigma1_target(double c5, double K, std::size_t n, double alpha_j, double M) {
  const double nd = static_cast<double>(n);
  return c5 * std::sqrt(K * nd * std::log(nd) / (alpha_j * M));
}

/// sigma2 = Cp sqrt(K n log|J| / (alpha_J M)) log(2 + M/(K n)).
inline double sigma2_target(double cp, double K, std::size_t n, std::size_t parent_size,
                            double alpha_j, double M) {
  const double nd = static_cast<double>(n);
  return cp * std::sqrt(K * nd * std::log(static_cast<double>(parent_size)) / (alpha_j * M)) *
         std::log(2.0 + M / (K * nd));
}

struct SigmaTargets {
  double c5 = 1.0;
  double cp = 1.0;
  std::map<double, double> by_p;
};

inline SplitProposal propose_split(const IndexSet& parent, std::uint64_t seed) {
  if (parent.size() < 2) throw DomainError("propose_split: parent needs at least 2 points");
  SplitProposal out;
  out.parent = parent;
  out.seed = seed;
  out.signs.resize(parent.size());
  Rng rng(seed);
  for (std::size_t k = 0; k < parent.size(); ++k) {
    out.signs[k] = rng.sign();
    if (out.signs[k] > 0) out.child.push_back(parent[k]);
  }
  return out;
}

namespace detail {

inline std::map<std::size_t, double> counts(const IndexSet& s) {
  std::map<std::size_t, double> c;
  for (std::size_t i : s) c[i] += 1.0;
  return c;
}

inline bool is_submultiset(const IndexSet& child, const IndexSet& parent) {
  auto pc = counts(parent);
  for (std::size_t i : child)
    if (--pc[i] < 0.0) return false;
  return true;
}

// |J|/2 (1 - 1/sqrt|J|) <= |I| <= |J|/2 in integers: with d = |J| - 2|I|,
// 0 <= d and d^2 <= |J|.
inline bool window_holds(std::size_t child, std::size_t parent) {
  if (2 * child > parent) return false;
  const std::size_t d = parent - 2 * child;
  return d * d <= parent;
}

}  // namespace detail

/// Cardinality window |J|/2 (1 - 1/sqrt|J|) <= |I| <= |J|/2.
inline bool cardinality_ok(const IndexSet& child, const IndexSet& parent) {
  if (!detail::is_submultiset(child, parent))
    throw DomainError("cardinality_ok: child is not contained in parent");
  return detail::window_holds(child.size(), parent.size());
}

/// max over f of |2 sum_I |f|^p / sum_J |f|^p - 1|. Exact for p = 2, probe
/// lower bound otherwise.
inline double measure_deviation(const OrthonormalSystem& sys, const IndexSet& child,
                                const IndexSet& parent, double p, std::size_t probe_budget,
                                std::uint64_t seed) {
  if (parent.empty()) throw DomainError("measure_deviation: empty parent");
  for (std::size_t i : parent)
    if (i >= sys.size()) throw DomainError("measure_deviation: index out of range");
  if (!detail::is_submultiset(child, parent))
    throw DomainError("measure_deviation: child is not contained in parent");
  const auto den = detail::counts(parent);
  const auto num = detail::counts(child);
  // The rank check is the same for every p.
  auto gram = make_ratio_problem(sys.eval(), num, den, 2.0);
  RatioExtremes ext = ratio_extremes_spectral(gram);
  if (p != 2.0) {
    if (child.empty()) {
      ext = {0.0, 0.0};
    } else {
      ext = ratio_extremes_probe(make_ratio_problem(sys.eval(), num, den, p),
                                 ProbeOptions{probe_budget, seed});
    }
  }
  return std::max(std::abs(2.0 * ext.upper - 1.0), std::abs(2.0 * ext.lower - 1.0));
}

struct HalvingOptions {
  std::size_t max_attempts = 256;
  std::size_t probe_budget = 8;
};

namespace detail {

struct AttemptOutcome {
  SplitProposal proposal;
  bool measured_all = false;
  double score = std::numeric_limits<double>::infinity();  // max_p sigma/target over measured p
};

// p = 2 is measured first since it is exact and cheap; other exponents are
// skipped once the score already exceeds 1.
inline AttemptOutcome run_attempt(const OrthonormalSystem& sys, const IndexSet& parent,
                                  const SigmaTargets& targets, std::uint64_t seed,
                                  std::size_t probe_budget) {
  AttemptOutcome a;
  a.proposal = propose_split(parent, seed);
  a.proposal.targets = targets.by_p;
  a.proposal.cardinality_ok = window_holds(a.proposal.child.size(), parent.size());
  if (!a.proposal.cardinality_ok) return a;
  std::vector<double> order;
  if (targets.by_p.count(2.0)) order.push_back(2.0);
  for (const auto& [p, t] : targets.by_p)
    if (p != 2.0) order.push_back(p);
  a.score = 0.0;
  a.measured_all = true;
  for (double p : order) {
    if (a.score > 1.0) {
      a.measured_all = false;
      break;
    }
    const double sigma = measure_deviation(sys, a.proposal.child, parent, p, probe_budget,
                                           derive_seed(seed, "probe"));
    a.proposal.deviations[p] = sigma;
    a.score = std::max(a.score, sigma / targets.by_p.at(p));
  }
  return a;
}

}  // namespace detail

/// First attempt k (seed derive_seed(seed, k)) that lands in the cardinality
/// window with sigma_p <= target_p for every requested p. Attempts run in
/// batches of worker_count() but the smallest accepted index always wins.
/// If none is accepted, returns the in-window attempt with the smallest
/// max_p sigma_p/target_p with accepted = false; exponents skipped during the
/// search are measured for it afterwards.
inline SplitProposal halve(const OrthonormalSystem& sys, const IndexSet& parent,
                           const SigmaTargets& targets, std::uint64_t seed,
                           const HalvingOptions& opt = {}) {
  if (parent.size() < 4) throw DomainError("halve: parent needs at least 4 points");
  if (targets.by_p.empty()) throw DomainError("halve: no exponents requested");
  if (opt.max_attempts == 0) throw DomainError("halve: max_attempts must be >= 1");
  {
    // Fails fast with "parent set rank-deficient".
    const auto c = detail::counts(parent);
    ratio_extremes_spectral(make_ratio_problem(sys.eval(), c, c, 2.0));
  }
  const std::size_t batch = std::max<std::size_t>(1, worker_count());
  std::size_t best = opt.max_attempts;
  detail::AttemptOutcome best_outcome;
  for (std::size_t start = 0; start < opt.max_attempts; start += batch) {
    const std::size_t count = std::min(batch, opt.max_attempts - start);
    std::vector<detail::AttemptOutcome> outcomes(count);
    parallel_for(count, [&](std::size_t k) {
      outcomes[k] = detail::run_attempt(sys, parent, targets, derive_seed(seed, start + k),
                                        opt.probe_budget);
    });
    for (std::size_t k = 0; k < count; ++k) {
      auto& o = outcomes[k];
      if (o.proposal.cardinality_ok && o.measured_all && o.score <= 1.0) {
        o.proposal.accepted = true;
        o.proposal.attempts_used = start + k + 1;
        return std::move(o.proposal);
      }
      const bool better = best == opt.max_attempts ||
                          (o.proposal.cardinality_ok && !best_outcome.proposal.cardinality_ok) ||
                          (o.proposal.cardinality_ok == best_outcome.proposal.cardinality_ok &&
                           o.score < best_outcome.score);
      if (better) {
        best = start + k;
        best_outcome = std::move(o);
      }
    }
  }
  SplitProposal& out = best_outcome.proposal;
  for (const auto& [p, t] : targets.by_p)
    if (!out.deviations.count(p) && !out.child.empty())
      out.deviations[p] = measure_deviation(sys, out.child, parent, p, opt.probe_budget,
                                            derive_seed(out.seed, "probe"));
  out.accepted = false;
  out.attempts_used = opt.max_attempts;
  return std::move(out);
}

/// Exact P(|sum a_j eps_j| <= 1) over all 2^m sign patterns (m <= 24),
/// walking patterns in Gray-code order. A slack of 1e-12 absorbs rounding
/// at the boundary.
inline double sign_sum_probability_exact(const std::vector<double>& a) {
  const std::size_t m = a.size();
  if (m == 0 || m > 24) throw DomainError("sign_sum_probability_exact: need 1 <= m <= 24");
  double norm2 = 0.0;
  for (double x : a) norm2 += x * x;
  if (std::abs(std::sqrt(norm2) - 1.0) > 1e-9)
    throw DomainError("sign_sum_probability: input must be a unit vector");
  double sum = 0.0;
  for (double x : a) sum += x;  // all signs +1
  std::vector<int> sign(m, 1);
  const std::uint64_t total = std::uint64_t{1} << m;
  std::uint64_t hits = 0;
  for (std::uint64_t g = 0; g < total; ++g) {
    if (g > 0) {
      const int bit = std::countr_zero(g);
      sum -= 2.0 * sign[bit] * a[bit];
      sign[bit] = -sign[bit];
    }
    if (std::abs(sum) <= 1.0 + 1e-12) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

/// Monte Carlo estimate of P(|sum a_j eps_j| <= 1), one random bit per sign.
inline double sign_sum_probability(const std::vector<double>& a, std::size_t trials,
                                   std::uint64_t seed) {
  if (a.empty()) throw DomainError("sign_sum_probability: empty vector");
  if (trials == 0) throw DomainError("sign_sum_probability: trials must be >= 1");
  double norm2 = 0.0;
  for (double x : a) norm2 += x * x;
  if (std::abs(std::sqrt(norm2) - 1.0) > 1e-9)
    throw DomainError("sign_sum_probability: input must be a unit vector");
  Rng rng(seed);
  std::size_t hits = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    double sum = 0.0;
    std::uint64_t word = 0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (j % 64 == 0) word = rng.bits();
      sum += (word & 1) ? a[j] : -a[j];
      word >>= 1;
    }
    if (std::abs(sum) <= 1.0 + 1e-12) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(trials);
}

}  // namespace marcz
