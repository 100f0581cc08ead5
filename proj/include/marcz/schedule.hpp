#pragma once

// Ratio-floor recurrences that drive the halving loop, the cardinality
// envelope of repeated near-halving, and the final-size window.

#include <cmath>
#include <numbers>
#include <ostream>
#include <vector>

#include "marcz/core.hpp"
#include "marcz/norms.hpp"

namespace marcz {

/// c1 = sqrt2/(sqrt2-1), c2 = 2 c1, c3 = c1 + c2 unless overridden.
struct ScheduleConstants {
  double c1 = std::numbers::sqrt2 / (std::numbers::sqrt2 - 1.0);
  double c2 = 2.0 * std::numbers::sqrt2 / (std::numbers::sqrt2 - 1.0);
  double c3 = 3.0 * std::numbers::sqrt2 / (std::numbers::sqrt2 - 1.0);
};

struct IterationSchedule {
  double delta = 0.0;
  double theta = 0.0;
  double kappa = 1.0;
  std::vector<double> alphas;  // alpha_0 .. alpha_{s+1}
  std::vector<double> betas;
  std::vector<double> a_seq;   // companions for kappa; equal alphas/betas when kappa = 1
  std::vector<double> b_seq;
  std::size_t stop_index = 0;  // s
  ScheduleConstants constants;

  /// Number of halving steps the schedule prescribes (s + 1).
  std::size_t steps() const { return stop_index + 1; }
};

namespace detail {
inline constexpr std::size_t schedule_iteration_cap = 1000000;
}

/// alpha_{j+1} = alpha_j (1 - sqrt(delta/alpha_j)) / 2 and
/// beta_{j+1} = beta_j (1 + sqrt(delta/alpha_j)) / 2 from alpha_0 = beta_0 = 1,
/// stopping at the first s with alpha_s >= delta/theta^2 > alpha_{s+1}.
inline IterationSchedule alpha_schedule(double delta, double theta,
                                        const ScheduleConstants& constants = {}) {
  if (!(delta > 0.0 && delta < 0.25)) throw DomainError("alpha_schedule: delta must lie in (0, 1/4)");
  if (!(theta > 0.0 && theta <= 0.5)) throw DomainError("alpha_schedule: theta must lie in (0, 1/2]");
  if (!(delta < theta * theta)) throw DomainError("alpha_schedule: requires delta < theta^2");
  IterationSchedule s;
  s.delta = delta;
  s.theta = theta;
  s.constants = constants;
  const double floor = delta / (theta * theta);
  s.alphas.push_back(1.0);
  s.betas.push_back(1.0);
  for (std::size_t j = 0;; ++j) {
    if (j >= detail::schedule_iteration_cap)
      throw DomainError("alpha_schedule: iteration cap exceeded");
    const double a = s.alphas[j];
    const double x = std::sqrt(delta / a);
    s.alphas.push_back(0.5 * a * (1.0 - x));
    s.betas.push_back(0.5 * s.betas[j] * (1.0 + x));
    if (s.alphas[j + 1] < floor) {
      s.stop_index = j;
      break;
    }
  }
  s.a_seq = s.alphas;
  s.b_seq = s.betas;
  return s;
}

/// Companion sequences a_{j+1} = a_j (1 - kappa sqrt(delta/alpha_j)) / 2 and
/// b_{j+1} = b_j (1 + kappa sqrt(delta/alpha_j)) / 2 over the same index range.
inline void companion_sequences(IterationSchedule& s, double kappa) {
  if (!(kappa > 0.0 && kappa < 1.0 / (2.0 * s.theta)))
    throw DomainError("companion_sequences: kappa must lie in (0, 1/(2 theta))");
  s.kappa = kappa;
  s.a_seq.assign(1, 1.0);
  s.b_seq.assign(1, 1.0);
  for (std::size_t j = 0; j + 1 < s.alphas.size(); ++j) {
    const double x = kappa * std::sqrt(s.delta / s.alphas[j]);
    s.a_seq.push_back(0.5 * s.a_seq[j] * (1.0 - x));
    s.b_seq.push_back(0.5 * s.b_seq[j] * (1.0 + x));
  }
}

/// Older recurrence alpha_{j+1} = alpha_j (1 - 5 sqrt(delta/alpha_j)) / 2,
/// run until it drops below delta/theta^2 or the factor stops being positive.
/// Only for comparison with alpha_schedule.
inline std::vector<double> legacy_schedule(double delta, double theta) {
  if (!(delta > 0.0 && delta < 0.25)) throw DomainError("legacy_schedule: delta must lie in (0, 1/4)");
  if (!(theta > 0.0 && theta <= 0.5)) throw DomainError("legacy_schedule: theta must lie in (0, 1/2]");
  const double floor = delta / (theta * theta);
  std::vector<double> alphas{1.0};
  while (alphas.size() < detail::schedule_iteration_cap) {
    const double a = alphas.back();
    const double factor = 1.0 - 5.0 * std::sqrt(delta / a);
    if (factor <= 0.0) break;
    alphas.push_back(0.5 * a * factor);
    if (alphas.back() < floor) break;
  }
  return alphas;
}

struct Envelope {
  double lower = 0.0;
  double upper = 0.0;
};

/// Bounds for 2^k m_k after k near-halvings of M points.
inline Envelope cardinality_envelope(double M, std::size_t k) {
  if (!(M > 0.0)) throw DomainError("cardinality_envelope: M must be positive");
  const double kd = static_cast<double>(k);
  return {M - std::exp2(0.5 * kd) * std::sqrt(M) / (std::numbers::sqrt2 - 1.0), M};
}

/// True when every 2^k m_k of the trajectory (m_0 = sizes[0]) is inside
/// the envelope. A relative slack of 1e-12 absorbs rounding in the bound.
inline bool within_envelope(const std::vector<std::size_t>& sizes) {
  if (sizes.empty()) return true;
  const double M = static_cast<double>(sizes.front());
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    const double scaled = std::ldexp(static_cast<double>(sizes[k]), static_cast<int>(k));
    const auto env = cardinality_envelope(M, k);
    if (scaled < env.lower - 1e-12 * M || scaled > env.upper + 1e-12 * M) return false;
  }
  return true;
}

struct FinalWindow {
  double low = 0.0;
  double high = 0.0;
  std::size_t stop_index = 0;
  bool assumption_holds = false;  // delta >= 4 (sqrt2-1)^-2 / M
};

/// [alpha_{s+1}(1-theta) M, e^{c3 theta} alpha_{s+1} M]. The window is only
/// guaranteed when assumption_holds; it is returned either way.
inline FinalWindow predict_final_m(double M, double delta, double theta,
                                   const ScheduleConstants& constants = {}) {
  if (!(M > 0.0)) throw DomainError("predict_final_m: M must be positive");
  const auto s = alpha_schedule(delta, theta, constants);
  const double last = s.alphas.back();
  FinalWindow w;
  w.stop_index = s.stop_index;
  w.low = last * (1.0 - theta) * M;
  w.high = std::exp(constants.c3 * theta) * last * M;
  const double r = std::numbers::sqrt2 - 1.0;
  w.assumption_holds = delta >= 4.0 / (r * r) / M;
  return w;
}

/// CSV with columns j, alpha_j, beta_j, a_j, b_j.
inline void write_schedule_csv(std::ostream& os, const IterationSchedule& s) {
  os << "j,alpha_j,beta_j,a_j,b_j\n";
  for (std::size_t j = 0; j < s.alphas.size(); ++j)
    os << j << ',' << format_double(s.alphas[j]) << ',' << format_double(s.betas[j]) << ','
       << format_double(s.a_seq[j]) << ',' << format_double(s.b_seq[j]) << '\n';
}

}  // namespace marcz
