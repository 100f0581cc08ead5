#pragma once

// Text, CSV and JSON forms of pipeline output.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "marcz/frames.hpp"
#include "marcz/pipeline.hpp"

namespace marcz {

inline std::string join_exponents(const std::vector<double>& ps) {
  std::string s;
  for (double p : ps) {
    if (!s.empty()) s += ',';
    s += format_double(p);
  }
  return s;
}

/// Header "# m=<m> p=<p,...> epsilon=<eps> seed=<seed>", then one domain
/// index per line.
inline void write_points(std::ostream& os, const IndexSet& points, const std::vector<double>& ps,
                         double eps, std::uint64_t seed) {
  std::ostringstream buf;
  buf << "# m=" << points.size() << " p=" << join_exponents(ps) << " epsilon=" << format_double(eps)
      << " seed=" << seed << '\n';
  for (std::size_t i : points) buf << i << '\n';
  os << buf.str();
}

/// Reads a point file: '#' lines are skipped, every other nonblank line must
/// hold exactly one nonnegative integer.
inline IndexSet read_points(std::istream& is) {
  IndexSet out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    long long v = -1;
    std::string rest;
    if (!(ls >> v) || v < 0 || (ls >> rest))
      throw DomainError("read_points: malformed line " + std::to_string(lineno));
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw DomainError("read_points: no points");
  return out;
}

namespace detail {
inline std::string csv_number(const std::map<double, double>& m, double key) {
  const auto it = m.find(key);
  return it == m.end() ? std::string() : format_double(it->second);
}
}  // namespace detail

/// Columns: step, parent_size, child_size, sigma2_measured, sigma2_target,
/// sigmap_measured, sigmap_target, accepted. Empty cells mean "not measured".
inline void write_trajectory_csv(std::ostream& os, const PipelineResult& r) {
  std::ostringstream buf;
  buf << "step,parent_size,child_size,sigma2_measured,sigma2_target,sigmap_measured,sigmap_target,"
         "accepted\n";
  for (std::size_t k = 0; k < r.trajectory.size(); ++k) {
    const auto& t = r.trajectory[k];
    buf << k << ',' << t.parent.size() << ',' << t.child.size() << ','
        << detail::csv_number(t.deviations, 2.0) << ',' << detail::csv_number(t.targets, 2.0) << ','
        << detail::csv_number(t.deviations, r.p) << ',' << detail::csv_number(t.targets, r.p) << ','
        << (t.accepted ? "true" : "false") << '\n';
  }
  os << buf.str();
}

namespace detail {
inline nlohmann::ordered_json number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}
}  // namespace detail

inline nlohmann::ordered_json to_json(const DiscretizationCertificate& c) {
  nlohmann::ordered_json j;
  j["p"] = c.p;
  j["m"] = c.m();
  j["A"] = c.lower_A;
  j["B"] = c.upper_B;
  j["exactness"] = to_string(c.exactness);
  j["epsilon"] = c.epsilon_target ? detail::number(*c.epsilon_target) : nlohmann::ordered_json();
  j["passed"] = c.passed ? nlohmann::ordered_json(*c.passed) : nlohmann::ordered_json();
  j["probe_budget"] = c.probe_budget;
  j["seed"] = c.seed;
  return j;
}

inline nlohmann::ordered_json to_json(const SplitProposal& s) {
  nlohmann::ordered_json j;
  j["parent_size"] = s.parent.size();
  j["child_size"] = s.child.size();
  auto sig = nlohmann::ordered_json::array();
  for (const auto& [p, target] : s.targets) {
    nlohmann::ordered_json e;
    e["p"] = p;
    const auto it = s.deviations.find(p);
    e["measured"] = it == s.deviations.end() ? nlohmann::ordered_json() : detail::number(it->second);
    e["target"] = detail::number(target);
    e["exact"] = p == 2.0;
    sig.push_back(e);
  }
  j["sigma"] = sig;
  j["cardinality_ok"] = s.cardinality_ok;
  j["attempts"] = s.attempts_used;
  j["accepted"] = s.accepted;
  j["seed"] = s.seed;
  return j;
}

inline nlohmann::ordered_json to_json(const FrameReport& f) {
  nlohmann::ordered_json j;
  j["p"] = f.p;
  j["m"] = f.points.size();
  j["weighted"] = f.weights.has_value();
  j["A"] = f.frame_lower;
  j["B"] = f.frame_upper;
  j["derivation"] = to_string(f.derivation);
  j["certificate"] = to_json(f.certificate);
  return j;
}

inline nlohmann::ordered_json to_json(const PipelineResult& r) {
  using json = nlohmann::ordered_json;
  json j;
  j["mode"] = to_string(r.mode);
  j["p"] = r.exponents();
  j["epsilon"] = r.epsilon;
  j["epsilon0"] = r.epsilon0;
  j["epsilon_l2"] = r.epsilon_l2;
  j["kappa1"] = r.kappa1;
  j["kappa2"] = r.kappa2;
  j["seed"] = r.seed;
  j["system"] = {{"n", r.n}, {"M", r.domain_size}, {"K", r.K}};
  json pre;
  pre["m"] = r.preliminary.subset.size();
  pre["sizes_tried"] = r.preliminary.sizes_tried;
  pre["certified"] = r.preliminary.ok;
  auto pc = json::array();
  for (const auto& [p, c] : r.preliminary.certificates) pc.push_back(to_json(c));
  pre["certificates"] = pc;
  j["preliminary"] = pre;
  json sched;
  sched["delta"] = detail::number(r.delta);
  sched["theta"] = detail::number(r.theta);
  sched["kappa"] = detail::number(r.kappa);
  sched["already_small"] = r.already_small;
  if (r.schedule) {
    sched["stop_index"] = r.schedule->stop_index;
    sched["alphas"] = r.schedule->alphas;
    sched["betas"] = r.schedule->betas;
    sched["a"] = r.schedule->a_seq;
    sched["b"] = r.schedule->b_seq;
  }
  j["schedule"] = sched;
  auto traj = json::array();
  for (const auto& t : r.trajectory) traj.push_back(to_json(t));
  j["trajectory"] = traj;
  j["stopped_early"] = r.stopped_early;
  j["m"] = r.m();
  auto certs = json::array();
  for (const auto& [p, c] : r.certificates) certs.push_back(to_json(c));
  j["certificates"] = certs;
  if (r.window) {
    j["window"] = {{"low", r.window->low},
                   {"high", r.window->high},
                   {"guaranteed", r.window->assumption_holds},
                   {"contains_m", r.in_window ? json(*r.in_window) : json()}};
  } else {
    j["window"] = nullptr;
  }
  j["budget"] = detail::number(r.budget);
  j["fitted_constant"] = detail::number(r.fitted_constant);
  j["status"] = to_string(r.status);
  j["note"] = r.note;
  return j;
}

/// Writes `content` to `path` through a temporary file in the same
/// directory and a rename.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open " + tmp.string() + " for writing");
    os << content;
    if (!os.flush()) throw Error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace marcz
