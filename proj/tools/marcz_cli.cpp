// marcz: build and certify sampling-discretization point sets.
//
// Exit codes: 0 all rows succeeded, 1 configuration error (nothing run),
// 2 at least one row failed (outputs still written).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "marcz/export.hpp"

namespace fs = std::filesystem;
using namespace marcz;

namespace {

struct Options {
  std::string family = "trig";
  std::vector<int> degrees{4};
  std::vector<std::size_t> dims;
  std::size_t grid = 4096;
  std::vector<double> ps;
  double epsilon = 0.25;
  std::string mode = "mt1";
  std::uint64_t seed = 1;
  std::size_t reps = 1;
  double c5 = 1.0, cp = 1.0, kappa1 = 0.5;
  std::optional<double> kappa2, delta, c3;
  std::size_t max_attempts = 256, probe_budget = 16, halving_probe_budget = 8;
  std::string system_file;
  std::string out = "marcz-out";
  std::string verify;
};

OrthonormalSystem make_system(const Options& o, std::size_t n_or_degree) {
  if (o.family == "trig") {
    return build_system(family::Trigonometric{static_cast<int>(n_or_degree)},
                        build_domain(GridSpec{o.grid}));
  }
  if (o.family == "chebyshev") {
    GridSpec g{o.grid, -1.0, 1.0, GridSpec::Kind::chebyshev_gauss};
    return build_system(family::Chebyshev{static_cast<int>(n_or_degree)}, build_domain(g));
  }
  if (o.family == "legendre") {
    GridSpec g{o.grid, -1.0, 1.0, GridSpec::Kind::equispaced};
    return build_system(family::Legendre{static_cast<int>(n_or_degree)}, build_domain(g));
  }
  if (o.family == "random") {
    return build_system(family::RandomOrthonormal{static_cast<int>(n_or_degree), derive_seed(o.seed, "system")},
                        build_domain(GridSpec{o.grid}));
  }
  std::ifstream is(o.system_file);
  if (!is) throw ConfigError("cannot open system file " + o.system_file);
  return read_system(is);
}

// Dimension parameters per row: degrees for trig, n otherwise, one dummy
// entry for a system file.
std::vector<std::size_t> row_params(const Options& o) {
  if (o.family == "file") return {0};
  if (o.family == "trig") {
    std::vector<std::size_t> v;
    for (int d : o.degrees) {
      if (d < 0) throw ConfigError("--degree must be nonnegative");
      v.push_back(static_cast<std::size_t>(d));
    }
    return v;
  }
  if (o.dims.empty()) throw ConfigError("--dim is required for family " + o.family);
  return o.dims;
}

PipelineConfig pipeline_config(const Options& o) {
  PipelineConfig c;
  c.kappa1 = o.kappa1;
  c.kappa2 = o.kappa2;
  c.c5 = o.c5;
  c.cp = o.cp;
  if (o.c3) c.constants.c3 = *o.c3;
  c.delta_override = o.delta;
  c.max_attempts = o.max_attempts;
  c.probe_budget = o.probe_budget;
  c.halving_probe_budget = o.halving_probe_budget;
  c.seed = o.seed;
  return c;
}

// The single L_p exponent besides 2 that the pipeline targets.
double lp_exponent(const Options& o) {
  double lp = 0.0;
  for (double p : o.ps) {
    if (p == 2.0) continue;
    if (lp != 0.0 && lp != p) throw ConfigError("--p may name at most one exponent besides 2");
    lp = p;
  }
  if (o.mode == "mt1") {
    if (lp != 0.0 && lp != 1.0) throw ConfigError("mode mt1 works with p in {1, 2}");
    return 1.0;
  }
  if (!(lp > 1.0 && lp < 2.0)) throw ConfigError("mode mt2 needs an exponent p in (1, 2) in --p");
  return lp;
}

void validate(const Options& o) {
  if (!(o.epsilon > 0.0 && o.epsilon < 1.0))
    throw ConfigError("--epsilon must lie in (0, 1), got " + format_double(o.epsilon));
  if (o.mode != "mt1" && o.mode != "mt2") throw ConfigError("--mode must be mt1 or mt2");
  if (o.family == "file" && o.system_file.empty()) throw ConfigError("--family file needs --system");
  for (double p : o.ps)
    if (!(p >= 1.0 && p <= 2.0)) throw ConfigError("--p values must lie in [1, 2]");
  if (o.reps == 0) throw ConfigError("--reps must be >= 1");
  PipelineConfig c = pipeline_config(o);
  detail::check_config(c);
  detail::resolved_kappa2(o.epsilon, c);
}

void write_row(const fs::path& dir, const PipelineResult& r) {
  fs::create_directories(dir);
  std::ostringstream pts, traj;
  write_points(pts, r.points, r.exponents(), r.epsilon, r.seed);
  write_file_atomic(dir / "points.txt", pts.str());
  write_file_atomic(dir / "result.json", to_json(r).dump(2) + "\n");
  write_trajectory_csv(traj, r);
  write_file_atomic(dir / "trajectory.csv", traj.str());
  if (r.schedule) {
    std::ostringstream sc;
    write_schedule_csv(sc, *r.schedule);
    write_file_atomic(dir / "schedule.csv", sc.str());
  }
}

int run_verify(const Options& o) {
  const auto params = row_params(o);
  if (params.size() != 1) throw ConfigError("--verify takes a single system");
  const auto sys = make_system(o, params.front());
  IndexSet points;
  {
    std::ifstream is(o.verify);
    if (!is) throw ConfigError("cannot open point file " + o.verify);
    try {
      points = read_points(is);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }
  for (std::size_t i : points)
    if (i >= sys.size()) throw ConfigError("point index " + std::to_string(i) + " outside the domain");
  std::vector<double> ps = o.ps.empty() ? std::vector<double>{1.0, 2.0} : o.ps;
  bool ok = true;
  for (double p : ps) {
    CertifyOptions opt;
    opt.probe_budget = o.probe_budget;
    opt.seed = derive_seed(o.seed, "verify");
    const auto c = certify(sys, points, p, o.epsilon, opt);
    std::cout << "p=" << format_double(p) << " m=" << c.m() << " A=" << format_double(c.lower_A)
              << " B=" << format_double(c.upper_B) << " exactness=" << to_string(c.exactness)
              << " passed=" << (*c.passed ? "true" : "false") << '\n';
    ok = ok && *c.passed;
  }
  return ok ? 0 : 2;
}

int run(const Options& o) {
  validate(o);
  if (!o.verify.empty()) return run_verify(o);
  const auto params = row_params(o);
  const double lp = lp_exponent(o);
  const Mode mode = o.mode == "mt1" ? Mode::mt1 : Mode::mt2;
  // Build every system up front so bad dimensions are configuration errors.
  std::vector<OrthonormalSystem> systems;
  for (std::size_t v : params) systems.push_back(make_system(o, v));

  const PipelineConfig base = pipeline_config(o);
  const fs::path out(o.out);
  fs::create_directories(out);
  if (params.size() == 1 && o.reps == 1) {
    PipelineResult r;
    try {
      r = mode == Mode::mt1 ? run_mt1(systems[0], o.epsilon, base)
                            : run_mt2(systems[0], lp, o.epsilon, base);
    } catch (const StageError& e) {
      std::cerr << "marcz: " << e.what() << '\n';
      return 2;
    }
    write_row(out, r);
    std::cout << "n=" << r.n << " m=" << r.m() << " status=" << to_string(r.status) << '\n';
    return r.status == Status::failed ? 2 : 0;
  }

  std::vector<std::size_t> index(params.size());
  for (std::size_t k = 0; k < params.size(); ++k) index[k] = k;
  const auto table = scaling_study([&](std::size_t k) { return systems[k]; }, index, o.reps, mode,
                                   lp, o.epsilon, base);
  std::ostringstream csv;
  csv << "n,repetition,seed,m,status,fitted_constant,budget,A_p,B_p,A_2,B_2,error\n";
  bool ok = true;
  for (std::size_t k = 0; k < table.rows.size(); ++k) {
    const auto& row = table.rows[k];
    const std::size_t n = systems[row.n].dim();
    csv << n << ',' << row.repetition << ',' << row.seed << ',';
    if (row.result) {
      const auto& r = *row.result;
      auto cell = [&](double p, bool upper) {
        const auto it = r.certificates.find(p);
        if (it == r.certificates.end()) return std::string();
        return format_double(upper ? it->second.upper_B : it->second.lower_A);
      };
      csv << r.m() << ',' << to_string(r.status) << ','
          << (std::isfinite(r.fitted_constant) ? format_double(r.fitted_constant) : "") << ','
          << format_double(r.budget) << ',' << cell(r.p, false) << ',' << cell(r.p, true) << ','
          << cell(2.0, false) << ',' << cell(2.0, true) << ",\n";
      write_row(out / ("row" + std::to_string(k)), r);
      ok = ok && r.status != Status::failed;
    } else {
      std::string err = row.error;
      for (char& ch : err)
        if (ch == ',' || ch == '\n') ch = ' ';
      csv << ",failed,,,,,,," << err << '\n';
      ok = false;
    }
  }
  write_file_atomic(out / "scaling.csv", csv.str());
  nlohmann::ordered_json summary;
  summary["rows"] = table.rows.size();
  summary["slope_m_vs_nlogn"] = detail::number(table.slope);
  write_file_atomic(out / "summary.json", summary.dump(2) + "\n");
  std::cout << "rows=" << table.rows.size() << " slope=" << format_double(table.slope) << '\n';
  return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sampling-discretization point sets for finite-dimensional function spaces"};
  Options o;
  app.set_config("--config", "", "Flat key=value file; command-line flags override it");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.add_option("--family", o.family, "Function system")
      ->check(CLI::IsMember({"trig", "chebyshev", "legendre", "random", "file"}));
  app.add_option("--degree", o.degrees, "Trigonometric degree(s), n = 2 d + 1")->delimiter(',');
  app.add_option("--dim", o.dims, "Dimension(s) n for non-trig families")->delimiter(',');
  app.add_option("--grid", o.grid, "Grid size M")->check(CLI::PositiveNumber);
  app.add_option("--p", o.ps, "Exponents, comma separated")->delimiter(',');
  app.add_option("--epsilon", o.epsilon, "Target accuracy in (0, 1)");
  app.add_option("--mode", o.mode, "mt1 (p in {1,2}) or mt2 (1 < p < 2)");
  app.add_option("--seed", o.seed, "Master seed");
  app.add_option("--reps", o.reps, "Repetitions per dimension");
  app.add_option("--c5", o.c5, "Constant in the L_1/L_2 halving target");
  app.add_option("--cp", o.cp, "Constant in the L_p halving target");
  app.add_option("--kappa1", o.kappa1, "Share of epsilon spent on the preliminary sample");
  app.add_option("--kappa2", o.kappa2, "Share of epsilon spent on halving (solved when omitted)");
  app.add_option("--delta", o.delta, "Override for delta");
  app.add_option("--c3", o.c3, "Override for c3");
  app.add_option("--max-attempts,--max_attempts", o.max_attempts, "Attempts per halving step");
  app.add_option("--probe-budget,--probe_budget", o.probe_budget, "Random probes per certification");
  app.add_option("--halving-probe-budget,--halving_probe_budget", o.halving_probe_budget, "Random probes per deviation");
  app.add_option("--system", o.system_file, "System file for --family file");
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--verify", o.verify, "Re-certify a point file instead of running");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code == 0) return 0;
    std::cerr << app.help();
    return 1;
  }
  try {
    if (o.ps.empty() && o.mode == "mt1") o.ps = {1.0, 2.0};
    return run(o);
  } catch (const ConfigError& e) {
    std::cerr << "marcz: configuration error: " << e.what() << '\n';
    return 1;
  } catch (const DomainError& e) {
    std::cerr << "marcz: configuration error: " << e.what() << '\n';
    return 1;
  } catch (const RankError& e) {
    std::cerr << "marcz: configuration error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "marcz: " << e.what() << '\n';
    return 2;
  }
}
