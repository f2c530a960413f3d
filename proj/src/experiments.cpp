#include "uavsec/experiments.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "uavsec/baselines.hpp"
#include "uavsec/ocr.hpp"
#include "uavsec/report_io.hpp"
#include "uavsec/wcr.hpp"

namespace uavsec {

namespace fs = std::filesystem;

Scheme parse_scheme(const std::string& name) {
  if (name == "wcr") return Scheme::wcr;
  if (name == "ocr") return Scheme::ocr;
  if (name == "nonrobust") return Scheme::nonrobust;
  if (name == "fixed1") return Scheme::fixed1;
  if (name == "fixed2") return Scheme::fixed2;
  throw std::invalid_argument("unknown scheme '" + name + "'");
}

const char* to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::wcr: return "wcr";
    case Scheme::ocr: return "ocr";
    case Scheme::nonrobust: return "nonrobust";
    case Scheme::fixed1: return "fixed1";
    case Scheme::fixed2: return "fixed2";
  }
  return "unknown";
}

UncertaintyModel certification_model(Scheme scheme) {
  return scheme == Scheme::ocr || scheme == Scheme::fixed2 ? UncertaintyModel::probabilistic
                                                           : UncertaintyModel::bounded;
}

namespace {

ScaResult solve_scheme(const Scenario& s, Scheme scheme, const ScaOptions& options) {
  switch (scheme) {
    case Scheme::wcr: return run_algorithm1(s, initial_iterate(s, UncertaintyModel::bounded), options);
    case Scheme::ocr: return run_algorithm2(s, initial_iterate(s, UncertaintyModel::probabilistic), options);
    case Scheme::nonrobust: {
      ScaResult r = non_robust(s, options);
      // The design trusts the estimates; report what it achieves in the worst case.
      r.solution.objective_bps_hz = wcr_certified_rate(s, r.solution.waypoints, r.solution.powers);
      return r;
    }
    case Scheme::fixed1: return fixed_trajectory(s, UncertaintyModel::bounded, options);
    case Scheme::fixed2: return fixed_trajectory(s, UncertaintyModel::probabilistic, options);
  }
  throw std::invalid_argument("unknown scheme");
}

}  // namespace

SchemeRun run_scheme(const Scenario& s, Scheme scheme, const RunOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  SchemeRun run;
  run.scheme = scheme;
  run.result = solve_scheme(s, scheme, options.sca);
  run.avg_secrecy_rate = run.result.solution.objective_bps_hz;
  if (certification_model(scheme) == UncertaintyModel::bounded)
    run.validation = certify_worst_case(run.result.solution, s);
  else
    run.validation = certify_outage(run.result.solution, s, options.outage_samples, options.seed);
  run.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return run;
}

namespace {

int exit_code_for(const ScenarioError& e) {
  return e.invariant() == "infeasible_scenario" ? kExitInfeasible : kExitConfig;
}

int exit_code_for(const ScaError& e) {
  return e.kind() == "infeasible_subproblem" ? kExitInfeasible : kExitSolver;
}

Scenario load_or_throw(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ScenarioError("parse", e.what());
  }
  return load_scenario(text);
}

/// Runs `body`, mapping the library's exceptions onto exit codes.
template <typename F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const ScenarioError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  } catch (const ScaError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolver;
  }
}

}  // namespace

int cmd_solve(const SolveCommand& cmd) {
  return guarded([&] {
    const Scenario s = load_or_throw(cmd.config_path);
    fs::create_directories(cmd.out_dir);
    const SchemeRun run = run_scheme(s, cmd.scheme, cmd.options);
    const fs::path dir(cmd.out_dir);
    write_file_atomic((dir / "solution.json").string(), solution_to_json(run.result.solution));
    write_file_atomic((dir / "trace.csv").string(), run.result.trace.to_csv(cmd.include_timing));
    write_file_atomic((dir / "validation.json").string(), report_to_json(run.validation));
    std::printf("%s: rate %s bits/s/Hz, %d iterations%s, certification %s\n", to_string(cmd.scheme),
                format_g9(run.avg_secrecy_rate).c_str(), run.result.trace.iterations(),
                run.result.trace.converged ? "" : " (max_iters reached)", run.validation.passed ? "passed" : "FAILED");
    return run.validation.passed ? kExitOk : kExitCertification;
  });
}

SweepVariable parse_sweep_variable(const std::string& name) {
  if (name == "T") return SweepVariable::duration;
  if (name == "p_avg") return SweepVariable::p_avg;
  if (name == "it_threshold") return SweepVariable::it_threshold;
  throw std::invalid_argument("unknown sweep variable '" + name + "'");
}

const char* to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::duration: return "T";
    case SweepVariable::p_avg: return "p_avg";
    case SweepVariable::it_threshold: return "it_threshold";
  }
  return "unknown";
}

Scenario apply_sweep_value(const Scenario& base, SweepVariable v, double value) {
  Scenario s = base;
  switch (v) {
    case SweepVariable::duration: return with_duration(s, value);
    case SweepVariable::p_avg:
      s.p_avg_w = value;
      s.p_max_w = 4.0 * value;
      break;
    case SweepVariable::it_threshold: s.it_threshold_w = value; break;
  }
  s.validate();
  return s;
}

std::vector<SweepPoint> run_sweep(const Scenario& base, SweepVariable v, const std::vector<double>& values,
                                  Scheme scheme, const ScaOptions& options, int jobs, const SweepCallback& on_point) {
  std::vector<SweepPoint> points(values.size());
  const int workers = std::max(1, std::min<int>(jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency()),
                                                static_cast<int>(values.size())));
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      SweepPoint p;
      p.x = values[i];
      const auto started = std::chrono::steady_clock::now();
      try {
        const Scenario s = apply_sweep_value(base, v, values[i]);
        // Sweeps only need the rate; certification stays with cmd_solve.
        const ScaResult r = solve_scheme(s, scheme, options);
        p.avg_secrecy_rate = r.solution.objective_bps_hz;
        p.iterations = r.trace.iterations();
        p.status = r.trace.converged ? "converged" : "max_iters";
      } catch (const ScaError& e) {
        p.status = e.kind();
      } catch (const ScenarioError& e) {
        p.status = e.invariant();
      }
      p.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      points[i] = p;
      if (on_point) on_point(i, points[i]);
    }
  };
  std::vector<std::jthread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  pool.clear();
  return points;
}

std::string sweep_to_csv(const std::vector<SweepPoint>& points) {
  std::ostringstream out;
  out << "x,avg_secrecy_rate_bps_hz,wall_s,iterations,status\n";
  for (const auto& p : points)
    out << format_g9(p.x) << ',' << format_g9(p.avg_secrecy_rate) << ',' << format_g9(p.wall_s) << ','
        << p.iterations << ',' << p.status << '\n';
  return out.str();
}

int cmd_sweep(const SweepCommand& cmd) {
  return guarded([&] {
    if (cmd.values.empty()) throw std::invalid_argument("sweep needs at least one value");
    const Scenario base = load_or_throw(cmd.config_path);
    const fs::path dir(cmd.out_dir);
    fs::create_directories(dir / "points");
    bool all_ok = true;
    for (Scheme scheme : cmd.schemes) {
      const std::string stem = std::string("sweep_") + to_string(cmd.variable) + "_" + to_string(scheme);
      auto points = run_sweep(base, cmd.variable, cmd.values, scheme, cmd.options, cmd.jobs,
                              [&](std::size_t i, const SweepPoint& p) {
                                write_file_atomic((dir / "points" / (stem + "_" + std::to_string(i) + ".csv")).string(),
                                                  sweep_to_csv({p}));
                              });
      write_file_atomic((dir / (stem + ".csv")).string(), sweep_to_csv(points));
      for (const auto& p : points) all_ok = all_ok && (p.status == "converged" || p.status == "max_iters");
    }
    return all_ok ? kExitOk : kExitSolver;
  });
}

std::vector<CompareCase> compare_cases() {
  return {{1, dbw_to_watts(-10.0), 2.5e-7}, {2, dbw_to_watts(-20.0), 3e-8}, {3, dbw_to_watts(-20.0), 2.5e-7}};
}

std::vector<CompareRun> run_compare(const Scenario& base, const ScaOptions& options) {
  std::vector<CompareRun> runs;
  for (const auto& c : compare_cases()) {
    Scenario s = apply_sweep_value(base, SweepVariable::p_avg, c.p_avg_w);
    s.it_threshold_w = c.it_threshold_w;
    s.validate();
    for (Scheme scheme : {Scheme::wcr, Scheme::ocr}) {
      CompareRun run;
      run.c = c;
      run.scheme = scheme;
      try {
        run.trace = solve_scheme(s, scheme, options).trace;
      } catch (const ScaError& e) {
        run.error = e.kind();
      } catch (const ScenarioError& e) {
        run.error = e.invariant();
      }
      runs.push_back(std::move(run));
    }
  }
  return runs;
}

std::string compare_to_csv(const std::vector<CompareRun>& runs) {
  std::ostringstream out;
  out << "case,p_avg_w,it_threshold_w,scheme,iteration,objective\n";
  for (const auto& r : runs)
    for (const auto& row : r.trace.rows)
      out << r.c.index << ',' << format_g9(r.c.p_avg_w) << ',' << format_g9(r.c.it_threshold_w) << ','
          << to_string(r.scheme) << ',' << row.iteration << ',' << format_g9(row.objective) << '\n';
  return out.str();
}

int cmd_compare(const CompareCommand& cmd) {
  return guarded([&] {
    const Scenario base = load_or_throw(cmd.config_path);
    fs::create_directories(cmd.out_dir);
    const auto runs = run_compare(base, cmd.options);
    write_file_atomic((fs::path(cmd.out_dir) / "convergence.csv").string(), compare_to_csv(runs));
    bool ok = true;
    for (const auto& r : runs) {
      std::printf("case %d %s: %s\n", r.c.index, to_string(r.scheme),
                  r.error ? r.error->c_str()
                          : (format_g9(r.trace.rows.back().objective) + " after " +
                             std::to_string(r.trace.iterations()) + " iterations")
                                .c_str());
      ok = ok && !r.error;
    }
    return ok ? kExitOk : kExitSolver;
  });
}

}  // namespace uavsec
