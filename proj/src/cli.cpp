#include "globalsdp/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "globalsdp/error.hpp"
#include "globalsdp/oracle.hpp"
#include "globalsdp/problems.hpp"
#include "globalsdp/report.hpp"
#include "globalsdp/solver.hpp"

namespace globalsdp::cli {

namespace {

const char* kFlagList =
    "Verbs: catalog, solve, check-assumptions, verify-kkt, multistart, oracle\n"
    "Flags (per verb, see <verb> --help):\n"
    "  --problem <id> | --input <path>   problem source (exactly one)\n"
    "  --tol <y tolerance>               bisection / certificate tolerance\n"
    "  --inner-mu <mu>                   final smoothing parameter of the inner solve\n"
    "  --max-iter <n>                    inner iterations per smoothing stage\n"
    "  --starts <n>  --seed <n>          multistart runs and seed\n"
    "  --samples <n>                     assumption-check samples\n"
    "  --x <v1,v2,...>  --y <v>          point for verify-kkt\n"
    "  --step <h>  --write-fixtures <p>  oracle grid resolution / fixtures file\n"
    "  --out <path>                      write the report to a file\n"
    "  --trace  --timing  --summary      verbosity and output form\n"
    "  --override-assumptions            solve even when check (a) or (b) fails\n"
    "Exit codes: 0 success, 1 problem-level failure, 2 usage error.\n"
    "Environment: GLOBALSDP_THREADS caps multistart parallelism.";

struct Source {
  std::string problem;
  std::string input;

  void add_to(CLI::App* sub) {
    auto* p = sub->add_option("--problem", problem, "catalog identifier");
    auto* i = sub->add_option("--input", input, "problem file (JSON)");
    p->excludes(i);
  }

  ProblemInstance load() const {
    if (problem.empty() == input.empty()) throw UsageError("give exactly one of --problem or --input");
    if (!problem.empty()) return catalog_problem(problem);
    std::ifstream f(input);
    if (!f) throw UsageError("cannot read input file '" + input + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    try {
      return parse_problem_file(ss.str());
    } catch (const UsageError& e) {
      throw UsageError(input + ": " + e.what());
    }
  }
};

struct Output {
  std::string out_path;
  bool summary = false;
  bool trace = false;
  bool timing = false;

  void add_to(CLI::App* sub, bool with_trace) {
    sub->add_option("--out", out_path, "write the report to this path");
    sub->add_flag("--summary", summary, "print a short human-readable table instead of JSON");
    if (with_trace) {
      sub->add_flag("--trace", trace, "include the bisection trace");
      sub->add_flag("--timing", timing, "include wall-clock time (makes reports non-reproducible)");
    }
  }

  void emit(const std::string& text, std::ostream& out) const {
    if (out_path.empty()) {
      out << text;
      return;
    }
    std::ofstream f(out_path);
    if (!f) throw UsageError("cannot write '" + out_path + "'");
    f << text;
  }

  ReportFlags flags() const { return {trace, timing}; }
};

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Global solver and KKT certifier for SDPs of the form min y s.t. A(x, y) >= 0, B(x) >= 0",
               "globalsdp"};
  app.footer(kFlagList);
  app.require_subcommand(1, 1);

  Source src;
  Output output;

  auto* catalog = app.add_subcommand("catalog", "list catalog problems");
  output.add_to(catalog, false);

  auto* solve = app.add_subcommand("solve", "bisection solve with KKT certification");
  double tol = 1e-8;
  double inner_mu = InnerOpts{}.mu_end;
  int max_iter = InnerOpts{}.max_iter;
  bool override_assumptions = false;
  src.add_to(solve);
  solve->add_option("--tol", tol, "tolerance on y")->check(CLI::PositiveNumber);
  solve->add_option("--inner-mu", inner_mu, "final smoothing parameter")->check(CLI::PositiveNumber);
  solve->add_option("--max-iter", max_iter, "inner iterations per smoothing stage")->check(CLI::PositiveNumber);
  solve->add_flag("--override-assumptions", override_assumptions, "solve even if check (a) or (b) fails");
  output.add_to(solve, true);

  auto* check = app.add_subcommand("check-assumptions", "sampled assumption checks");
  std::size_t samples = AssumptionOptions{}.sample_count;
  std::uint64_t seed = AssumptionOptions{}.seed;
  src.add_to(check);
  check->add_option("--samples", samples, "number of samples")->check(CLI::PositiveNumber);
  check->add_option("--seed", seed, "sampling seed");
  output.add_to(check, false);

  auto* verify = app.add_subcommand("verify-kkt", "recover multipliers and certify a point");
  std::vector<double> xv;
  double yv = 0.0;
  double cert_tol = kCertTol;
  src.add_to(verify);
  verify->add_option("--x", xv, "point x (comma separated)")->delimiter(',')->required();
  verify->add_option("--y", yv, "point y")->required();
  verify->add_option("--tol", cert_tol, "residual tolerance")->check(CLI::PositiveNumber);
  output.add_to(verify, false);

  auto* ms = app.add_subcommand("multistart", "independent solves from seeded random starts");
  std::size_t starts = 16;
  std::uint64_t ms_seed = 42;
  double ms_tol = 1e-8;
  double spread_tol = 1e-5;
  src.add_to(ms);
  ms->add_option("--starts", starts, "number of runs (>= 2)");
  ms->add_option("--seed", ms_seed, "seed for the starting points");
  ms->add_option("--tol", ms_tol, "tolerance on y")->check(CLI::PositiveNumber);
  ms->add_option("--inner-mu", inner_mu, "final smoothing parameter")->check(CLI::PositiveNumber);
  ms->add_option("--max-iter", max_iter, "inner iterations per smoothing stage")->check(CLI::PositiveNumber);
  ms->add_option("--spread-tol", spread_tol, "largest acceptable y spread")->check(CLI::NonNegativeNumber);
  ms->add_flag("--override-assumptions", override_assumptions, "solve even if check (a) or (b) fails");
  output.add_to(ms, true);

  auto* oracle = app.add_subcommand("oracle", "grid-search reference values");
  double step = 0.0;
  std::string fixtures_path;
  src.add_to(oracle);
  oracle->add_option("--step", step, "grid resolution (default: per catalog entry)")->check(CLI::PositiveNumber);
  oracle->add_option("--write-fixtures", fixtures_path, "compute all catalog fixtures into this file");
  output.add_to(oracle, false);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  InnerOpts inner;
  inner.mu_end = inner_mu;
  inner.mu_start = std::max(inner.mu_start, inner_mu);
  inner.max_iter = max_iter;

  try {
    if (catalog->parsed()) {
      if (output.summary) {
        std::string s;
        for (const std::string& id : catalog_ids()) s += id + std::string(24 - std::min<std::size_t>(23, id.size()), ' ') + catalog_description(id) + "\n";
        output.emit(s, out);
      } else {
        Json list = Json::array();
        for (const std::string& id : catalog_ids()) {
          const ProblemInstance p = catalog_problem(id);
          list.push_back(Json{{"id", id}, {"description", catalog_description(id)}, {"m", p.m()},
                              {"n_A", p.fn.n_A}, {"n_B", p.fn.n_B}});
        }
        output.emit(dump(list), out);
      }
      return kOk;
    }

    if (solve->parsed()) {
      const ProblemInstance p = src.load();
      SolveOptions o;
      o.tol_y = tol;
      o.inner = inner;
      o.override_assumptions = override_assumptions;
      SolveReport r;
      try {
        r = bisection_solve(p, o);
      } catch (const AssumptionViolation& e) {
        err << "globalsdp: " << e.what() << "\n";
        return kProblemFailure;
      }
      if (output.summary) {
        output.emit(summary(r), out);
      } else {
        Json j{{"problem", p.name}};
        j.update(to_json(r, output.flags()));
        output.emit(dump(j), out);
      }
      return r.status == SolveStatus::optimal ? kOk : kProblemFailure;
    }

    if (check->parsed()) {
      const ProblemInstance p = src.load();
      AssumptionOptions o;
      o.sample_count = samples;
      o.seed = seed;
      const AssumptionReport r = check_assumptions(p, o);
      if (output.summary) {
        output.emit(summary(r), out);
      } else {
        Json j{{"problem", p.name}, {"seed", seed}};
        j.update(to_json(r));
        output.emit(dump(j), out);
      }
      const bool failed = r.a == Verdict::fail || r.b == Verdict::fail || r.c == Verdict::fail;
      return failed ? kProblemFailure : kOk;
    }

    if (verify->parsed()) {
      const ProblemInstance p = src.load();
      const KktCertificate c = verify_kkt(p, xv, yv, cert_tol);
      if (output.summary) {
        output.emit(summary(c) + "\n", out);
      } else {
        Json j{{"problem", p.name}};
        j.update(to_json(c));
        output.emit(dump(j), out);
      }
      return c.accepted ? kOk : kProblemFailure;
    }

    if (ms->parsed()) {
      const ProblemInstance p = src.load();
      MultistartOptions o;
      o.starts = starts;
      o.seed = ms_seed;
      o.solve.tol_y = ms_tol;
      o.solve.inner = inner;
      o.solve.override_assumptions = override_assumptions;
      MultistartReport r;
      try {
        r = multistart(p, o);
      } catch (const AssumptionViolation& e) {
        err << "globalsdp: " << e.what() << "\n";
        return kProblemFailure;
      }
      if (output.summary) {
        output.emit(summary(r), out);
      } else {
        Json j{{"problem", p.name}, {"seed", ms_seed}};
        j.update(to_json(r, output.flags()));
        output.emit(dump(j), out);
      }
      const bool ok = r.accepted == r.runs.size() && r.y_spread <= spread_tol;
      return ok ? kOk : kProblemFailure;
    }

    if (oracle->parsed()) {
      if (!fixtures_path.empty()) {
        if (!src.problem.empty() || !src.input.empty()) {
          throw UsageError("--write-fixtures computes every catalog entry; drop --problem/--input");
        }
        std::map<std::string, Fixture> fixtures;
        for (const std::string& id : catalog_ids())
          if (fixture_grid(id)) fixtures.emplace(id, compute_fixture(id));
        std::ofstream f(fixtures_path);
        if (!f) throw UsageError("cannot write '" + fixtures_path + "'");
        f << fixtures_to_json(fixtures);
        out << "wrote " << fixtures.size() << " fixtures to " << fixtures_path << "\n";
        return kOk;
      }
      const ProblemInstance p = src.load();
      std::optional<GridSpec> grid;
      if (step > 0.0) {
        if (!p.x_box) throw UsageError("oracle: the instance has no x_box");
        grid = GridSpec::uniform(*p.x_box, step);
      } else if (!src.problem.empty()) {
        grid = fixture_grid(src.problem);
      }
      if (!grid) throw UsageError("oracle: no default grid for this problem; pass --step");
      const GridResult r = grid_search(p, *grid, resolve_thread_count(0));
      if (output.summary) {
        std::ostringstream s;
        s.precision(10);
        if (r.feasible) {
          s << "oracle_y   " << r.best_y << "\npoints     " << r.feasible_points << "/" << r.points
            << " feasible\n";
        } else {
          s << "no feasible grid point\n";
        }
        output.emit(s.str(), out);
      } else {
        Json j{{"problem", p.name}, {"grid_spec", to_json(*grid)}};
        j.update(to_json(r));
        output.emit(dump(j), out);
      }
      return r.feasible ? kOk : kProblemFailure;
    }
  } catch (const std::invalid_argument& e) {
    err << "globalsdp: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "globalsdp: " << e.what() << "\n";
    return kProblemFailure;
  }
  return kUsage;
}

}  // namespace globalsdp::cli
