#include "cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "schrodinger/criteria.hpp"
#include "schrodinger/error.hpp"
#include "schrodinger/fortet.hpp"
#include "schrodinger/gaussian.hpp"
#include "schrodinger/problem_io.hpp"
#include "schrodinger/report.hpp"

namespace schrodinger::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunConfig {
  std::string input;
  std::string output;
  double tol = 1e-10;
  std::size_t max_iter = 100000;
  std::string scheme = "truncated";
  std::string ceiling = "ones";
  bool trace = false;
  std::string trace_csv;
  std::uint64_t seed = 0;

  // Gaussian inputs.
  std::size_t points = 201;
  double half_width = 6.0;
  std::optional<double> a, b, c;

  // check
  double r = 2.0;
  std::size_t x_o = 0;
  std::optional<double> domination_radius;

  // compare
  double gap_tol = 1e-8;

  // gaussian-gen
  std::string format = "json";
};

struct LoadedInput {
  DiscreteProblem problem;
  std::optional<gaussian::GaussianProblem> gaussian;
};

gaussian::GridOptions grid_options(const RunConfig& cfg) {
  gaussian::GridOptions g;
  g.points_per_dim = cfg.points;
  g.half_width_sigmas = cfg.half_width;
  return g;
}

std::optional<gaussian::GaussianProblem> scalar_gaussian(const RunConfig& cfg) {
  if (!cfg.a && !cfg.b && !cfg.c) return std::nullopt;
  if (!cfg.a || !cfg.b || !cfg.c) throw SchemaError("--a, --b and --c must be given together");
  auto gp = gaussian::GaussianProblem::scalar(*cfg.a, *cfg.b, *cfg.c);
  gp.validate();
  return gp;
}

LoadedInput load_input(const RunConfig& cfg) {
  LoadedInput in;
  if (auto gp = scalar_gaussian(cfg)) {
    in.gaussian = gp;
  } else {
    if (cfg.input.empty()) throw SchemaError("--input is required");
    if (detect_format(cfg.input) == ProblemFormat::csv_bundle) {
      in.problem = load_problem(cfg.input, ProblemFormat::csv_bundle);
      return in;
    }
    const json j = read_json_file(cfg.input);
    if (j.is_object() && j.contains("a") && !j.contains("x_space")) {
      in.gaussian = gaussian_from_json(j);
    } else {
      in.problem = problem_from_json(j);
      return in;
    }
  }
  in.problem = gaussian::discretize(*in.gaussian, grid_options(cfg));
  return in;
}

std::vector<double> read_ceiling(const RunConfig& cfg, const ReducedProblem& pb) {
  if (cfg.ceiling == "ones") return std::vector<double>(pb.nx(), 1.0);
  std::vector<double> full;
  const fs::path path(cfg.ceiling);
  if (path.extension() == ".json") {
    const json j = read_json_file(path);
    if (!j.is_array()) throw SchemaError(cfg.ceiling + ": expected an array of numbers");
    for (const auto& v : j) {
      if (!v.is_number()) throw SchemaError(cfg.ceiling + ": expected an array of numbers");
      full.push_back(v.get<double>());
    }
  } else {
    std::ifstream f(path);
    if (!f) throw ParseError(cfg.ceiling, 0, "", "cannot open file");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        std::size_t used = 0;
        full.push_back(std::stod(line, &used));
      } catch (const std::exception&) {
        throw ParseError(cfg.ceiling, lineno, "", "not a number");
      }
    }
  }
  if (full.size() != pb.original_nx())
    throw SchemaError(cfg.ceiling + ": U must have one entry per x point");
  std::vector<double> u;
  for (std::size_t i : pb.x_index()) {
    if (!(full[i] > 0.0) || !std::isfinite(full[i]))
      throw SchemaError(cfg.ceiling + ": U must be positive and finite");
    u.push_back(full[i]);
  }
  return u;
}

void emit(const RunConfig& cfg, const json& report, std::ostream& out) {
  const std::string text = report.dump(2) + "\n";
  if (cfg.output.empty()) {
    out << text;
    return;
  }
  std::ofstream f(cfg.output, std::ios::binary);
  if (!f) throw Error("cannot write " + cfg.output);
  f << text;
}

void emit_trace(const RunConfig& cfg, const FixedPointResult& res) {
  if (cfg.trace_csv.empty()) return;
  std::ofstream f(cfg.trace_csv, std::ios::binary);
  if (!f) throw Error("cannot write " + cfg.trace_csv);
  write_trace_csv(f, res.trace);
}

int status_code(FixedPointStatus s) {
  switch (s) {
    case FixedPointStatus::converged_positive: return kOk;
    case FixedPointStatus::degenerate_zero: return kDegenerate;
    case FixedPointStatus::max_iter: return kMaxIter;
    case FixedPointStatus::divergent: return kDivergent;
  }
  return kInputError;
}

SolveOptions solve_options(const RunConfig& cfg, std::vector<double> ceiling) {
  SolveOptions o;
  o.ceiling = std::move(ceiling);
  o.tol = cfg.tol;
  o.max_iter = cfg.max_iter;
  o.record_trace = cfg.trace || !cfg.trace_csv.empty();
  return o;
}

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const LoadedInput in = load_input(cfg);
  const ReducedProblem pb = validate_reduction(in.problem);
  const auto ceiling = read_ceiling(cfg, pb);
  json report = {{"scheme", cfg.scheme}};

  if (cfg.scheme == "sinkhorn") {
    SinkhornOptions so;
    so.tol = std::max(cfg.tol, 1e-14);
    so.max_iter = cfg.max_iter;
    try {
      const auto sol = sinkhorn_baseline(pb, so);
      report["status"] = to_string(FixedPointStatus::converged_positive);
      report["solution"] = to_json(sol, pb);
    } catch (const MaxIterExceeded& e) {
      report["status"] = to_string(FixedPointStatus::max_iter);
      report["message"] = e.what();
      emit(cfg, report, out);
      err << e.what() << '\n';
      return kMaxIter;
    }
    emit(cfg, report, out);
    return kOk;
  }

  FixedPointResult res;
  if (cfg.scheme == "truncated") {
    res = solve_fortet(pb, solve_options(cfg, ceiling));
  } else {
    std::vector<ExtReal> u1;
    for (double v : ceiling) u1.emplace_back(v);
    res = solve_untruncated(pb, u1, solve_options(cfg, ceiling));
  }
  report["status"] = to_string(res.status);
  report["result"] = to_json(res, cfg.trace);
  if (res.status == FixedPointStatus::converged_positive)
    report["solution"] = to_json(extract_solution(pb, res.u_star), pb);
  emit(cfg, report, out);
  emit_trace(cfg, res);
  if (res.status != FixedPointStatus::converged_positive)
    err << "solve: " << to_string(res.status) << " after " << res.iterations << " iterations\n";
  return status_code(res.status);
}

int cmd_check(const RunConfig& cfg, std::ostream& out) {
  const LoadedInput in = load_input(cfg);
  const ReducedProblem pb = validate_reduction(in.problem);
  CriteriaOptions opt;
  for (double v : read_ceiling(cfg, pb)) opt.ratio_moment_ceiling.emplace_back(v);
  opt.ratio_moment_r = cfg.r;
  const auto it = std::find(pb.x_index().begin(), pb.x_index().end(), cfg.x_o);
  if (it == pb.x_index().end()) throw SchemaError("--x-o must index a point with positive mass");
  opt.ratio_moment_x_o = static_cast<std::size_t>(it - pb.x_index().begin());
  opt.gaussian = in.gaussian;
  if (cfg.domination_radius) {
    std::vector<std::size_t> k;
    const auto& xs = pb.problem().x_space;
    for (std::size_t i = 0; i < pb.nx(); ++i) {
      double sq = 0.0;
      for (double v : xs.point(i)) sq += v * v;
      if (std::sqrt(sq) <= *cfg.domination_radius) k.push_back(i);
    }
    if (k.empty()) throw SchemaError("--domination-radius: no grid point inside the ball");
    DominationWitness w;
    w.k_indices = k;
    w.anchor_indices = domination_anchors(pb, k, cfg.seed);
    w.coefficients = build_domination_coefficients(pb, k, w.anchor_indices, cfg.seed);
    opt.domination = std::move(w);
  }
  const CriteriaReport rep = check_all(pb, opt);
  if (cfg.output.empty()) {
    out << criteria_table(rep);
  } else {
    out << criteria_table(rep);
    emit(cfg, to_json(rep), out);
  }
  return rep.existence_certified() ? kOk : kNoCriterion;
}

double normalized_gap(std::span<const double> u, std::span<const double> v) {
  double gap = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    gap = std::max(gap, std::abs((u[i] / u[0]) / (v[i] / v[0]) - 1.0));
  return gap;
}

int cmd_compare(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const LoadedInput in = load_input(cfg);
  const ReducedProblem pb = validate_reduction(in.problem);
  const FixedPointResult res = solve_fortet(pb, solve_options(cfg, read_ceiling(cfg, pb)));
  json report = {{"fortet_status", to_string(res.status)}, {"iterations", res.iterations}};
  if (res.status != FixedPointStatus::converged_positive) {
    report["sinkhorn_status"] = "not-run";
    emit(cfg, report, out);
    err << "compare: fortet " << to_string(res.status) << '\n';
    return kDegenerate;
  }
  SchrodingerSolution sk;
  try {
    SinkhornOptions so;
    so.tol = 1e-14;
    so.max_iter = cfg.max_iter;
    sk = sinkhorn_baseline(pb, so);
  } catch (const Error& e) {
    report["sinkhorn_status"] = "failed";
    emit(cfg, report, out);
    err << "compare: sinkhorn " << e.what() << '\n';
    return kDegenerate;
  }
  const SchrodingerSolution fs = extract_solution(pb, res.u_star);
  double pi_gap = 0.0;
  for (std::size_t i = 0; i < pb.nx(); ++i)
    for (std::size_t j = 0; j < pb.ny(); ++j)
      pi_gap = std::max(pi_gap, std::abs(fs.pi(i, j) - sk.pi(i, j)));
  const double gap = normalized_gap(fs.u, sk.u);
  report["sinkhorn_status"] = to_string(FixedPointStatus::converged_positive);
  report["potential_gap"] = gap;
  report["coupling_gap"] = pi_gap;
  report["gap_tol"] = cfg.gap_tol;
  report["within_tolerance"] = gap <= cfg.gap_tol;
  emit(cfg, report, out);
  return gap <= cfg.gap_tol ? kOk : kGapExceeded;
}

int cmd_gaussian_gen(const RunConfig& cfg, std::ostream& out) {
  LoadedInput in = load_input(cfg);
  if (!in.gaussian) throw SchemaError("gaussian-gen needs a gaussian problem (--a/--b/--c or JSON)");
  if (cfg.format == "csv") {
    if (cfg.output.empty()) throw SchemaError("--output directory required for csv");
    save_problem(in.problem, cfg.output, ProblemFormat::csv_bundle);
  } else {
    emit(cfg, problem_to_json(in.problem), out);
  }
  return kOk;
}

int cmd_report(const RunConfig& cfg, std::ostream& out) {
  if (cfg.input.empty()) throw SchemaError("--input is required");
  const json j = read_json_file(cfg.input);
  if (!j.is_object()) throw SchemaError(cfg.input + ": not a report");
  if (j.contains("result")) {
    const json& r = j["result"];
    out << "status      " << r.value("status", std::string("?")) << '\n'
        << "iterations  " << r.value("iterations", std::size_t{0}) << '\n';
    if (j.contains("solution")) {
      const json& s = j["solution"];
      out << "marginal error x  " << s["marginal_err_x"].dump() << '\n'
          << "marginal error y  " << s["marginal_err_y"].dump() << '\n'
          << "relative entropy  " << s["rel_entropy"].dump() << '\n';
    }
    if (!cfg.trace_csv.empty()) {
      if (!r.contains("trace")) throw SchemaError(cfg.input + ": report has no trace");
      std::vector<TraceRow> rows;
      auto num = [](const json& v) {
        return v.is_string() ? std::numeric_limits<double>::infinity() : v.get<double>();
      };
      for (const auto& t : r["trace"]) {
        TraceRow row;
        row.n = t.at("n").get<std::size_t>();
        row.min_u = num(t.at("min_u"));
        row.max_u = num(t.at("max_u"));
        row.residual = num(t.at("residual"));
        row.min_phi = num(t.at("min_phi"));
        row.normalization = num(t.at("normalization"));
        rows.push_back(row);
      }
      std::ofstream f(cfg.trace_csv, std::ios::binary);
      if (!f) throw Error("cannot write " + cfg.trace_csv);
      write_trace_csv(f, rows);
    }
    return kOk;
  }
  if (j.contains("reciprocal_xy")) {
    out << "existence " << (j.value("existence_certified", false) ? "certified" : "not certified")
        << '\n';
    for (const auto& s : j.value("sufficient", json::array()))
      out << "  holds: " << s.get<std::string>() << '\n';
    return kOk;
  }
  out << j.dump(2) << '\n';
  return kOk;
}

void add_common(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--input,-i", cfg.input, "Problem file (JSON) or CSV bundle directory");
  sub->add_option("--output,-o", cfg.output, "Report destination (default: stdout)");
  sub->add_option("--points", cfg.points, "Grid points per dimension for gaussian inputs");
  sub->add_option("--half-width", cfg.half_width, "Grid half width in standard deviations");
  sub->add_option("--a", cfg.a, "Scalar precision of mu");
  sub->add_option("--b", cfg.b, "Scalar precision of nu");
  sub->add_option("--c", cfg.c, "Scalar kernel precision");
}

void add_solver(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--tol", cfg.tol, "Stopping tolerance on the relative change")
      ->check(CLI::PositiveNumber);
  sub->add_option("--max-iter", cfg.max_iter, "Iteration cap")->check(CLI::Range(1ul, 1ul << 40));
  sub->add_option("--U", cfg.ceiling, "Ceiling: 'ones' or a file (JSON array or one value per line)");
  sub->add_flag("--trace", cfg.trace, "Include the per-iteration trace in the report");
  sub->add_option("--trace-csv", cfg.trace_csv, "Write the trace as CSV");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Schrodinger system solver and existence-criteria checker", "fortet"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* solve = app.add_subcommand("solve", "Solve a problem");
  add_common(solve, cfg);
  add_solver(solve, cfg);
  solve->add_option("--scheme", cfg.scheme, "truncated, untruncated or sinkhorn")
      ->check(CLI::IsMember({"truncated", "untruncated", "sinkhorn"}));

  auto* check = app.add_subcommand("check", "Evaluate the existence criteria");
  add_common(check, cfg);
  check->add_option("--U", cfg.ceiling, "Ceiling for the ratio-moment check");
  check->add_option("--r", cfg.r, "Exponent r > 1 for the ratio-moment check");
  check->add_option("--x-o", cfg.x_o, "Reference point index for the ratio-moment check");
  check->add_option("--domination-radius", cfg.domination_radius,
                    "Build a Domination witness with K = x points in this ball");
  check->add_option("--seed", cfg.seed, "Seed for the witness search");

  auto* compare = app.add_subcommand("compare", "Compare the fixed-point and Sinkhorn solutions");
  add_common(compare, cfg);
  add_solver(compare, cfg);
  compare->add_option("--gap-tol", cfg.gap_tol, "Allowed potential gap");

  auto* gen = app.add_subcommand("gaussian-gen", "Discretize a gaussian problem");
  add_common(gen, cfg);
  gen->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  auto* rep = app.add_subcommand("report", "Summarize a report file");
  rep->add_option("--input,-i", cfg.input, "Report JSON")->required();
  rep->add_option("--trace-csv", cfg.trace_csv, "Write the trace as CSV");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << e.what() << '\n';
    return kInputError;
  }

  try {
    if (solve->parsed()) return cmd_solve(cfg, out, err);
    if (check->parsed()) return cmd_check(cfg, out);
    if (compare->parsed()) return cmd_compare(cfg, out, err);
    if (gen->parsed()) return cmd_gaussian_gen(cfg, out);
    if (rep->parsed()) return cmd_report(cfg, out);
  } catch (const MaxIterExceeded& e) {
    err << e.what() << '\n';
    return kMaxIter;
  } catch (const DegeneratePotential& e) {
    err << e.what() << '\n';
    return kDegenerate;
  } catch (const Error& e) {
    err << e.what() << '\n';
    return kInputError;
  } catch (const nlohmann::json::exception& e) {
    err << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}

}  // namespace schrodinger::cli
