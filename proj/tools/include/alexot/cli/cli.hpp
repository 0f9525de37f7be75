#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "alexot/dmae.hpp"
#include "alexot/measure.hpp"
#include "alexot/solver.hpp"

namespace alexot::cli {

enum ExitCode : int { kOk = 0, kInputError = 1, kNotConverged = 2, kCheckFailed = 3 };

enum class ProblemKind { Transport, Dmae };

/// Parsed problem or solution file. For transport problems the targets are
/// already balanced against the domain mass.
struct Problem {
  ProblemKind kind = ProblemKind::Transport;
  Polygon omega;
  Density sigma;
  nlohmann::json sigma_spec;  // with any grid file inlined
  std::vector<Point2> points;
  std::vector<double> targets;
  DmaeProblem dmae;
  SolverConfig config;
};

/// base_dir resolves relative grid density paths. Throws alexot::Error.
Problem parse_problem(const nlohmann::json& doc, const std::string& base_dir = ".");
nlohmann::json read_json_file(const std::string& path);

Density parse_density(const nlohmann::json& spec, const std::string& base_dir, nlohmann::json* inlined = nullptr);
nlohmann::json solver_to_json(const SolverConfig& config);

nlohmann::json transport_solution_json(const Problem& problem, const SolveResult& result, const SiteSet& sites);
nlohmann::json dmae_solution_json(const Problem& problem, const DmaeSolution& solution);

/// Stored heights of a solution file together with the problem it solves.
struct LoadedSolution {
  Problem problem;
  std::vector<double> heights;
  double residual = 0.0;
};
LoadedSolution parse_solution(const nlohmann::json& doc);

/// Residual of the stored heights against the stored targets, recomputed from scratch.
double reevaluate_residual(const LoadedSolution& solution);

std::string render_svg(const LoadedSolution& solution, bool dual, bool arrows);

struct SolveOptions {
  std::string input;
  std::string output;
  std::string csv;
  std::optional<double> tol;
  std::optional<int> max_iters;
};

struct RenderOptions {
  std::string input;
  std::string output;
  bool dual = false;
  bool arrows = false;
};

struct VerifyOptions {
  std::string input;
  std::string report;  // empty: stdout
  bool fd = false;
  bool mc = false;
  bool lp = false;
  bool partition = false;
  int grid = 64;
  std::size_t samples = 1'000'000;
  int trials = 100;
  std::uint64_t seed = 1;
};

struct GenOptions {
  std::string kind = "ot";
  std::string sigma = "uniform";
  int k = 10;
  int m = 6;
  std::uint64_t seed = 1;
  std::string output;
};

int cmd_solve(const SolveOptions& options, std::ostream& out, std::ostream& err);
int cmd_render(const RenderOptions& options, std::ostream& err);
int cmd_verify(const VerifyOptions& options, std::ostream& out, std::ostream& err);
int cmd_gen(const GenOptions& options, std::ostream& out, std::ostream& err);

/// Thread count from the flag, unless ALEXOT_THREADS is set to a positive integer.
unsigned resolve_threads(unsigned flag_value);

}  // namespace alexot::cli
