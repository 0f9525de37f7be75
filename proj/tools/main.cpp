#include <iostream>

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif

#include "alexot/cli/cli.hpp"
#include "alexot/parallel.hpp"

int main(int argc, char** argv) {
  using namespace alexot::cli;
  CLI::App app{"Semi-discrete optimal transport and discrete Monge-Ampere solver"};
  app.require_subcommand(1);
  unsigned threads = 1;
  app.add_option("--threads", threads, "worker threads (ALEXOT_THREADS overrides)")->check(CLI::PositiveNumber);

  SolveOptions solve;
  double tol = 0.0;
  int max_iters = 0;
  auto* s = app.add_subcommand("solve", "solve a problem file");
  s->add_option("input", solve.input, "problem JSON")->required();
  s->add_option("-o,--output", solve.output, "solution JSON (default stdout)");
  s->add_option("--csv", solve.csv, "convergence log");
  auto* tol_opt = s->add_option("--tol", tol, "residual tolerance relative to mass");
  auto* iters_opt = s->add_option("--max-iters", max_iters, "Newton iteration cap");

  RenderOptions render;
  auto* r = app.add_subcommand("render", "draw a solution as SVG");
  r->add_option("input", render.input, "solution JSON")->required();
  r->add_option("-o,--output", render.output, "SVG file (default stdout)");
  r->add_flag("--dual", render.dual, "draw the dual triangulation");
  r->add_flag("--arrows", render.arrows, "draw centroid-to-site arrows");

  VerifyOptions verify;
  auto* v = app.add_subcommand("verify", "run oracle checks on a solution");
  v->add_option("input", verify.input, "solution JSON")->required();
  v->add_option("-r,--report", verify.report, "report JSON (default stdout)");
  v->add_flag("--fd", verify.fd, "finite-difference gradient and Hessian");
  v->add_flag("--mc", verify.mc, "Monte Carlo cell measures");
  v->add_flag("--lp", verify.lp, "grid LP transport cost");
  v->add_flag("--partition", verify.partition, "random repartition costs");
  v->add_option("--grid", verify.grid, "LP grid resolution")->check(CLI::PositiveNumber);
  v->add_option("--samples", verify.samples, "Monte Carlo samples")->check(CLI::PositiveNumber);
  v->add_option("--trials", verify.trials, "repartition trials")->check(CLI::PositiveNumber);
  v->add_option("--seed", verify.seed, "random seed");

  GenOptions gen;
  auto* g = app.add_subcommand("gen", "generate a seeded random problem");
  g->add_option("--kind", gen.kind, "ot or dmae")->check(CLI::IsMember({"ot", "dmae"}));
  g->add_option("--sigma", gen.sigma, "uniform or affine")->check(CLI::IsMember({"uniform", "affine"}));
  g->add_option("-k", gen.k, "number of sites or interior points");
  g->add_option("-m", gen.m, "number of boundary points");
  g->add_option("--seed", gen.seed, "random seed");
  g->add_option("-o,--output", gen.output, "problem JSON (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInputError;
  }
  alexot::set_thread_count(resolve_threads(threads));

  if (*s) {
    if (*tol_opt) solve.tol = tol;
    if (*iters_opt) solve.max_iters = max_iters;
    return cmd_solve(solve, std::cout, std::cerr);
  }
  if (*r) return cmd_render(render, std::cerr);
  if (*v) return cmd_verify(verify, std::cout, std::cerr);
  return cmd_gen(gen, std::cout, std::cerr);
}
