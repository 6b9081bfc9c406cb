#include "spectralpath/experiments.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

namespace sp = spectralpath;

namespace {

struct ProblemArgs {
  double alpha = 2.0;
  int beta = 1;
  std::string reg = "l1";
  std::string op = "id";
  std::string input;
  std::string metric;
  double gap_tol = -1.0;
  int max_iters = 100000;
};

void add_problem_options(CLI::App* cmd, ProblemArgs& a) {
  cmd->add_option("--alpha", a.alpha, "fidelity exponent (>= 1)")->capture_default_str();
  cmd->add_option("--beta", a.beta, "regularizer exponent (1 or 2)")->capture_default_str();
  cmd->add_option("--reg", a.reg, "regularizer")
      ->check(CLI::IsMember({"l1", "linf", "tv1d", "tv2d", "ellipse"}))
      ->capture_default_str();
  cmd->add_option("--op", a.op, "forward operator: id, matrix:<csv> or conv:<csv>")->capture_default_str();
  cmd->add_option("--input", a.input, "data as CSV (one column, or a row-major image)")->required();
  cmd->add_option("--metric", a.metric, "SPD matrix CSV for the ellipse regularizer");
  cmd->add_option("--gap-tol", a.gap_tol, "optimality tolerance (default depends on dimension)");
  cmd->add_option("--max-iters", a.max_iters, "iteration cap per solve")->capture_default_str();
}

sp::Problem build_problem(const ProblemArgs& a) {
  const sp::Signal f = sp::read_signal_csv(a.input);
  std::optional<sp::Operator> A;
  if (a.op == "id") {
    A = sp::Operator::identity(f.shape());
  } else if (a.op.rfind("matrix:", 0) == 0) {
    if (f.shape().dims != 1) throw sp::InputError("matrix operators need 1-D data");
    A = sp::Operator::dense(sp::matrix_from_table(sp::read_csv(a.op.substr(7))));
  } else if (a.op.rfind("conv:", 0) == 0) {
    if (f.shape().dims != 1) throw sp::InputError("convolution needs 1-D data");
    const sp::Signal taps = sp::signal_from_table(sp::read_csv(a.op.substr(5)));
    if (taps.size() > f.size()) throw sp::InputError("kernel longer than the data");
    A = sp::Operator::convolution(taps.values(), f.size() - taps.size() + 1);
  } else {
    throw sp::InputError("--op must be id, matrix:<file> or conv:<file>");
  }
  const sp::Shape domain = A->input_shape();
  std::optional<sp::Regularizer> J;
  if (a.reg == "ellipse") {
    if (a.metric.empty()) throw sp::InputError("--reg ellipse needs --metric");
    J = sp::Regularizer::quadratic(sp::matrix_from_table(sp::read_csv(a.metric)));
  } else {
    J = sp::regularizer_by_name(a.reg, domain);
  }
  return sp::Problem(*A, *J, f, a.alpha, a.beta);
}

sp::SolveOptions solve_options(const ProblemArgs& a) {
  sp::SolveOptions o;
  o.gap_tol = a.gap_tol;
  o.max_iters = a.max_iters;
  return o;
}

int run_experiment(const std::string& config, std::optional<sp::ExperimentKind> kind) {
  const sp::ExperimentConfig c = sp::load_config(config, kind);
  const sp::ExperimentReport rep = sp::run_experiment(c);
  rep.write(std::cout);
  std::cout << "outputs in " << c.output_dir << '\n';
  return rep.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solution paths and nonlinear spectral decompositions for one-homogeneous regularizers"};
  app.require_subcommand(1);

  std::string deconv_config, tv2d_config, run_config;
  auto* deconv = app.add_subcommand("deconv", "sparse deconvolution experiment");
  deconv->add_option("--config", deconv_config, "experiment config (INI)")->required()->check(CLI::ExistingFile);
  auto* tv2d = app.add_subcommand("tv2d", "total variation scale space experiment");
  tv2d->add_option("--config", tv2d_config, "experiment config (INI)")->required()->check(CLI::ExistingFile);
  auto* run = app.add_subcommand("run", "experiment of the kind named in the config (deconv, tv2d or custom)");
  run->add_option("--config", run_config, "experiment config (INI)")->required()->check(CLI::ExistingFile);

  ProblemArgs solve_args;
  double t = 0.0;
  std::string solve_out;
  auto* solve = app.add_subcommand("solve", "minimize the energy for one weight");
  add_problem_options(solve, solve_args);
  solve->add_option("--t", t, "regularization weight")->required();
  solve->add_option("--output", solve_out, "minimizer as CSV")->required();

  ProblemArgs path_args;
  double tmin = 0.0, tmax = 0.0;
  std::size_t points = 50;
  bool geometric = false;
  std::string path_out, solutions_out;
  auto* path = app.add_subcommand("path", "sample the solution path on a grid");
  add_problem_options(path, path_args);
  path->add_option("--tmin", tmin, "first grid time (geometric grids need it)");
  path->add_option("--tmax", tmax, "last grid time (default: 1.2 x extinction bound)");
  path->add_option("--points", points, "number of grid times")->capture_default_str();
  path->add_flag("--geometric", geometric, "geometric instead of uniform spacing");
  path->add_option("--output", path_out, "path table CSV (t,R,J,violation)")->required();
  path->add_option("--solutions", solutions_out, "optional CSV with one minimizer per row");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*deconv) return run_experiment(deconv_config, sp::ExperimentKind::Deconv);
    if (*tv2d) return run_experiment(tv2d_config, sp::ExperimentKind::TV2D);
    if (*run) return run_experiment(run_config, std::nullopt);

    if (*solve) {
      const sp::Problem pr = build_problem(solve_args);
      const sp::SolveResult r = sp::solve(pr, t, solve_options(solve_args));
      sp::write_signal_csv(solve_out, r.u);
      std::cout << "iterations " << r.iterations << ", violation " << r.violation << ", R " << r.residual << ", J "
                << r.reg_value << (r.note.empty() ? "" : ", " + r.note) << '\n';
      return r.converged ? 0 : 2;
    }

    if (*path) {
      const sp::Problem pr = build_problem(path_args);
      if (tmax <= 0.0) tmax = 1.2 * sp::extinction_bound(pr);
      if (!(tmax > 0.0)) throw sp::InputError("extinction bound is zero; pass --tmax");
      std::vector<double> grid;
      if (geometric) {
        if (!(tmin > 0.0)) throw sp::InputError("--geometric needs --tmin > 0");
        grid = sp::geometric_grid(tmin, tmax, points);
      } else if (tmin > 0.0) {
        if (points < 2 || !(tmin < tmax)) throw sp::InputError("need --points >= 2 and --tmin < --tmax");
        for (std::size_t i = 0; i < points; ++i)
          grid.push_back(tmin + (tmax - tmin) * static_cast<double>(i) / static_cast<double>(points - 1));
      } else {
        grid = sp::uniform_grid(tmax, points);
      }
      const sp::PathTable table = sp::sample_path(pr, grid, solve_options(path_args));
      {
        std::ofstream os(path_out);
        if (!os) throw sp::InputError("cannot write " + path_out);
        sp::write_path_csv(os, table);
      }
      if (!solutions_out.empty()) {
        std::ofstream os(solutions_out);
        if (!os) throw sp::InputError("cannot write " + solutions_out);
        sp::write_solutions_csv(os, table);
      }
      std::cout << table.size() << " grid points, max violation " << table.max_violation() << '\n';
      return table.all_converged() ? 0 : 2;
    }
  } catch (const sp::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 1;
  } catch (const sp::NotSupported& e) {
    std::cerr << "not supported: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
