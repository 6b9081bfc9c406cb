#pragma once

#include "config.hpp"
#include "io.hpp"
#include "path.hpp"
#include "singular.hpp"
#include "spectral.hpp"

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <future>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace spectralpath {

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ExperimentReport {
  std::vector<Check> checks;
  std::vector<std::string> notes;  // measured values worth printing
  std::vector<std::string> files;
  bool converged = true;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
  }
  int exit_code() const { return !converged ? 2 : (passed() ? 0 : 1); }

  void add(std::string name, bool ok, std::string detail) { checks.push_back({std::move(name), ok, std::move(detail)}); }

  void write(std::ostream& os) const {
    for (const auto& n : notes) os << n << '\n';
    for (const auto& c : checks) os << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    os << (converged ? "" : "WARN some grid points did not converge\n");
  }
};

// SPECTRALPATH_THREADS caps how many model runs proceed at once.
inline unsigned thread_cap() {
  unsigned cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SPECTRALPATH_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) throw InputError("SPECTRALPATH_THREADS must be a positive integer");
    cap = static_cast<unsigned>(v);
  }
  return cap;
}

template <class T>
std::vector<T> run_jobs(const std::vector<std::function<T()>>& jobs, unsigned cap = thread_cap()) {
  std::vector<T> out;
  out.reserve(jobs.size());
  for (std::size_t start = 0; start < jobs.size(); start += cap) {
    const std::size_t stop = std::min(jobs.size(), start + cap);
    if (stop - start == 1) {
      out.push_back(jobs[start]());
      continue;
    }
    std::vector<std::future<T>> running;
    for (std::size_t i = start; i < stop; ++i) running.push_back(std::async(std::launch::async, jobs[i]));
    for (auto& f : running) out.push_back(f.get());
  }
  return out;
}

// Unit-sum samples of a centred Gaussian.
inline Vec gaussian_kernel(std::size_t size, double sigma) {
  if (size == 0 || !(sigma > 0.0)) throw InputError("kernel size and width must be positive");
  Vec k(static_cast<Eigen::Index>(size));
  const double c = 0.5 * static_cast<double>(size - 1);
  for (std::size_t i = 0; i < size; ++i) {
    const double x = (static_cast<double>(i) - c) / sigma;
    k[static_cast<Eigen::Index>(i)] = std::exp(-0.5 * x * x);
  }
  return k / k.sum();
}

inline std::string model_tag(const ModelRun& m) {
  std::ostringstream os;
  os << 'a' << m.alpha << 'b' << m.beta;
  return os.str();
}

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

class OutputDir {
 public:
  OutputDir(const std::string& dir, ExperimentReport& rep) : dir_(dir), rep_(rep) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw InputError("cannot create output directory " + dir_.string() + ": " + ec.message());
  }

  template <class Writer>
  void text(const std::string& name, Writer&& w) {
    const auto path = (dir_ / name).string();
    auto out = open_out(path);
    w(out);
    if (!out) throw InputError("failed writing " + path);
    rep_.files.push_back(path);
  }

  void image(const std::string& name, const Signal& img) {
    const auto path = (dir_ / name).string();
    write_pgm(path, img);
    rep_.files.push_back(path);
  }

 private:
  std::filesystem::path dir_;
  ExperimentReport& rep_;
};

inline SolveOptions solve_options(const ExperimentConfig& c) {
  SolveOptions o;
  o.gap_tol = c.gap_tol;
  o.max_iters = c.max_iters;
  return o;
}

struct ModelOutcome {
  ModelRun model;
  PathTable table;
  double horizon = 0.0;  // extinction time estimate used for the grid
  std::optional<double> exact_time, extinction_time;
  std::optional<SpectralMeasure> psi, phi;
};

inline void write_rows(std::ostream& os, const std::vector<std::pair<double, Vec>>& rows) {
  const auto old = os.precision(17);
  for (const auto& [t, u] : rows) {
    os << t;
    for (Eigen::Index i = 0; i < u.size(); ++i) os << ',' << u[i];
    os << '\n';
  }
  os.precision(old);
}

inline void common_checks(const ModelOutcome& m, const ExperimentConfig& c, ExperimentReport& rep) {
  const std::string tag = model_tag(m.model);
  std::size_t bad = 0;
  for (const auto& e : m.table.entries) bad += e.converged ? 0 : 1;
  if (bad) rep.converged = false;
  rep.add(tag + " convergence", bad == 0, std::to_string(bad) + " of " + std::to_string(m.table.size()) + " grid points flagged");
  rep.add(tag + " optimality", m.table.max_violation() <= c.report_tol,
          "max violation " + fmt(m.table.max_violation()) + " (tolerance " + fmt(c.report_tol) + ")");
}

inline void emit_model(OutputDir& out, const ModelOutcome& m) {
  const std::string tag = model_tag(m.model);
  out.text("path_" + tag + ".csv", [&](std::ostream& os) { write_path_csv(os, m.table); });
  out.text("solutions_" + tag + ".csv", [&](std::ostream& os) { write_solutions_csv(os, m.table); });
  if (m.psi) out.text("spectrum_psi_" + tag + ".csv", [&](std::ostream& os) { write_spectrum_csv(os, *m.psi); });
  if (m.phi) out.text("spectrum_phi_" + tag + ".csv", [&](std::ostream& os) { write_spectrum_csv(os, *m.phi); });
}

// Solve one model over [0, span * horizon] and derive what the model supports.
inline ModelOutcome run_model(const Problem& base, const ModelRun& run, double horizon, const ExperimentConfig& c,
                              int bisect_steps, double jump_offset) {
  const Problem pr = base.with_model(run.alpha, run.beta);
  const double end = horizon > 0.0 ? c.span * horizon : 1.0;
  ModelOutcome m{run, sample_path(pr, uniform_grid(end, c.points), solve_options(c)), horizon, {}, {}, {}, {}};
  if (run.beta == 1 && c.refine && horizon > 0.0) {
    m.extinction_time = detect_extinction(m.table, 1e-7, bisect_steps);
    if (run.alpha == 1.0) m.exact_time = detect_exact_penalization(m.table, 1e-7, bisect_steps);
  }
  if (run.alpha == 2.0 && run.beta == 1) m.psi = psi_measure(m.table);
  if (run.alpha == 1.0 && run.beta == 1) {
    // a sample just past the exact-fit boundary resolves the jump into a single bin
    if (m.exact_time && *m.exact_time > 0.0) m.table = insert_samples(m.table, {*m.exact_time * (1.0 + jump_offset)});
    m.phi = phi_measure(m.table);
  }
  return m;
}

// Time horizon for the beta = 1 model of the given alpha.
inline double horizon_for(const Problem& base, double alpha) {
  return extinction_bound(base.with_model(alpha, 1));
}

}  // namespace detail

inline Regularizer regularizer_by_name(const std::string& name, const Shape& shape) {
  if (name == "l1") return Regularizer::l1(shape.size());
  if (name == "linf") return Regularizer::linf(shape.size());
  if (name == "tv1d") return Regularizer::tv1d(shape.size());
  if (name == "tv2d") {
    if (shape.dims != 2) throw InputError("tv2d needs an image");
    return Regularizer::tv2d(shape.rows, shape.cols);
  }
  throw InputError("unknown regularizer " + name);
}

// Peaks convolved with a Gaussian kernel: both models, spectra, and the closed-form checks.
inline ExperimentReport run_deconv(const ExperimentConfig& c) {
  ExperimentReport rep;
  const Vec kernel = c.taps.empty() ? gaussian_kernel(c.kernel_size, c.kernel_sigma)
                                    : Eigen::Map<const Vec>(c.taps.data(), static_cast<Eigen::Index>(c.taps.size()));
  const PeakSingular ps = peak_singular_value(kernel);
  if (!ps.valid) throw InputError("kernel autocorrelation exceeds its energy; unit peaks are not singular vectors");
  const std::size_t n = c.n;
  const Operator A = Operator::convolution(kernel, n);
  const Regularizer J = Regularizer::l1(n);

  std::vector<Component> comps;
  for (std::size_t i = 0; i < c.peaks.size(); ++i) {
    Vec u = Vec::Zero(static_cast<Eigen::Index>(n));
    u[static_cast<Eigen::Index>(c.peaks[i])] = 1.0;
    comps.push_back({u, c.heights[i], ps.lambda});
  }
  const Decomposition d = make_decomposition(A, J, comps, 1e-8, EqualRatios::Merge);
  if (!d.sub0.ok)
    throw ConfigurationError("nested subgradient condition fails at k = " + std::to_string(*d.sub0.failing_index) +
                             " (distance " + detail::fmt(d.sub0.distance) + ")");
  const Problem base(A, J, Signal(d.data), 2.0, 1);
  const std::vector<double> taus = d.critical_taus();
  const std::vector<double> bps = combination_breakpoints(d);

  std::ostringstream head;
  head << std::setprecision(10) << "lambda " << ps.lambda << " (1/||kernel||^2 = " << 1.0 / kernel.squaredNorm() << ")";
  rep.notes.push_back(head.str());
  for (std::size_t k = 0; k < taus.size(); ++k)
    rep.notes.push_back("component " + std::to_string(k + 1) + ": tau " + detail::fmt(taus[k]) + ", t " + detail::fmt(bps[k]));

  std::vector<std::function<detail::ModelOutcome()>> jobs;
  for (const auto& run : c.models)
    jobs.push_back([&, run] { return detail::run_model(base, run, detail::horizon_for(base, run.alpha), c, 40, 1e-5); });
  const auto outcomes = run_jobs(jobs);

  detail::OutputDir out(c.output_dir, rep);
  std::ostringstream atoms_csv;
  atoms_csv << std::setprecision(17) << "model,kind,time,expected_time,mass_l1\n";
  const double sol_norm = d.solution.norm();

  for (const auto& m : outcomes) {
    const std::string tag = model_tag(m.model);
    detail::common_checks(m, c, rep);
    detail::emit_model(out, m);
    std::vector<std::pair<double, Vec>> critical;

    if (m.model.alpha == 2.0 && m.model.beta == 1) {
      double err = 0.0;
      for (const auto& e : m.table.entries) err = std::max(err, (e.u - combination_path(d, e.t)).norm() / sol_norm);
      rep.add(tag + " closed-form path", err <= c.check_tol, "max relative error " + detail::fmt(err));

      const auto& psi = *m.psi;
      const double bin = m.table.grid()[1] - m.table.grid()[0];
      bool placed = psi.atoms.size() == taus.size();
      double worst_shift = 0.0, worst_mass = 0.0;
      for (std::size_t k = 0; placed && k < taus.size(); ++k) {
        const Atom& a = psi.atoms[k];
        worst_shift = std::max(worst_shift, std::abs(a.time - taus[k]) / bin);
        const Vec expect = d.components[k].gamma * d.images[k];
        worst_mass = std::max(worst_mass, (a.mass - expect).norm() / expect.norm());
        atoms_csv << tag << ",psi," << a.time << ',' << taus[k] << ',' << a.mass.lpNorm<1>() << '\n';
      }
      placed = placed && worst_shift <= 1.0;
      rep.add(tag + " psi atoms", placed,
              std::to_string(psi.atoms.size()) + " atoms for " + std::to_string(taus.size()) +
                  " distinct ratios, worst offset " + detail::fmt(worst_shift) + " bins");
      rep.add(tag + " psi atom masses", placed && worst_mass <= c.check_tol, "max relative error " + detail::fmt(worst_mass));
      const double rec = (reconstruct(psi) - base.f()).norm() / base.f().norm();
      rep.add(tag + " psi reconstruction", rec <= c.check_tol, "relative error " + detail::fmt(rec));
      for (double tau : taus) critical.emplace_back(tau, solve(base, tau, detail::solve_options(c)).u.values());
    }

    if (m.model.alpha == 1.0 && m.model.beta == 1) {
      double err = 0.0;
      for (const auto& e : m.table.entries)
        err = std::max(err, (e.u - combination_path(d, combination_reparam_S(d, e.t))).norm() / sol_norm);
      rep.add(tag + " closed-form path", err <= c.check_tol, "max relative error " + detail::fmt(err));
      if (m.exact_time) {
        const double rel = std::abs(*m.exact_time - bps.front()) / bps.front();
        rep.add(tag + " exact penalization time", rel <= 1e-4,
                "detected " + detail::fmt(*m.exact_time) + ", expected " + detail::fmt(bps.front()));
        critical.emplace_back(*m.exact_time, solve(m.table.problem, *m.exact_time, detail::solve_options(c)).u.values());
      }
      if (m.extinction_time) {
        const double rel = std::abs(*m.extinction_time - bps.back()) / bps.back();
        rep.add(tag + " extinction time", rel <= 1e-4,
                "detected " + detail::fmt(*m.extinction_time) + ", expected " + detail::fmt(bps.back()));
        critical.emplace_back(*m.extinction_time,
                              solve(m.table.problem, *m.extinction_time, detail::solve_options(c)).u.values());
      }
      const auto& phi = *m.phi;
      const auto grid = m.table.grid();
      bool one = phi.atoms.size() == 1;
      double mass_err = 1.0;
      if (one) {
        const Atom& a = phi.atoms.front();
        const std::size_t b = a.first_bin;
        const double width = b > 0 ? grid[b] - grid[b - 1] : grid[0];
        one = std::abs(a.time - bps.front()) <= std::max(width, grid[1] - grid[0]);
        const Vec expect = d.data - A.apply(combination_path(d, taus.front()));
        mass_err = (a.mass - expect).norm() / expect.norm();
        atoms_csv << tag << ",phi," << a.time << ',' << bps.front() << ',' << a.mass.lpNorm<1>() << '\n';
      }
      rep.add(tag + " phi atom", one, std::to_string(phi.atoms.size()) + " atoms, expected one at " + detail::fmt(bps.front()));
      rep.add(tag + " phi atom mass", one && mass_err <= 1e-3, "relative error " + detail::fmt(mass_err));
      const double rec = (reconstruct(phi) - base.f()).norm() / base.f().norm();
      rep.add(tag + " phi reconstruction", rec <= c.check_tol, "relative error " + detail::fmt(rec));
    }
    if (!critical.empty())
      out.text("critical_" + tag + ".csv", [&](std::ostream& os) { detail::write_rows(os, critical); });
  }
  out.text("atoms.csv", [&](std::ostream& os) { os << atoms_csv.str(); });
  out.text("data.csv", [&](std::ostream& os) { write_signal_csv(os, Signal(d.data)); });
  out.text("report.txt", [&](std::ostream& os) { rep.write(os); });
  return rep;
}

// A deterministic test image with flat regions, a disk and a striped patch.
inline Signal synthetic_image(std::size_t rows, std::size_t cols) {
  Vec img(static_cast<Eigen::Index>(rows * cols));
  const double R = static_cast<double>(rows), C = static_cast<double>(cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const double y = static_cast<double>(r) / R, x = static_cast<double>(c) / C;
      double v = 0.2;
      if (y > 0.15 && y < 0.45 && x > 0.1 && x < 0.45) v = 0.8;
      if ((y - 0.68) * (y - 0.68) + (x - 0.62) * (x - 0.62) < 0.04) v = 0.6;
      if (y > 0.08 && y < 0.4 && x > 0.58 && x < 0.92) v += 0.1 * ((c / 2) % 2 ? 1.0 : -1.0);
      if (y > 0.75 && y < 0.85 && x > 0.12 && x < 0.22) v = 1.0;
      img[static_cast<Eigen::Index>(r * cols + c)] = v;
    }
  return Signal::image(rows, cols, img);
}

namespace detail {

// Smallest tried tau at which the (2,1) minimizer equals the mean; grows geometrically from a lower bound.
inline double tv_extinction_horizon(const Problem& pr, const SolveOptions& opts) {
  const Vec g = pr.f() - pr.projection().project(pr.f());
  const double jg = pr.reg().evaluate(g);
  if (!(jg > 0.0)) return 0.0;
  const double scale = 1e-8 * (1.0 + pr.f().norm());
  double tau = g.squaredNorm() / jg;
  std::optional<SolveResult> warm;
  for (int k = 0; k < 60; ++k) {
    SolveOptions o = opts;
    if (warm) {
      o.warm_u = warm->u.values();
      o.warm_dual = warm->dual;
    }
    SolveResult r = solve(pr, tau, o);
    if ((r.u.values() - pr.projection().project(pr.f())).norm() <= scale) return tau;
    warm = std::move(r);
    tau *= 1.25;
  }
  throw ConfigurationError("extinction horizon search did not terminate");
}

}  // namespace detail

inline ExperimentReport run_tv2d(const ExperimentConfig& c) {
  ExperimentReport rep;
  Signal img = c.source.empty() ? synthetic_image(c.rows, c.cols) : read_pgm(c.source).pixels;
  if (!c.source.empty() && (img.shape().rows > c.rows || img.shape().cols > c.cols)) {
    const std::size_t r0 = (img.shape().rows - std::min(c.rows, img.shape().rows)) / 2;
    const std::size_t c0 = (img.shape().cols - std::min(c.cols, img.shape().cols)) / 2;
    const std::size_t rr = std::min(c.rows, img.shape().rows), cc = std::min(c.cols, img.shape().cols);
    Vec crop(static_cast<Eigen::Index>(rr * cc));
    for (std::size_t r = 0; r < rr; ++r)
      for (std::size_t q = 0; q < cc; ++q) crop[static_cast<Eigen::Index>(r * cc + q)] = img.at(r0 + r, c0 + q);
    img = Signal::image(rr, cc, crop);
  }
  const Shape shape = img.shape();
  const Problem base(Operator::identity(shape), Regularizer::tv2d(shape.rows, shape.cols), img, 2.0, 1);
  const double tau_hi = detail::tv_extinction_horizon(base, detail::solve_options(c));
  const double resid = (base.f() - base.projection().project(base.f())).norm();
  rep.notes.push_back("image " + shape.str() + ", extinction horizon tau " + detail::fmt(tau_hi));

  std::vector<std::function<detail::ModelOutcome()>> jobs;
  for (const auto& run : c.models) {
    if (run.beta != 1) throw InputError("tv2d runs support beta = 1 only");
    const double horizon = tau_hi > 0.0 ? tau_hi / std::pow(resid, 2.0 - run.alpha) : 0.0;
    jobs.push_back([&, run, horizon] { return detail::run_model(base, run, horizon, c, 12, 1e-3); });
  }
  const auto outcomes = run_jobs(jobs);

  detail::OutputDir out(c.output_dir, rep);
  out.image("original.pgm", img);
  const double fmax = base.f().cwiseAbs().maxCoeff() + 1e-300;
  for (const auto& m : outcomes) {
    const std::string tag = model_tag(m.model);
    detail::common_checks(m, c, rep);
    detail::emit_model(out, m);
    for (const SpectralMeasure* sm : {m.psi ? &*m.psi : nullptr, m.phi ? &*m.phi : nullptr}) {
      if (!sm) continue;
      const std::string name = tag + (sm->kind == SpectralKind::Psi ? "_psi" : "_phi");
      const double unit = c.filters.relative ? (m.extinction_time.value_or(m.horizon)) : 1.0;
      const Vec rec = reconstruct(*sm);
      const Vec ident = apply_filter(*sm, FilterSpec::identity());
      const double id_err = std::max((ident - rec).cwiseAbs().maxCoeff(), (ident - base.f()).cwiseAbs().maxCoeff());
      rep.add(name + " identity filter", id_err <= c.check_tol, "max abs deviation " + detail::fmt(id_err));
      const double rec_err = (rec - base.f()).cwiseAbs().maxCoeff();
      rep.add(name + " reconstruction", rec_err <= c.check_tol, "max abs error " + detail::fmt(rec_err));

      auto save = [&](const std::string& label, const Vec& v, double offset) {
        out.image(name + "_" + label + ".pgm", Signal(shape, (v.array() + offset).matrix()));
        out.text(name + "_" + label + ".csv", [&](std::ostream& os) { write_signal_csv(os, Signal(shape, v)); });
      };
      std::optional<Vec> low;
      if (c.filters.lowpass) {
        low = apply_filter(*sm, FilterSpec::lowpass(*c.filters.lowpass * unit));
        save("lowpass", *low, 0.5);
      }
      if (c.filters.highpass) {
        const Vec high = apply_filter(*sm, FilterSpec::highpass(*c.filters.highpass * unit));
        save("highpass", high, 0.0);
        if (low && *c.filters.lowpass == *c.filters.highpass) {
          const double comp = (*low + high - rec).cwiseAbs().maxCoeff() / fmax;
          rep.add(name + " complementarity", comp <= 1e-6, "max relative deviation " + detail::fmt(comp));
        }
      }
      if (c.filters.bandpass) {
        const auto [lo, hi] = *c.filters.bandpass;
        save("bandpass", apply_filter(*sm, FilterSpec::bandpass(lo * unit, hi * unit)), 0.5);
      }
    }
  }
  out.text("report.txt", [&](std::ostream& os) { rep.write(os); });
  return rep;
}

// User data under an optional convolution: paths, spectra and generic checks only.
inline ExperimentReport run_custom(const ExperimentConfig& c) {
  ExperimentReport rep;
  const Signal f = read_signal_csv(c.source);
  if (f.shape().dims != 1) throw InputError("custom experiments take a single-column signal");
  const std::size_t m = f.size();
  Operator A = Operator::identity(f.shape());
  if (!c.taps.empty()) {
    if (c.taps.size() > m) throw InputError("kernel longer than the data");
    A = Operator::convolution(Eigen::Map<const Vec>(c.taps.data(), static_cast<Eigen::Index>(c.taps.size())),
                              m - c.taps.size() + 1);
  }
  const Problem base(A, regularizer_by_name(c.reg, A.input_shape()), f, 2.0, 1);
  std::vector<std::function<detail::ModelOutcome()>> jobs;
  for (const auto& run : c.models)
    jobs.push_back([&, run] { return detail::run_model(base, run, detail::horizon_for(base, run.alpha), c, 40, 1e-5); });
  const auto outcomes = run_jobs(jobs);
  detail::OutputDir out(c.output_dir, rep);
  for (const auto& mo : outcomes) {
    detail::common_checks(mo, c, rep);
    detail::emit_model(out, mo);
    const std::string tag = model_tag(mo.model);
    if (mo.exact_time) rep.notes.push_back(tag + " exact penalization until " + detail::fmt(*mo.exact_time));
    if (mo.extinction_time) rep.notes.push_back(tag + " extinction at " + detail::fmt(*mo.extinction_time));
    for (const SpectralMeasure* sm : {mo.psi ? &*mo.psi : nullptr, mo.phi ? &*mo.phi : nullptr}) {
      if (!sm) continue;
      const Vec target = base.op().apply(mo.table.origin);
      const double rec = (reconstruct(*sm) - target).norm() / (1.0 + target.norm());
      rep.add(tag + (sm->kind == SpectralKind::Psi ? " psi" : " phi") + " reconstruction", rec <= c.check_tol,
              "relative error " + detail::fmt(rec));
    }
  }
  out.text("report.txt", [&](std::ostream& os) { rep.write(os); });
  return rep;
}

inline ExperimentReport run_experiment(const ExperimentConfig& c) {
  switch (c.kind) {
    case ExperimentKind::Deconv: return run_deconv(c);
    case ExperimentKind::TV2D: return run_tv2d(c);
    case ExperimentKind::Custom: return run_custom(c);
  }
  throw InputError("unknown experiment kind");
}

}  // namespace spectralpath
