#pragma once

#include "path.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <vector>

namespace spectralpath {

enum class SpectralKind { Phi, Psi };
enum class SpectralSpace { Data, Solution };

struct SpectralOptions {
  SpectralSpace space = SpectralSpace::Data;
  bool include_origin = true;   // treat the t = 0 state as the first sample
  double atom_factor = 10.0;    // mass must exceed this multiple of the local median
  int window = 5;               // bins in the median window, centred
  double atom_floor = 1e-3;     // relative to the largest bin mass
};

struct Atom {
  double time = 0.0;
  Vec mass;
  std::size_t first_bin = 0, last_bin = 0;
  double ratio = 0.0;  // mass over local median; infinite when the surroundings are at rounding level
};

// Per-bin masses of phi_t = -(d/dt) u_t or psi_t = t u_t'' on the sampled grid,
// plus the mass at infinity (the tail).
struct SpectralMeasure {
  SpectralKind kind = SpectralKind::Phi;
  Shape shape;
  std::vector<double> times;
  std::vector<Vec> masses;
  std::vector<int> atom_of;  // index into atoms, -1 for none
  std::vector<Atom> atoms;
  Vec tail;

  std::size_t bins() const { return masses.size(); }
  double effective_time(std::size_t i) const {
    return atom_of[i] >= 0 ? atoms[static_cast<std::size_t>(atom_of[i])].time : times[i];
  }
};

namespace detail {

inline double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2) return hi;
  return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
}

inline std::vector<double> window_values(const std::vector<double>& mag, std::size_t i, int window,
                                         const std::vector<char>* skip) {
  const std::ptrdiff_t half = window / 2, n = static_cast<std::ptrdiff_t>(mag.size());
  std::vector<double> w;
  for (std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i) - half; j <= static_cast<std::ptrdiff_t>(i) + half; ++j) {
    if (j < 0 || j >= n) continue;
    if (skip && (*skip)[static_cast<std::size_t>(j)] && j != static_cast<std::ptrdiff_t>(i)) continue;
    w.push_back(mag[static_cast<std::size_t>(j)]);
  }
  return w;
}

inline void detect_atoms(SpectralMeasure& m, const SpectralOptions& opts) {
  const std::size_t n = m.bins();
  std::vector<double> mag(n);
  for (std::size_t i = 0; i < n; ++i) mag[i] = m.masses[i].lpNorm<1>();
  const double top = n ? *std::max_element(mag.begin(), mag.end()) : 0.0;
  const double floor = opts.atom_floor * top;
  const double noise = 1e-8 * top;

  std::vector<char> flag(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double med = median_of(window_values(mag, i, opts.window, nullptr));
    flag[i] = mag[i] > floor && mag[i] > opts.atom_factor * med;
  }
  // a jump or kink falling between samples spreads over two adjacent bins
  std::vector<char> grown = flag;
  for (std::size_t i = 0; i < n; ++i) {
    if (flag[i]) continue;
    const bool next_to = (i > 0 && flag[i - 1]) || (i + 1 < n && flag[i + 1]);
    if (!next_to) continue;
    const double med = median_of(window_values(mag, i, opts.window + 2, &flag));
    if (mag[i] > noise && mag[i] > opts.atom_factor * med) grown[i] = 1;
  }

  m.atom_of.assign(n, -1);
  m.atoms.clear();
  for (std::size_t i = 0; i < n;) {
    if (!grown[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && grown[j + 1]) ++j;
    Atom a;
    a.first_bin = i;
    a.last_bin = j;
    a.mass = Vec::Zero(m.masses[i].size());
    double wsum = 0.0, tsum = 0.0, total = 0.0;
    for (std::size_t k = i; k <= j; ++k) {
      a.mass += m.masses[k];
      const double w = m.kind == SpectralKind::Psi ? mag[k] / m.times[k] : mag[k];
      wsum += w;
      tsum += w * m.times[k];
      total += mag[k];
      m.atom_of[k] = static_cast<int>(m.atoms.size());
    }
    a.time = wsum > 0.0 ? tsum / wsum : m.times[i];
    std::vector<double> around;
    const std::ptrdiff_t half = opts.window / 2;
    for (std::ptrdiff_t k = static_cast<std::ptrdiff_t>(i) - half; k <= static_cast<std::ptrdiff_t>(j) + half; ++k)
      if (k >= 0 && k < static_cast<std::ptrdiff_t>(n) && !grown[static_cast<std::size_t>(k)])
        around.push_back(mag[static_cast<std::size_t>(k)]);
    const double med = median_of(around);
    a.ratio = med > noise ? total / med : std::numeric_limits<double>::infinity();
    m.atoms.push_back(std::move(a));
    i = j + 1;
  }
}

struct States {
  std::vector<double> times;
  std::vector<Vec> values;
  Vec tail;
  Shape shape;
};

inline States collect_states(const PathTable& table, const SpectralOptions& opts) {
  States s;
  const bool data = opts.space == SpectralSpace::Data;
  s.shape = data ? table.problem.op().output_shape() : table.problem.reg().domain();
  if (opts.include_origin) {
    s.times.push_back(0.0);
    s.values.push_back(data ? table.origin_forward : table.origin);
  }
  for (const auto& e : table.entries) {
    s.times.push_back(e.t);
    s.values.push_back(data ? e.forward : e.u);
  }
  s.tail = data ? table.limit_forward : table.limit;
  return s;
}

inline bool uniform(const std::vector<double>& t, std::size_t from) {
  if (t.size() < from + 2) return false;
  const double d = t[from + 1] - t[from];
  for (std::size_t i = from + 1; i < t.size(); ++i)
    if (std::abs(t[i] - t[i - 1] - d) > 1e-9 * d) return false;
  return true;
}

}  // namespace detail

// phi: mass of bin (t_{i-1}, t_i] is u_{t_{i-1}} - u_{t_i}, placed at t_i. Meant for alpha = 1 paths.
inline SpectralMeasure phi_measure(const PathTable& table, const SpectralOptions& opts = {}) {
  if (table.alpha() != 1.0) throw InputError("phi measure expects a path of the alpha = 1 model");
  const detail::States s = detail::collect_states(table, opts);
  if (s.times.size() < 3) throw InputError("phi measure needs at least three samples");
  SpectralMeasure m;
  m.kind = SpectralKind::Phi;
  m.shape = s.shape;
  for (std::size_t i = 1; i < s.times.size(); ++i) {
    m.times.push_back(s.times[i]);
    m.masses.push_back(s.values[i - 1] - s.values[i]);
  }
  m.tail = s.tail;
  detail::detect_atoms(m, opts);
  return m;
}

// psi: mass at interior tau_i is tau_i (v_{i+1} - 2 v_i + v_{i-1}) / dtau on a
// uniform grid; the two boundary bins carry no mass. Meant for (2,1) paths.
inline SpectralMeasure psi_measure(const PathTable& table, const SpectralOptions& opts = {}) {
  if (table.alpha() != 2.0 || table.beta() != 1) throw InputError("psi measure expects a path of the (2,1) model");
  detail::States s = detail::collect_states(table, opts);
  if (!detail::uniform(s.times, 0)) {
    if (opts.include_origin && detail::uniform(s.times, 1)) {
      s.times.erase(s.times.begin());
      s.values.erase(s.values.begin());
    } else {
      throw InputError("psi measure needs a uniform time grid");
    }
  }
  if (s.times.size() < 3) throw InputError("psi measure needs at least three samples");
  const double dt = s.times[1] - s.times[0];
  SpectralMeasure m;
  m.kind = SpectralKind::Psi;
  m.shape = s.shape;
  const std::size_t n = s.times.size();
  for (std::size_t i = 0; i < n; ++i) {
    m.times.push_back(s.times[i]);
    if (i == 0 || i + 1 == n) {
      m.masses.push_back(Vec::Zero(s.values[i].size()));
    } else {
      m.masses.push_back(s.times[i] * (s.values[i + 1] - 2.0 * s.values[i] + s.values[i - 1]) / dt);
    }
  }
  m.tail = s.tail;
  detail::detect_atoms(m, opts);
  return m;
}

inline Vec reconstruct(const SpectralMeasure& m) {
  Vec out = m.tail;
  for (const auto& v : m.masses) out += v;
  return out;
}

struct FilterSpec {
  enum class Kind { Identity, LowPass, HighPass, BandPass, Custom };
  Kind kind = Kind::Identity;
  double lo = 0.0, hi = 0.0;
  std::vector<double> values;  // per bin, for Custom
  double f_inf = 1.0;

  static FilterSpec identity() { return {}; }
  // keeps times <= cutoff
  static FilterSpec lowpass(double cutoff, double f_inf = 0.0) { return {Kind::LowPass, 0.0, cutoff, {}, f_inf}; }
  // keeps times > cutoff
  static FilterSpec highpass(double cutoff, double f_inf = 1.0) { return {Kind::HighPass, cutoff, 0.0, {}, f_inf}; }
  // keeps lo <= t <= hi
  static FilterSpec bandpass(double lo, double hi, double f_inf = 0.0) { return {Kind::BandPass, lo, hi, {}, f_inf}; }
  static FilterSpec custom(std::vector<double> per_bin, double f_inf) {
    return {Kind::Custom, 0.0, 0.0, std::move(per_bin), f_inf};
  }

  double weight(double t, std::size_t bin) const {
    switch (kind) {
      case Kind::Identity: return 1.0;
      case Kind::LowPass: return t <= hi ? 1.0 : 0.0;
      case Kind::HighPass: return t > lo ? 1.0 : 0.0;
      case Kind::BandPass: return t >= lo && t <= hi ? 1.0 : 0.0;
      case Kind::Custom: return values[bin];
    }
    return 0.0;
  }
};

// sum_i F(t_i) mass_i + F(inf) tail; bins inside an atom use the atom's time.
inline Vec apply_filter(const SpectralMeasure& m, const FilterSpec& F) {
  if (F.kind == FilterSpec::Kind::Custom && F.values.size() != m.bins())
    throw InputError("custom filter has " + std::to_string(F.values.size()) + " values for " +
                     std::to_string(m.bins()) + " bins");
  Vec out = F.f_inf * m.tail;
  for (std::size_t i = 0; i < m.bins(); ++i) {
    const double w = F.weight(m.effective_time(i), i);
    if (w != 0.0) out += w * m.masses[i];
  }
  return out;
}

struct SpectrumPoint {
  double t = 0.0;
  double mass_l1 = 0.0;
  bool is_atom = false;
};

inline std::vector<SpectrumPoint> spectrum(const SpectralMeasure& m) {
  std::vector<SpectrumPoint> s;
  for (std::size_t i = 0; i < m.bins(); ++i) s.push_back({m.times[i], m.masses[i].lpNorm<1>(), m.atom_of[i] >= 0});
  return s;
}

// Atoms of the coarse measure that reappear in the refined one with a ratio that does not shrink.
inline std::vector<Atom> confirm_atoms(const SpectralMeasure& coarse, const SpectralMeasure& fine) {
  std::vector<Atom> kept;
  for (const auto& a : coarse.atoms) {
    const std::size_t b = a.first_bin;
    const double width = b > 0 ? coarse.times[b] - coarse.times[b - 1]
                               : (coarse.bins() > 1 ? coarse.times[1] - coarse.times[0] : coarse.times[0]);
    for (const auto& g : fine.atoms) {
      if (std::abs(g.time - a.time) <= width && g.ratio >= a.ratio) {
        kept.push_back(a);
        break;
      }
    }
  }
  return kept;
}

inline void write_spectrum_csv(std::ostream& os, const SpectralMeasure& m) {
  const auto old = os.precision(17);
  os << "t,mass_l1,is_atom\n";
  for (const auto& p : spectrum(m)) os << p.t << ',' << p.mass_l1 << ',' << (p.is_atom ? 1 : 0) << '\n';
  os.precision(old);
}

}  // namespace spectralpath
