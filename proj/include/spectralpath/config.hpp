#pragma once

#include "core.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace spectralpath {

enum class ExperimentKind { Deconv, TV2D, Custom };

struct ModelRun {
  double alpha = 2.0;
  int beta = 1;
};

struct FilterConfig {
  std::optional<double> lowpass;   // cutoff
  std::optional<double> highpass;  // cutoff
  std::optional<std::pair<double, double>> bandpass;
  bool relative = true;  // cutoffs as fractions of the model's extinction time
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Deconv;
  std::string output_dir = "out";

  std::string source;  // CSV signal, or PGM image for tv2d
  std::size_t n = 256;
  std::vector<std::size_t> peaks{40, 80, 128, 170, 210};
  std::vector<double> heights{-0.1, 0.2, 0.2, -0.4, 0.5};
  std::size_t rows = 64, cols = 64;

  std::vector<double> taps;  // explicit kernel; empty means a sampled Gaussian
  std::size_t kernel_size = 9;
  double kernel_sigma = 1.5;
  std::string reg = "l1";  // custom runs: l1 | linf | tv1d

  std::vector<ModelRun> models{{2.0, 1}, {1.0, 1}};

  std::size_t points = 120;
  double span = 1.2;  // grid end as a multiple of the extinction time
  bool refine = true;

  double gap_tol = -1.0;  // solver tolerance, negative for the solver default
  int max_iters = 100000;
  double report_tol = 1e-6;
  double check_tol = 1e-4;  // closed-form and filter comparisons

  FilterConfig filters;
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    const auto b = item.find_first_not_of(" \t"), e = item.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? std::string() : item.substr(b, e - b + 1));
  }
  return out;
}

template <class T>
T parse_value(const std::string& key, const std::string& text) {
  if (std::is_unsigned_v<T> && text.find('-') != std::string::npos)
    throw InputError("config key " + key + " must be non-negative");
  std::istringstream in(text);
  T v{};
  in >> v;
  if (in.fail() || !(in >> std::ws).eof()) throw InputError("config key " + key + ": cannot parse '" + text + "'");
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) throw InputError("config key " + key + " must be finite");
  }
  return v;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  for (const auto& item : split_list(text)) out.push_back(parse_value<T>(key, item));
  return out;
}

inline bool parse_bool(const std::string& key, std::string text) {
  std::transform(text.begin(), text.end(), text.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (text == "true" || text == "yes" || text == "1" || text == "on") return true;
  if (text == "false" || text == "no" || text == "0" || text == "off") return false;
  throw InputError("config key " + key + ": expected a boolean, got '" + text + "'");
}

}  // namespace detail

// `expected`, when given, is the kind implied by the caller and must agree with the file.
inline ExperimentConfig parse_config(std::istream& in, const std::string& base_dir = ".",
                                     std::optional<ExperimentKind> expected = std::nullopt) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParseError("config line " + std::to_string(e.line()) + ": " + e.message(), e.line());
  }

  static const std::set<std::string> known{
      "experiment.kind",  "experiment.output", "data.path",        "data.n",          "data.peaks",
      "data.heights",     "data.rows",         "data.cols",        "kernel.taps",     "kernel.size",
      "kernel.sigma",     "model.reg",         "model.runs",       "grid.points",     "grid.span",
      "grid.refine",      "solver.gap_tol",    "solver.max_iters", "check.report_tol", "check.tolerance",
      "filters.lowpass",  "filters.highpass",  "filters.bandpass", "filters.relative"};
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw InputError("config key '" + section + "' is outside a section");
    for (const auto& [key, value] : body)
      if (!known.count(section + "." + key)) throw InputError("unknown config key " + section + "." + key);
  }

  auto get = [&](const std::string& path) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(path)) return *v;
    return std::nullopt;
  };

  ExperimentConfig c;
  if (auto v = get("experiment.kind")) {
    if (*v == "deconv") c.kind = ExperimentKind::Deconv;
    else if (*v == "tv2d") c.kind = ExperimentKind::TV2D;
    else if (*v == "custom") c.kind = ExperimentKind::Custom;
    else throw InputError("experiment.kind must be deconv, tv2d or custom");
    if (expected && *expected != c.kind) throw InputError("config describes a different experiment kind");
  } else if (expected) {
    c.kind = *expected;
  }
  if (c.kind == ExperimentKind::TV2D) {
    c.points = 40;
    c.span = 1.1;
    c.report_tol = 1e-4;
    c.filters.lowpass = 0.3;
    c.filters.highpass = 0.3;
    c.filters.bandpass = std::make_pair(0.1, 0.4);
  }
  namespace fs = std::filesystem;
  if (auto v = get("experiment.output")) c.output_dir = (fs::path(base_dir) / *v).string();
  if (auto v = get("data.path")) {
    c.source = (fs::path(base_dir) / *v).string();
    if (!fs::exists(c.source)) throw InputError("data.path does not exist: " + c.source);
  }
  if (auto v = get("data.n")) c.n = detail::parse_value<std::size_t>("data.n", *v);
  if (auto v = get("data.peaks")) c.peaks = detail::parse_list<std::size_t>("data.peaks", *v);
  if (auto v = get("data.heights")) c.heights = detail::parse_list<double>("data.heights", *v);
  if (auto v = get("data.rows")) c.rows = detail::parse_value<std::size_t>("data.rows", *v);
  if (auto v = get("data.cols")) c.cols = detail::parse_value<std::size_t>("data.cols", *v);
  if (auto v = get("kernel.taps")) c.taps = detail::parse_list<double>("kernel.taps", *v);
  if (auto v = get("kernel.size")) c.kernel_size = detail::parse_value<std::size_t>("kernel.size", *v);
  if (auto v = get("kernel.sigma")) c.kernel_sigma = detail::parse_value<double>("kernel.sigma", *v);
  if (auto v = get("model.reg")) c.reg = *v;
  if (auto v = get("model.runs")) {
    c.models.clear();
    for (const auto& item : detail::split_list(*v)) {
      const auto parts = detail::split_list(item, ':');
      if (parts.size() != 2) throw InputError("model.runs entries look like alpha:beta, got '" + item + "'");
      c.models.push_back({detail::parse_value<double>("model.runs", parts[0]), detail::parse_value<int>("model.runs", parts[1])});
    }
  }
  if (auto v = get("grid.points")) c.points = detail::parse_value<std::size_t>("grid.points", *v);
  if (auto v = get("grid.span")) c.span = detail::parse_value<double>("grid.span", *v);
  if (auto v = get("grid.refine")) c.refine = detail::parse_bool("grid.refine", *v);
  if (auto v = get("solver.gap_tol")) c.gap_tol = detail::parse_value<double>("solver.gap_tol", *v);
  if (auto v = get("solver.max_iters")) c.max_iters = detail::parse_value<int>("solver.max_iters", *v);
  if (auto v = get("check.report_tol")) c.report_tol = detail::parse_value<double>("check.report_tol", *v);
  if (auto v = get("check.tolerance")) c.check_tol = detail::parse_value<double>("check.tolerance", *v);
  auto cutoff = [&](const std::string& key) -> std::optional<double> {
    auto v = get(key);
    if (!v || v->empty() || *v == "none") return std::nullopt;
    return detail::parse_value<double>(key, *v);
  };
  if (get("filters.lowpass")) c.filters.lowpass = cutoff("filters.lowpass");
  if (get("filters.highpass")) c.filters.highpass = cutoff("filters.highpass");
  if (auto v = get("filters.bandpass")) {
    if (v->empty() || *v == "none") {
      c.filters.bandpass.reset();
    } else {
      const auto b = detail::parse_list<double>("filters.bandpass", *v);
      if (b.size() != 2 || !(b[0] < b[1])) throw InputError("filters.bandpass needs lo,hi with lo < hi");
      c.filters.bandpass = std::make_pair(b[0], b[1]);
    }
  }
  if (auto v = get("filters.relative")) c.filters.relative = detail::parse_bool("filters.relative", *v);

  if (c.n == 0 || c.rows == 0 || c.cols == 0) throw InputError("data sizes must be positive");
  if (c.peaks.size() != c.heights.size()) throw InputError("data.peaks and data.heights differ in length");
  if (c.kind == ExperimentKind::Deconv && c.peaks.empty()) throw InputError("deconv needs at least one peak");
  for (auto p : c.peaks)
    if (p >= c.n) throw InputError("peak position " + std::to_string(p) + " is outside the signal");
  if (c.taps.empty() && (c.kernel_size == 0 || !(c.kernel_sigma > 0.0)))
    throw InputError("kernel.size and kernel.sigma must be positive");
  if (c.models.empty()) throw InputError("model.runs is empty");
  for (const auto& m : c.models)
    if (!(m.alpha >= 1.0) || (m.beta != 1 && m.beta != 2)) throw InputError("model runs need alpha >= 1 and beta in {1,2}");
  if (c.points < 3) throw InputError("grid.points must be at least 3");
  if (!(c.span > 1.0)) throw InputError("grid.span must exceed 1 so the grid reaches extinction");
  if (!(c.report_tol > 0.0) || !(c.check_tol > 0.0)) throw InputError("tolerances must be positive");
  if (c.reg != "l1" && c.reg != "linf" && c.reg != "tv1d") throw InputError("model.reg must be l1, linf or tv1d");
  if (c.kind == ExperimentKind::Custom && c.source.empty()) throw InputError("custom experiments need data.path");
  return c;
}

inline ExperimentConfig load_config(const std::string& path, std::optional<ExperimentKind> expected = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path);
  return parse_config(in, std::filesystem::path(path).parent_path().string(), expected);
}

}  // namespace spectralpath
