#pragma once

#include "core.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace spectralpath {

using Table = std::vector<std::vector<double>>;

namespace detail {

inline double parse_number(std::string_view tok, std::size_t line) {
  while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
  while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t' || tok.back() == '\r')) tok.remove_suffix(1);
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError("line " + std::to_string(line) + ": '" + std::string(tok) + "' is not a number", line);
  if (!std::isfinite(v)) throw ParseError("line " + std::to_string(line) + ": non-finite value", line);
  return v;
}

inline std::string read_file(const std::string& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw InputError("cannot write " + path);
  return out;
}

}  // namespace detail

// Comma-separated numbers; blank lines and lines starting with '#' are skipped.
// A first line that does not parse is taken as a header when allow_header is set.
inline Table parse_csv(const std::string& text, bool allow_header = false) {
  Table rows;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') continue;
    std::vector<double> row;
    try {
      std::size_t start = 0;
      for (;;) {
        const std::size_t comma = line.find(',', start);
        row.push_back(detail::parse_number(std::string_view(line).substr(start, comma - start), lineno));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
    } catch (const ParseError&) {
      if (allow_header && rows.empty()) {
        allow_header = false;
        continue;
      }
      throw;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("line " + std::to_string(lineno) + ": expected " + std::to_string(rows.front().size()) +
                           " columns, found " + std::to_string(row.size()),
                       lineno);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Table read_csv(const std::string& path, bool allow_header = false) {
  return parse_csv(detail::read_file(path), allow_header);
}

inline void write_csv(std::ostream& os, const Table& rows, const std::string& header = {}) {
  const auto old = os.precision(17);
  if (!header.empty()) os << header << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (!std::isfinite(r[i])) throw InputError("refusing to write a non-finite value");
      os << (i ? "," : "") << r[i];
    }
    os << '\n';
  }
  os.precision(old);
}

// One column: a 1-D signal. Several columns: a row-major image.
inline Signal signal_from_table(const Table& t) {
  if (t.empty()) throw InputError("signal file has no values");
  const std::size_t cols = t.front().size();
  Vec v(static_cast<Eigen::Index>(t.size() * cols));
  for (std::size_t r = 0; r < t.size(); ++r)
    for (std::size_t c = 0; c < cols; ++c) v[static_cast<Eigen::Index>(r * cols + c)] = t[r][c];
  if (cols == 1) return Signal(Shape::vector(t.size()), v);
  return Signal(Shape::grid(t.size(), cols), v);
}

inline Signal read_signal_csv(const std::string& path) { return signal_from_table(read_csv(path)); }

inline void write_signal_csv(std::ostream& os, const Signal& s) {
  const std::size_t cols = s.shape().dims == 2 ? s.shape().cols : 1;
  Table t(s.shape().rows, std::vector<double>(cols));
  for (std::size_t r = 0; r < s.shape().rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) t[r][c] = s[r * cols + c];
  write_csv(os, t);
}

inline void write_signal_csv(const std::string& path, const Signal& s) {
  auto out = detail::open_out(path);
  write_signal_csv(out, s);
}

inline Mat matrix_from_table(const Table& t) {
  if (t.empty()) throw InputError("matrix file has no values");
  Mat m(static_cast<Eigen::Index>(t.size()), static_cast<Eigen::Index>(t.front().size()));
  for (std::size_t r = 0; r < t.size(); ++r)
    for (std::size_t c = 0; c < t[r].size(); ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = t[r][c];
  return m;
}

struct GrayImage {
  Signal pixels;  // values in [0, 1]
  unsigned maxval = 255;
};

// Netpbm graymap, plain (P2) or raw (P5), 8 or 16 bit.
inline GrayImage parse_pgm(const std::string& bytes) {
  std::size_t pos = 0;
  auto fail = [&](const std::string& what) -> void { throw ParseError("byte " + std::to_string(pos) + ": " + what, pos); };
  auto skip_space = [&] {
    for (;;) {
      while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
  };
  auto read_uint = [&]() -> unsigned long {
    skip_space();
    const std::size_t start = pos;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (start == pos) fail("expected an unsigned integer");
    unsigned long v = 0;
    std::from_chars(bytes.data() + start, bytes.data() + pos, v);
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) fail("not a P2/P5 graymap");
  const bool raw = bytes[1] == '5';
  pos = 2;
  const unsigned long cols = read_uint(), rows = read_uint(), maxval = read_uint();
  if (cols == 0 || rows == 0) fail("image has no pixels");
  if (maxval == 0 || maxval > 65535) fail("maxval must be in 1..65535");
  Vec v(static_cast<Eigen::Index>(rows * cols));
  if (raw) {
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) fail("missing separator before raster");
    ++pos;
    const std::size_t width = maxval > 255 ? 2 : 1;
    if (bytes.size() - pos < rows * cols * width) {
      pos = bytes.size();
      fail("raster is truncated");
    }
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      unsigned long px = static_cast<unsigned char>(bytes[pos]);
      if (width == 2) px = (px << 8) | static_cast<unsigned char>(bytes[pos + 1]);
      if (px > maxval) fail("pixel exceeds maxval");
      v[i] = static_cast<double>(px) / static_cast<double>(maxval);
      pos += width;
    }
  } else {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const unsigned long px = read_uint();
      if (px > maxval) fail("pixel exceeds maxval");
      v[i] = static_cast<double>(px) / static_cast<double>(maxval);
    }
  }
  return {Signal(Shape::grid(rows, cols), v), static_cast<unsigned>(maxval)};
}

inline GrayImage read_pgm(const std::string& path) {
  return parse_pgm(detail::read_file(path, std::ios::in | std::ios::binary));
}

// Values are clamped to [0, 1] and quantized to maxval levels.
inline std::string encode_pgm(const Signal& img, unsigned maxval = 65535, bool raw = true) {
  if (img.shape().dims != 2) throw InputError("PGM output needs a 2-D signal");
  if (maxval == 0 || maxval > 65535) throw InputError("maxval must be in 1..65535");
  std::ostringstream os;
  os << (raw ? "P5" : "P2") << '\n' << img.shape().cols << ' ' << img.shape().rows << '\n' << maxval << '\n';
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double c = std::min(1.0, std::max(0.0, img[i]));
    const auto px = static_cast<unsigned>(std::lround(c * maxval));
    if (raw) {
      if (maxval > 255) os.put(static_cast<char>(px >> 8));
      os.put(static_cast<char>(px & 0xff));
    } else {
      os << px << ((i + 1) % img.shape().cols ? ' ' : '\n');
    }
  }
  return os.str();
}

inline void write_pgm(const std::string& path, const Signal& img, unsigned maxval = 65535, bool raw = true) {
  auto out = detail::open_out(path, std::ios::out | std::ios::binary);
  out << encode_pgm(img, maxval, raw);
}

}  // namespace spectralpath
