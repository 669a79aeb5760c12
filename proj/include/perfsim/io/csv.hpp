#ifndef PERFSIM_IO_CSV_HPP
#define PERFSIM_IO_CSV_HPP

#include <charconv>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "perfsim/errors.hpp"
#include "perfsim/spatial/geometry.hpp"

namespace perfsim::io {

// Shortest round-trip decimal representation; locale-independent, so output
// bytes depend only on the values.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot open '" + path + "' for writing");
  return out;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open '" + path + "' for reading");
  return in;
}

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline bool parse_double(const std::string& field, double& out) {
  const std::string t = trim(field);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc{} && res.ptr == last;
}

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace detail

inline void write_pattern_csv(const std::string& path, const std::vector<planar_point>& pts) {
  auto out = open_output(path);
  out << "x,y\n";
  for (const auto& p : pts) out << format_double(p.x) << ',' << format_double(p.y) << '\n';
}

// Accepts an optional "x,y" header line; everything else must be two
// numeric fields per row.
inline std::vector<planar_point> read_pattern_csv(const std::string& path) {
  auto in = open_input(path);
  std::vector<planar_point> pts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto fields = detail::split_fields(t);
    double x = 0.0, y = 0.0;
    if (fields.size() == 2 && detail::parse_double(fields[0], x) &&
        detail::parse_double(fields[1], y)) {
      pts.push_back({x, y});
    } else if (lineno == 1 && (fields.empty() || !detail::parse_double(fields[0], x))) {
      continue;  // header row
    } else {
      throw input_error(path + ":" + std::to_string(lineno) + ": expected two numeric fields");
    }
  }
  return pts;
}

inline void write_curve_csv(const std::string& path, const std::vector<double>& r,
                            const std::vector<double>& value) {
  auto out = open_output(path);
  out << "r,value\n";
  for (std::size_t i = 0; i < r.size(); ++i)
    out << format_double(r[i]) << ',' << format_double(value[i]) << '\n';
}

inline void write_envelope_csv(const std::string& path, const std::vector<double>& r,
                               const std::vector<double>& lo, const std::vector<double>& mean,
                               const std::vector<double>& hi) {
  auto out = open_output(path);
  out << "r,min,mean,max\n";
  for (std::size_t i = 0; i < r.size(); ++i)
    out << format_double(r[i]) << ',' << format_double(lo[i]) << ',' << format_double(mean[i])
        << ',' << format_double(hi[i]) << '\n';
}

inline void write_signal_csv(const std::string& path, const std::vector<double>& x) {
  auto out = open_output(path);
  for (double v : x) out << format_double(v) << '\n';
}

// Single-column numeric file; an optional non-numeric first line is skipped.
inline std::vector<double> read_signal_csv(const std::string& path) {
  auto in = open_input(path);
  std::vector<double> x;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    double v = 0.0;
    if (detail::parse_double(t, v)) {
      x.push_back(v);
    } else if (x.empty() && lineno == 1) {
      continue;
    } else {
      throw input_error(path + ":" + std::to_string(lineno) + ": expected one numeric field");
    }
  }
  if (x.empty()) throw input_error(path + ": no data rows");
  return x;
}

}  // namespace perfsim::io

#endif  // PERFSIM_IO_CSV_HPP
