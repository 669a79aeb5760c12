#ifndef PERFSIM_IO_CONFIG_HPP
#define PERFSIM_IO_CONFIG_HPP

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "perfsim/errors.hpp"
#include "perfsim/io/csv.hpp"

namespace perfsim::io {

// Flat `key = value` files: one pair per line, '#' starts a comment.  Keys
// are looked up with typed getters; command-line flags override by calling
// set() after load.  The echo writer emits pairs in first-set order, so a
// rerun of the same command produces byte-identical echo files.
class config {
 public:
  config() = default;

  static config load(const std::string& path) {
    auto in = open_input(path);
    config cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string t = detail::trim(line);
      if (t.empty()) continue;
      const std::size_t eq = t.find('=');
      if (eq == std::string::npos)
        throw input_error(path + ":" + std::to_string(lineno) + ": expected key = value");
      const std::string key = detail::trim(t.substr(0, eq));
      const std::string value = detail::trim(t.substr(eq + 1));
      if (key.empty())
        throw input_error(path + ":" + std::to_string(lineno) + ": empty key");
      cfg.set(key, value);
    }
    return cfg;
  }

  void set(const std::string& key, const std::string& value) {
    auto it = values_.find(key);
    if (it == values_.end()) {
      order_.push_back(key);
      values_.emplace(key, value);
    } else {
      it->second = value;
    }
  }
  void set(const std::string& key, double v) { set(key, format_double(v)); }
  void set(const std::string& key, std::uint64_t v) { set(key, std::to_string(v)); }
  void set(const std::string& key, int v) { set(key, std::to_string(v)); }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  std::string require_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw input_error("missing config key '" + key + "'");
    return it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return parse_double_value(key, it->second);
  }

  double require_double(const std::string& key) const {
    return parse_double_value(key, require_string(key));
  }

  std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return parse_int_value(key, it->second);
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string& s = it->second;
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
      throw input_error("config key '" + key + "' is not a non-negative integer: " + s);
    return v;
  }

  // Comma-separated list value.
  std::vector<std::string> get_list(const std::string& key,
                                    const std::vector<std::string>& fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<std::string> out;
    for (const auto& f : detail::split_fields(it->second)) {
      const std::string t = detail::trim(f);
      if (!t.empty()) out.push_back(t);
    }
    return out;
  }

  // Reject unknown keys so that typos fail loudly instead of silently
  // falling back to defaults.
  void require_known(const std::set<std::string>& allowed) const {
    for (const auto& k : order_)
      if (allowed.count(k) == 0) throw input_error("unknown config key '" + k + "'");
  }

  void write_echo(const std::string& path) const {
    auto out = open_output(path);
    for (const auto& k : order_) out << k << " = " << values_.at(k) << '\n';
  }

  const std::vector<std::string>& keys() const { return order_; }

 private:
  static double parse_double_value(const std::string& key, const std::string& s) {
    double v = 0.0;
    if (!detail::parse_double(s, v))
      throw input_error("config key '" + key + "' is not numeric: " + s);
    return v;
  }

  static std::int64_t parse_int_value(const std::string& key, const std::string& s) {
    std::int64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
      throw input_error("config key '" + key + "' is not an integer: " + s);
    return v;
  }

  std::map<std::string, std::string> values_;
  std::vector<std::string> order_;
};

}  // namespace perfsim::io

#endif  // PERFSIM_IO_CONFIG_HPP
