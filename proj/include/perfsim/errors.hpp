#ifndef PERFSIM_ERRORS_HPP
#define PERFSIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace perfsim {

// Exit codes used by the CLI; library errors carry the matching code so the
// front end can translate without a taxonomy of catch blocks.
enum class exit_code : int {
  ok = 0,
  input_error = 2,
  non_coalescence = 3,
  internal_error = 4,
};

struct error : std::runtime_error {
  exit_code code;
  error(exit_code c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

// Bad user input: malformed files, invalid parameter combinations.
struct input_error : error {
  explicit input_error(const std::string& msg) : error(exit_code::input_error, msg) {}
};

// CFTP failed to coalesce within the doubling budget.  Carries the final
// sandwich sizes so the caller can report how far apart the processes were.
struct non_coalescence_error : error {
  std::size_t upper_size;
  std::size_t lower_size;
  double horizon;
  non_coalescence_error(std::size_t up, std::size_t low, double T, const std::string& msg)
      : error(exit_code::non_coalescence, msg), upper_size(up), lower_size(low), horizon(T) {}
};

// A violated internal invariant (e.g. an acceptance probability above one,
// which signals a wrong bound in a factor model).  Never a user mistake.
struct internal_error : error {
  explicit internal_error(const std::string& msg) : error(exit_code::internal_error, msg) {}
};

}  // namespace perfsim

#endif  // PERFSIM_ERRORS_HPP
