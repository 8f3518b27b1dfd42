#ifndef SEQTPE_ERRORS_HPP
#define SEQTPE_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace seqtpe {

/// Base class of everything thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Precondition violation: bad parameter values, unknown modes, mismatched
/// registers, invalid configuration.
struct InvalidArgument : Error {
  using Error::Error;
};

/// An operation would populate an occupation number beyond the register
/// cutoff, so the truncated basis cannot represent the result.
struct TruncationError : Error {
  using Error::Error;
};

/// Malformed input data. `line` is 1-based within the offending file.
struct ParseError : Error {
  ParseError(const std::string& msg, std::size_t line_no)
      : Error(msg + " (line " + std::to_string(line_no) + ")"), line(line_no) {}
  std::size_t line;
};

/// Filesystem-level failure (unreadable input, unwritable output).
struct IoError : Error {
  using Error::Error;
};

}  // namespace seqtpe

#endif
