#ifndef SUITFILTER_ERRORS_HPP
#define SUITFILTER_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace suitfilter {

/// Precondition or argument violation (bad dimensions, non-finite input, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A statistic or fit that is undefined for the given data (zero variance,
/// single-class labels, ...).
class DegenerateStatistic : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file; message carries row/column context.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or unsatisfiable configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A sequential-testing schedule received more batches than it has stages.
class ScheduleExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace suitfilter

#endif  // SUITFILTER_ERRORS_HPP
