#ifndef COREFDEC_ERRORS_H_
#define COREFDEC_ERRORS_H_

#include <stdexcept>
#include <string>

namespace corefdec {

// Raised for malformed or inconsistent input data. The CLI maps it to exit
// status 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// CoNLL-U parse failure; line is 1-based, 0 when not tied to a line.
class ParseError : public DataError {
 public:
  ParseError(int line, const std::string &message)
      : DataError(line > 0 ? "line " + std::to_string(line) + ": " + message
                           : message),
        line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

// Split-antecedent / discontinuous mention notation (`e1[1/2]`).
class DiscontinuousMentionError : public ParseError {
 public:
  using ParseError::ParseError;
};

// Constrained decoding found no path satisfying the stack constraints.
class InfeasibleError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace corefdec

#endif  // COREFDEC_ERRORS_H_
