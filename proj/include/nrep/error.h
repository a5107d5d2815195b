#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace nrep {

enum class ErrorKind {
  parse,
  dimension_mismatch,
  domain,
  singular_overlap,
  ill_conditioned,
  non_convergence,
  divergence,
  stagnation,
  collapse,
  io,
};

const char *to_string(ErrorKind kind);

/// Base of every error raised by the library. The kind drives CLI exit codes.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &message)
      : std::runtime_error(message), m_kind(kind) {}
  ErrorKind kind() const noexcept { return m_kind; }

private:
  ErrorKind m_kind;
};

class ParseError : public Error {
public:
  ParseError(const std::string &message, int line = 0);
  int line() const noexcept { return m_line; }
  /// Same error with "<source>: " in front of the message.
  ParseError located(const std::string &source) const;

private:
  struct Raw {};
  ParseError(Raw, const std::string &full_message, int line);
  int m_line;
};

class SingularOverlapError : public Error {
public:
  explicit SingularOverlapError(double eigenvalue);
  double eigenvalue() const noexcept { return m_eigenvalue; }

private:
  double m_eigenvalue;
};

class IllConditionedError : public Error {
public:
  explicit IllConditionedError(double condition_estimate);
  double condition_estimate() const noexcept { return m_condition; }

private:
  double m_condition;
};

/// One row of the per-iteration diagnostics kept by the iterative solvers.
struct ResidualRecord {
  double idempotency{0.0};
  double constraint{0.0};
};

/// Non-convergence, divergence, stagnation and collapse all carry the
/// residual history of the failed run.
class ConvergenceError : public Error {
public:
  ConvergenceError(ErrorKind kind, const std::string &message,
                   std::vector<ResidualRecord> trajectory, int iterations);
  const std::vector<ResidualRecord> &trajectory() const noexcept {
    return m_trajectory;
  }
  int iterations() const noexcept { return m_iterations; }

private:
  std::vector<ResidualRecord> m_trajectory;
  int m_iterations;
};

} // namespace nrep
