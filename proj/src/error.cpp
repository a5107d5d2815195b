#include <nrep/error.h>

#include <fmt/core.h>

namespace nrep {

const char *to_string(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::parse:
    return "parse";
  case ErrorKind::dimension_mismatch:
    return "dimension_mismatch";
  case ErrorKind::domain:
    return "domain";
  case ErrorKind::singular_overlap:
    return "singular_overlap";
  case ErrorKind::ill_conditioned:
    return "ill_conditioned";
  case ErrorKind::non_convergence:
    return "non_convergence";
  case ErrorKind::divergence:
    return "divergence";
  case ErrorKind::stagnation:
    return "stagnation";
  case ErrorKind::collapse:
    return "collapse";
  case ErrorKind::io:
    return "io";
  }
  return "unknown";
}

ParseError::ParseError(const std::string &message, int line)
    : Error(ErrorKind::parse,
            line > 0 ? fmt::format("line {}: {}", line, message) : message),
      m_line(line) {}

ParseError::ParseError(Raw, const std::string &full_message, int line)
    : Error(ErrorKind::parse, full_message), m_line(line) {}

ParseError ParseError::located(const std::string &source) const {
  return ParseError(Raw{}, fmt::format("{}: {}", source, what()), m_line);
}

SingularOverlapError::SingularOverlapError(double eigenvalue)
    : Error(ErrorKind::singular_overlap,
            fmt::format("overlap matrix is singular: eigenvalue {:.6e} is not "
                        "above 1e-10",
                        eigenvalue)),
      m_eigenvalue(eigenvalue) {}

IllConditionedError::IllConditionedError(double condition_estimate)
    : Error(ErrorKind::ill_conditioned,
            fmt::format("constraint Gram matrix is ill-conditioned (condition "
                        "estimate {:.3e})",
                        condition_estimate)),
      m_condition(condition_estimate) {}

ConvergenceError::ConvergenceError(ErrorKind kind, const std::string &message,
                                   std::vector<ResidualRecord> trajectory,
                                   int iterations)
    : Error(kind, message), m_trajectory(std::move(trajectory)),
      m_iterations(iterations) {}

} // namespace nrep
