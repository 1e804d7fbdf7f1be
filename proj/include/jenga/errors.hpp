#pragma once

#include <stdexcept>
#include <string>

namespace jenga {

// Base class for all simulation errors.
struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonPositiveDepthError : SimError {
  using SimError::SimError;
};
struct JointLimitError : SimError {
  using SimError::SimError;
};
struct InvalidConfigError : SimError {
  using SimError::SimError;
};
struct CollapsedTowerError : SimError {
  using SimError::SimError;
};
struct AlreadyExtractedError : SimError {
  using SimError::SimError;
};
struct NotExtractedError : SimError {
  using SimError::SimError;
};
struct DegenerateMaskError : SimError {
  using SimError::SimError;
};
struct IllConditionedError : SimError {
  using SimError::SimError;
};
struct SingularFeaturesError : SimError {
  using SimError::SimError;
};
struct TargetNotVisibleError : SimError {
  using SimError::SimError;
};
struct TrackingLostError : SimError {
  using SimError::SimError;
};
struct NoContactError : SimError {
  using SimError::SimError;
};
struct SlipError : SimError {
  using SimError::SimError;
};
struct UnknownBlockError : SimError {
  using SimError::SimError;
};
struct InvalidWorkspaceError : SimError {
  using SimError::SimError;
};
struct IncompleteLevelError : SimError {
  using SimError::SimError;
};

// I/O and file-format errors carry the offending line number (0 = n/a).
struct ParseError : SimError {
  ParseError(const std::string& msg, int line_no)
      : SimError(msg + " (line " + std::to_string(line_no) + ")"), line(line_no) {}
  int line;
};

}  // namespace jenga
