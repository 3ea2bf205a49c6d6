#pragma once

#include <stdexcept>
#include <string>

namespace netbridge {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- geometry / linear algebra ---
struct DimensionMismatch : Error {
  using Error::Error;
};
struct SpdViolation : Error {
  using Error::Error;
};
struct NotHurwitz : Error {
  using Error::Error;
};
struct IllConditioned : Error {
  using Error::Error;
};
struct LambdaOutOfRange : Error {
  using Error::Error;
};
struct CoincidentCenters : Error {
  using Error::Error;
};
struct BadIndices : Error {
  using Error::Error;
};
struct SingularShape : Error {
  using Error::Error;
};

// --- safety filter ---
struct DegenerateDirection : Error {
  using Error::Error;
};
struct UnsafeInitialConfiguration : Error {
  using Error::Error;
};

// --- graph / environment ---
struct UnknownEntity : Error {
  using Error::Error;
};
struct PlacementFailure : Error {
  using Error::Error;
};
struct ActionCountMismatch : Error {
  using Error::Error;
};

// --- learner ---
struct ShapeMismatch : Error {
  using Error::Error;
};
struct NonFiniteLoss : Error {
  using Error::Error;
};

// --- harness ---
struct ConfigError : Error {
  using Error::Error;
};
struct VersionMismatch : Error {
  using Error::Error;
};

/// Replay found a field that does not match the re-simulated value.
struct Divergence : Error {
  Divergence(long step, const std::string& what)
      : Error("replay diverged at step " + std::to_string(step) + ": " + what), step(step) {}
  long step;
};

}  // namespace netbridge
