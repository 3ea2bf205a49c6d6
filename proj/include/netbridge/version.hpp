#pragma once

namespace netbridge {

inline constexpr const char* kVersion = "0.1.0";

/// Bumped whenever the trajectory log schema changes; replay refuses logs
/// written under a different format version.
inline constexpr int kTrajectoryFormatVersion = 1;

inline constexpr int kCheckpointFormatVersion = 1;

}  // namespace netbridge
