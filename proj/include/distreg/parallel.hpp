#pragma once

namespace distreg {

/// Environment variable holding the worker thread count (0 or unset = auto).
inline constexpr const char* kThreadsEnvVar = "DISTREG_NUM_THREADS";

/// Applies kThreadsEnvVar to the OpenMP runtime when available; returns the
/// thread count in effect.
int configure_threads_from_env();

}  // namespace distreg
