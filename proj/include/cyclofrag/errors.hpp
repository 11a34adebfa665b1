#pragma once

#include <stdexcept>
#include <string>

namespace cyclofrag {

// Stage-tagged errors; the CLI maps each to its documented exit code.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IngestError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct WindfieldError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitIngestError = 3;
inline constexpr int kExitWindfieldError = 4;
inline constexpr int kExitFitError = 5;

}  // namespace cyclofrag
