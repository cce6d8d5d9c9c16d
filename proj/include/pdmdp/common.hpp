#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace pdmdp {

using Rng = std::mt19937_64;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class ErrorCode {
  kValidation,
  kBoundaryOverrun,
  kExplosion,
  kNoJumpReachable,
  kInvalidBound,
  kStrategy,
  kImpossibleEvidence,
  kCapExceeded,
  kInadmissible,
  kRange,
  kIo,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kValidation: return "validation";
    case ErrorCode::kBoundaryOverrun: return "boundary overrun";
    case ErrorCode::kExplosion: return "explosion";
    case ErrorCode::kNoJumpReachable: return "no jump reachable";
    case ErrorCode::kInvalidBound: return "invalid intensity bound";
    case ErrorCode::kStrategy: return "invalid strategy";
    case ErrorCode::kImpossibleEvidence: return "impossible evidence";
    case ErrorCode::kCapExceeded: return "cap exceeded";
    case ErrorCode::kInadmissible: return "inadmissible action";
    case ErrorCode::kRange: return "out of range";
    case ErrorCode::kIo: return "io";
  }
  return "error";
}

/// Derive an independent stream for replication `index` of a base seed.
inline Rng derive_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline double exponential(Rng& rng, double rate) {
  // 1 - U avoids log(0)
  return -std::log1p(-uniform01(rng)) / rate;
}

}  // namespace pdmdp
