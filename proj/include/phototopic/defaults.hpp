#pragma once

#include <cstddef>
#include <cstdint>

// Operating point of the photo organizer. Everything user-facing (CLI flags,
// option structs) takes its default from here.
namespace phototopic::defaults {

inline constexpr std::size_t kNumTopics = 8;
inline constexpr std::size_t kTopWords = 10;
inline constexpr int kMinCount = 5;
inline constexpr int kMinCollections = 2;
inline constexpr double kNullThreshold = 0.035;

inline constexpr int kMaxIters = 200;
inline constexpr double kTolerance = 1e-6;
inline constexpr double kSmoothing = 1e-10;
inline constexpr std::uint64_t kSeed = 0;

inline constexpr int kFoldInMaxIters = 500;
inline constexpr double kFoldInTolerance = 1e-10;

inline constexpr std::size_t kCoherenceTopN = 10;
inline constexpr double kCoherenceEpsilon = 1e-12;

}  // namespace phototopic::defaults
