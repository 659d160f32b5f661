#pragma once

#include <cstdint>
#include <numbers>

namespace gaslin {

// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

inline constexpr double kGravity = 9.80665;      // m/s^2
inline constexpr double kPaPerBar = 1.0e5;       // exact
inline constexpr double kPi = std::numbers::pi;

inline constexpr std::int64_t kSecondsPerDay = 86400;
inline constexpr std::int64_t kSecondsPerHour = 3600;
// Julian year; a multiple of the default sampling interval.
inline constexpr std::int64_t kSecondsPerYear = 31557600;
inline constexpr std::int64_t kDefaultSampleInterval = 180;

inline constexpr double bar_to_pa(double bar) { return bar * kPaPerBar; }
inline constexpr double pa_to_bar(double pa) { return pa / kPaPerBar; }

}  // namespace gaslin
