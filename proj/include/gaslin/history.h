#pragma once

// Pipeline state time series: regularly sampled (p_in, p_out, q) triples
// with explicit gap markers, CSV ingestion and export, gap filling, and a
// seeded synthetic generator standing in for measured histories.

#include "gaslin/gas_physics.h"
#include "gaslin/units.h"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gaslin {

struct StateSample {
    Timestamp timestamp;
    double p_in;       // Pa
    double p_out;      // Pa
    double mass_flow;  // kg/s, positive in the main direction

    bool valid() const noexcept;
    bool operator==(const StateSample&) const = default;
};

enum class FillPolicy { skip, hold_last };

// Slot i holds the state at start + i * sample_interval, or nullopt for a gap.
class StateHistory {
public:
    StateHistory() = default;
    StateHistory(std::string pipe_id, Timestamp start, std::int64_t sample_interval);

    const std::string& pipe_id() const noexcept { return pipe_id_; }
    Timestamp start() const noexcept { return start_; }
    std::int64_t sample_interval() const noexcept { return interval_; }
    FillPolicy fill_policy() const noexcept { return policy_; }
    void set_fill_policy(FillPolicy policy) noexcept { policy_ = policy; }

    std::size_t size() const noexcept { return slots_.size(); }
    bool empty() const noexcept { return slots_.empty(); }
    std::size_t gap_count() const noexcept;
    std::size_t sample_count() const noexcept { return size() - gap_count(); }

    const std::optional<StateSample>& operator[](std::size_t i) const { return slots_[i]; }
    const std::vector<std::optional<StateSample>>& slots() const noexcept { return slots_; }

    Timestamp timestamp_at(std::size_t i) const noexcept {
        return start_ + static_cast<Timestamp>(i) * interval_;
    }
    // One past the last slot: start + size * interval.
    Timestamp end() const noexcept { return timestamp_at(slots_.size()); }

    // Appends the sample in the next slot. Throws MonotonicityError if its
    // timestamp does not match the next grid point.
    void push_back(const StateSample& sample);
    void push_gap();

    // Slots with timestamps in [begin, end), which must lie on the grid.
    StateHistory slice(Timestamp begin, Timestamp end) const;

    bool operator==(const StateHistory&) const = default;

private:
    std::string pipe_id_;
    Timestamp start_ = 0;
    std::int64_t interval_ = kDefaultSampleInterval;
    FillPolicy policy_ = FillPolicy::skip;
    std::vector<std::optional<StateSample>> slots_;
};

// ISO-8601 UTC, "YYYY-MM-DDTHH:MM:SSZ".
Timestamp parse_iso8601_utc(const std::string& text);
std::string format_iso8601_utc(Timestamp t);

struct CsvLoadOptions {
    std::int64_t sample_interval = kDefaultSampleInterval;
};

// Reads `timestamp_utc,p_in_bar,p_out_bar,q_kg_per_s`. Pressures are
// converted from bar to Pa. Missing grid slots become gaps; rows with
// nonpositive or non-finite pressures are stored as gaps as well.
StateHistory load_history_csv(const std::filesystem::path& path, const std::string& pipe_id,
                              const CsvLoadOptions& options = {});
StateHistory read_history_csv(std::istream& in, const std::string& pipe_id,
                              const CsvLoadOptions& options = {});

// Writes one row per present sample; gaps are omitted.
void write_history_csv(std::ostream& out, const StateHistory& history);
void write_history_csv(const std::filesystem::path& path, const StateHistory& history);

// skip: gaps stay explicit. hold_last: each gap takes the previous present
// sample's values at its own timestamp; leading gaps stay gaps.
StateHistory resample_and_fill(const StateHistory& history, FillPolicy policy);

// 64-bit splitmix generator: state += 0x9E3779B97F4A7C15, then the
// standard xor-shift-multiply finalizer. Identical output on every platform.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}
    std::uint64_t next() noexcept;
    // Uniform in [0, 1) from the top 53 bits.
    double uniform() noexcept;
    // Open interval (0, 1).
    double uniform_open() noexcept;
    // Standard normal via Box-Muller, one deviate per call.
    double normal() noexcept;

private:
    std::uint64_t state_;
};

struct SyntheticProfile {
    double base_pressure = bar_to_pa(56.0);  // Pa
    double base_abs_velocity = 4.2;          // m/s
    double daily_amplitude = 0.0;            // fraction
    double noise_std = 0.0;                  // fraction
    double reversal_probability = 0.0;       // per day, main -> reversed
    double reversal_duration = 86400.0;      // mean length of a reversed regime, s
    double drift = 0.0;                      // fraction per year
    std::int64_t duration = 2 * kSecondsPerYear;  // s
    std::int64_t sample_interval = kDefaultSampleInterval;
    Timestamp start = 1420070400;  // 2015-01-01T00:00:00Z
    std::uint64_t seed = 0;

    // Throws InvalidInput on fractions outside [0, 1] or nonpositive spans.
    void validate() const;
};

// Per-sample ingredients produced by the generator alongside the stored state.
struct SyntheticTrace {
    std::vector<double> target_abs_velocity;  // m/s
    std::vector<double> friction_drop;        // generator's internal fL, Pa
};

// Deterministic history of duration / sample_interval samples. The target
// absolute velocity is
//   base (1 + amplitude sin(2 pi t / day)) (1 + drift t / year) (1 + N(0, noise)),
// clamped at 0, with the sign following a two-state main/reversed regime.
// Mass flow and endpoint pressures are solved jointly so that the velocity
// at the stationary mean pressure equals the target and
// p_in - p_out equals the true friction plus gravity drop at the stored
// endpoints, symmetric about base_pressure.
StateHistory generate_synthetic_history(const SyntheticProfile& profile, const PipeSpec& pipe,
                                        const GasSpec& gas, const std::string& pipe_id = "synthetic",
                                        SyntheticTrace* trace = nullptr);

}  // namespace gaslin
