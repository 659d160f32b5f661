#pragma once

// Fixed-velocity determination and velocity statistics.
//
// Two ways of choosing v_c: a least-squares constant over a training
// history (approach A) and the velocity observed a fixed lag earlier
// (approach B). The analysis side provides sorted-value CDFs with
// percentile lookup and mean velocity-change curves over time horizons.

#include "gaslin/gas_physics.h"
#include "gaslin/history.h"

#include <cmath>
#include <optional>
#include <vector>

namespace gaslin {

inline constexpr std::int64_t kDefaultLag = 48 * kSecondsPerHour;
inline constexpr double kDefaultMinVelocity = 0.02;           // m/s
inline constexpr std::int64_t kDefaultMaxHorizon = 7 * kSecondsPerDay;

// Absolute velocity per grid slot; missing slots are stored as NaN.
class VelocitySeries {
public:
    VelocitySeries() = default;
    // Throws InvalidInput on negative values or a nonpositive interval.
    VelocitySeries(Timestamp start, std::int64_t sample_interval, std::vector<double> abs_velocity);

    Timestamp start() const noexcept { return start_; }
    std::int64_t sample_interval() const noexcept { return interval_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }
    Timestamp timestamp_at(std::size_t i) const noexcept {
        return start_ + static_cast<Timestamp>(i) * interval_;
    }

    bool present(std::size_t i) const noexcept { return !std::isnan(values_[i]); }
    std::optional<double> at(std::size_t i) const noexcept {
        return present(i) ? std::optional<double>(values_[i]) : std::nullopt;
    }
    // Raw storage, NaN for missing.
    const std::vector<double>& raw() const noexcept { return values_; }

    std::size_t present_count() const noexcept;
    // Mean over present values; throws DegenerateInput if none.
    double mean() const;

private:
    Timestamp start_ = 0;
    std::int64_t interval_ = kDefaultSampleInterval;
    std::vector<double> values_;
};

// |v| per slot at the stationary mean pressure of each sample. Gaps and
// samples the physics rejects become missing values.
VelocitySeries velocity_series_from_history(const StateHistory& history, const PipeSpec& pipe,
                                            const GasSpec& gas);

struct LsqOptions {
    // Samples with |q| below this are left out of the objective.
    double min_abs_flow = 0.0;
};

// Sums of the through-origin regression of a_t = fL_true(t) on
// b_t = lambda L q_t / (2 D A).
struct LsqFit {
    double v_c;            // max(0, sum_ab / sum_bb)
    double weighted_mean;  // sum q^2 |v| / sum q^2
    double sum_ab;
    double sum_bb;
    std::size_t samples_used;
};

// Approach A. Throws DegenerateInput if every usable flow is zero.
LsqFit fit_constant_velocity_lsq_detail(const StateHistory& train, const PipeSpec& pipe,
                                        const GasSpec& gas, const LsqOptions& options = {});
double fit_constant_velocity_lsq(const StateHistory& train, const PipeSpec& pipe,
                                 const GasSpec& gas, const LsqOptions& options = {});
// q^2-weighted mean of |v(t)|, algebraically equal to the fitted v_c.
double flow_weighted_mean_velocity(const StateHistory& train, const PipeSpec& pipe,
                                   const GasSpec& gas, const LsqOptions& options = {});

// Approach B: the value at t - lag, or nullopt when that slot is missing.
// Throws RangeError if t - lag is before the series start, after its end, or
// not on the sampling grid.
std::optional<double> lagged_velocity(const VelocitySeries& series, Timestamp t,
                                      std::int64_t lag = kDefaultLag);

class VelocityCdf {
public:
    explicit VelocityCdf(std::vector<double> sorted_values);

    const std::vector<double>& sorted() const noexcept { return sorted_; }
    std::size_t size() const noexcept { return sorted_.size(); }
    double min() const noexcept { return sorted_.front(); }
    double max() const noexcept { return sorted_.back(); }
    // Linear interpolation between closest ranks at position (n - 1) alpha / 100.
    double percentile(double alpha) const;
    // (value, fraction of values <= value), one row per distinct value.
    std::vector<std::pair<double, double>> distinct_steps() const;

private:
    std::vector<double> sorted_;
};

// Throws DegenerateInput if the series has no present value.
VelocityCdf velocity_cdf(const VelocitySeries& series);

// (P_hi - P_lo) / 2 / mean. Throws DegenerateInput if the mean is zero.
double percentile_spread_relative_error(const VelocitySeries& series, double lo = 10.0,
                                        double hi = 90.0);
double spread_ratio(double spread, double mean);
double implied_spread(double ratio, double mean);

struct ChangeCurve {
    std::vector<std::int64_t> horizons;   // s
    std::vector<double> mean_abs_change;  // m/s
    std::vector<double> mean_rel_change;  // dimensionless
    std::vector<std::size_t> pair_count;  // contributing t per horizon
};

// For each horizon tau = k * interval up to max_horizon: the mean over t of
// |v(t + tau) - v(t)| and of that difference over v(t), where t contributes
// only if v(t) >= min_velocity and both slots are present. Horizons run in
// parallel on `threads` workers (0: hardware concurrency); each horizon sums
// in a fixed order, so the result does not depend on the thread count.
// Throws RangeError if the series spans less than max_horizon.
ChangeCurve velocity_change_curve(const VelocitySeries& series,
                                  std::int64_t max_horizon = kDefaultMaxHorizon,
                                  double min_velocity = kDefaultMinVelocity,
                                  unsigned threads = 0);

}  // namespace gaslin
