#include "gaslin/velocity_fit.h"

#include "gaslin/errors.h"
#include "gaslin/pipe_model.h"

#include <algorithm>
#include <limits>
#include <thread>

namespace gaslin {

namespace {
constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
}

VelocitySeries::VelocitySeries(Timestamp start, std::int64_t sample_interval,
                               std::vector<double> abs_velocity)
    : start_(start), interval_(sample_interval), values_(std::move(abs_velocity)) {
    if (interval_ <= 0) throw InvalidInput("VelocitySeries: sample interval must be > 0");
    for (double v : values_) {
        if (v < 0.0 || std::isinf(v)) {
            throw InvalidInput("VelocitySeries: absolute velocities must be finite and >= 0");
        }
    }
}

std::size_t VelocitySeries::present_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(values_.begin(), values_.end(), [](double v) { return !std::isnan(v); }));
}

double VelocitySeries::mean() const {
    double sum = 0.0;
    std::size_t n = 0;
    for (double v : values_) {
        if (std::isnan(v)) continue;
        sum += v;
        ++n;
    }
    if (n == 0) throw DegenerateInput("VelocitySeries::mean: no present values");
    return sum / static_cast<double>(n);
}

VelocitySeries velocity_series_from_history(const StateHistory& history, const PipeSpec& pipe,
                                            const GasSpec& gas) {
    std::vector<double> values(history.size(), kMissing);
    for (std::size_t i = 0; i < history.size(); ++i) {
        const auto& slot = history[i];
        if (!slot || !slot->valid()) continue;
        try {
            const double mean = mean_pressure_stationary(slot->p_in, slot->p_out);
            values[i] = std::abs(velocity_from_state(mean, slot->mass_flow, pipe, gas));
        } catch (const InvalidInput&) {
            // stays missing
        }
    }
    return VelocitySeries(history.start(), history.sample_interval(), std::move(values));
}

LsqFit fit_constant_velocity_lsq_detail(const StateHistory& train, const PipeSpec& pipe,
                                        const GasSpec& gas, const LsqOptions& options) {
    const double coeff = linearized_friction_coefficient(pipe);
    LsqFit fit{0.0, 0.0, 0.0, 0.0, 0};
    double sum_q2v = 0.0;
    double sum_q2 = 0.0;
    for (const auto& slot : train.slots()) {
        if (!slot || !slot->valid()) continue;
        const double q = slot->mass_flow;
        if (std::abs(q) < options.min_abs_flow) continue;
        const double mean = mean_pressure_stationary(slot->p_in, slot->p_out);
        const double a = friction_drop_true(slot->p_in, slot->p_out, q, pipe, gas);
        const double b = coeff * q;
        fit.sum_ab += a * b;
        fit.sum_bb += b * b;
        sum_q2v += q * q * std::abs(velocity_from_state(mean, q, pipe, gas));
        sum_q2 += q * q;
        ++fit.samples_used;
    }
    if (!(fit.sum_bb > 0.0)) {
        throw DegenerateInput("fit_constant_velocity_lsq: all usable flows are zero; "
                              "v_c is undefined");
    }
    fit.v_c = std::max(0.0, fit.sum_ab / fit.sum_bb);
    fit.weighted_mean = sum_q2v / sum_q2;
    return fit;
}

double fit_constant_velocity_lsq(const StateHistory& train, const PipeSpec& pipe,
                                 const GasSpec& gas, const LsqOptions& options) {
    return fit_constant_velocity_lsq_detail(train, pipe, gas, options).v_c;
}

double flow_weighted_mean_velocity(const StateHistory& train, const PipeSpec& pipe,
                                   const GasSpec& gas, const LsqOptions& options) {
    return fit_constant_velocity_lsq_detail(train, pipe, gas, options).weighted_mean;
}

std::optional<double> lagged_velocity(const VelocitySeries& series, Timestamp t,
                                      std::int64_t lag) {
    if (lag < 0) throw InvalidInput("lagged_velocity: lag must be >= 0");
    const Timestamp source = t - lag;
    if (source < series.start()) {
        throw RangeError("lagged_velocity: " + format_iso8601_utc(source) +
                         " precedes the series start " + format_iso8601_utc(series.start()));
    }
    const Timestamp offset = source - series.start();
    if (offset % series.sample_interval() != 0) {
        throw RangeError("lagged_velocity: " + format_iso8601_utc(source) +
                         " is not on the sampling grid");
    }
    const auto index = static_cast<std::size_t>(offset / series.sample_interval());
    if (index >= series.size()) {
        throw RangeError("lagged_velocity: " + format_iso8601_utc(source) +
                         " is past the series end");
    }
    return series.at(index);
}

VelocityCdf::VelocityCdf(std::vector<double> sorted_values) : sorted_(std::move(sorted_values)) {
    if (sorted_.empty()) throw DegenerateInput("VelocityCdf: no values");
    if (!std::is_sorted(sorted_.begin(), sorted_.end())) {
        throw InvalidInput("VelocityCdf: values must be sorted ascending");
    }
}

double VelocityCdf::percentile(double alpha) const {
    if (!(alpha >= 0.0 && alpha <= 100.0)) {
        throw InvalidInput("VelocityCdf::percentile: alpha must lie in [0, 100]");
    }
    const double pos = static_cast<double>(sorted_.size() - 1) * alpha / 100.0;
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    if (lo + 1 >= sorted_.size()) return sorted_.back();
    const double frac = pos - static_cast<double>(lo);
    return sorted_[lo] + frac * (sorted_[lo + 1] - sorted_[lo]);
}

std::vector<std::pair<double, double>> VelocityCdf::distinct_steps() const {
    std::vector<std::pair<double, double>> steps;
    const double n = static_cast<double>(sorted_.size());
    for (std::size_t i = 0; i < sorted_.size(); ++i) {
        if (i + 1 < sorted_.size() && sorted_[i + 1] == sorted_[i]) continue;
        steps.emplace_back(sorted_[i], static_cast<double>(i + 1) / n);
    }
    return steps;
}

VelocityCdf velocity_cdf(const VelocitySeries& series) {
    std::vector<double> values;
    values.reserve(series.size());
    for (double v : series.raw()) {
        if (!std::isnan(v)) values.push_back(v);
    }
    if (values.empty()) throw DegenerateInput("velocity_cdf: series has no present values");
    std::sort(values.begin(), values.end());
    return VelocityCdf(std::move(values));
}

double spread_ratio(double spread, double mean) {
    if (mean == 0.0) throw DegenerateInput("spread_ratio: mean is zero");
    return spread / 2.0 / mean;
}

double implied_spread(double ratio, double mean) { return ratio * 2.0 * mean; }

double percentile_spread_relative_error(const VelocitySeries& series, double lo, double hi) {
    const VelocityCdf cdf = velocity_cdf(series);
    return spread_ratio(cdf.percentile(hi) - cdf.percentile(lo), series.mean());
}

namespace {

constexpr std::size_t kLanes = 4;

struct PairSums {
    double abs[kLanes] = {}, rel[kLanes] = {}, count[kLanes] = {}, rel_count[kLanes] = {};
};

double lanes_total(const double (&x)[kLanes]) { return (x[0] + x[1]) + (x[2] + x[3]); }

// Pairs (t, t + k) for t < m on a series without gaps; four interleaved
// partial sums per quantity.
void sum_pairs_dense(const double* __restrict a, const double* __restrict b,
                     const double* __restrict w, const double* __restrict wi, std::size_t m,
                     PairSums& s) {
    double abs0 = 0, abs1 = 0, abs2 = 0, abs3 = 0, rel0 = 0, rel1 = 0, rel2 = 0, rel3 = 0;
    std::size_t t = 0;
    for (; t + kLanes <= m; t += kLanes) {
        const double d0 = std::abs(b[t] - a[t]), d1 = std::abs(b[t + 1] - a[t + 1]);
        const double d2 = std::abs(b[t + 2] - a[t + 2]), d3 = std::abs(b[t + 3] - a[t + 3]);
        abs0 += d0 * w[t];
        abs1 += d1 * w[t + 1];
        abs2 += d2 * w[t + 2];
        abs3 += d3 * w[t + 3];
        rel0 += d0 * wi[t];
        rel1 += d1 * wi[t + 1];
        rel2 += d2 * wi[t + 2];
        rel3 += d3 * wi[t + 3];
    }
    double abs_lane[kLanes] = {abs0, abs1, abs2, abs3}, rel_lane[kLanes] = {rel0, rel1, rel2, rel3};
    for (std::size_t l = 0; t < m; ++t, ++l) {
        const double d = std::abs(b[t] - a[t]);
        abs_lane[l] += d * w[t];
        rel_lane[l] += d * wi[t];
    }
    for (std::size_t l = 0; l < kLanes; ++l) {
        s.abs[l] = abs_lane[l];
        s.rel[l] = rel_lane[l];
    }
}

// Same with a presence factor on the end slot, counting pairs as it goes.
void sum_pairs_gapped(const double* __restrict a, const double* __restrict b,
                      const double* __restrict pb, const double* __restrict w,
                      const double* __restrict wi, const double* __restrict rw, std::size_t m,
                      PairSums& s) {
    PairSums acc;
    std::size_t t = 0;
    for (; t + kLanes <= m; t += kLanes) {
        for (std::size_t l = 0; l < kLanes; ++l) {
            const double d = std::abs(b[t + l] - a[t + l]) * pb[t + l];
            acc.abs[l] += d * w[t + l];
            acc.rel[l] += d * wi[t + l];
            acc.count[l] += w[t + l] * pb[t + l];
            acc.rel_count[l] += rw[t + l] * pb[t + l];
        }
    }
    for (std::size_t l = 0; t < m; ++t, ++l) {
        const double d = std::abs(b[t] - a[t]) * pb[t];
        acc.abs[l] += d * w[t];
        acc.rel[l] += d * wi[t];
        acc.count[l] += w[t] * pb[t];
        acc.rel_count[l] += rw[t] * pb[t];
    }
    s = acc;
}

}  // namespace

ChangeCurve velocity_change_curve(const VelocitySeries& series, std::int64_t max_horizon,
                                  double min_velocity, unsigned threads) {
    const std::int64_t interval = series.sample_interval();
    if (max_horizon < interval) {
        throw InvalidInput("velocity_change_curve: max_horizon must cover one sample interval");
    }
    const std::int64_t span =
        series.empty() ? 0 : static_cast<std::int64_t>(series.size() - 1) * interval;
    if (span < max_horizon) {
        throw RangeError("velocity_change_curve: series spans " + std::to_string(span) +
                         " s, less than the " + std::to_string(max_horizon) + " s horizon");
    }

    const std::size_t n = series.size();
    const auto horizons = static_cast<std::size_t>(max_horizon / interval);

    // Branch-free per-slot arrays: value (0 if missing), presence, start-point
    // weight, and weight times 1/v for the relative curve (0 where v = 0,
    // which only a zero min_velocity admits).
    std::vector<double> value(n), present(n), weight(n), rel_weight(n), weighted_inverse(n);
    bool gaps = false;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = series.raw()[i];
        const bool ok = !std::isnan(v);
        const bool starts = ok && v >= min_velocity;
        const bool rel = starts && v > 0.0;
        gaps = gaps || !ok;
        value[i] = ok ? v : 0.0;
        present[i] = ok ? 1.0 : 0.0;
        weight[i] = starts ? 1.0 : 0.0;
        rel_weight[i] = rel ? 1.0 : 0.0;
        weighted_inverse[i] = rel ? 1.0 / v : 0.0;
    }
    // Without gaps the pair counts are prefix sums of the start weights.
    std::vector<double> weight_prefix, rel_prefix;
    if (!gaps) {
        weight_prefix.assign(n + 1, 0.0);
        rel_prefix.assign(n + 1, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            weight_prefix[i + 1] = weight_prefix[i] + weight[i];
            rel_prefix[i + 1] = rel_prefix[i] + rel_weight[i];
        }
    }

    ChangeCurve curve;
    curve.horizons.resize(horizons);
    curve.mean_abs_change.assign(horizons, 0.0);
    curve.mean_rel_change.assign(horizons, 0.0);
    curve.pair_count.assign(horizons, 0);

    auto horizon = [&](std::size_t h) {
        const std::size_t k = h + 1;
        const std::size_t m = n - k;
        PairSums sums;
        double pairs = 0.0, rel_pairs = 0.0;
        if (!gaps) {
            sum_pairs_dense(value.data(), value.data() + k, weight.data(), weighted_inverse.data(),
                            m, sums);
            pairs = weight_prefix[m];
            rel_pairs = rel_prefix[m];
        } else {
            sum_pairs_gapped(value.data(), value.data() + k, present.data() + k, weight.data(),
                             weighted_inverse.data(), rel_weight.data(), m, sums);
            pairs = lanes_total(sums.count);
            rel_pairs = lanes_total(sums.rel_count);
        }
        curve.horizons[h] = static_cast<std::int64_t>(k) * interval;
        curve.pair_count[h] = static_cast<std::size_t>(pairs);
        if (pairs > 0.0) curve.mean_abs_change[h] = lanes_total(sums.abs) / pairs;
        if (rel_pairs > 0.0) curve.mean_rel_change[h] = lanes_total(sums.rel) / rel_pairs;
    };
    auto run = [&](std::size_t first, std::size_t stride) {
        for (std::size_t h = first; h < horizons; h += stride) horizon(h);
    };

    unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, horizons));
    if (workers <= 1) {
        run(0, 1);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w, workers);
    }
    return curve;
}

}  // namespace gaslin
