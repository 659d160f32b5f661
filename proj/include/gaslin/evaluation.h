#pragma once

// Chronological train/test split and the error statistics of a
// fixed-velocity friction term against the true quadratic one.

#include "gaslin/history.h"
#include "gaslin/velocity_fit.h"

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace gaslin {

enum class Approach { A, B, Oracle };

std::string to_string(Approach approach);

// All pressures in Pa; render_report converts to bar.
struct ErrorReport {
    std::string pipe_id;
    Approach approach = Approach::A;
    std::optional<double> v_c;  // approach A only
    double avg_err = 0.0;
    double max_err = 0.0;
    double avg_abs_fl = 0.0;
    double max_abs_fl = 0.0;
    double ratio_avg = 0.0;
    double ratio_max = 0.0;
    std::size_t n_samples = 0;
    std::size_t n_skipped = 0;
};

// Builds a report from aggregate values, deriving both ratios as quotients
// of the given columns (0/0 is reported as 0).
ErrorReport make_report(std::string pipe_id, Approach approach, std::optional<double> v_c,
                        double avg_err, double max_err, double avg_abs_fl, double max_abs_fl,
                        std::size_t n_samples, std::size_t n_skipped);

// Half-open ranges [begin, end).
struct SplitSpec {
    Timestamp train_begin;
    Timestamp train_end;
    Timestamp test_begin;
    Timestamp test_end;

    // Throws InvalidInput if a range is empty, they overlap, or test
    // precedes train.
    void validate() const;

    // Train on [start, start + train_span), test on the rest of the history.
    static SplitSpec at_offset(const StateHistory& history, std::int64_t train_span);
};

// Throws RangeError if a range leaves the history span or either part holds
// no slots.
std::pair<StateHistory, StateHistory> train_test_split(const StateHistory& history,
                                                       const SplitSpec& split);

struct ConstantVelocity {
    double v_c;
};

// v_c(t) = |v(t - lag)| from `series`; samples whose lagged value is missing
// or below min_velocity are skipped.
struct LaggedVelocity {
    std::shared_ptr<const VelocitySeries> series;
    std::int64_t lag = kDefaultLag;
    double min_velocity = kDefaultMinVelocity;
};

// v_c(t) = the sample's own |v| at mean pressure. Yields zero error.
struct OracleVelocity {};

using VelocitySource = std::variant<ConstantVelocity, LaggedVelocity, OracleVelocity>;

struct SampleError {
    Timestamp timestamp;
    double err;     // |fL_true - fL_lin|, Pa
    double abs_fl;  // |fL_true|, Pa
};

struct SampleErrors {
    std::vector<SampleError> samples;
    std::size_t skipped = 0;
};

SampleErrors evaluate_sample_errors(const StateHistory& test, const VelocitySource& source,
                                    const PipeSpec& pipe, const GasSpec& gas);

// Aggregates per-sample errors. Values are sorted before compensated
// summation, so the result is bit-identical for any input order.
// Throws DegenerateInput if `samples` is empty.
ErrorReport aggregate_errors(std::string pipe_id, Approach approach, std::optional<double> v_c,
                             std::span<const SampleError> samples, std::size_t skipped);

// Throws DegenerateInput if no test sample is usable.
ErrorReport evaluate_fixed_velocity(const StateHistory& test, const VelocitySource& source,
                                    const PipeSpec& pipe, const GasSpec& gas);

// Sum over present samples of (fL_true - fL_lin(v_c))^2, the approach-A
// objective.
double constant_velocity_sse(const StateHistory& history, double v_c, const PipeSpec& pipe,
                             const GasSpec& gas);

enum class ReportFormat { text, csv, json };

ReportFormat parse_report_format(const std::string& name);
std::string extension_for(ReportFormat format);

// Rounds to `decimals` places with ties to even.
double round_half_even(double value, int decimals);

inline constexpr const char* kReportColumns =
    "pipe,approach,v_c_mps,avg_err_bar,max_err_bar,avg_fl_bar,max_fl_bar,ratio_avg,ratio_max,"
    "n_samples,n_skipped";

// Deterministic serialization; pressures in bar and ratios and v_c with
// three decimals.
std::string render_report(std::span<const ErrorReport> reports, ReportFormat format);

}  // namespace gaslin
