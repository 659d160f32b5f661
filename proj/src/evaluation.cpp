#include "gaslin/evaluation.h"

#include "gaslin/errors.h"
#include "gaslin/pipe_model.h"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace gaslin {

std::string to_string(Approach approach) {
    switch (approach) {
        case Approach::A: return "A";
        case Approach::B: return "B";
        case Approach::Oracle: return "oracle";
    }
    return "?";
}

namespace {

double quotient(double num, double den) {
    if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return num / den;
}

// Neumaier-compensated sum of an ascending copy of `values`.
double ordered_sum(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    double carry = 0.0;
    for (double v : values) {
        const double t = sum + v;
        carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
    }
    return sum + carry;
}

}  // namespace

ErrorReport make_report(std::string pipe_id, Approach approach, std::optional<double> v_c,
                        double avg_err, double max_err, double avg_abs_fl, double max_abs_fl,
                        std::size_t n_samples, std::size_t n_skipped) {
    ErrorReport r;
    r.pipe_id = std::move(pipe_id);
    r.approach = approach;
    r.v_c = v_c;
    r.avg_err = avg_err;
    r.max_err = max_err;
    r.avg_abs_fl = avg_abs_fl;
    r.max_abs_fl = max_abs_fl;
    r.ratio_avg = quotient(avg_err, avg_abs_fl);
    r.ratio_max = quotient(max_err, max_abs_fl);
    r.n_samples = n_samples;
    r.n_skipped = n_skipped;
    return r;
}

void SplitSpec::validate() const {
    if (!(train_begin < train_end) || !(test_begin < test_end)) {
        throw InvalidInput("SplitSpec: train and test ranges must be nonempty");
    }
    if (test_begin < train_end) {
        throw InvalidInput("SplitSpec: test range must start at or after the end of training");
    }
}

SplitSpec SplitSpec::at_offset(const StateHistory& history, std::int64_t train_span) {
    const Timestamp mid = history.start() + train_span;
    return {history.start(), mid, mid, history.end()};
}

std::pair<StateHistory, StateHistory> train_test_split(const StateHistory& history,
                                                       const SplitSpec& split) {
    try {
        split.validate();
    } catch (const InvalidInput& e) {
        throw RangeError(e.what());
    }
    auto inside = [&](Timestamp t) { return t >= history.start() && t <= history.end(); };
    if (!inside(split.train_begin) || !inside(split.train_end) || !inside(split.test_begin) ||
        !inside(split.test_end)) {
        throw RangeError("train_test_split: split ranges leave the history span [" +
                         format_iso8601_utc(history.start()) + ", " +
                         format_iso8601_utc(history.end()) + ")");
    }
    StateHistory train = history.slice(split.train_begin, split.train_end);
    StateHistory test = history.slice(split.test_begin, split.test_end);
    if (train.empty()) throw RangeError("train_test_split: training range holds no samples");
    if (test.empty()) throw RangeError("train_test_split: test range holds no samples");
    return {std::move(train), std::move(test)};
}

SampleErrors evaluate_sample_errors(const StateHistory& test, const VelocitySource& source,
                                    const PipeSpec& pipe, const GasSpec& gas) {
    SampleErrors out;
    out.samples.reserve(test.size());
    for (const auto& slot : test.slots()) {
        if (!slot || !slot->valid()) continue;
        const double q = slot->mass_flow;
        const double mean = mean_pressure_stationary(slot->p_in, slot->p_out);

        std::optional<double> v_c = std::visit(
            [&](const auto& s) -> std::optional<double> {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, ConstantVelocity>) {
                    return s.v_c;
                } else if constexpr (std::is_same_v<S, LaggedVelocity>) {
                    if (!s.series) throw InvalidInput("LaggedVelocity: series is not set");
                    const auto lagged = lagged_velocity(*s.series, slot->timestamp, s.lag);
                    if (!lagged || *lagged < s.min_velocity) return std::nullopt;
                    return lagged;
                } else {
                    return std::abs(velocity_from_state(mean, q, pipe, gas));
                }
            },
            source);
        if (!v_c) {
            ++out.skipped;
            continue;
        }
        const double fl_true = friction_drop_true(slot->p_in, slot->p_out, q, pipe, gas);
        const double fl_lin = friction_drop_linearized(q, *v_c, pipe);
        out.samples.push_back({slot->timestamp, std::abs(fl_true - fl_lin), std::abs(fl_true)});
    }
    return out;
}

ErrorReport aggregate_errors(std::string pipe_id, Approach approach, std::optional<double> v_c,
                             std::span<const SampleError> samples, std::size_t skipped) {
    if (samples.empty()) {
        throw DegenerateInput("evaluate_fixed_velocity: no usable test sample for pipe '" +
                              pipe_id + "'");
    }
    std::vector<double> errs, fls;
    errs.reserve(samples.size());
    fls.reserve(samples.size());
    double max_err = 0.0, max_fl = 0.0;
    for (const auto& s : samples) {
        errs.push_back(s.err);
        fls.push_back(s.abs_fl);
        max_err = std::max(max_err, s.err);
        max_fl = std::max(max_fl, s.abs_fl);
    }
    const double n = static_cast<double>(samples.size());
    return make_report(std::move(pipe_id), approach, v_c, ordered_sum(std::move(errs)) / n, max_err,
                       ordered_sum(std::move(fls)) / n, max_fl, samples.size(), skipped);
}

ErrorReport evaluate_fixed_velocity(const StateHistory& test, const VelocitySource& source,
                                    const PipeSpec& pipe, const GasSpec& gas) {
    const SampleErrors errors = evaluate_sample_errors(test, source, pipe, gas);
    Approach approach = Approach::Oracle;
    std::optional<double> v_c;
    if (const auto* c = std::get_if<ConstantVelocity>(&source)) {
        approach = Approach::A;
        v_c = c->v_c;
    } else if (std::holds_alternative<LaggedVelocity>(source)) {
        approach = Approach::B;
    }
    return aggregate_errors(test.pipe_id(), approach, v_c, errors.samples, errors.skipped);
}

double constant_velocity_sse(const StateHistory& history, double v_c, const PipeSpec& pipe,
                             const GasSpec& gas) {
    double sse = 0.0;
    for (const auto& slot : history.slots()) {
        if (!slot || !slot->valid()) continue;
        const double diff = friction_drop_true(slot->p_in, slot->p_out, slot->mass_flow, pipe, gas) -
                            friction_drop_linearized(slot->mass_flow, v_c, pipe);
        sse += diff * diff;
    }
    return sse;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

ReportFormat parse_report_format(const std::string& name) {
    if (name == "text") return ReportFormat::text;
    if (name == "csv") return ReportFormat::csv;
    if (name == "json") return ReportFormat::json;
    throw InvalidInput("unknown report format '" + name + "' (expected text, csv or json)");
}

std::string extension_for(ReportFormat format) {
    switch (format) {
        case ReportFormat::text: return "txt";
        case ReportFormat::csv: return "csv";
        case ReportFormat::json: return "json";
    }
    return "txt";
}

double round_half_even(double value, int decimals) {
    if (!std::isfinite(value)) return value;
    const double scale = std::pow(10.0, decimals);
    // nearbyint honours the default round-to-nearest-even mode.
    return std::nearbyint(value * scale) / scale;
}

namespace {

std::string fixed3(double value) {
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    if (std::isnan(value)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", round_half_even(value, 3));
    return buf;
}

struct RenderedRow {
    std::string pipe, approach, v_c, avg_err, max_err, avg_fl, max_fl, ratio_avg, ratio_max,
        n_samples, n_skipped;
};

RenderedRow render_row(const ErrorReport& r) {
    return {r.pipe_id,
            to_string(r.approach),
            r.v_c ? fixed3(*r.v_c) : std::string(),
            fixed3(pa_to_bar(r.avg_err)),
            fixed3(pa_to_bar(r.max_err)),
            fixed3(pa_to_bar(r.avg_abs_fl)),
            fixed3(pa_to_bar(r.max_abs_fl)),
            fixed3(r.ratio_avg),
            fixed3(r.ratio_max),
            std::to_string(r.n_samples),
            std::to_string(r.n_skipped)};
}

nlohmann::ordered_json json_number(double value) {
    const double rounded = round_half_even(value, 3);
    if (!std::isfinite(rounded)) return nullptr;
    return rounded;
}

}  // namespace

std::string render_report(std::span<const ErrorReport> reports, ReportFormat format) {
    std::ostringstream out;
    switch (format) {
        case ReportFormat::csv: {
            out << kReportColumns << '\n';
            for (const auto& r : reports) {
                const RenderedRow row = render_row(r);
                out << row.pipe << ',' << row.approach << ',' << row.v_c << ',' << row.avg_err
                    << ',' << row.max_err << ',' << row.avg_fl << ',' << row.max_fl << ','
                    << row.ratio_avg << ',' << row.ratio_max << ',' << row.n_samples << ','
                    << row.n_skipped << '\n';
            }
            break;
        }
        case ReportFormat::json: {
            auto doc = nlohmann::ordered_json::array();
            for (const auto& r : reports) {
                nlohmann::ordered_json row;
                row["pipe"] = r.pipe_id;
                row["approach"] = to_string(r.approach);
                row["v_c_mps"] = r.v_c ? json_number(*r.v_c) : nlohmann::ordered_json(nullptr);
                row["avg_err_bar"] = json_number(pa_to_bar(r.avg_err));
                row["max_err_bar"] = json_number(pa_to_bar(r.max_err));
                row["avg_fl_bar"] = json_number(pa_to_bar(r.avg_abs_fl));
                row["max_fl_bar"] = json_number(pa_to_bar(r.max_abs_fl));
                row["ratio_avg"] = json_number(r.ratio_avg);
                row["ratio_max"] = json_number(r.ratio_max);
                row["n_samples"] = r.n_samples;
                row["n_skipped"] = r.n_skipped;
                doc.push_back(std::move(row));
            }
            out << doc.dump(2) << '\n';
            break;
        }
        case ReportFormat::text: {
            const char* fmt = "%-8s %-8s %9s %12s %12s %13s %13s %9s %9s %9s %9s\n";
            char buf[256];
            std::snprintf(buf, sizeof buf, fmt, "pipe", "approach", "v_c[m/s]", "avg_err[bar]",
                          "max_err[bar]", "avg_|fL|[bar]", "max_|fL|[bar]", "avg_ratio",
                          "max_ratio", "n_samples", "n_skipped");
            out << buf;
            for (const auto& r : reports) {
                const RenderedRow row = render_row(r);
                std::snprintf(buf, sizeof buf, fmt, row.pipe.c_str(), row.approach.c_str(),
                              row.v_c.empty() ? "-" : row.v_c.c_str(), row.avg_err.c_str(),
                              row.max_err.c_str(), row.avg_fl.c_str(), row.max_fl.c_str(),
                              row.ratio_avg.c_str(), row.ratio_max.c_str(),
                              row.n_samples.c_str(), row.n_skipped.c_str());
                out << buf;
            }
            break;
        }
    }
    return out.str();
}

}  // namespace gaslin
