#include "gaslin/history.h"

#include "gaslin/errors.h"
#include "gaslin/pipe_model.h"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace gaslin {

bool StateSample::valid() const noexcept {
    return p_in > 0.0 && p_out > 0.0 && std::isfinite(p_in) && std::isfinite(p_out) &&
           std::isfinite(mass_flow);
}

StateHistory::StateHistory(std::string pipe_id, Timestamp start, std::int64_t sample_interval)
    : pipe_id_(std::move(pipe_id)), start_(start), interval_(sample_interval) {
    if (interval_ <= 0) {
        throw InvalidInput("StateHistory: sample interval must be > 0");
    }
}

std::size_t StateHistory::gap_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(slots_.begin(), slots_.end(), [](const auto& s) { return !s; }));
}

void StateHistory::push_back(const StateSample& sample) {
    const Timestamp expected = end();
    if (sample.timestamp != expected) {
        throw MonotonicityError("StateHistory: sample at " + format_iso8601_utc(sample.timestamp) +
                                " does not match next slot " + format_iso8601_utc(expected));
    }
    slots_.emplace_back(sample);
}

void StateHistory::push_gap() { slots_.emplace_back(std::nullopt); }

StateHistory StateHistory::slice(Timestamp begin, Timestamp end_exclusive) const {
    if ((begin - start_) % interval_ != 0 || (end_exclusive - start_) % interval_ != 0) {
        throw RangeError("StateHistory::slice: bounds are not on the sampling grid");
    }
    const Timestamp lo = std::clamp(begin, start_, end());
    const Timestamp hi = std::clamp(end_exclusive, lo, end());
    StateHistory out(pipe_id_, lo, interval_);
    out.policy_ = policy_;
    const auto first = static_cast<std::size_t>((lo - start_) / interval_);
    const auto last = static_cast<std::size_t>((hi - start_) / interval_);
    out.slots_.assign(slots_.begin() + static_cast<std::ptrdiff_t>(first),
                      slots_.begin() + static_cast<std::ptrdiff_t>(last));
    return out;
}

// ---------------------------------------------------------------------------
// Timestamps
// ---------------------------------------------------------------------------

namespace {

bool parse_fixed_int(std::string_view text, int& out) {
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace

Timestamp parse_iso8601_utc(const std::string& text) {
    // YYYY-MM-DDTHH:MM:SSZ
    const std::string_view s = text;
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, se = 0;
    const bool shape_ok = s.size() == 20 && s[4] == '-' && s[7] == '-' && s[10] == 'T' &&
                          s[13] == ':' && s[16] == ':' && s[19] == 'Z';
    if (!shape_ok || !parse_fixed_int(s.substr(0, 4), y) || !parse_fixed_int(s.substr(5, 2), mo) ||
        !parse_fixed_int(s.substr(8, 2), d) || !parse_fixed_int(s.substr(11, 2), h) ||
        !parse_fixed_int(s.substr(14, 2), mi) || !parse_fixed_int(s.substr(17, 2), se)) {
        throw InvalidInput("invalid ISO-8601 UTC timestamp '" + text + "'");
    }
    using namespace std::chrono;
    const year_month_day date{year{y}, month{static_cast<unsigned>(mo)},
                              day{static_cast<unsigned>(d)}};
    if (!date.ok() || h > 23 || mi > 59 || se > 59) {
        throw InvalidInput("invalid ISO-8601 UTC timestamp '" + text + "'");
    }
    const auto days = sys_days{date}.time_since_epoch().count();
    return static_cast<Timestamp>(days) * kSecondsPerDay + h * 3600 + mi * 60 + se;
}

std::string format_iso8601_utc(Timestamp t) {
    using namespace std::chrono;
    Timestamp days = t / kSecondsPerDay;
    Timestamp secs = t % kSecondsPerDay;
    if (secs < 0) {
        secs += kSecondsPerDay;
        --days;
    }
    const year_month_day date{sys_days{std::chrono::days{days}}};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()),
                  static_cast<int>(secs / 3600), static_cast<int>(secs / 60 % 60),
                  static_cast<int>(secs % 60));
    return buf;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kCsvHeader = "timestamp_utc,p_in_bar,p_out_bar,q_kg_per_s";

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
        const std::size_t comma = line.find(',', pos);
        fields.push_back(trim(line.substr(pos, comma == std::string_view::npos ? line.npos : comma - pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return fields;
}

double parse_double(std::string_view field, const char* column, std::size_t line_no) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
        throw ParseError(std::string("cannot parse ") + column + " value '" + std::string(field) + "'",
                         line_no);
    }
    return value;
}

}  // namespace

StateHistory read_history_csv(std::istream& in, const std::string& pipe_id,
                              const CsvLoadOptions& options) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) {
        throw SchemaError("history CSV: missing header line");
    }
    ++line_no;
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

    const auto header = split_commas(line);
    std::unordered_map<std::string_view, std::size_t> index;
    for (std::size_t i = 0; i < header.size(); ++i) index.emplace(header[i], i);
    const char* required[] = {"timestamp_utc", "p_in_bar", "p_out_bar", "q_kg_per_s"};
    std::size_t col[4];
    for (int i = 0; i < 4; ++i) {
        auto it = index.find(required[i]);
        if (it == index.end()) {
            throw SchemaError(std::string("history CSV: missing column '") + required[i] + "'");
        }
        col[i] = it->second;
    }
    const std::size_t column_count = header.size();

    std::optional<StateHistory> history;
    Timestamp last = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_commas(line);
        if (fields.size() < column_count) {
            throw ParseError("expected " + std::to_string(column_count) + " fields, got " +
                                 std::to_string(fields.size()),
                             line_no);
        }
        Timestamp ts = 0;
        try {
            ts = parse_iso8601_utc(std::string(fields[col[0]]));
        } catch (const InvalidInput& e) {
            throw ParseError(e.what(), line_no);
        }
        const double p_in = parse_double(fields[col[1]], "p_in_bar", line_no);
        const double p_out = parse_double(fields[col[2]], "p_out_bar", line_no);
        const double q = parse_double(fields[col[3]], "q_kg_per_s", line_no);

        if (!history) {
            history.emplace(pipe_id, ts, options.sample_interval);
        } else {
            if (ts <= last) {
                throw MonotonicityError("history CSV line " + std::to_string(line_no) +
                                        ": timestamp " + format_iso8601_utc(ts) +
                                        " is not after " + format_iso8601_utc(last));
            }
            if ((ts - history->start()) % options.sample_interval != 0) {
                throw ParseError("timestamp " + format_iso8601_utc(ts) +
                                     " is not on the " + std::to_string(options.sample_interval) +
                                     " s sampling grid",
                                 line_no);
            }
            while (history->end() < ts) history->push_gap();
        }
        last = ts;
        const StateSample sample{ts, bar_to_pa(p_in), bar_to_pa(p_out), q};
        if (sample.valid()) {
            history->push_back(sample);
        } else {
            history->push_gap();
        }
    }
    if (!history) return StateHistory(pipe_id, 0, options.sample_interval);
    return std::move(*history);
}

StateHistory load_history_csv(const std::filesystem::path& path, const std::string& pipe_id,
                              const CsvLoadOptions& options) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open history CSV '" + path.string() + "'");
    }
    try {
        return read_history_csv(in, pipe_id, options);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), e.line());
    } catch (const SchemaError& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
}

void write_history_csv(std::ostream& out, const StateHistory& history) {
    out << kCsvHeader << '\n';
    char buf[128];
    for (const auto& slot : history.slots()) {
        if (!slot) continue;
        std::snprintf(buf, sizeof buf, ",%.8f,%.8f,%.6f", pa_to_bar(slot->p_in),
                      pa_to_bar(slot->p_out), slot->mass_flow);
        out << format_iso8601_utc(slot->timestamp) << buf << '\n';
    }
}

void write_history_csv(const std::filesystem::path& path, const StateHistory& history) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot write history CSV '" + path.string() + "'");
    }
    write_history_csv(out, history);
    if (!out) {
        throw DataError("error while writing history CSV '" + path.string() + "'");
    }
}

StateHistory resample_and_fill(const StateHistory& history, FillPolicy policy) {
    StateHistory out(history.pipe_id(), history.start(), history.sample_interval());
    std::optional<StateSample> held;
    for (std::size_t i = 0; i < history.size(); ++i) {
        const auto& slot = history[i];
        if (slot) {
            out.push_back(*slot);
            held = slot;
        } else if (policy == FillPolicy::hold_last && held) {
            StateSample filled = *held;
            filled.timestamp = history.timestamp_at(i);
            out.push_back(filled);
        } else {
            out.push_gap();
        }
    }
    out.set_fill_policy(policy);
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic generator
// ---------------------------------------------------------------------------

std::uint64_t SplitMix64::next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double SplitMix64::uniform() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double SplitMix64::uniform_open() noexcept {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
}

double SplitMix64::normal() noexcept {
    const double u1 = uniform_open();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

void SyntheticProfile::validate() const {
    auto fraction = [](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw InvalidInput(std::string("SyntheticProfile: ") + name + " must lie in [0, 1]");
        }
    };
    fraction(daily_amplitude, "daily_amplitude");
    fraction(noise_std, "noise_std");
    fraction(reversal_probability, "reversal_probability");
    fraction(drift, "drift");
    if (!(base_pressure > 0.0)) throw InvalidInput("SyntheticProfile: base_pressure must be > 0");
    if (!(base_abs_velocity >= 0.0)) {
        throw InvalidInput("SyntheticProfile: base_abs_velocity must be >= 0");
    }
    if (!(reversal_duration > 0.0)) {
        throw InvalidInput("SyntheticProfile: reversal_duration must be > 0");
    }
    if (sample_interval <= 0) throw InvalidInput("SyntheticProfile: sample_interval must be > 0");
    if (duration <= 0) throw InvalidInput("SyntheticProfile: duration must be > 0");
}

namespace {

struct SolvedState {
    double mass_flow;
    double p_in;
    double p_out;
    double friction;
};

// Joint fixed point: q reproduces the target velocity at the stationary mean
// of the endpoints, and the endpoints straddle base_pressure by the drop
// that q causes at that mean.
SolvedState solve_state(double base, double signed_velocity, const PipeSpec& pipe,
                        const GasSpec& gas) {
    const double rs_t = gas.specific_gas_constant() * pipe.temperature();
    double p_in = base;
    double p_out = base;
    double drop = 0.0;
    for (int it = 0; it < 100; ++it) {
        const double mean = mean_pressure_stationary(p_in, p_out);
        const double z = compressibility_papay(mean, pipe.temperature(), gas);
        const double q = signed_velocity * pipe.area() * mean / (rs_t * z);
        const double friction =
            friction_gradient_true(mean, q, pipe, gas, FixedZ{z}) * pipe.length();
        const double gravity = kGravity * pipe.slope() * mean / (rs_t * z) * pipe.length();
        const double next = friction + gravity;
        const double next_in = base + next / 2.0;
        const double next_out = base - next / 2.0;
        if (!(next_out > 0.0)) {
            throw NonphysicalResult("generate_synthetic_history: outlet pressure not positive; "
                                    "velocity too high for the base pressure");
        }
        const bool settled = next_in == p_in && next_out == p_out;
        const bool close = std::abs(next - drop) <= 1e-13 * std::abs(next);
        p_in = next_in;
        p_out = next_out;
        drop = next;
        if (settled || (close && it > 0)) {
            return {q, p_in, p_out, friction};
        }
    }
    throw ConvergenceError("generate_synthetic_history: state solve did not converge");
}

}  // namespace

StateHistory generate_synthetic_history(const SyntheticProfile& profile, const PipeSpec& pipe,
                                        const GasSpec& gas, const std::string& pipe_id,
                                        SyntheticTrace* trace) {
    profile.validate();
    const auto n = static_cast<std::size_t>(profile.duration / profile.sample_interval);
    const double dt = static_cast<double>(profile.sample_interval);
    const double p_reverse =
        1.0 - std::pow(1.0 - profile.reversal_probability, dt / static_cast<double>(kSecondsPerDay));
    const double p_restore = std::min(1.0, dt / profile.reversal_duration);

    StateHistory history(pipe_id, profile.start, profile.sample_interval);
    if (trace) {
        trace->target_abs_velocity.assign(n, 0.0);
        trace->friction_drop.assign(n, 0.0);
    }

    SplitMix64 rng(profile.seed);
    bool reversed = false;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * dt;
        const double noise = rng.normal();
        const double u = rng.uniform();
        if (!reversed && u < p_reverse) {
            reversed = true;
        } else if (reversed && u < p_restore) {
            reversed = false;
        }

        double speed = profile.base_abs_velocity *
                       (1.0 + profile.daily_amplitude *
                                  std::sin(2.0 * kPi * t / static_cast<double>(kSecondsPerDay))) *
                       (1.0 + profile.drift * t / static_cast<double>(kSecondsPerYear)) *
                       (1.0 + profile.noise_std * noise);
        speed = std::max(0.0, speed);

        const SolvedState state =
            solve_state(profile.base_pressure, reversed ? -speed : speed, pipe, gas);
        history.push_back({history.end(), state.p_in, state.p_out, state.mass_flow});
        if (trace) {
            trace->target_abs_velocity[i] = speed;
            trace->friction_drop[i] = state.friction;
        }
    }
    return history;
}

}  // namespace gaslin
