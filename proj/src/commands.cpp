#include "gaslin/cli.h"

#include "gaslin/errors.h"
#include "gaslin/pipe_model.h"
#include "gaslin/velocity_fit.h"

#include "json.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>
#include <limits>
#include <map>
#include <thread>
#include <tuple>

namespace gaslin {

int exit_code_for(const std::exception& e) noexcept {
    if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
    if (dynamic_cast<const DataError*>(&e)) return kExitData;
    if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return kExitData;
    if (dynamic_cast<const InvalidInput*>(&e) || dynamic_cast<const DegenerateInput*>(&e) ||
        dynamic_cast<const ConvergenceError*>(&e) || dynamic_cast<const NonphysicalResult*>(&e)) {
        return kExitNumeric;
    }
    return kExitFailure;
}

namespace {

// Runs fn(i) for every pipe on its own thread and returns results in pipe
// order. The first failure in pipe order is rethrown.
template <typename Fn>
auto for_each_pipe(std::size_t count, Fn fn) {
    using Result = decltype(fn(std::size_t{0}));
    std::vector<std::future<Result>> futures;
    futures.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        futures.push_back(std::async(std::launch::async, fn, i));
    }
    std::vector<Result> results;
    results.reserve(count);
    for (auto& f : futures) results.push_back(f.get());
    return results;
}

unsigned curve_threads(const RunConfig& config) {
    if (config.threads > 0) return config.threads;
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    return std::max<unsigned>(1u, hw / static_cast<unsigned>(std::max<std::size_t>(1, config.pipes.size())));
}

std::string format_g(double value, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, value);
    return buf;
}

std::string fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, round_half_even(value, decimals));
    return buf;
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write '" + tmp.string() + "'");
        out << contents;
        out.flush();
        if (!out) throw DataError("error while writing '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

StateHistory load_pipe_history(const PipeEntry& entry, const RunConfig& config,
                               std::size_t pipe_index) {
    if (const auto* path = std::get_if<std::filesystem::path>(&entry.source)) {
        return load_history_csv(*path, entry.id, {config.sample_interval});
    }
    SyntheticProfile profile = std::get<SyntheticProfile>(entry.source);
    if (config.seed) profile.seed = *config.seed + pipe_index;
    return generate_synthetic_history(profile, entry.pipe, entry.gas, entry.id);
}

SplitSpec resolve_split(const RunConfig& config, const StateHistory& history) {
    if (const auto* s = std::get_if<SplitSpec>(&config.split)) return *s;
    return SplitSpec::at_offset(history, std::get<std::int64_t>(config.split));
}

std::map<std::string, double> read_vc_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open v_c file '" + path.string() + "'");
    try {
        const auto doc = nlohmann::json::parse(in);
        std::map<std::string, double> values;
        for (const auto& item : doc.items()) values[item.key()] = item.value().get<double>();
        return values;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("v_c file '" + path.string() + "': " + e.what());
    }
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

std::vector<FitResult> cmd_fit(const RunConfig& config, std::ostream& out) {
    config.validate();
    const LsqOptions options{config.min_abs_flow};
    auto results = for_each_pipe(config.pipes.size(), [&](std::size_t i) {
        const PipeEntry& entry = config.pipes[i];
        const StateHistory history = load_pipe_history(entry, config, i);
        const auto [train, test] = train_test_split(history, resolve_split(config, history));
        return FitResult{entry.id, fit_constant_velocity_lsq(train, entry.pipe, entry.gas, options)};
    });

    nlohmann::ordered_json doc = nlohmann::ordered_json::object();
    for (const auto& r : results) doc[r.pipe_id] = r.v_c;
    write_file_atomic(config.output_dir / "vc.json", doc.dump(2) + "\n");

    char line[128];
    std::snprintf(line, sizeof line, "%-8s %9s\n", "pipe", "v_c[m/s]");
    out << line;
    for (const auto& r : results) {
        std::snprintf(line, sizeof line, "%-8s %9s\n", r.pipe_id.c_str(), fixed(r.v_c, 3).c_str());
        out << line;
    }
    return results;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

std::vector<ErrorReport> cmd_evaluate(const RunConfig& config, const EvaluateOptions& options,
                                      std::ostream& out) {
    config.validate();
    std::vector<Approach> approaches = config.approaches;
    if (options.oracle_velocity) approaches = {Approach::Oracle};

    std::map<std::string, double> fitted;
    const bool need_fit = std::count(approaches.begin(), approaches.end(), Approach::A) > 0;
    if (need_fit && options.vc_file) fitted = read_vc_file(*options.vc_file);

    const LsqOptions lsq{config.min_abs_flow};
    auto per_pipe = for_each_pipe(config.pipes.size(), [&](std::size_t i) {
        const PipeEntry& entry = config.pipes[i];
        const StateHistory history = load_pipe_history(entry, config, i);
        const SplitSpec split = resolve_split(config, history);
        const auto [train, test] = train_test_split(history, split);

        std::vector<ErrorReport> reports;
        for (Approach approach : approaches) {
            switch (approach) {
                case Approach::A: {
                    double v_c = 0.0;
                    if (options.vc_file) {
                        auto it = fitted.find(entry.id);
                        if (it == fitted.end()) {
                            throw ConfigError("v_c file '" + options.vc_file->string() +
                                              "' has no entry for pipe '" + entry.id + "'");
                        }
                        v_c = it->second;
                    } else {
                        v_c = fit_constant_velocity_lsq(train, entry.pipe, entry.gas, lsq);
                    }
                    reports.push_back(
                        evaluate_fixed_velocity(test, ConstantVelocity{v_c}, entry.pipe, entry.gas));
                    break;
                }
                case Approach::B: {
                    if (test.start() - config.lag < history.start()) {
                        throw RangeError("pipe '" + entry.id + "': approach B needs " +
                                         std::to_string(config.lag) +
                                         " s of history before the test range starting " +
                                         format_iso8601_utc(test.start()) + ", but the history starts " +
                                         format_iso8601_utc(history.start()));
                    }
                    auto series = std::make_shared<const VelocitySeries>(
                        velocity_series_from_history(history, entry.pipe, entry.gas));
                    reports.push_back(evaluate_fixed_velocity(
                        test, LaggedVelocity{series, config.lag, config.min_velocity}, entry.pipe,
                        entry.gas));
                    break;
                }
                case Approach::Oracle:
                    reports.push_back(
                        evaluate_fixed_velocity(test, OracleVelocity{}, entry.pipe, entry.gas));
                    break;
            }
        }
        return reports;
    });

    std::vector<ErrorReport> all;
    for (std::size_t a = 0; a < approaches.size(); ++a) {
        std::vector<ErrorReport> rows;
        for (const auto& reports : per_pipe) rows.push_back(reports[a]);
        const std::string rendered = render_report(rows, config.format);
        write_file_atomic(config.output_dir / ("report_" + to_string(approaches[a]) + "." +
                                               extension_for(config.format)),
                          rendered);
        if (config.format == ReportFormat::text) {
            out << "approach " << to_string(approaches[a]) << "\n";
        }
        out << rendered;
        all.insert(all.end(), rows.begin(), rows.end());
    }
    return all;
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

void cmd_analyze(const RunConfig& config, std::ostream& out) {
    config.validate();
    const unsigned threads = curve_threads(config);

    struct Summary {
        std::string id;
        double mean, p10, p90, ratio;
        std::size_t present;
    };

    auto summaries = for_each_pipe(config.pipes.size(), [&](std::size_t i) {
        const PipeEntry& entry = config.pipes[i];
        const StateHistory history = load_pipe_history(entry, config, i);
        const VelocitySeries series = velocity_series_from_history(history, entry.pipe, entry.gas);
        const VelocityCdf cdf = velocity_cdf(series);
        const ChangeCurve curve =
            velocity_change_curve(series, config.max_horizon, config.min_velocity, threads);

        std::string cdf_text = "abs_velocity_mps,cumulative_fraction\n";
        for (const auto& [value, fraction] : cdf.distinct_steps()) {
            cdf_text += format_g(value, 10) + "," + format_g(fraction, 10) + "\n";
        }
        std::string change_text = "horizon_s,mean_abs_change_mps,mean_rel_change\n";
        for (std::size_t h = 0; h < curve.horizons.size(); ++h) {
            change_text += std::to_string(curve.horizons[h]) + "," +
                           format_g(curve.mean_abs_change[h], 10) + "," +
                           format_g(curve.mean_rel_change[h], 10) + "\n";
        }
        Summary s{entry.id, series.mean(), cdf.percentile(10.0), cdf.percentile(90.0), 0.0,
                  cdf.size()};
        s.ratio = s.mean > 0.0 ? spread_ratio(s.p90 - s.p10, s.mean)
                               : std::numeric_limits<double>::quiet_NaN();
        return std::tuple{s, cdf_text, change_text};
    });

    std::string summary_csv = "pipe,mean_abs_velocity_mps,p10_mps,p90_mps,half_spread_over_mean\n";
    for (const auto& [s, cdf_text, change_text] : summaries) {
        write_file_atomic(config.output_dir / ("cdf_" + s.id + ".csv"), cdf_text);
        write_file_atomic(config.output_dir / ("change_" + s.id + ".csv"), change_text);
        summary_csv += s.id + "," + fixed(s.mean, 6) + "," + fixed(s.p10, 6) + "," +
                       fixed(s.p90, 6) + "," + fixed(s.ratio, 6) + "\n";
        out << "pipe " << s.id << ": mean |v| " << fixed(s.mean, 3) << " m/s, p10 "
            << fixed(s.p10, 3) << ", p90 " << fixed(s.p90, 3) << ", (p90-p10)/2/mean "
            << fixed(s.ratio, 3) << " (" << s.present << " values)\n";
    }
    write_file_atomic(config.output_dir / "analysis_summary.csv", summary_csv);
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

std::vector<std::filesystem::path> cmd_synth(const std::vector<PipeEntry>& pipes,
                                             const std::filesystem::path& out_dir,
                                             std::optional<std::uint64_t> seed, std::ostream& out) {
    std::vector<std::size_t> synthetic;
    for (std::size_t i = 0; i < pipes.size(); ++i) {
        if (std::holds_alternative<SyntheticProfile>(pipes[i].source)) synthetic.push_back(i);
    }
    if (synthetic.empty()) throw ConfigError("synth: no pipe with a synthetic profile");

    auto texts = for_each_pipe(synthetic.size(), [&](std::size_t k) {
        const PipeEntry& entry = pipes[synthetic[k]];
        SyntheticProfile profile = std::get<SyntheticProfile>(entry.source);
        if (seed) profile.seed = *seed + synthetic[k];
        const StateHistory history =
            generate_synthetic_history(profile, entry.pipe, entry.gas, entry.id);
        std::ostringstream csv;
        write_history_csv(csv, history);
        return std::pair{history.size(), csv.str()};
    });

    std::vector<std::filesystem::path> written;
    for (std::size_t k = 0; k < synthetic.size(); ++k) {
        const auto path = out_dir / (pipes[synthetic[k]].id + ".csv");
        write_file_atomic(path, texts[k].second);
        out << "wrote " << texts[k].first << " samples to " << path.string() << "\n";
        written.push_back(path);
    }
    return written;
}

}  // namespace gaslin
