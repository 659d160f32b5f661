#include "gaslin/cli.h"

#include "gaslin/errors.h"

#include "CLI11.hpp"

#include <cmath>
#include <ostream>

namespace gaslin {

namespace {

struct SharedFlags {
    std::string config;
    std::string out;
    std::string format;
    std::optional<double> lag_hours;
    std::optional<double> min_velocity;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
};

void add_shared(CLI::App* cmd, SharedFlags& f, bool config_required) {
    auto* opt = cmd->add_option("--config", f.config, "Run configuration (JSON)");
    if (config_required) opt->required();
    cmd->add_option("--out", f.out, "Output directory");
    cmd->add_option("--format", f.format, "Report format")
        ->check(CLI::IsMember({"text", "csv", "json"}));
    cmd->add_option("--lag-hours", f.lag_hours, "Approach B lag in hours");
    cmd->add_option("--min-velocity", f.min_velocity, "Velocity threshold in m/s");
    cmd->add_option("--seed", f.seed, "Seed for synthetic histories");
    cmd->add_option("--threads", f.threads, "Worker threads for change curves (0: auto)");
}

RunConfig load_with_overrides(const SharedFlags& f) {
    RunConfig cfg = load_run_config(f.config);
    if (!f.out.empty()) cfg.output_dir = f.out;
    if (!f.format.empty()) cfg.format = parse_report_format(f.format);
    if (f.lag_hours) {
        const double seconds = *f.lag_hours * kSecondsPerHour;
        if (!(seconds > 0.0) || std::round(seconds) != seconds) {
            throw ConfigError("--lag-hours must be a positive whole number of seconds");
        }
        cfg.lag = static_cast<std::int64_t>(seconds);
    }
    if (f.min_velocity) cfg.min_velocity = *f.min_velocity;
    if (f.seed) cfg.seed = f.seed;
    if (f.threads > 0) cfg.threads = f.threads;
    cfg.validate();
    return cfg;
}

struct SynthFlags {
    std::string pipe_id = "synthetic";
    std::vector<std::string> pipes;
    double length_m = 16000.0;
    double diameter_m = 1.0;
    double roughness_m = 2e-5;
    double temperature_k = 283.15;
    double slope = 0.0;
    double rs = 500.0;
    double pc_bar = 45.9;
    double tc_k = 191.5;
    double base_pressure_bar = 56.0;
    double base_velocity = 4.2;
    double daily_amplitude = 0.0;
    double noise_std = 0.0;
    double reversal_probability = 0.0;
    double reversal_duration_hours = 24.0;
    double drift = 0.0;
    double duration_days = 730.5;
    std::int64_t interval_s = kDefaultSampleInterval;
    std::string start = "2015-01-01T00:00:00Z";
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fixed-velocity friction linearization for gas pipelines", "gaslin"};
    app.require_subcommand(1);

    SharedFlags fit_flags, eval_flags, analyze_flags, synth_shared;
    bool oracle = false;
    std::string vc_path;
    SynthFlags synth;

    auto* fit = app.add_subcommand("fit", "Fit the least-squares constant velocity per pipe");
    add_shared(fit, fit_flags, true);

    auto* evaluate = app.add_subcommand("evaluate", "Error reports for approaches A and B");
    add_shared(evaluate, eval_flags, true);
    evaluate->add_flag("--oracle-velocity", oracle,
                       "Use each sample's own velocity (zero-error check)");
    evaluate->add_option("--vc", vc_path, "vc.json from a previous fit (default: fit inline)");

    auto* analyze = app.add_subcommand("analyze", "Velocity CDFs and change curves");
    add_shared(analyze, analyze_flags, true);

    auto* synth_cmd = app.add_subcommand("synth", "Write synthetic history CSVs");
    synth_cmd->add_option("--config", synth_shared.config, "Take pipes and profiles from a config");
    synth_cmd->add_option("--pipe", synth.pipes, "Restrict to these config pipe ids");
    synth_cmd->add_option("--out", synth_shared.out, "Output directory")->required();
    synth_cmd->add_option("--seed", synth_shared.seed, "Seed (overrides profile seeds)");
    std::vector<CLI::Option*> profile_opts{
        synth_cmd->add_option("--pipe-id", synth.pipe_id, "Pipe id / file stem"),
        synth_cmd->add_option("--length-m", synth.length_m),
        synth_cmd->add_option("--diameter-m", synth.diameter_m),
        synth_cmd->add_option("--roughness-m", synth.roughness_m),
        synth_cmd->add_option("--temperature-k", synth.temperature_k),
        synth_cmd->add_option("--slope", synth.slope),
        synth_cmd->add_option("--rs", synth.rs, "Specific gas constant [J/(kg K)]"),
        synth_cmd->add_option("--pc-bar", synth.pc_bar),
        synth_cmd->add_option("--tc-k", synth.tc_k),
        synth_cmd->add_option("--base-pressure-bar", synth.base_pressure_bar),
        synth_cmd->add_option("--base-velocity", synth.base_velocity),
        synth_cmd->add_option("--daily-amplitude", synth.daily_amplitude),
        synth_cmd->add_option("--noise-std", synth.noise_std),
        synth_cmd->add_option("--reversal-probability", synth.reversal_probability),
        synth_cmd->add_option("--reversal-duration-hours", synth.reversal_duration_hours),
        synth_cmd->add_option("--drift", synth.drift),
        synth_cmd->add_option("--duration-days", synth.duration_days),
        synth_cmd->add_option("--interval-s", synth.interval_s),
        synth_cmd->add_option("--start", synth.start),
    };

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*fit) {
            cmd_fit(load_with_overrides(fit_flags), out);
        } else if (*evaluate) {
            EvaluateOptions options;
            options.oracle_velocity = oracle;
            if (!vc_path.empty()) options.vc_file = vc_path;
            cmd_evaluate(load_with_overrides(eval_flags), options, out);
        } else if (*analyze) {
            cmd_analyze(load_with_overrides(analyze_flags), out);
        } else if (*synth_cmd) {
            const bool profile_flags = std::any_of(profile_opts.begin(), profile_opts.end(),
                                                   [](const CLI::Option* o) { return o->count() > 0; });
            std::vector<PipeEntry> pipes;
            if (!synth_shared.config.empty()) {
                if (profile_flags) {
                    throw ConfigError("synth: profile flags cannot be combined with --config");
                }
                RunConfig cfg = load_run_config(synth_shared.config);
                for (auto& p : cfg.pipes) {
                    if (synth.pipes.empty() ||
                        std::find(synth.pipes.begin(), synth.pipes.end(), p.id) != synth.pipes.end()) {
                        pipes.push_back(std::move(p));
                    }
                }
                if (pipes.size() < synth.pipes.size()) {
                    throw ConfigError("synth: --pipe names an id that is not in the config");
                }
                if (!synth_shared.seed) synth_shared.seed = cfg.seed;
            } else {
                if (!synth.pipes.empty()) throw ConfigError("synth: --pipe requires --config");
                SyntheticProfile profile;
                profile.base_pressure = bar_to_pa(synth.base_pressure_bar);
                profile.base_abs_velocity = synth.base_velocity;
                profile.daily_amplitude = synth.daily_amplitude;
                profile.noise_std = synth.noise_std;
                profile.reversal_probability = synth.reversal_probability;
                profile.reversal_duration = synth.reversal_duration_hours * kSecondsPerHour;
                profile.drift = synth.drift;
                profile.sample_interval = synth.interval_s;
                if (synth.interval_s <= 0) throw ConfigError("synth: --interval-s must be > 0");
                profile.duration = static_cast<std::int64_t>(std::llround(
                                       synth.duration_days * kSecondsPerDay / synth.interval_s)) *
                                   synth.interval_s;
                try {
                    profile.start = parse_iso8601_utc(synth.start);
                    profile.validate();
                    pipes.push_back({synth.pipe_id,
                                     PipeSpec(synth.length_m, synth.diameter_m, synth.roughness_m,
                                              synth.temperature_k, synth.slope),
                                     GasSpec(synth.rs, bar_to_pa(synth.pc_bar), synth.tc_k),
                                     profile});
                } catch (const InvalidInput& e) {
                    throw ConfigError(std::string("synth: ") + e.what());
                }
            }
            cmd_synth(pipes, synth_shared.out, synth_shared.seed, out);
        }
    } catch (const std::exception& e) {
        err << "gaslin: error: " << e.what() << "\n";
        return exit_code_for(e);
    }
    return kExitOk;
}

}  // namespace gaslin
