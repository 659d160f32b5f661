#include "gaslin/cli.h"

#include "gaslin/errors.h"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace gaslin {

using nlohmann::json;

namespace {

// Rejects keys outside `allowed` so misspelled settings do not pass silently.
void check_keys(const json& object, std::initializer_list<const char*> allowed,
                const std::string& where) {
    if (!object.is_object()) throw ConfigError(where + ": expected an object");
    const std::set<std::string> names(allowed.begin(), allowed.end());
    for (const auto& item : object.items()) {
        if (!names.count(item.key())) {
            throw ConfigError(where + ": unknown key '" + item.key() + "'");
        }
    }
}

double number(const json& object, const char* key, const std::string& where) {
    if (!object.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
    const json& v = object.at(key);
    if (!v.is_number()) throw ConfigError(where + ": '" + key + "' must be a number");
    return v.get<double>();
}

double number_or(const json& object, const char* key, double fallback, const std::string& where) {
    return object.contains(key) ? number(object, key, where) : fallback;
}

std::int64_t seconds(double value, const char* what) {
    const double rounded = std::round(value);
    if (!std::isfinite(value) || std::abs(rounded - value) > 1e-6) {
        throw ConfigError(std::string(what) + " must be a whole number of seconds");
    }
    return static_cast<std::int64_t>(rounded);
}

Timestamp iso(const json& object, const char* key, const std::string& where) {
    if (!object.contains(key) || !object.at(key).is_string()) {
        throw ConfigError(where + ": '" + key + "' must be an ISO-8601 UTC string");
    }
    try {
        return parse_iso8601_utc(object.at(key).get<std::string>());
    } catch (const InvalidInput& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

GasSpec parse_single_gas(const json& g, const std::string& where) {
    check_keys(g, {"rs_j_per_kg_k", "pc_bar", "tc_k", "molar_mass_kg_per_mol", "q_kg_per_s"},
               where);
    std::optional<double> molar;
    if (g.contains("molar_mass_kg_per_mol")) molar = number(g, "molar_mass_kg_per_mol", where);
    return GasSpec(number(g, "rs_j_per_kg_k", where), bar_to_pa(number(g, "pc_bar", where)),
                   number(g, "tc_k", where), molar);
}

GasSpec parse_gas(const json& g, const std::string& where) {
    if (g.is_object() && g.contains("inflows")) {
        check_keys(g, {"inflows"}, where);
        const json& list = g.at("inflows");
        if (!list.is_array() || list.empty()) {
            throw ConfigError(where + ": 'inflows' must be a nonempty array");
        }
        std::vector<GasInflow> inflows;
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string w = where + ".inflows[" + std::to_string(i) + "]";
            inflows.push_back({number(list[i], "q_kg_per_s", w), parse_single_gas(list[i], w)});
        }
        return mix_gas_parameters(inflows);
    }
    return parse_single_gas(g, where);
}

SyntheticProfile parse_profile(const json& s, std::int64_t interval, const std::string& where) {
    check_keys(s,
               {"base_pressure_bar", "base_abs_velocity_mps", "daily_amplitude", "noise_std",
                "reversal_probability", "reversal_duration_hours", "drift", "duration_days",
                "seed", "start"},
               where);
    SyntheticProfile p;
    p.sample_interval = interval;
    p.base_pressure = bar_to_pa(number(s, "base_pressure_bar", where));
    p.base_abs_velocity = number(s, "base_abs_velocity_mps", where);
    p.daily_amplitude = number_or(s, "daily_amplitude", 0.0, where);
    p.noise_std = number_or(s, "noise_std", 0.0, where);
    p.reversal_probability = number_or(s, "reversal_probability", 0.0, where);
    p.reversal_duration = number_or(s, "reversal_duration_hours", 24.0, where) * kSecondsPerHour;
    p.drift = number_or(s, "drift", 0.0, where);
    const double days = number_or(s, "duration_days", 730.5, where);
    p.duration = static_cast<std::int64_t>(std::llround(days * kSecondsPerDay / interval)) * interval;
    if (s.contains("seed")) {
        if (!s.at("seed").is_number_unsigned()) {
            throw ConfigError(where + ": 'seed' must be a nonnegative integer");
        }
        p.seed = s.at("seed").get<std::uint64_t>();
    }
    if (s.contains("start")) p.start = iso(s, "start", where);
    p.validate();
    return p;
}

}  // namespace

void RunConfig::validate() const {
    if (pipes.empty()) throw ConfigError("run config: at least one pipe is required");
    if (approaches.empty()) throw ConfigError("run config: at least one approach is required");
    if (sample_interval <= 0) throw ConfigError("run config: sample interval must be > 0");
    if (lag <= 0) throw ConfigError("run config: lag must be > 0");
    if (lag % sample_interval != 0) {
        throw ConfigError("run config: lag must be a multiple of the sampling interval");
    }
    if (!(min_velocity >= 0.0)) throw ConfigError("run config: min_velocity must be >= 0");
    if (max_horizon < sample_interval) {
        throw ConfigError("run config: max horizon must cover one sampling interval");
    }
    std::set<std::string> ids;
    for (const auto& p : pipes) {
        if (p.id.empty()) throw ConfigError("run config: pipe id must not be empty");
        if (!ids.insert(p.id).second) throw ConfigError("run config: duplicate pipe id '" + p.id + "'");
    }
    if (const auto* s = std::get_if<SplitSpec>(&split)) {
        try {
            s->validate();
        } catch (const InvalidInput& e) {
            throw ConfigError(std::string("run config: ") + e.what());
        }
    } else if (std::get<std::int64_t>(split) <= 0) {
        throw ConfigError("run config: training span must be > 0");
    }
}

RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("run config: ") + e.what());
    }

    RunConfig cfg;
    try {
        check_keys(doc,
                   {"output_dir", "format", "approaches", "lag_hours", "min_velocity_mps",
                    "min_abs_flow_kg_per_s", "sample_interval_s", "max_horizon_hours", "seed",
                    "threads", "split", "pipes"},
                   "run config");
        if (doc.contains("output_dir")) {
            cfg.output_dir = doc.at("output_dir").get<std::string>();
        }
        if (doc.contains("format")) {
            cfg.format = parse_report_format(doc.at("format").get<std::string>());
        }
        if (doc.contains("approaches")) {
            cfg.approaches.clear();
            for (const auto& a : doc.at("approaches")) {
                const auto name = a.get<std::string>();
                if (name == "A") cfg.approaches.push_back(Approach::A);
                else if (name == "B") cfg.approaches.push_back(Approach::B);
                else throw ConfigError("run config: unknown approach '" + name + "'");
            }
        }
        const std::string where = "run config";
        cfg.sample_interval = seconds(number_or(doc, "sample_interval_s", 180.0, where),
                                      "sample_interval_s");
        cfg.lag = seconds(number_or(doc, "lag_hours", 48.0, where) * kSecondsPerHour, "lag_hours");
        cfg.max_horizon = seconds(number_or(doc, "max_horizon_hours", 168.0, where) * kSecondsPerHour,
                                  "max_horizon_hours");
        cfg.min_velocity = number_or(doc, "min_velocity_mps", kDefaultMinVelocity, where);
        cfg.min_abs_flow = number_or(doc, "min_abs_flow_kg_per_s", 0.0, where);
        if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
        if (doc.contains("threads")) cfg.threads = doc.at("threads").get<unsigned>();

        if (doc.contains("split")) {
            const json& s = doc.at("split");
            if (s.contains("train_years")) {
                check_keys(s, {"train_years"}, "split");
                cfg.split = seconds(number(s, "train_years", "split") * kSecondsPerYear, "train_years");
            } else {
                check_keys(s, {"train_begin", "train_end", "test_begin", "test_end"}, "split");
                cfg.split = SplitSpec{iso(s, "train_begin", "split"), iso(s, "train_end", "split"),
                                      iso(s, "test_begin", "split"), iso(s, "test_end", "split")};
            }
        }

        if (!doc.contains("pipes") || !doc.at("pipes").is_array()) {
            throw ConfigError("run config: 'pipes' must be an array");
        }
        for (const auto& p : doc.at("pipes")) {
            const std::string id = p.contains("id") ? p.at("id").get<std::string>() : std::string();
            const std::string w = "pipe '" + id + "'";
            check_keys(p,
                       {"id", "length_m", "diameter_m", "roughness_m", "slope", "temperature_k",
                        "gas", "csv", "synthetic"},
                       w);
            if (!p.contains("gas")) throw ConfigError(w + ": missing 'gas'");
            PipeSpec pipe(number(p, "length_m", w), number(p, "diameter_m", w),
                          number(p, "roughness_m", w), number_or(p, "temperature_k", 283.15, w),
                          number_or(p, "slope", 0.0, w));
            GasSpec gas = parse_gas(p.at("gas"), w + ".gas");
            if (p.contains("csv") == p.contains("synthetic")) {
                throw ConfigError(w + ": exactly one of 'csv' or 'synthetic' is required");
            }
            if (p.contains("csv")) {
                std::filesystem::path csv = p.at("csv").get<std::string>();
                if (csv.is_relative() && !base_dir.empty()) csv = base_dir / csv;
                if (!std::filesystem::exists(csv)) {
                    throw ConfigError(w + ": history file '" + csv.string() + "' does not exist");
                }
                cfg.pipes.push_back({id, pipe, gas, csv});
            } else {
                cfg.pipes.push_back(
                    {id, pipe, gas, parse_profile(p.at("synthetic"), cfg.sample_interval, w + ".synthetic")});
            }
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("run config: ") + e.what());
    } catch (const InvalidInput& e) {
        throw ConfigError(std::string("run config: ") + e.what());
    } catch (const DegenerateInput& e) {
        throw ConfigError(std::string("run config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open run config '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_run_config(text.str(), path.parent_path());
}

}  // namespace gaslin
