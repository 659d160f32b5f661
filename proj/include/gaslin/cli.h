#pragma once

// Batch runner behind the `gaslin` executable: run configuration, the
// fit / evaluate / analyze / synth commands, and exit-code mapping.
//
// Exit codes: 0 success, 2 configuration error, 3 data error,
// 4 numeric error, 1 anything else.

#include "gaslin/evaluation.h"
#include "gaslin/gas_physics.h"
#include "gaslin/history.h"

#include <exception>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace gaslin {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

int exit_code_for(const std::exception& e) noexcept;

struct PipeEntry {
    std::string id;
    PipeSpec pipe;
    GasSpec gas;
    std::variant<std::filesystem::path, SyntheticProfile> source;
};

// Either absolute half-open ranges or a training span from the history start
// (test = remainder).
using SplitSetting = std::variant<SplitSpec, std::int64_t>;

struct RunConfig {
    std::vector<PipeEntry> pipes;
    SplitSetting split = kSecondsPerYear;
    std::vector<Approach> approaches{Approach::A, Approach::B};
    std::int64_t lag = kDefaultLag;
    double min_velocity = kDefaultMinVelocity;
    double min_abs_flow = 0.0;
    std::int64_t sample_interval = kDefaultSampleInterval;
    std::int64_t max_horizon = kDefaultMaxHorizon;
    std::filesystem::path output_dir = "out";
    ReportFormat format = ReportFormat::text;
    // Overrides every synthetic profile seed with seed + pipe index.
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;

    // Throws ConfigError on an empty pipe list or approach list,
    // nonpositive lag, or duplicate pipe ids.
    void validate() const;
};

// Parses the JSON run configuration. Relative CSV paths resolve against the
// directory of the configuration file. Throws ConfigError.
RunConfig parse_run_config(const std::string& json_text,
                           const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

// Loads or generates a pipe's full history.
StateHistory load_pipe_history(const PipeEntry& entry, const RunConfig& config,
                               std::size_t pipe_index);

SplitSpec resolve_split(const RunConfig& config, const StateHistory& history);

// Writes `contents` to a temporary sibling, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

struct FitResult {
    std::string pipe_id;
    double v_c;
};

// Fits approach A per pipe and writes <output_dir>/vc.json.
std::vector<FitResult> cmd_fit(const RunConfig& config, std::ostream& out);

struct EvaluateOptions {
    bool oracle_velocity = false;
    std::optional<std::filesystem::path> vc_file;  // else fit inline
};

// Evaluates each requested approach on the test range and writes
// <output_dir>/report_<approach>.<ext>.
std::vector<ErrorReport> cmd_evaluate(const RunConfig& config, const EvaluateOptions& options,
                                      std::ostream& out);

// Writes cdf_<pipe>.csv, change_<pipe>.csv and analysis_summary.csv.
void cmd_analyze(const RunConfig& config, std::ostream& out);

// Writes <out_dir>/<pipe_id>.csv for each generated history.
std::vector<std::filesystem::path> cmd_synth(const std::vector<PipeEntry>& pipes,
                                             const std::filesystem::path& out_dir,
                                             std::optional<std::uint64_t> seed, std::ostream& out);

std::map<std::string, double> read_vc_file(const std::filesystem::path& path);

// Full command-line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gaslin
