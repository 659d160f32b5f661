#include "doctest.h"

#include "gaslin/cli.h"
#include "gaslin/errors.h"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

using namespace gaslin;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::initializer_list<std::string> args) {
    std::vector<std::string> storage{"gaslin"};
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& s : storage) argv.push_back(s.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void spit(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream(p) << text;
}

// Fresh scratch directory per test case.
struct Scratch {
    fs::path dir;
    explicit Scratch(const std::string& name)
        : dir(fs::temp_directory_path() / ("gaslin_cli_" + name)) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    std::string operator/(const std::string& leaf) const { return (dir / leaf).string(); }
};

const char* kSplit = R"("split": {"train_begin": "2015-01-01T00:00:00Z", "train_end": "2015-01-03T00:00:00Z",
                                  "test_begin": "2015-01-03T00:00:00Z", "test_end": "2015-01-05T00:00:00Z"})";

std::string pipe_json(const std::string& id, double v, double amplitude = 0.0) {
    return R"({"id": ")" + id + R"(", "length_m": 16000, "diameter_m": 1.0, "roughness_m": 2e-5,
              "gas": {"rs_j_per_kg_k": 500, "pc_bar": 45.9, "tc_k": 191.5},
              "synthetic": {"base_pressure_bar": 56, "base_abs_velocity_mps": )" +
           std::to_string(v) + R"(, "daily_amplitude": )" + std::to_string(amplitude) +
           R"(, "duration_days": 4}})";
}

std::string config(const std::string& out_dir, const std::string& pipes,
                   const std::string& extra = "") {
    return "{\"output_dir\": \"" + out_dir + "\", \"max_horizon_hours\": 24, " + kSplit +
           (extra.empty() ? "" : ", " + extra) + ", \"pipes\": [" + pipes + "]}";
}

}  // namespace

TEST_CASE("help and usage errors") {
    CHECK(cli({"--help"}).code == kExitOk);
    CHECK(cli({}).code == kExitConfig);
    CHECK(cli({"frobnicate"}).code == kExitConfig);
    CHECK(cli({"fit"}).code == kExitConfig);  // --config required
    CHECK(cli({"fit", "--config", "x.json", "--format", "xml"}).code == kExitConfig);
    CHECK(cli({"fit", "--config", "x.json", "--lag-hours", "abc"}).code == kExitConfig);
}

TEST_CASE("config errors exit with 2") {
    Scratch s("config");
    const auto r = cli({"fit", "--config", s / "missing.json"});
    CHECK(r.code == kExitConfig);
    CHECK(r.err.find("missing.json") != std::string::npos);

    spit(s / "bad.json", "{ not json");
    CHECK(cli({"fit", "--config", s / "bad.json"}).code == kExitConfig);

    spit(s / "unknown.json", config(s / "out", pipe_json("A", 4.2), "\"lagg_hours\": 48"));
    const auto u = cli({"fit", "--config", s / "unknown.json"});
    CHECK(u.code == kExitConfig);
    CHECK(u.err.find("lagg_hours") != std::string::npos);

    spit(s / "nopipe.json", config(s / "out", ""));
    CHECK(cli({"fit", "--config", s / "nopipe.json"}).code == kExitConfig);

    spit(s / "dup.json", config(s / "out", pipe_json("A", 4.2) + "," + pipe_json("A", 3.0)));
    CHECK(cli({"fit", "--config", s / "dup.json"}).code == kExitConfig);

    const std::string csv_pipe = R"({"id": "X", "length_m": 1000, "diameter_m": 0.5, "roughness_m": 1e-5,
        "gas": {"rs_j_per_kg_k": 500, "pc_bar": 45.9, "tc_k": 191.5}, "csv": "nowhere.csv"})";
    spit(s / "nocsv.json", config(s / "out", csv_pipe));
    const auto m = cli({"evaluate", "--config", s / "nocsv.json"});
    CHECK(m.code == kExitConfig);
    CHECK(m.err.find("nowhere.csv") != std::string::npos);

    spit(s / "ok.json", config(s / "out", pipe_json("A", 4.2)));
    // 36 s is off the 180 s grid
    CHECK(cli({"evaluate", "--config", s / "ok.json", "--lag-hours", "0.01"}).code == kExitConfig);
    CHECK(cli({"evaluate", "--config", s / "ok.json", "--lag-hours", "-48"}).code == kExitConfig);
}

TEST_CASE("run config parsing") {
    const auto cfg = parse_run_config(config("out", pipe_json("A", 4.2) + "," + pipe_json("B", 3.4),
                                             "\"approaches\": [\"B\"], \"lag_hours\": 24, \"seed\": 7"));
    CHECK(cfg.pipes.size() == 2);
    CHECK(cfg.pipes[1].id == "B");
    CHECK(cfg.lag == 86400);
    CHECK(cfg.approaches == std::vector<Approach>{Approach::B});
    REQUIRE(cfg.seed);
    CHECK(*cfg.seed == 7);
    CHECK(cfg.max_horizon == 86400);
    const auto* p = std::get_if<SyntheticProfile>(&cfg.pipes[0].source);
    REQUIRE(p);
    CHECK(p->duration == 4 * 86400);
    CHECK(std::get<SplitSpec>(cfg.split).test_begin == 1420070400 + 2 * 86400);

    const auto mixed = parse_run_config(R"({"pipes": [{"id": "M", "length_m": 1000, "diameter_m": 0.5,
        "roughness_m": 1e-5, "gas": {"inflows": [
            {"q_kg_per_s": 3, "rs_j_per_kg_k": 500, "pc_bar": 46, "tc_k": 190},
            {"q_kg_per_s": 1, "rs_j_per_kg_k": 400, "pc_bar": 50, "tc_k": 210}]},
        "synthetic": {"base_pressure_bar": 50, "base_abs_velocity_mps": 3}}]})");
    CHECK(mixed.pipes[0].gas.specific_gas_constant() == doctest::Approx(475.0));
    CHECK(std::get<std::int64_t>(mixed.split) == kSecondsPerYear);
    CHECK(mixed.approaches.size() == 2);
}

TEST_CASE("fit writes vc.json in config order") {
    Scratch s("fit");
    spit(s / "c.json", config(s / "out", pipe_json("A", 5.0) + "," + pipe_json("B", 3.0, 0.3)));
    const auto r = cli({"fit", "--config", s / "c.json"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.find("5.000") != std::string::npos);
    const auto text = slurp(s / "out/vc.json");
    CHECK(text.find("\"A\"") < text.find("\"B\""));
    const auto doc = nlohmann::json::parse(text);
    CHECK(std::abs(doc["A"].get<double>() - 5.0) < 1e-9);
    CHECK(doc["B"].get<double>() > 3.0);
    CHECK_FALSE(fs::exists(s / "out/vc.json.tmp"));

    const auto vc = read_vc_file(s / "out/vc.json");
    CHECK(vc.size() == 2);
}

TEST_CASE("evaluate with oracle velocity gives an all-zero table") {
    Scratch s("oracle");
    spit(s / "c.json", config(s / "out", pipe_json("A", 4.2, 0.5) + "," + pipe_json("B", 2.0, 0.2)));
    const auto r = cli({"evaluate", "--config", s / "c.json", "--oracle-velocity", "--format", "csv"});
    REQUIRE(r.code == kExitOk);
    const auto doc = slurp(s / "out/report_oracle.csv");
    std::istringstream in(doc);
    std::string line;
    std::getline(in, line);
    CHECK(line == kReportColumns);
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        CHECK(line.find(",oracle,,0.000,0.000,") != std::string::npos);
    }
    CHECK(rows == 2);
}

TEST_CASE("evaluate approaches A and B") {
    Scratch s("eval");
    spit(s / "c.json", config(s / "out", pipe_json("A", 4.2, 0.5)));
    const auto r = cli({"evaluate", "--config", s / "c.json", "--format", "json"});
    REQUIRE(r.code == kExitOk);
    const auto a = nlohmann::json::parse(slurp(s / "out/report_A.json"));
    const auto b = nlohmann::json::parse(slurp(s / "out/report_B.json"));
    CHECK(a[0]["approach"] == "A");
    CHECK(a[0]["v_c_mps"].get<double>() > 4.2);
    // pure daily period: a 48 h lag reproduces the state
    CHECK(b[0]["max_err_bar"].get<double>() == 0.0);
    CHECK(b[0]["n_skipped"] == 0);

    // reuse a fitted file
    REQUIRE(cli({"fit", "--config", s / "c.json"}).code == kExitOk);
    const auto again = cli({"evaluate", "--config", s / "c.json", "--vc", s / "out/vc.json",
                            "--format", "csv"});
    CHECK(again.code == kExitOk);
    spit(s / "other_vc.json", R"({"Z": 1.0})");
    CHECK(cli({"evaluate", "--config", s / "c.json", "--vc", s / "other_vc.json"}).code == kExitConfig);
}

TEST_CASE("approach B without enough history before the test range") {
    Scratch s("shortb");
    spit(s / "c.json", config(s / "out", pipe_json("A", 4.2), "\"lag_hours\": 72"));
    const auto r = cli({"evaluate", "--config", s / "c.json"});
    CHECK(r.code == kExitData);
    CHECK(r.err.find("approach B") != std::string::npos);
}

TEST_CASE("data and numeric errors") {
    Scratch s("data");
    spit(s / "bad.csv", "timestamp_utc,p_in_bar,p_out_bar,q_kg_per_s\n2015-01-01T00:00:00Z,56,55,x\n");
    const std::string bad_pipe = R"({"id": "X", "length_m": 1000, "diameter_m": 0.5, "roughness_m": 1e-5,
        "gas": {"rs_j_per_kg_k": 500, "pc_bar": 45.9, "tc_k": 191.5}, "csv": "bad.csv"})";
    spit(s / "bad.json", config(s / "out", bad_pipe));
    CHECK(cli({"fit", "--config", s / "bad.json"}).code == kExitData);

    std::string still = "timestamp_utc,p_in_bar,p_out_bar,q_kg_per_s\n";
    for (int i = 0; i < 4 * 480; ++i) {
        const long t = 1420070400L + i * 180L;
        still += format_iso8601_utc(t) + ",56,56,0\n";
    }
    spit(s / "still.csv", still);
    const std::string still_pipe = R"({"id": "S", "length_m": 1000, "diameter_m": 0.5, "roughness_m": 1e-5,
        "gas": {"rs_j_per_kg_k": 500, "pc_bar": 45.9, "tc_k": 191.5}, "csv": "still.csv"})";
    spit(s / "still.json", config(s / "out", still_pipe));
    const auto r = cli({"fit", "--config", s / "still.json"});
    CHECK(r.code == kExitNumeric);
}

TEST_CASE("exit code mapping") {
    CHECK(exit_code_for(ConfigError("x")) == kExitConfig);
    CHECK(exit_code_for(ParseError("x", 3)) == kExitData);
    CHECK(exit_code_for(RangeError("x")) == kExitData);
    CHECK(exit_code_for(DegenerateInput("x")) == kExitNumeric);
    CHECK(exit_code_for(ConvergenceError("x")) == kExitNumeric);
    CHECK(exit_code_for(NonphysicalResult("x")) == kExitNumeric);
    CHECK(exit_code_for(std::runtime_error("x")) == kExitFailure);
}

TEST_CASE("analyze writes cdf and change files") {
    Scratch s("analyze");
    spit(s / "c.json", config(s / "out", pipe_json("K", 4.2) + "," + pipe_json("S", 3.0, 0.5)));
    const auto r = cli({"analyze", "--config", s / "c.json", "--threads", "2"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.find("pipe K") != std::string::npos);

    // constant series: single distinct value, zero change
    std::istringstream cdf(slurp(s / "out/cdf_K.csv"));
    std::string line;
    std::getline(cdf, line);
    CHECK(line == "abs_velocity_mps,cumulative_fraction");
    std::getline(cdf, line);
    CHECK(line.substr(line.find(',')) == ",1");
    CHECK_FALSE(std::getline(cdf, line));

    std::istringstream change(slurp(s / "out/change_K.csv"));
    std::getline(change, line);
    CHECK(line == "horizon_s,mean_abs_change_mps,mean_rel_change");
    int rows = 0;
    while (std::getline(change, line)) {
        ++rows;
        CHECK(line.substr(line.find(',')) == ",0,0");
    }
    CHECK(rows == 480);
    CHECK(fs::exists(s / "out/change_S.csv"));
    CHECK(fs::exists(s / "out/analysis_summary.csv"));
}

TEST_CASE("synth writes reproducible csv files") {
    Scratch s("synth");
    auto r = cli({"synth", "--out", s / "a", "--duration-days", "1", "--noise-std", "0.1",
                  "--seed", "4", "--pipe-id", "P"});
    REQUIRE(r.code == kExitOk);
    r = cli({"synth", "--out", s / "b", "--duration-days", "1", "--noise-std", "0.1", "--seed", "4",
             "--pipe-id", "P"});
    REQUIRE(r.code == kExitOk);
    CHECK(slurp(s / "a/P.csv") == slurp(s / "b/P.csv"));
    const auto h = load_history_csv(s / "a/P.csv", "P");
    CHECK(h.size() == 480);

    spit(s / "c.json", config(s / "out", pipe_json("A", 4.2) + "," + pipe_json("B", 3.0)));
    r = cli({"synth", "--config", s / "c.json", "--pipe", "B", "--out", s / "cfg"});
    CHECK(r.code == kExitOk);
    CHECK(fs::exists(s / "cfg/B.csv"));
    CHECK_FALSE(fs::exists(s / "cfg/A.csv"));

    CHECK(cli({"synth", "--config", s / "c.json", "--noise-std", "0.1", "--out", s / "x"}).code ==
          kExitConfig);
    CHECK(cli({"synth", "--pipe", "A", "--out", s / "x"}).code == kExitConfig);
    CHECK(cli({"synth", "--config", s / "c.json", "--pipe", "Q", "--out", s / "x"}).code == kExitConfig);
    CHECK(cli({"synth", "--daily-amplitude", "2", "--out", s / "x"}).code == kExitConfig);
}

TEST_CASE("seed override changes synthetic data reproducibly") {
    Scratch s("seed");
    spit(s / "c.json", config(s / "out", "{\"id\": \"N\", \"length_m\": 16000, \"diameter_m\": 1.0, "
                                         "\"roughness_m\": 2e-5, \"gas\": {\"rs_j_per_kg_k\": 500, "
                                         "\"pc_bar\": 45.9, \"tc_k\": 191.5}, \"synthetic\": "
                                         "{\"base_pressure_bar\": 56, \"base_abs_velocity_mps\": 4.2, "
                                         "\"noise_std\": 0.2, \"duration_days\": 4}}"));
    const auto a = cli({"fit", "--config", s / "c.json", "--seed", "1"});
    const auto a2 = cli({"fit", "--config", s / "c.json", "--seed", "1"});
    const auto b = cli({"fit", "--config", s / "c.json", "--seed", "2"});
    CHECK(a.out == a2.out);
    CHECK(a.out != b.out);
}
