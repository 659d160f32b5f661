#include "doctest.h"

#include "gaslin/errors.h"
#include "gaslin/evaluation.h"
#include "gaslin/pipe_model.h"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <sstream>

using namespace gaslin;

namespace {

const GasSpec kGas(500.0, 45.9e5, 191.5);
const PipeSpec kPipeA(16000.0, 1.0, 2e-5, 283.15);

StateHistory synth(double v, double amplitude, double noise, std::int64_t days, std::uint64_t seed,
                   double reversal = 0.0) {
    SyntheticProfile p;
    p.base_abs_velocity = v;
    p.daily_amplitude = amplitude;
    p.noise_std = noise;
    p.reversal_probability = reversal;
    p.duration = days * kSecondsPerDay;
    p.seed = seed;
    return generate_synthetic_history(p, kPipeA, kGas, "A");
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST_CASE("train test split on half-open ranges") {
    StateHistory h("p", 0, 10);
    for (int i = 0; i < 10; ++i) h.push_back({i * 10, 5e5, 4e5, 1.0 + i});
    const auto [train, test] = train_test_split(h, {0, 50, 50, 100});
    CHECK(train.size() == 5);
    CHECK(test.size() == 5);
    // the boundary sample belongs to test
    CHECK(test[0]->timestamp == 50);
    CHECK(train.pipe_id() == "p");

    const auto s = SplitSpec::at_offset(h, 50);
    CHECK(s.train_begin == 0);
    CHECK(s.train_end == 50);
    CHECK(s.test_begin == 50);
    CHECK(s.test_end == 100);

    CHECK_THROWS_AS(train_test_split(h, {0, 100, 100, 110}), RangeError);
    CHECK_THROWS_AS(train_test_split(h, {-10, 50, 50, 100}), RangeError);
    CHECK_THROWS_AS(SplitSpec({0, 60, 50, 100}).validate(), InvalidInput);
    CHECK_THROWS_AS(SplitSpec({50, 100, 0, 50}).validate(), InvalidInput);
    CHECK_THROWS_AS(SplitSpec({0, 0, 0, 50}).validate(), InvalidInput);
}

TEST_CASE("two year midpoint split") {
    SyntheticProfile p;
    p.duration = 2 * kSecondsPerYear;
    const auto h = generate_synthetic_history(p, kPipeA, kGas, "A");
    const auto [train, test] = train_test_split(h, SplitSpec::at_offset(h, kSecondsPerYear));
    CHECK(train.size() + test.size() == h.size());
    CHECK(std::abs(static_cast<long>(train.size()) - static_cast<long>(test.size())) <= 1);
}

TEST_CASE("oracle source gives zero error") {
    const auto h = synth(4.2, 0.5, 0.2, 3, 4, 0.5);
    const auto r = evaluate_fixed_velocity(h, OracleVelocity{}, kPipeA, kGas);
    CHECK(r.approach == Approach::Oracle);
    CHECK(pa_to_bar(r.max_err) < 1e-9);
    CHECK(pa_to_bar(r.avg_err) < 1e-9);
    CHECK(r.avg_abs_fl > 0.0);
    CHECK(r.n_samples == h.size());
    CHECK(r.n_skipped == 0);
}

TEST_CASE("constant source on a constant history") {
    const auto h = synth(5.0, 0.0, 0.0, 1, 0);
    const auto exact = evaluate_fixed_velocity(h, ConstantVelocity{5.0}, kPipeA, kGas);
    CHECK(pa_to_bar(exact.max_err) < 1e-9);
    REQUIRE(exact.v_c);
    CHECK(*exact.v_c == 5.0);

    const auto off = evaluate_fixed_velocity(h, ConstantVelocity{6.0}, kPipeA, kGas);
    double sum_q = 0;
    for (const auto& s : h.slots()) sum_q += std::abs(s->mass_flow);
    const double expected = linearized_friction_coefficient(kPipeA) * 1.0 * sum_q / h.size();
    CHECK(off.avg_err == doctest::Approx(expected).epsilon(1e-9));
    CHECK(off.ratio_avg == doctest::Approx(0.2).epsilon(1e-9));
}

TEST_CASE("report invariants hold on synthetic data") {
    const auto h = synth(4.2, 0.6, 0.2, 5, 9, 0.3);
    const double v = fit_constant_velocity_lsq(h, kPipeA, kGas);
    const auto r = evaluate_fixed_velocity(h, ConstantVelocity{v}, kPipeA, kGas);
    CHECK(r.avg_err <= r.max_err);
    CHECK(r.avg_abs_fl <= r.max_abs_fl);
    CHECK(r.avg_err >= 0.0);
    CHECK(r.ratio_avg == doctest::Approx(r.avg_err / r.avg_abs_fl).epsilon(1e-12));
    CHECK(r.ratio_max == doctest::Approx(r.max_err / r.max_abs_fl).epsilon(1e-12));
}

TEST_CASE("fitted constant beats neighbouring constants in squared error") {
    const auto h = synth(3.4, 0.5, 0.15, 4, 21);
    const double v = fit_constant_velocity_lsq(h, kPipeA, kGas);
    const double best = constant_velocity_sse(h, v, kPipeA, kGas);
    for (double w = 0.0; w < 8.0; w += 1e-3) {
        if (constant_velocity_sse(h, w, kPipeA, kGas) < best) {
            FAIL("grid point " << w << " beats the fit " << v);
            break;
        }
    }
    for (double d : {1e-3, 1e-2, 0.1}) {
        CHECK(constant_velocity_sse(h, v, kPipeA, kGas) <= constant_velocity_sse(h, v + d, kPipeA, kGas));
        CHECK(constant_velocity_sse(h, v, kPipeA, kGas) <= constant_velocity_sse(h, v - d, kPipeA, kGas));
    }
}

TEST_CASE("lagged source skips missing and slow lags") {
    // v pattern over 4 slots: fast, stopped, gap, fast
    StateHistory h("p", 0, 180);
    h.push_back({0, 56.3e5, 55.7e5, 144.98});
    h.push_back({180, 56e5, 56e5, 0.0});
    h.push_gap();
    h.push_back({540, 56.3e5, 55.7e5, 144.98});
    h.push_back({720, 56.3e5, 55.7e5, 100.0});
    h.push_back({900, 56.3e5, 55.7e5, 100.0});
    h.push_back({1080, 56.3e5, 55.7e5, 100.0});
    auto series = std::make_shared<const VelocitySeries>(velocity_series_from_history(h, kPipeA, kGas));
    const auto test = h.slice(540, 1260);
    const LaggedVelocity lag{series, 540, kDefaultMinVelocity};
    const auto errors = evaluate_sample_errors(test, lag, kPipeA, kGas);
    // lags: 0 (ok), 180 (v=0, skip), 360 (gap, skip), 540 (ok)
    CHECK(errors.samples.size() == 2);
    CHECK(errors.skipped == 2);
    // t=540 lags onto an identical state
    CHECK(errors.samples[0].err < 1e-9);
    const auto r = evaluate_fixed_velocity(test, lag, kPipeA, kGas);
    CHECK(r.approach == Approach::B);
    CHECK_FALSE(r.v_c);
    CHECK(r.n_skipped == 2);

    // every lag unusable
    const auto bad = h.slice(720, 1080);
    CHECK_THROWS_AS(evaluate_fixed_velocity(bad, LaggedVelocity{series, 540, 0.02}, kPipeA, kGas),
                    DegenerateInput);
    // lag reaching before the series
    CHECK_THROWS_AS(evaluate_fixed_velocity(h, LaggedVelocity{series, 540, 0.02}, kPipeA, kGas),
                    RangeError);
}

TEST_CASE("lagged source on a periodic history matches the oracle") {
    const auto h = synth(4.2, 0.4, 0.0, 4, 0);
    auto series = std::make_shared<const VelocitySeries>(velocity_series_from_history(h, kPipeA, kGas));
    const auto test = h.slice(h.start() + 2 * kSecondsPerDay, h.end());
    const auto r = evaluate_fixed_velocity(test, LaggedVelocity{series, kDefaultLag, 0.02}, kPipeA, kGas);
    CHECK(pa_to_bar(r.max_err) < 1e-9);
}

TEST_CASE("aggregation does not depend on sample order") {
    const auto h = synth(4.2, 0.6, 0.3, 2, 31);
    auto errors = evaluate_sample_errors(h, ConstantVelocity{4.0}, kPipeA, kGas);
    const auto a = aggregate_errors("p", Approach::A, 4.0, errors.samples, 0);
    std::mt19937 rng(5);
    std::shuffle(errors.samples.begin(), errors.samples.end(), rng);
    const auto b = aggregate_errors("p", Approach::A, 4.0, errors.samples, 0);
    std::reverse(errors.samples.begin(), errors.samples.end());
    const auto c = aggregate_errors("p", Approach::A, 4.0, errors.samples, 0);
    CHECK(a.avg_err == b.avg_err);
    CHECK(a.avg_abs_fl == b.avg_abs_fl);
    CHECK(a.avg_err == c.avg_err);
    CHECK(a.max_err == c.max_err);
    CHECK_THROWS_AS(aggregate_errors("p", Approach::A, 4.0, {}, 0), DegenerateInput);
}

TEST_CASE("report ratios are quotients of column values") {
    const auto a = make_report("A", Approach::A, 5.210, 0.130e5, 0.801e5, 0.621e5, 1.519e5, 1, 0);
    CHECK(a.ratio_avg == doctest::Approx(0.2093397746));
    CHECK(a.ratio_max == doctest::Approx(0.5273206057));
    // maxima ratio, not a maximum of ratios
    const auto c = make_report("C", Approach::A, 2.5, 0.1e5, 0.330e5, 0.5e5, 0.926e5, 1, 0);
    CHECK(round_half_even(c.ratio_max, 3) == 0.356);
    const auto z = make_report("Z", Approach::A, 0.0, 0.0, 0.0, 0.0, 0.0, 0, 0);
    CHECK(z.ratio_avg == 0.0);
    const auto inf = make_report("I", Approach::A, 0.0, 1.0, 1.0, 0.0, 0.0, 1, 0);
    CHECK(std::isinf(inf.ratio_avg));
}

TEST_CASE("round half even") {
    CHECK(round_half_even(2.5, 0) == 2.0);
    CHECK(round_half_even(3.5, 0) == 4.0);
    CHECK(round_half_even(-2.5, 0) == -2.0);
    CHECK(round_half_even(0.1304, 3) == 0.130);
    CHECK(round_half_even(0.1306, 3) == 0.131);
    CHECK(round_half_even(0.125, 2) == 0.12);
    CHECK(round_half_even(0.375, 2) == 0.38);
    CHECK(std::isinf(round_half_even(INFINITY, 3)));
}

TEST_CASE("render csv") {
    const auto a = make_report("A", Approach::A, 5.21, 0.1304e5, 0.801e5, 0.621e5, 1.519e5, 100, 0);
    const auto b = make_report("B", Approach::B, std::nullopt, 0.2e5, 0.9e5, 0.5e5, 1.2e5, 90, 10);
    const std::vector<ErrorReport> rs{a, b};
    const auto l = lines(render_report(rs, ReportFormat::csv));
    REQUIRE(l.size() == 3);
    CHECK(l[0] == kReportColumns);
    CHECK(l[1] == "A,A,5.210,0.130,0.801,0.621,1.519,0.210,0.527,100,0");
    CHECK(l[2] == "B,B,,0.200,0.900,0.500,1.200,0.400,0.750,90,10");
}

TEST_CASE("render json matches csv values") {
    const auto a = make_report("A", Approach::A, 5.21, 0.1304e5, 0.801e5, 0.621e5, 1.519e5, 100, 0);
    const auto b = make_report("B", Approach::B, std::nullopt, 0.2e5, 0.9e5, 0.0, 0.0, 90, 10);
    const std::vector<ErrorReport> rs{a, b};
    const auto doc = nlohmann::json::parse(render_report(rs, ReportFormat::json));
    REQUIRE(doc.size() == 2);
    CHECK(doc[0]["pipe"] == "A");
    CHECK(doc[0]["approach"] == "A");
    CHECK(doc[0]["avg_err_bar"].get<double>() == 0.130);
    CHECK(doc[0]["ratio_avg"].get<double>() == 0.210);
    CHECK(doc[0]["ratio_max"].get<double>() == 0.527);
    CHECK(doc[0]["n_samples"] == 100);
    CHECK(doc[1]["v_c_mps"].is_null());
    CHECK(doc[1]["ratio_avg"].is_null());  // x / 0

    const auto csv = lines(render_report(rs, ReportFormat::csv));
    CHECK(csv[1].find(",0.130,") != std::string::npos);
}

TEST_CASE("render text table") {
    const auto a = make_report("A", Approach::A, 5.21, 0.1304e5, 0.801e5, 0.621e5, 1.519e5, 100, 0);
    const std::vector<ErrorReport> rs{a};
    const auto l = lines(render_report(rs, ReportFormat::text));
    REQUIRE(l.size() == 2);
    CHECK(l[0].find("avg_err[bar]") != std::string::npos);
    CHECK(l[1].find("0.130") != std::string::npos);
    CHECK(l[1].find("5.210") != std::string::npos);
    CHECK(render_report(rs, ReportFormat::text) == render_report(rs, ReportFormat::text));
}

TEST_CASE("report format names") {
    CHECK(parse_report_format("json") == ReportFormat::json);
    CHECK(extension_for(ReportFormat::csv) == "csv");
    CHECK(extension_for(ReportFormat::text) == "txt");
    CHECK_THROWS_AS(parse_report_format("xml"), InvalidInput);
    CHECK(to_string(Approach::B) == "B");
}
