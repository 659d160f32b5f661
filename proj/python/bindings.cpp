#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "gaslin/cli.h"
#include "gaslin/errors.h"
#include "gaslin/evaluation.h"
#include "gaslin/gas_physics.h"
#include "gaslin/history.h"
#include "gaslin/pipe_model.h"
#include "gaslin/velocity_fit.h"

#include <cmath>
#include <limits>
#include <sstream>

namespace py = pybind11;
using namespace gaslin;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(const std::vector<double>& v) {
    const auto n = static_cast<py::ssize_t>(v.size());
    return py::array_t<double>({n}, {static_cast<py::ssize_t>(sizeof(double))}, v.data());
}

py::dict history_arrays(const StateHistory& h) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> ts(h.size()), p_in(h.size(), nan), p_out(h.size(), nan), q(h.size(), nan);
    for (std::size_t i = 0; i < h.size(); ++i) {
        ts[i] = static_cast<double>(h.timestamp_at(i));
        if (const auto& s = h[i]) {
            p_in[i] = s->p_in;
            p_out[i] = s->p_out;
            q[i] = s->mass_flow;
        }
    }
    py::dict d;
    d["timestamp"] = to_array(ts);
    d["p_in"] = to_array(p_in);
    d["p_out"] = to_array(p_out);
    d["mass_flow"] = to_array(q);
    return d;
}

// NaN in any column marks a gap.
StateHistory history_from_arrays(const std::string& pipe_id, Timestamp start,
                                 std::int64_t interval, Array p_in, Array p_out, Array q) {
    const auto n = p_in.size();
    if (p_out.size() != n || q.size() != n) {
        throw InvalidInput("history_from_arrays: arrays must have equal length");
    }
    StateHistory h(pipe_id, start, interval);
    auto a = p_in.unchecked<1>();
    auto b = p_out.unchecked<1>();
    auto c = q.unchecked<1>();
    for (py::ssize_t i = 0; i < n; ++i) {
        const StateSample s{h.end(), a(i), b(i), c(i)};
        if (s.valid()) h.push_back(s);
        else h.push_gap();
    }
    return h;
}

VelocitySource make_source(const std::string& kind, double v_c,
                           std::shared_ptr<const VelocitySeries> series, std::int64_t lag,
                           double min_velocity) {
    if (kind == "constant") return ConstantVelocity{v_c};
    if (kind == "lagged") {
        if (!series) throw InvalidInput("lagged source needs a velocity series");
        return LaggedVelocity{std::move(series), lag, min_velocity};
    }
    if (kind == "oracle") return OracleVelocity{};
    throw InvalidInput("unknown velocity source '" + kind + "' (constant, lagged, oracle)");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Fixed-velocity friction linearization for gas pipelines (C++ core)";

    auto base = py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_RuntimeError);
    py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_ArithmeticError);
    py::register_exception<NonphysicalResult>(m, "NonphysicalResult", PyExc_ArithmeticError);
    (void)base;

    m.attr("GRAVITY") = kGravity;
    m.attr("PA_PER_BAR") = kPaPerBar;
    m.attr("DEFAULT_LAG") = kDefaultLag;
    m.attr("DEFAULT_MIN_VELOCITY") = kDefaultMinVelocity;

    // gas physics -----------------------------------------------------------
    py::class_<GasSpec>(m, "GasSpec")
        .def(py::init<double, double, double, std::optional<double>>(), py::arg("rs"),
             py::arg("pc"), py::arg("tc"), py::arg("molar_mass") = py::none())
        .def_property_readonly("rs", &GasSpec::specific_gas_constant)
        .def_property_readonly("pc", &GasSpec::pseudo_critical_pressure)
        .def_property_readonly("tc", &GasSpec::pseudo_critical_temperature)
        .def_property_readonly("molar_mass", &GasSpec::molar_mass)
        .def("__repr__", [](const GasSpec& g) {
            std::ostringstream s;
            s << "GasSpec(rs=" << g.specific_gas_constant() << ", pc=" << g.pseudo_critical_pressure()
              << ", tc=" << g.pseudo_critical_temperature() << ")";
            return s.str();
        });

    py::class_<PipeSpec>(m, "PipeSpec")
        .def(py::init<double, double, double, double, double>(), py::arg("length"),
             py::arg("diameter"), py::arg("roughness"), py::arg("temperature"),
             py::arg("slope") = 0.0)
        .def_property_readonly("length", &PipeSpec::length)
        .def_property_readonly("diameter", &PipeSpec::diameter)
        .def_property_readonly("roughness", &PipeSpec::roughness)
        .def_property_readonly("temperature", &PipeSpec::temperature)
        .def_property_readonly("slope", &PipeSpec::slope)
        .def_property_readonly("area", &PipeSpec::area);

    m.def("compressibility_papay", &compressibility_papay, py::arg("p"), py::arg("T"),
          py::arg("gas"), "Papay compressibility factor z(p, T).");
    m.def("friction_factor_nikuradse", &friction_factor_nikuradse, py::arg("pipe"));
    m.def(
        "velocity_from_state",
        [](double p, double q, const PipeSpec& pipe, const GasSpec& gas, std::optional<double> z) {
            return z ? velocity_from_state(p, q, pipe, gas, FixedZ{*z})
                     : velocity_from_state(p, q, pipe, gas);
        },
        py::arg("p"), py::arg("q"), py::arg("pipe"), py::arg("gas"), py::arg("z") = py::none(),
        "Signed velocity [m/s]; z defaults to Papay at p.");
    m.def("mean_pressure_stationary", &mean_pressure_stationary, py::arg("p_in"), py::arg("p_out"));
    m.def(
        "mix_gas_parameters",
        [](const std::vector<std::pair<double, GasSpec>>& inflows) {
            std::vector<GasInflow> v;
            for (const auto& [q, g] : inflows) v.push_back({q, g});
            return mix_gas_parameters(v);
        },
        py::arg("inflows"), "Flow-weighted mixture of [(q, GasSpec), ...].");

    // pipe model ------------------------------------------------------------
    m.def(
        "friction_gradient_true",
        [](double p, double q, const PipeSpec& pipe, const GasSpec& gas, std::optional<double> z) {
            return z ? friction_gradient_true(p, q, pipe, gas, FixedZ{*z})
                     : friction_gradient_true(p, q, pipe, gas);
        },
        py::arg("p"), py::arg("q"), py::arg("pipe"), py::arg("gas"), py::arg("z") = py::none());
    m.def("friction_drop_true", &friction_drop_true, py::arg("p_in"), py::arg("p_out"),
          py::arg("q"), py::arg("pipe"), py::arg("gas"));
    m.def("friction_drop_linearized", &friction_drop_linearized, py::arg("q"), py::arg("v_c"),
          py::arg("pipe"));

    py::class_<PressureDropResult>(m, "PressureDropResult")
        .def_readonly("p_out", &PressureDropResult::p_out)
        .def_readonly("friction_component", &PressureDropResult::friction_component)
        .def_readonly("gravity_component", &PressureDropResult::gravity_component)
        .def_readonly("iterations", &PressureDropResult::iterations);
    m.def(
        "pressure_drop_total",
        [](double p_in, double q, const PipeSpec& pipe, const GasSpec& gas,
           std::optional<double> v_c) {
            const FrictionMode mode = v_c ? FrictionMode{FixedVelocity(*v_c)} : FrictionMode{TrueNonlinear{}};
            return pressure_drop_total(p_in, q, pipe, gas, mode);
        },
        py::arg("p_in"), py::arg("q"), py::arg("pipe"), py::arg("gas"), py::arg("v_c") = py::none(),
        "Outlet pressure; true friction unless a fixed velocity v_c is given.");
    m.def("mass_balance_residual", &mass_balance_residual, py::arg("p_t"), py::arg("p_t_next"),
          py::arg("q_in"), py::arg("q_out"), py::arg("dt"), py::arg("pipe"), py::arg("gas"));

    // history ---------------------------------------------------------------
    py::class_<StateHistory>(m, "StateHistory")
        .def_static("from_arrays", &history_from_arrays, py::arg("pipe_id"), py::arg("start"),
                    py::arg("interval"), py::arg("p_in"), py::arg("p_out"), py::arg("q"))
        .def_property_readonly("pipe_id", &StateHistory::pipe_id)
        .def_property_readonly("start", &StateHistory::start)
        .def_property_readonly("end", &StateHistory::end)
        .def_property_readonly("sample_interval", &StateHistory::sample_interval)
        .def_property_readonly("gap_count", &StateHistory::gap_count)
        .def("__len__", &StateHistory::size)
        .def("to_arrays", &history_arrays);

    py::class_<SyntheticProfile>(m, "SyntheticProfile")
        .def(py::init<>())
        .def_readwrite("base_pressure", &SyntheticProfile::base_pressure)
        .def_readwrite("base_abs_velocity", &SyntheticProfile::base_abs_velocity)
        .def_readwrite("daily_amplitude", &SyntheticProfile::daily_amplitude)
        .def_readwrite("noise_std", &SyntheticProfile::noise_std)
        .def_readwrite("reversal_probability", &SyntheticProfile::reversal_probability)
        .def_readwrite("reversal_duration", &SyntheticProfile::reversal_duration)
        .def_readwrite("drift", &SyntheticProfile::drift)
        .def_readwrite("duration", &SyntheticProfile::duration)
        .def_readwrite("sample_interval", &SyntheticProfile::sample_interval)
        .def_readwrite("start", &SyntheticProfile::start)
        .def_readwrite("seed", &SyntheticProfile::seed);

    m.def(
        "generate_synthetic_history",
        [](const SyntheticProfile& p, const PipeSpec& pipe, const GasSpec& gas,
           const std::string& pipe_id) { return generate_synthetic_history(p, pipe, gas, pipe_id); },
        py::arg("profile"), py::arg("pipe"), py::arg("gas"), py::arg("pipe_id") = "synthetic");
    m.def(
        "load_history_csv",
        [](const std::filesystem::path& path, const std::string& pipe_id, std::int64_t interval) {
            return load_history_csv(path, pipe_id, {interval});
        },
        py::arg("path"), py::arg("pipe_id"), py::arg("sample_interval") = kDefaultSampleInterval);
    m.def("write_history_csv",
          py::overload_cast<const std::filesystem::path&, const StateHistory&>(&write_history_csv),
          py::arg("path"), py::arg("history"));
    m.def(
        "resample_and_fill",
        [](const StateHistory& h, const std::string& policy) {
            if (policy == "skip") return resample_and_fill(h, FillPolicy::skip);
            if (policy == "hold-last") return resample_and_fill(h, FillPolicy::hold_last);
            throw InvalidInput("policy must be 'skip' or 'hold-last'");
        },
        py::arg("history"), py::arg("policy"));

    // velocity fit ----------------------------------------------------------
    py::class_<VelocitySeries, std::shared_ptr<VelocitySeries>>(m, "VelocitySeries")
        .def(py::init([](Timestamp start, std::int64_t interval, Array values) {
                 std::vector<double> v(values.data(), values.data() + values.size());
                 return std::make_shared<VelocitySeries>(start, interval, std::move(v));
             }),
             py::arg("start"), py::arg("interval"), py::arg("abs_velocity"))
        .def_property_readonly("start", &VelocitySeries::start)
        .def_property_readonly("sample_interval", &VelocitySeries::sample_interval)
        .def_property_readonly("values", [](const VelocitySeries& s) { return to_array(s.raw()); })
        .def("mean", &VelocitySeries::mean)
        .def("__len__", &VelocitySeries::size);

    m.def(
        "velocity_series_from_history",
        [](const StateHistory& h, const PipeSpec& pipe, const GasSpec& gas) {
            return std::make_shared<VelocitySeries>(velocity_series_from_history(h, pipe, gas));
        },
        py::arg("history"), py::arg("pipe"), py::arg("gas"));
    m.def(
        "fit_constant_velocity_lsq",
        [](const StateHistory& train, const PipeSpec& pipe, const GasSpec& gas, double min_abs_flow) {
            return fit_constant_velocity_lsq(train, pipe, gas, {min_abs_flow});
        },
        py::arg("train"), py::arg("pipe"), py::arg("gas"), py::arg("min_abs_flow") = 0.0);
    m.def(
        "flow_weighted_mean_velocity",
        [](const StateHistory& train, const PipeSpec& pipe, const GasSpec& gas, double min_abs_flow) {
            return flow_weighted_mean_velocity(train, pipe, gas, {min_abs_flow});
        },
        py::arg("train"), py::arg("pipe"), py::arg("gas"), py::arg("min_abs_flow") = 0.0);
    m.def("lagged_velocity", &lagged_velocity, py::arg("series"), py::arg("t"),
          py::arg("lag") = kDefaultLag);
    m.def(
        "percentile",
        [](const VelocitySeries& s, double alpha) { return velocity_cdf(s).percentile(alpha); },
        py::arg("series"), py::arg("alpha"));
    m.def(
        "velocity_cdf",
        [](const VelocitySeries& s) { return to_array(velocity_cdf(s).sorted()); },
        py::arg("series"), "Ascending sorted present values.");
    m.def("percentile_spread_relative_error", &percentile_spread_relative_error, py::arg("series"),
          py::arg("lo") = 10.0, py::arg("hi") = 90.0);
    m.def("spread_ratio", &spread_ratio, py::arg("spread"), py::arg("mean"));
    m.def("implied_spread", &implied_spread, py::arg("ratio"), py::arg("mean"));
    m.def(
        "velocity_change_curve",
        [](const VelocitySeries& s, std::int64_t max_horizon, double min_velocity, unsigned threads) {
            const ChangeCurve c = velocity_change_curve(s, max_horizon, min_velocity, threads);
            std::vector<double> horizons(c.horizons.begin(), c.horizons.end());
            py::dict d;
            d["horizon"] = to_array(horizons);
            d["mean_abs_change"] = to_array(c.mean_abs_change);
            d["mean_rel_change"] = to_array(c.mean_rel_change);
            return d;
        },
        py::arg("series"), py::arg("max_horizon") = kDefaultMaxHorizon,
        py::arg("min_velocity") = kDefaultMinVelocity, py::arg("threads") = 0);

    // evaluation ------------------------------------------------------------
    py::enum_<Approach>(m, "Approach")
        .value("A", Approach::A)
        .value("B", Approach::B)
        .value("Oracle", Approach::Oracle);

    py::class_<ErrorReport>(m, "ErrorReport")
        .def_readonly("pipe_id", &ErrorReport::pipe_id)
        .def_readonly("approach", &ErrorReport::approach)
        .def_readonly("v_c", &ErrorReport::v_c)
        .def_readonly("avg_err", &ErrorReport::avg_err)
        .def_readonly("max_err", &ErrorReport::max_err)
        .def_readonly("avg_abs_fl", &ErrorReport::avg_abs_fl)
        .def_readonly("max_abs_fl", &ErrorReport::max_abs_fl)
        .def_readonly("ratio_avg", &ErrorReport::ratio_avg)
        .def_readonly("ratio_max", &ErrorReport::ratio_max)
        .def_readonly("n_samples", &ErrorReport::n_samples)
        .def_readonly("n_skipped", &ErrorReport::n_skipped);

    m.def("make_report", &make_report, py::arg("pipe_id"), py::arg("approach"), py::arg("v_c"),
          py::arg("avg_err"), py::arg("max_err"), py::arg("avg_abs_fl"), py::arg("max_abs_fl"),
          py::arg("n_samples") = 0, py::arg("n_skipped") = 0);

    py::class_<SplitSpec>(m, "SplitSpec")
        .def(py::init<Timestamp, Timestamp, Timestamp, Timestamp>(), py::arg("train_begin"),
             py::arg("train_end"), py::arg("test_begin"), py::arg("test_end"))
        .def_readonly("train_begin", &SplitSpec::train_begin)
        .def_readonly("train_end", &SplitSpec::train_end)
        .def_readonly("test_begin", &SplitSpec::test_begin)
        .def_readonly("test_end", &SplitSpec::test_end);
    m.def("train_test_split", &train_test_split, py::arg("history"), py::arg("split"));

    m.def(
        "evaluate_fixed_velocity",
        [](const StateHistory& test, const PipeSpec& pipe, const GasSpec& gas,
           const std::string& source, double v_c, std::shared_ptr<const VelocitySeries> series,
           std::int64_t lag, double min_velocity) {
            return evaluate_fixed_velocity(test, make_source(source, v_c, std::move(series), lag,
                                                             min_velocity),
                                           pipe, gas);
        },
        py::arg("test"), py::arg("pipe"), py::arg("gas"), py::arg("source") = "constant",
        py::arg("v_c") = 0.0, py::arg("series") = nullptr, py::arg("lag") = kDefaultLag,
        py::arg("min_velocity") = kDefaultMinVelocity,
        "source: 'constant' (uses v_c), 'lagged' (uses series, lag) or 'oracle'.");
    m.def(
        "render_report",
        [](const std::vector<ErrorReport>& reports, const std::string& format) {
            return render_report(reports, parse_report_format(format));
        },
        py::arg("reports"), py::arg("format") = "text");

    // cli -------------------------------------------------------------------
    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::vector<const char*> argv{"gaslin"};
            for (const auto& a : args) argv.push_back(a.c_str());
            std::ostringstream out, err;
            const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run a gaslin command; returns (exit_code, stdout, stderr).");
}
