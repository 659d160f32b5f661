#include "gaslin/pipe_model.h"

#include "gaslin/errors.h"
#include "gaslin/units.h"

#include <cmath>
#include <string>

namespace gaslin {

namespace {

struct DropComponents {
    double friction;
    double gravity;
};

// Whole-pipe friction and gravity drops at a given mean pressure.
DropComponents drops_at(double mean_pressure, double mass_flow, const PipeSpec& pipe,
                        const GasSpec& gas, const FrictionMode& mode) {
    const double z = compressibility_papay(mean_pressure, pipe.temperature(), gas);
    const double friction = std::visit(
        [&](const auto& m) -> double {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, TrueNonlinear>) {
                return friction_gradient_true(mean_pressure, mass_flow, pipe, gas, FixedZ{z}) *
                       pipe.length();
            } else {
                return friction_drop_linearized(mass_flow, m.v_c(), pipe);
            }
        },
        mode);
    const double gravity = kGravity * pipe.slope() * mean_pressure /
                           (gas.specific_gas_constant() * pipe.temperature() * z) *
                           pipe.length();
    return {friction, gravity};
}

}  // namespace

FixedVelocity::FixedVelocity(double v_c) : v_c_(v_c) {
    if (!(v_c >= 0.0) || !std::isfinite(v_c)) {
        throw InvalidInput("FixedVelocity: v_c must be finite and >= 0");
    }
}

double friction_gradient_true(double pressure, double mass_flow, const PipeSpec& pipe,
                              const GasSpec& gas, FixedZ z) {
    if (!(pressure > 0.0)) {
        throw InvalidInput("friction_gradient_true: pressure must be > 0");
    }
    const double lambda = friction_factor_nikuradse(pipe);
    const double area = pipe.area();
    return lambda * gas.specific_gas_constant() * pipe.temperature() * z.value /
           (2.0 * pipe.diameter() * area * area) * (std::abs(mass_flow) * mass_flow / pressure);
}

double friction_gradient_true(double pressure, double mass_flow, const PipeSpec& pipe,
                              const GasSpec& gas) {
    if (!(pressure > 0.0)) {
        throw InvalidInput("friction_gradient_true: pressure must be > 0");
    }
    const double z = compressibility_papay(pressure, pipe.temperature(), gas);
    return friction_gradient_true(pressure, mass_flow, pipe, gas, FixedZ{z});
}

double gravity_gradient(double pressure, const PipeSpec& pipe, const GasSpec& gas) {
    if (!(pressure > 0.0)) {
        throw InvalidInput("gravity_gradient: pressure must be > 0");
    }
    const double z = compressibility_papay(pressure, pipe.temperature(), gas);
    return kGravity * pipe.slope() * pressure /
           (gas.specific_gas_constant() * pipe.temperature() * z);
}

double friction_drop_true(double p_in, double p_out, double mass_flow, const PipeSpec& pipe,
                          const GasSpec& gas) {
    const double mean = mean_pressure_stationary(p_in, p_out);
    return friction_gradient_true(mean, mass_flow, pipe, gas) * pipe.length();
}

double linearized_friction_coefficient(const PipeSpec& pipe) {
    return friction_factor_nikuradse(pipe) / (2.0 * pipe.diameter() * pipe.area()) *
           pipe.length();
}

double friction_drop_linearized(double mass_flow, double v_c, const PipeSpec& pipe) {
    if (!(v_c >= 0.0)) {
        throw InvalidInput("friction_drop_linearized: v_c must be >= 0");
    }
    return friction_factor_nikuradse(pipe) * v_c / (2.0 * pipe.diameter() * pipe.area()) *
           mass_flow * pipe.length();
}

PressureDropResult pressure_drop_total(double p_in, double mass_flow, const PipeSpec& pipe,
                                       const GasSpec& gas, const FrictionMode& mode,
                                       const FixedPointOptions& options) {
    if (!(p_in > 0.0)) {
        throw InvalidInput("pressure_drop_total: p_in must be > 0");
    }
    double p_out = p_in;
    for (int it = 1; it <= options.max_iterations; ++it) {
        const double mean = mean_pressure_stationary(p_in, p_out);
        const DropComponents drops = drops_at(mean, mass_flow, pipe, gas, mode);
        const double next = p_in - drops.friction - drops.gravity;
        if (!(next > 0.0)) {
            throw NonphysicalResult("pressure_drop_total: outlet pressure " +
                                    std::to_string(next) + " Pa is not positive");
        }
        if (std::abs(next - p_out) < options.tolerance) {
            return {next, drops.friction, drops.gravity, it};
        }
        p_out = next;
    }
    throw ConvergenceError("pressure_drop_total: no convergence after " +
                           std::to_string(options.max_iterations) + " iterations");
}

double momentum_residual(double p_in, double p_out, double mass_flow, const PipeSpec& pipe,
                         const GasSpec& gas, const FrictionMode& mode) {
    const double mean = mean_pressure_stationary(p_in, p_out);
    const DropComponents drops = drops_at(mean, mass_flow, pipe, gas, mode);
    return (p_out - p_in + drops.friction + drops.gravity) / pipe.length();
}

double mass_balance_residual(double p_t, double p_t_next, double q_in, double q_out,
                             double dt, const PipeSpec& pipe, const GasSpec& gas) {
    if (!(dt > 0.0)) {
        throw InvalidInput("mass_balance_residual: dt must be > 0");
    }
    const double mean = mean_pressure_stationary(p_t, p_t_next);
    const double z = compressibility_papay(mean, pipe.temperature(), gas);
    const double linepack_rate = pipe.area() * pipe.length() /
                                 (gas.specific_gas_constant() * pipe.temperature() * z) *
                                 (p_t_next - p_t) / dt;
    return linepack_rate + (q_out - q_in);
}

}  // namespace gaslin
