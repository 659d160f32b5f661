#pragma once

// Single-segment discretization of the simplified isothermal Euler
// equations on one pipe. The momentum balance
//
//   (p_out - p_in) / L + f(p_mean, q) + g h' p_mean / (Rs T z) = 0
//
// is evaluated at the stationary mean pressure of the two endpoints, with
// f either the true quadratic friction term or its fixed-velocity
// linearization. The continuity equation is exposed as a lumped residual.

#include "gaslin/gas_physics.h"

#include <variant>

namespace gaslin {

struct TrueNonlinear {
    bool operator==(const TrueNonlinear&) const = default;
};

// |v| in the friction term replaced by a constant v_c >= 0.
class FixedVelocity {
public:
    explicit FixedVelocity(double v_c);
    double v_c() const noexcept { return v_c_; }
    bool operator==(const FixedVelocity&) const = default;

private:
    double v_c_;
};

using FrictionMode = std::variant<TrueNonlinear, FixedVelocity>;

struct PressureDropResult {
    double p_out;               // Pa
    double friction_component;  // Pa, signed like q
    double gravity_component;   // Pa, signed like the slope
    int iterations;
};

struct FixedPointOptions {
    double tolerance = 1e-6;  // Pa, on successive p_out iterates
    int max_iterations = 100;
};

// Friction pressure gradient lambda Rs T z / (2 D A^2) |q| q / p in Pa/m.
double friction_gradient_true(double pressure, double mass_flow, const PipeSpec& pipe,
                              const GasSpec& gas);
double friction_gradient_true(double pressure, double mass_flow, const PipeSpec& pipe,
                              const GasSpec& gas, FixedZ z);

// Gravity gradient g h' p / (Rs T z) in Pa/m.
double gravity_gradient(double pressure, const PipeSpec& pipe, const GasSpec& gas);

// Whole-pipe true friction drop: L * f at the stationary mean pressure.
double friction_drop_true(double p_in, double p_out, double mass_flow, const PipeSpec& pipe,
                          const GasSpec& gas);

// Whole-pipe linearized friction drop lambda v_c / (2 D A) q L.
// Throws InvalidInput for v_c < 0.
double friction_drop_linearized(double mass_flow, double v_c, const PipeSpec& pipe);

// Per-meter coefficient b with friction_drop_linearized(q, v_c) = v_c * b * q.
double linearized_friction_coefficient(const PipeSpec& pipe);

// Solves the difference-quotient momentum balance for p_out by fixed-point
// iteration from p_out = p_in. Throws ConvergenceError after
// max_iterations and NonphysicalResult if an iterate reaches p_out <= 0.
PressureDropResult pressure_drop_total(double p_in, double mass_flow, const PipeSpec& pipe,
                                       const GasSpec& gas, const FrictionMode& mode,
                                       const FixedPointOptions& options = {});

// Left-hand side of the difference-quotient balance in Pa/m.
double momentum_residual(double p_in, double p_out, double mass_flow, const PipeSpec& pipe,
                         const GasSpec& gas, const FrictionMode& mode);

// Lumped continuity residual in kg/s:
//   (A L / (Rs T z)) (p_next - p_t) / dt + (q_out - q_in)
// with z at the stationary mean of p_t and p_next. Zero means the pair of
// states is consistent with the mass balance.
double mass_balance_residual(double p_t, double p_t_next, double q_in, double q_out,
                             double dt, const PipeSpec& pipe, const GasSpec& gas);

}  // namespace gaslin
