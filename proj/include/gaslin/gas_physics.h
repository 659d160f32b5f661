#pragma once

// Thermodynamic and hydraulic helper functions for a single isothermal pipe:
// real-gas equation of state (Papay compressibility), Nikuradse friction
// factor, velocity from pressure and mass flow, the stationary mean
// pressure, and flow-weighted mixing of gas parameters at junctions.
//
// All quantities are SI (Pa, K, m, kg/s). Every function is pure.

#include <optional>
#include <span>

namespace gaslin {

class GasSpec {
public:
    // Throws InvalidInput unless rs, pc, tc are all > 0.
    GasSpec(double specific_gas_constant, double pseudo_critical_pressure,
            double pseudo_critical_temperature,
            std::optional<double> molar_mass = std::nullopt);

    double specific_gas_constant() const noexcept { return rs_; }
    double pseudo_critical_pressure() const noexcept { return pc_; }
    double pseudo_critical_temperature() const noexcept { return tc_; }
    std::optional<double> molar_mass() const noexcept { return molar_mass_; }

    bool operator==(const GasSpec&) const = default;

private:
    double rs_;
    double pc_;
    double tc_;
    std::optional<double> molar_mass_;
};

class PipeSpec {
public:
    // Throws InvalidInput unless length, diameter, roughness, temperature > 0
    // and |slope| < 1.
    PipeSpec(double length, double diameter, double roughness,
             double temperature, double slope = 0.0);

    double length() const noexcept { return length_; }
    double diameter() const noexcept { return diameter_; }
    double roughness() const noexcept { return roughness_; }
    double temperature() const noexcept { return temperature_; }
    // Dimensionless rise per meter.
    double slope() const noexcept { return slope_; }
    // D^2 pi / 4, always derived from the diameter.
    double area() const noexcept;

    bool operator==(const PipeSpec&) const = default;

private:
    double length_;
    double diameter_;
    double roughness_;
    double temperature_;
    double slope_;
};

// Compressibility factor held fixed instead of evaluated from Papay.
struct FixedZ {
    double value;
};

struct CompressibilityResult {
    double z;
    // z <= 0: outside the validity range of the correlation.
    bool out_of_range;
};

// Papay correlation on reduced pressure and temperature.
// Throws InvalidInput for p < 0 or T <= 0.
double compressibility_papay(double pressure, double temperature, const GasSpec& gas);
CompressibilityResult compressibility_papay_checked(double pressure, double temperature,
                                                    const GasSpec& gas);

// Nikuradse fully-rough law, constant per pipe. Throws InvalidInput if D/k <= 1.
double friction_factor_nikuradse(const PipeSpec& pipe);

// Signed gas velocity (Rs T z / A) q / p with z from Papay at p.
// Throws InvalidInput for p <= 0.
double velocity_from_state(double pressure, double mass_flow, const PipeSpec& pipe,
                           const GasSpec& gas);
double velocity_from_state(double pressure, double mass_flow, const PipeSpec& pipe,
                           const GasSpec& gas, FixedZ z);

// Mass flow that produces `velocity` at `pressure`; inverse of velocity_from_state.
double mass_flow_from_velocity(double pressure, double velocity, const PipeSpec& pipe,
                               const GasSpec& gas);

// Density from the real-gas law p = Rs rho T z.
double density(double pressure, const PipeSpec& pipe, const GasSpec& gas);

// (2/3)(p_in + p_out - p_in p_out / (p_in + p_out)).
double mean_pressure_stationary(double p_in, double p_out);

struct GasInflow {
    double mass_flow;  // >= 0
    GasSpec gas;
};

// Mass-flow-weighted average of Rs, p_c, T_c (and molar mass when every
// inflow carries one). Throws InvalidInput on negative flows or zero total.
GasSpec mix_gas_parameters(std::span<const GasInflow> inflows);

}  // namespace gaslin
