#include "gaslin/gas_physics.h"

#include "gaslin/errors.h"
#include "gaslin/units.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace gaslin {

namespace {

void require_positive(double value, const char* what) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw InvalidInput(std::string(what) + " must be finite and > 0, got " +
                           std::to_string(value));
    }
}

}  // namespace

GasSpec::GasSpec(double specific_gas_constant, double pseudo_critical_pressure,
                 double pseudo_critical_temperature, std::optional<double> molar_mass)
    : rs_(specific_gas_constant),
      pc_(pseudo_critical_pressure),
      tc_(pseudo_critical_temperature),
      molar_mass_(molar_mass) {
    require_positive(rs_, "GasSpec: specific gas constant");
    require_positive(pc_, "GasSpec: pseudo-critical pressure");
    require_positive(tc_, "GasSpec: pseudo-critical temperature");
    if (molar_mass_) require_positive(*molar_mass_, "GasSpec: molar mass");
}

PipeSpec::PipeSpec(double length, double diameter, double roughness, double temperature,
                   double slope)
    : length_(length),
      diameter_(diameter),
      roughness_(roughness),
      temperature_(temperature),
      slope_(slope) {
    require_positive(length_, "PipeSpec: length");
    require_positive(diameter_, "PipeSpec: diameter");
    require_positive(roughness_, "PipeSpec: roughness");
    require_positive(temperature_, "PipeSpec: temperature");
    if (!(std::abs(slope_) < 1.0)) {
        throw InvalidInput("PipeSpec: |slope| must be < 1");
    }
}

double PipeSpec::area() const noexcept { return diameter_ * diameter_ * kPi / 4.0; }

CompressibilityResult compressibility_papay_checked(double pressure, double temperature,
                                                    const GasSpec& gas) {
    if (!(pressure >= 0.0) || !std::isfinite(pressure)) {
        throw InvalidInput("compressibility_papay: pressure must be >= 0");
    }
    require_positive(temperature, "compressibility_papay: temperature");

    const double pr = pressure / gas.pseudo_critical_pressure();
    const double tr = temperature / gas.pseudo_critical_temperature();
    const double z = 1.0 - 3.52 * pr * std::exp(-2.26 * tr) +
                     0.274 * pr * pr * std::exp(-1.878 * tr);
    return {z, z <= 0.0};
}

double compressibility_papay(double pressure, double temperature, const GasSpec& gas) {
    return compressibility_papay_checked(pressure, temperature, gas).z;
}

double friction_factor_nikuradse(const PipeSpec& pipe) {
    const double relative = pipe.diameter() / pipe.roughness();
    if (!(relative > 1.0)) {
        throw InvalidInput("friction_factor_nikuradse: D/k must be > 1");
    }
    const double root = 2.0 * std::log10(relative) + 1.138;
    return 1.0 / (root * root);
}

double velocity_from_state(double pressure, double mass_flow, const PipeSpec& pipe,
                           const GasSpec& gas, FixedZ z) {
    require_positive(pressure, "velocity_from_state: pressure");
    return gas.specific_gas_constant() * pipe.temperature() * z.value / pipe.area() *
           (mass_flow / pressure);
}

double velocity_from_state(double pressure, double mass_flow, const PipeSpec& pipe,
                           const GasSpec& gas) {
    require_positive(pressure, "velocity_from_state: pressure");
    const double z = compressibility_papay(pressure, pipe.temperature(), gas);
    return velocity_from_state(pressure, mass_flow, pipe, gas, FixedZ{z});
}

double mass_flow_from_velocity(double pressure, double velocity, const PipeSpec& pipe,
                               const GasSpec& gas) {
    return velocity * pipe.area() * density(pressure, pipe, gas);
}

double density(double pressure, const PipeSpec& pipe, const GasSpec& gas) {
    require_positive(pressure, "density: pressure");
    const double z = compressibility_papay(pressure, pipe.temperature(), gas);
    return pressure / (gas.specific_gas_constant() * pipe.temperature() * z);
}

double mean_pressure_stationary(double p_in, double p_out) {
    require_positive(p_in, "mean_pressure_stationary: p_in");
    require_positive(p_out, "mean_pressure_stationary: p_out");
    if (p_in == p_out) return p_in;
    const double sum = p_in + p_out;
    const double mean = 2.0 / 3.0 * (sum - p_in * p_out / sum);
    // Clamp the last-ulp excursions so the result is always bracketed.
    return std::clamp(mean, std::min(p_in, p_out), std::max(p_in, p_out));
}

GasSpec mix_gas_parameters(std::span<const GasInflow> inflows) {
    double total = 0.0;
    bool all_have_molar_mass = !inflows.empty();
    for (const auto& inflow : inflows) {
        if (!(inflow.mass_flow >= 0.0) || !std::isfinite(inflow.mass_flow)) {
            throw InvalidInput("mix_gas_parameters: inflow mass flows must be >= 0");
        }
        total += inflow.mass_flow;
        all_have_molar_mass = all_have_molar_mass && inflow.gas.molar_mass().has_value();
    }
    if (!(total > 0.0)) {
        throw InvalidInput("mix_gas_parameters: at least one inflow must be positive");
    }

    double rs = 0.0, pc = 0.0, tc = 0.0, molar = 0.0;
    for (const auto& inflow : inflows) {
        const double w = inflow.mass_flow / total;
        rs += w * inflow.gas.specific_gas_constant();
        pc += w * inflow.gas.pseudo_critical_pressure();
        tc += w * inflow.gas.pseudo_critical_temperature();
        if (all_have_molar_mass) molar += w * *inflow.gas.molar_mass();
    }
    return GasSpec(rs, pc, tc, all_have_molar_mass ? std::optional<double>(molar) : std::nullopt);
}

}  // namespace gaslin
