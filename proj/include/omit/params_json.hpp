#pragma once

// JSON form of ParameterSet. Frequencies are written as "<name>_hz" holding the
// value f of the usual "2 pi x f" notation; "angular_convention" records that.
// A document may instead declare "rad_per_s", in which case the same keys carry
// angular values directly. A "preset" key seeds every field not given explicitly.

#include <string>

#include "json.hpp"
#include "omit/params.hpp"

namespace omit {

inline constexpr const char* kConventionTwoPiHz = "2pi_x_hz";
inline constexpr const char* kConventionRadPerS = "rad_per_s";

inline nlohmann::json to_json_document(const ParameterSet& p) {
    using constants::two_pi;
    nlohmann::json j;
    j["name"] = p.name;
    j["angular_convention"] = kConventionTwoPiHz;
    j["mass_kg"] = p.mechanics.mass_kg;
    j["omega_m_hz"] = p.mechanics.omega_m / two_pi;
    j["gamma_m_hz"] = p.mechanics.gamma_m / two_pi;
    j["wavelength_m"] = p.cavity.wavelength_m;
    if (p.cavity.length_m) j["cavity_length_m"] = *p.cavity.length_m;
    if (p.cavity.declared_prefactor) j["coupling_prefactor_hz_per_m"] = *p.cavity.declared_prefactor / two_pi;
    j["kappa_hz"] = p.cavity.kappa / two_pi;
    j["power_w"] = p.drive.power_w;
    if (const auto* fixed = std::get_if<FixedDetuning>(&p.drive.detuning)) {
        j["detuning"] = {{"mode", "fixed"}, {"delta_hz", fixed->delta / two_pi}};
    } else {
        const auto& sc = std::get<SelfConsistentDetuning>(p.drive.detuning);
        j["detuning"] = {{"mode", "self_consistent"}, {"bare_detuning_hz", sc.bare / two_pi}};
    }
    j["n_photons"] = p.squeezed.n_photons;
    j["m_correlation"] = p.squeezed.m_correlation;
    j["squeeze_bandwidth_hz"] = p.squeezed.bandwidth / two_pi;
    j["temperature_k"] = p.bath.temperature_k;
    // Derived values, informational only; ignored on read.
    j["derived"] = {{"g_rad_s", p.g()},
                    {"epsilon_per_s", p.epsilon()},
                    {"quality_factor", p.quality_factor()},
                    {"kappa_over_omega_m", p.kappa_over_omega_m()}};
    return j;
}

inline ParameterSet from_json_document(const nlohmann::json& j) {
    ParameterSet p;
    if (j.contains("preset")) {
        p = load_preset(j.at("preset").get<std::string>());
    } else {
        for (const char* key : {"mass_kg", "omega_m_hz", "gamma_m_hz", "wavelength_m", "kappa_hz"})
            if (!j.contains(key)) throw InvalidParameters(std::string("config is missing '") + key + "' and names no preset");
        p.name = "custom";
        p.drive.power_w = 0.0;
    }
    if (j.contains("name")) p.name = j["name"].get<std::string>();

    const std::string convention = j.value("angular_convention", std::string(kConventionTwoPiHz));
    double scale = 0.0;
    if (convention == kConventionTwoPiHz) scale = constants::two_pi;
    else if (convention == kConventionRadPerS) scale = 1.0;
    else throw InvalidParameters("angular_convention must be '2pi_x_hz' or 'rad_per_s'");

    auto angular = [&](const char* key, double& dst) {
        if (j.contains(key)) dst = j[key].get<double>() * scale;
    };
    auto plain = [&](const char* key, double& dst) {
        if (j.contains(key)) dst = j[key].get<double>();
    };

    plain("mass_kg", p.mechanics.mass_kg);
    angular("omega_m_hz", p.mechanics.omega_m);
    angular("gamma_m_hz", p.mechanics.gamma_m);
    plain("wavelength_m", p.cavity.wavelength_m);
    if (j.contains("cavity_length_m")) {
        p.cavity.length_m = j["cavity_length_m"].get<double>();
        p.cavity.declared_prefactor.reset();
    }
    if (j.contains("coupling_prefactor_hz_per_m")) {
        p.cavity.declared_prefactor = j["coupling_prefactor_hz_per_m"].get<double>() * scale;
        p.cavity.length_m.reset();
    }
    angular("kappa_hz", p.cavity.kappa);
    plain("power_w", p.drive.power_w);
    if (j.contains("detuning")) {
        const auto& d = j["detuning"];
        const std::string mode = d.value("mode", std::string("fixed"));
        if (mode == "fixed") {
            FixedDetuning f{p.mechanics.omega_m};
            if (d.contains("delta_hz")) f.delta = d["delta_hz"].get<double>() * scale;
            p.drive.detuning = f;
        } else if (mode == "self_consistent") {
            if (!d.contains("bare_detuning_hz")) throw InvalidParameters("self_consistent detuning needs 'bare_detuning_hz'");
            p.drive.detuning = SelfConsistentDetuning{d["bare_detuning_hz"].get<double>() * scale};
        } else {
            throw InvalidParameters("detuning mode must be 'fixed' or 'self_consistent'");
        }
    } else if (!j.contains("preset")) {
        p.drive.detuning = FixedDetuning{p.mechanics.omega_m};
    }
    plain("n_photons", p.squeezed.n_photons);
    if (j.contains("m_correlation")) p.squeezed.m_correlation = j["m_correlation"].get<double>();
    else if (j.contains("n_photons")) p.squeezed.m_correlation = max_cross_correlation(p.squeezed.n_photons);
    if (j.contains("squeeze_bandwidth_hz")) angular("squeeze_bandwidth_hz", p.squeezed.bandwidth);
    else p.squeezed.bandwidth = 2.0 * p.cavity.kappa;
    plain("temperature_k", p.bath.temperature_k);
    return p;
}

}  // namespace omit
