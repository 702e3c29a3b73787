#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "omit/constants.hpp"
#include "omit/error.hpp"

namespace omit {

// Movable mirror modelled as a damped harmonic oscillator.
struct MechanicalOscillator {
    double mass_kg = 0.0;
    double omega_m = 0.0;  // rad/s
    double gamma_m = 0.0;  // rad/s

    double quality_factor() const { return omega_m / gamma_m; }
};

// Single cavity mode. The optomechanical prefactor omega_c/L is either derived from
// the cavity length or declared directly (for setups where L is not known).
struct Cavity {
    double wavelength_m = 0.0;
    std::optional<double> length_m;
    std::optional<double> declared_prefactor;  // rad/s per metre
    double kappa = 0.0;                        // amplitude decay rate, rad/s

    double omega_c() const { return constants::two_pi * constants::c_light / wavelength_m; }
};

struct FixedDetuning {
    double delta = 0.0;  // effective detuning, rad/s
};

// Effective detuning solved from the bare detuning omega_0 - omega_c.
struct SelfConsistentDetuning {
    double bare = 0.0;  // rad/s
};

using DetuningMode = std::variant<FixedDetuning, SelfConsistentDetuning>;

struct Drive {
    double power_w = 0.0;
    DetuningMode detuning = FixedDetuning{};
};

// Narrowband squeezed vacuum centred at omega_c + omega_m.
struct SqueezedInput {
    double n_photons = 0.0;
    double m_correlation = 0.0;
    double bandwidth = 0.0;  // Gamma, rad/s
};

struct Bath {
    double temperature_k = 0.0;
};

/// omega_c / L in rad/(s m), or the declared prefactor when the cavity carries one.
inline double coupling_prefactor(const Cavity& cavity) {
    if (cavity.declared_prefactor) return *cavity.declared_prefactor;
    if (!cavity.length_m) throw InvalidParameters("cavity needs either a length or a declared coupling prefactor");
    return cavity.omega_c() / *cavity.length_m;
}

/// Single-photon optomechanical coupling g = (omega_c/L) sqrt(hbar / (2 m omega_m)), rad/s.
inline double derive_coupling(const Cavity& cavity, const MechanicalOscillator& mech) {
    return coupling_prefactor(cavity) * std::sqrt(constants::hbar / (2.0 * mech.mass_kg * mech.omega_m));
}

/// Drive amplitude epsilon = sqrt(2 kappa P / (hbar omega_c)), 1/s.
inline double drive_amplitude(double power_w, double kappa, double omega_c) {
    return std::sqrt(2.0 * kappa * power_w / (constants::hbar * omega_c));
}

inline double max_cross_correlation(double n_photons) { return std::sqrt(n_photons * (n_photons + 1.0)); }

struct ParameterSet {
    std::string name;  // preset name, or "custom"
    MechanicalOscillator mechanics;
    Cavity cavity;
    Drive drive;
    SqueezedInput squeezed;
    Bath bath;

    double g() const { return derive_coupling(cavity, mechanics); }
    double epsilon() const { return drive_amplitude(drive.power_w, cavity.kappa, cavity.omega_c()); }
    double quality_factor() const { return mechanics.quality_factor(); }
    double kappa_over_omega_m() const { return cavity.kappa / mechanics.omega_m; }
};

inline std::vector<std::string> preset_names() { return {"weis", "aspelmeyer"}; }

/// Device presets. The scenario fields (power, squeezing, temperature) default to
/// P = 10 mW, N = 5, M = sqrt(N(N+1)), T = 100 mK; Gamma = 2 kappa and Delta = omega_m.
inline ParameterSet load_preset(std::string_view name) {
    using constants::two_pi;
    ParameterSet p;
    p.name = std::string(name);
    if (name == "weis") {
        p.cavity.wavelength_m = 775e-9;
        p.cavity.declared_prefactor = two_pi * 12e9 / 1e-9;
        p.cavity.kappa = two_pi * 15e6;
        p.mechanics = {20e-12, two_pi * 51.8e6, two_pi * 41e3};
    } else if (name == "aspelmeyer") {
        p.cavity.wavelength_m = 1064e-9;
        p.cavity.length_m = 25e-3;
        p.cavity.kappa = two_pi * 215e3;
        p.mechanics = {145e-12, two_pi * 947e3, two_pi * 141.0};
    } else {
        throw UnknownPreset("unknown preset '" + std::string(name) + "' (valid: weis, aspelmeyer)");
    }
    p.drive = {10e-3, FixedDetuning{p.mechanics.omega_m}};
    p.squeezed = {5.0, max_cross_correlation(5.0), 2.0 * p.cavity.kappa};
    p.bath.temperature_k = 0.1;
    return p;
}

struct ValidationReport {
    double quality_factor = 0.0;
    double kappa_over_omega_m = 0.0;
    std::vector<std::string> notes;
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
};

inline ValidationReport validate(const ParameterSet& p) {
    ValidationReport r;
    auto positive = [&](double v, const char* what) {
        if (!(v > 0.0) || !std::isfinite(v)) r.violations.push_back(std::string(what) + " must be finite and > 0");
    };
    positive(p.mechanics.mass_kg, "mass");
    positive(p.mechanics.omega_m, "omega_m");
    positive(p.mechanics.gamma_m, "gamma_m");
    positive(p.cavity.wavelength_m, "wavelength");
    positive(p.cavity.kappa, "kappa");
    if (p.cavity.length_m) positive(*p.cavity.length_m, "cavity length");
    if (p.cavity.declared_prefactor) positive(*p.cavity.declared_prefactor, "coupling prefactor");
    if (!p.cavity.length_m && !p.cavity.declared_prefactor)
        r.violations.push_back("cavity needs either a length or a declared coupling prefactor");
    if (!(p.drive.power_w >= 0.0) || !std::isfinite(p.drive.power_w)) r.violations.push_back("power must be >= 0");
    std::visit([&](const auto& mode) {
        using T = std::decay_t<decltype(mode)>;
        double v = 0.0;
        if constexpr (std::is_same_v<T, FixedDetuning>) v = mode.delta; else v = mode.bare;
        if (!std::isfinite(v)) r.violations.push_back("detuning must be finite");
    }, p.drive.detuning);

    const auto& sq = p.squeezed;
    if (!(sq.n_photons >= 0.0)) r.violations.push_back("N must be >= 0");
    if (!(sq.m_correlation >= 0.0)) r.violations.push_back("M must be >= 0");
    // Small slack so M = sqrt(N(N+1)) computed elsewhere is never rejected by rounding.
    if (sq.n_photons >= 0.0 && sq.m_correlation > max_cross_correlation(sq.n_photons) * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "M = " << sq.m_correlation << " exceeds sqrt(N(N+1)) = " << max_cross_correlation(sq.n_photons);
        r.violations.push_back(os.str());
    }
    positive(sq.bandwidth, "squeezed bandwidth Gamma");
    if (!(p.bath.temperature_k >= 0.0)) r.violations.push_back("temperature must be >= 0");

    if (!r.violations.empty()) return r;

    r.quality_factor = p.quality_factor();
    r.kappa_over_omega_m = p.kappa_over_omega_m();
    {
        std::ostringstream os;
        os.precision(3);
        os << "kappa/omega_m = " << r.kappa_over_omega_m
           << (r.kappa_over_omega_m < 1.0 ? ": resolved-sideband regime" : ": unresolved sidebands");
        r.notes.push_back(os.str());
    }
    {
        std::ostringstream os;
        os.precision(3);
        const double gk = sq.bandwidth / p.cavity.kappa;
        const double gw = sq.bandwidth / p.mechanics.omega_m;
        os << "squeezed bandwidth Gamma = " << gk << " kappa = " << gw << " omega_m"
           << (gw < 1.0 ? ": probe band resolved from the 2 omega_m sidebands"
                        : ": probe band overlaps the 2 omega_m sidebands");
        r.notes.push_back(os.str());
    }
    return r;
}

inline void require_valid(const ParameterSet& p) {
    const auto r = validate(p);
    if (!r.ok()) {
        std::string msg = "invalid parameters:";
        for (const auto& v : r.violations) msg += " " + v + ";";
        throw InvalidParameters(msg);
    }
}

}  // namespace omit
