#pragma once

// Output-field response and the homodyne spectrum X(omega) seen by a local
// oscillator at the probe frequency omega_c + omega_m. omega is the offset from
// the probe in the analyser's frame; transfer functions take the frame rotating
// at omega_c, so the probe sits at omega = omega_m there.
//
// Fourier convention: f(t) = (1/2pi) integral f(omega) exp(-i omega t) d omega.

#include <cmath>
#include <complex>
#include <optional>

#include <Eigen/Dense>

#include "omit/constants.hpp"
#include "omit/error.hpp"
#include "omit/params.hpp"
#include "omit/steadystate.hpp"

namespace omit {

/// d(omega) = -4 omega_m Delta g^2 |c_s|^2 + (omega_m^2 - omega^2 - i gamma_m omega) [(kappa - i omega)^2 + Delta^2]
inline cplx d_of_omega(const ParameterSet& p, const SteadyState& ss, double omega) {
    const double wm = p.mechanics.omega_m;
    const double g = p.g();
    const cplx mech{wm * wm - omega * omega, -p.mechanics.gamma_m * omega};
    const cplx lossy{p.cavity.kappa, -omega};
    return -4.0 * wm * ss.delta * g * g * ss.photon_number() + mech * (lossy * lossy + ss.delta * ss.delta);
}

// Response of the output field c_out + c_in to the mirror's thermal force (V), the
// input field (E) and its conjugate (F).
struct TransferTriple {
    double omega = 0.0;
    cplx v{}, e{}, f{};
};

inline constexpr double kPoleGuard = 1e-30;

inline double pole_scale(const ParameterSet& p, const SteadyState& ss, double omega) {
    const double wm = p.mechanics.omega_m;
    const double k = p.cavity.kappa;
    return wm * wm * (k * k + ss.delta * ss.delta) + std::pow(omega, 4);
}

inline TransferTriple transfer(const ParameterSet& p, const SteadyState& ss, double omega) {
    const cplx i{0.0, 1.0};
    const double wm = p.mechanics.omega_m;
    const double k = p.cavity.kappa;
    const double g = p.g();
    const cplx d = d_of_omega(p, ss, omega);
    if (std::abs(d) < kPoleGuard * pole_scale(p, ss, omega))
        throw PoleError("d(omega) vanishes at omega = " + std::to_string(omega) + " rad/s", omega);

    const cplx lead{k, -(omega + ss.delta)};
    const cplx mech{wm * wm - omega * omega, -p.mechanics.gamma_m * omega};
    TransferTriple t;
    t.omega = omega;
    t.v = std::sqrt(2.0 * k) * g * ss.c_s * wm * i * lead / d;
    t.e = 2.0 * k / d * (2.0 * i * g * g * ss.photon_number() * wm + mech * lead);
    t.f = 4.0 * k / d * wm * g * g * ss.c_s * ss.c_s * i;
    return t;
}

/// Independent route to V, E, F: solve the linearised Langevin system for
/// (dQ, dP, dc, dc^dagger) with unit sources xi, c_in, c_in^dagger and read off sqrt(2 kappa) dc.
inline TransferTriple oracle_transfer(const ParameterSet& p, const SteadyState& ss, double omega) {
    const cplx i{0.0, 1.0};
    const double wm = p.mechanics.omega_m;
    const double gm = p.mechanics.gamma_m;
    const double k = p.cavity.kappa;
    const double g = p.g();
    const cplx cs = ss.c_s;
    const double dl = ss.delta;

    Eigen::Matrix4cd a;
    // clang-format off
    a << -i * omega,          -wm,             0.0,                      0.0,
          wm,                 gm - i * omega, -2.0 * g * std::conj(cs), -2.0 * g * cs,
         -i * g * cs,          0.0,            k + i * (dl - omega),     0.0,
          i * g * std::conj(cs), 0.0,          0.0,                      k - i * (dl + omega);
    // clang-format on
    Eigen::FullPivLU<Eigen::Matrix4cd> lu(a);
    if (!lu.isInvertible())
        throw SingularSystem("linearised system is singular at omega = " + std::to_string(omega) + " rad/s");

    const double root2k = std::sqrt(2.0 * k);
    Eigen::Matrix<cplx, 4, 3> sources = Eigen::Matrix<cplx, 4, 3>::Zero();
    sources(1, 0) = 1.0;     // xi drives dP
    sources(2, 1) = root2k;  // c_in drives dc
    sources(3, 2) = root2k;  // c_in^dagger drives dc^dagger
    const Eigen::Matrix<cplx, 4, 3> x = lu.solve(sources);

    // c_out = sqrt(2 kappa) dc - c_in; adding c_in back leaves sqrt(2 kappa) dc.
    return {omega, root2k * x(2, 0), root2k * x(2, 1), root2k * x(2, 2)};
}

// ---------------------------------------------------------------------------
// Thermal weight

inline constexpr double kThermalSeriesSwitch = 1e-3;

namespace detail {

inline double thermal_rate(double temperature_k) {
    return 2.0 * constants::k_boltzmann * temperature_k / constants::hbar;
}

// omega (1 + coth x) with x = omega / rate, from omega coth(x) = rate (1 + x^2/3 - x^4/45 + ...)
inline double thermal_product_series(double omega, double rate) {
    const double x = omega / rate;
    const double x2 = x * x;
    return omega + rate * (1.0 + x2 / 3.0 - x2 * x2 / 45.0);
}

// 1 + coth(x) = -2 / expm1(-2x), free of cancellation for either sign of x
inline double thermal_product_direct(double omega, double rate) {
    return omega * (-2.0 / std::expm1(-2.0 * omega / rate));
}

}  // namespace detail

/// 2 gamma_m (omega/omega_m) [1 + coth(hbar omega / (2 k_B T))].
/// Near omega = 0 the product omega (1 + coth) is evaluated by its series so the
/// weight tends smoothly to (2 gamma_m / omega_m)(2 k_B T / hbar). At T = 0, coth -> sign.
inline double thermal_weight(double omega, double temperature_k, double gamma_m, double omega_m) {
    const double pre = 2.0 * gamma_m / omega_m;
    if (temperature_k <= 0.0) return omega > 0.0 ? 2.0 * pre * omega : 0.0;
    const double rate = detail::thermal_rate(temperature_k);
    if (std::abs(omega / rate) < kThermalSeriesSwitch) return pre * detail::thermal_product_series(omega, rate);
    return pre * detail::thermal_product_direct(omega, rate);
}

inline double coth_or_sign(double x, double temperature_k) {
    if (temperature_k <= 0.0) return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
    return 1.0 / std::tanh(x);
}

// ---------------------------------------------------------------------------
// Homodyne spectrum

struct SpectrumPoint {
    double omega = 0.0;
    double squeezed = 0.0;  // the four N, M terms
    double vacuum = 0.0;    // input vacuum noise
    double thermal = 0.0;   // mirror's thermal force
    double total = 0.0;
    double imag_residue = 0.0;  // |Im| of the assembled expression before taking the real part
    bool unstable_warning = false;
    bool negative_thermal = false;
};

inline double squeezed_lorentzian(const SqueezedInput& sq, double omega) {
    const double g2 = sq.bandwidth * sq.bandwidth;
    return g2 / (g2 + omega * omega);
}

namespace detail {

inline SpectrumPoint assemble_spectrum(const ParameterSet& p, const SteadyState& ss, const SqueezedInput& sq,
                                       double temperature_k, double omega) {
    const double wm = p.mechanics.omega_m;
    const double gm = p.mechanics.gamma_m;
    const auto up = transfer(p, ss, omega + wm);
    const auto down = transfer(p, ss, -omega + wm);
    const double lor = squeezed_lorentzian(sq, omega);

    const cplx squeezed = up.e * down.e * sq.m_correlation * lor + std::norm(up.e) * sq.n_photons * lor +
                          std::conj(down.e) * std::conj(up.e) * sq.m_correlation * lor +
                          std::norm(down.e) * sq.n_photons * lor;
    const double vacuum = std::norm(up.e) + std::norm(down.f);
    const double thermal = std::norm(up.v) * thermal_weight(omega + wm, temperature_k, gm, wm) +
                           std::norm(down.v) * thermal_weight(omega - wm, temperature_k, gm, wm);

    SpectrumPoint pt;
    pt.omega = omega;
    pt.squeezed = squeezed.real();
    pt.vacuum = vacuum;
    pt.thermal = thermal;
    pt.total = pt.squeezed + pt.vacuum + pt.thermal;
    pt.imag_residue = std::abs(squeezed.imag());
    pt.negative_thermal = thermal < 0.0;
    return pt;
}

}  // namespace detail

/// X(omega) split into squeezed, vacuum and thermal parts, fast +-2 omega_m terms dropped.
inline SpectrumPoint homodyne_spectrum(const ParameterSet& p, const SteadyState& ss, const SqueezedInput& sq,
                                       double temperature_k, double omega) {
    auto pt = detail::assemble_spectrum(p, ss, sq, temperature_k, omega);
    pt.unstable_warning = !is_stable(p, ss).stable;
    return pt;
}

/// X(0) in closed form, for general M: M (E^2 + E*^2) + 2 N |E|^2 with E = E(omega_m),
/// which is N (E + E*)^2 when M = N.
inline SpectrumPoint x_at_zero(const ParameterSet& p, const SteadyState& ss, const SqueezedInput& sq,
                               double temperature_k) {
    const double wm = p.mechanics.omega_m;
    const auto t = transfer(p, ss, wm);
    const cplx e2 = t.e * t.e;
    SpectrumPoint pt;
    pt.omega = 0.0;
    pt.squeezed = sq.m_correlation * 2.0 * e2.real() + 2.0 * sq.n_photons * std::norm(t.e);
    pt.vacuum = std::norm(t.e) + std::norm(t.f);
    const double x = temperature_k > 0.0
                         ? constants::hbar * wm / (2.0 * constants::k_boltzmann * temperature_k)
                         : 1.0;
    pt.thermal = 4.0 * std::norm(t.v) * p.mechanics.gamma_m * coth_or_sign(x, temperature_k);
    pt.total = pt.squeezed + pt.vacuum + pt.thermal;
    pt.unstable_warning = !is_stable(p, ss).stable;
    return pt;
}

// Parameter set, steady state and stability verdict bundled for repeated evaluation.
class SpectrumModel {
public:
    SpectrumModel(ParameterSet params, SteadyState ss)
        : params_(std::move(params)), ss_(ss), stability_(is_stable(params_, ss_)) {}

    explicit SpectrumModel(ParameterSet params)
        : SpectrumModel(params, resolve_steady_state(params)) {}

    SpectrumPoint at(double omega) const {
        auto pt = detail::assemble_spectrum(params_, ss_, params_.squeezed, params_.bath.temperature_k, omega);
        pt.unstable_warning = !stability_.stable;
        return pt;
    }

    SpectrumPoint at_zero() const { return x_at_zero(params_, ss_, params_.squeezed, params_.bath.temperature_k); }

    const ParameterSet& params() const { return params_; }
    const SteadyState& steady() const { return ss_; }
    const StabilityReport& stability() const { return stability_; }

private:
    ParameterSet params_;
    SteadyState ss_;
    StabilityReport stability_;
};

}  // namespace omit
