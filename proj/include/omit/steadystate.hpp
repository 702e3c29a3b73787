#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "omit/error.hpp"
#include "omit/params.hpp"

namespace omit {

using cplx = std::complex<double>;

// Classical mean values around which the fluctuations are linearised.
struct SteadyState {
    cplx c_s{0.0, 0.0};  // intracavity amplitude
    double q_s = 0.0;    // dimensionless mirror displacement
    double p_s = 0.0;    // dimensionless mirror momentum (always 0)
    double delta = 0.0;  // effective detuning, rad/s

    double photon_number() const { return std::norm(c_s); }
};

/// Steady state with `delta` taken as the effective (already shifted) detuning.
inline SteadyState steady_state(const ParameterSet& p, double delta) {
    SteadyState ss;
    ss.delta = delta;
    ss.c_s = p.epsilon() / cplx(p.cavity.kappa, delta);
    ss.q_s = 2.0 * p.g() * std::norm(ss.c_s) / p.mechanics.omega_m;
    return ss;
}

// ---------------------------------------------------------------------------
// Characteristic polynomial and stability

/// Coefficients of d(omega) in ascending powers of omega (index k multiplies omega^k).
using Quartic = std::array<cplx, 5>;

inline Quartic characteristic_polynomial(const ParameterSet& p, const SteadyState& ss) {
    const double wm = p.mechanics.omega_m;
    const double gm = p.mechanics.gamma_m;
    const double k = p.cavity.kappa;
    const double d = ss.delta;
    const double g = p.g();
    const cplx i{0.0, 1.0};
    // mechanical factor wm^2 - w^2 - i gm w, cavity factor (k - i w)^2 + d^2
    const std::array<cplx, 3> mech{wm * wm, -i * gm, -1.0};
    const std::array<cplx, 3> cav{k * k + d * d, -2.0 * i * k, -1.0};
    Quartic c{};
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) c[a + b] += mech[a] * cav[b];
    c[0] -= 4.0 * wm * d * g * g * ss.photon_number();
    return c;
}

template <std::size_t N>
cplx evaluate_polynomial(const std::array<cplx, N>& coeffs, cplx x) {
    cplx acc{0.0, 0.0};
    for (std::size_t k = N; k-- > 0;) acc = acc * x + coeffs[k];
    return acc;
}

struct StabilityReport {
    Quartic coefficients{};
    std::array<cplx, 4> roots{};
    bool stable = false;
    double margin = 0.0;        // max Im(root), rad/s; negative when stable
    double threshold = 0.0;     // stable iff margin < threshold
    double max_residual = 0.0;          // max |d(root)| / sum_k |c_k root^k|
    double max_residual_leading = 0.0;  // max |d(root)| / |c4 root^4|
};

inline constexpr double kStabilityTolerance = 1e-9;  // in units of omega_m
inline constexpr double kRootResidualTolerance = 1e-8;

namespace detail {

// Roots of a complex polynomial via eigenvalues of the companion matrix, in the
// scaled variable x = omega / scale, followed by a few Newton steps in omega.
template <std::size_t N>
std::array<cplx, N - 1> polynomial_roots(const std::array<cplx, N>& c, double scale) {
    constexpr int deg = static_cast<int>(N) - 1;
    Eigen::Matrix<cplx, deg, deg> companion = Eigen::Matrix<cplx, deg, deg>::Zero();
    for (int r = 1; r < deg; ++r) companion(r, r - 1) = 1.0;
    for (int k = 0; k < deg; ++k)
        companion(k, deg - 1) = -c[static_cast<std::size_t>(k)] * std::pow(scale, k - deg) / c[deg];
    Eigen::ComplexEigenSolver<Eigen::Matrix<cplx, deg, deg>> solver(companion, false);
    if (solver.info() != Eigen::Success) throw RootResidualError("companion eigen-solve did not converge");

    std::array<cplx, N> dc{};
    for (std::size_t k = 1; k < N; ++k) dc[k - 1] = static_cast<double>(k) * c[k];

    std::array<cplx, N - 1> roots{};
    for (int r = 0; r < deg; ++r) {
        cplx z = solver.eigenvalues()[r] * scale;
        for (int it = 0; it < 3; ++it) {
            const cplx f = evaluate_polynomial(c, z);
            const cplx df = evaluate_polynomial(dc, z);
            if (df == cplx{}) break;
            const cplx next = z - f / df;
            if (std::abs(evaluate_polynomial(c, next)) >= std::abs(f)) break;
            z = next;
        }
        roots[static_cast<std::size_t>(r)] = z;
    }
    return roots;
}

}  // namespace detail

/// Linear stability of the fluctuations: every zero of d(omega) must lie strictly in the
/// lower half plane (fluctuations go as exp(-i omega t)).
inline StabilityReport is_stable(const ParameterSet& p, const SteadyState& ss) {
    StabilityReport r;
    r.coefficients = characteristic_polynomial(p, ss);
    const double scale = std::max({p.mechanics.omega_m, p.cavity.kappa, std::abs(ss.delta)});
    r.roots = detail::polynomial_roots(r.coefficients, scale);
    std::sort(r.roots.begin(), r.roots.end(), [](cplx a, cplx b) { return a.real() < b.real(); });

    r.margin = -std::numeric_limits<double>::infinity();
    for (const auto& z : r.roots) {
        r.margin = std::max(r.margin, z.imag());
        const double value = std::abs(evaluate_polynomial(r.coefficients, z));
        double terms = 0.0;
        for (std::size_t k = 0; k < 5; ++k) terms += std::abs(r.coefficients[k]) * std::pow(std::abs(z), double(k));
        r.max_residual = std::max(r.max_residual, value / terms);
        r.max_residual_leading = std::max(r.max_residual_leading, value / std::abs(r.coefficients[4] * std::pow(z, 4)));
    }
    if (!(r.max_residual < kRootResidualTolerance))
        throw RootResidualError("characteristic root residual " + std::to_string(r.max_residual) + " exceeds tolerance");
    r.threshold = -kStabilityTolerance * p.mechanics.omega_m;
    r.stable = r.margin < r.threshold;
    return r;
}

// ---------------------------------------------------------------------------
// Self-consistent effective detuning

/// Cubic in Delta: Delta^3 - b Delta^2 + kappa^2 Delta + (2 g^2 eps^2 / omega_m - b kappa^2),
/// ascending coefficients.
inline std::array<double, 4> detuning_cubic(const ParameterSet& p, double bare) {
    const double k2 = p.cavity.kappa * p.cavity.kappa;
    const double g = p.g();
    const double eps = p.epsilon();
    return {2.0 * g * g * eps * eps / p.mechanics.omega_m - bare * k2, k2, -bare, 1.0};
}

/// |cubic(delta)| divided by the sum of the magnitudes of its terms.
inline double detuning_cubic_residual(const ParameterSet& p, double bare, double delta) {
    const auto c = detuning_cubic(p, bare);
    double value = 0.0, magnitude = 0.0, power = 1.0;
    for (double ck : c) {
        value += ck * power;
        magnitude += std::abs(ck * power);
        power *= delta;
    }
    return magnitude > 0.0 ? std::abs(value) / magnitude : 0.0;
}

struct DetuningRoot {
    double delta = 0.0;
    double residual = 0.0;
    StabilityReport stability;
};

/// All real effective detunings consistent with the bare detuning, ascending.
inline std::vector<DetuningRoot> self_consistent_detunings(const ParameterSet& p, double bare) {
    const auto c = detuning_cubic(p, bare);
    const double scale = std::max({p.cavity.kappa, std::abs(bare), std::cbrt(std::abs(c[0])), p.mechanics.omega_m});

    Eigen::Matrix3d companion = Eigen::Matrix3d::Zero();
    companion(1, 0) = 1.0;
    companion(2, 1) = 1.0;
    for (int k = 0; k < 3; ++k) companion(k, 2) = -c[static_cast<std::size_t>(k)] * std::pow(scale, k - 3);
    Eigen::EigenSolver<Eigen::Matrix3d> solver(companion, false);

    auto f = [&](double x) { return ((x + c[2]) * x + c[1]) * x + c[0]; };
    auto df = [&](double x) { return (3.0 * x + 2.0 * c[2]) * x + c[1]; };

    std::vector<double> real_roots;
    for (int r = 0; r < 3; ++r) {
        const auto z = solver.eigenvalues()[r];
        if (std::abs(z.imag()) > 1e-7 * std::max(1.0, std::abs(z))) continue;
        double x = z.real() * scale;
        for (int it = 0; it < 4; ++it) {
            const double d = df(x);
            if (d == 0.0) break;
            const double next = x - f(x) / d;
            if (std::abs(f(next)) >= std::abs(f(x))) break;
            x = next;
        }
        real_roots.push_back(x);
    }
    std::sort(real_roots.begin(), real_roots.end());
    real_roots.erase(std::unique(real_roots.begin(), real_roots.end(),
                                 [&](double a, double b) { return std::abs(a - b) <= 1e-9 * scale; }),
                     real_roots.end());

    std::vector<DetuningRoot> out;
    for (double delta : real_roots)
        out.push_back({delta, detuning_cubic_residual(p, bare, delta), is_stable(p, steady_state(p, delta))});
    return out;
}

/// Steady state for the parameter set's own detuning mode. In self-consistent mode the
/// lowest stable root is used (lowest root overall when none is stable).
inline SteadyState resolve_steady_state(const ParameterSet& p) {
    if (const auto* fixed = std::get_if<FixedDetuning>(&p.drive.detuning)) return steady_state(p, fixed->delta);
    const double bare = std::get<SelfConsistentDetuning>(p.drive.detuning).bare;
    const auto roots = self_consistent_detunings(p, bare);
    if (roots.empty()) throw Error("self-consistent detuning cubic has no real root");
    for (const auto& r : roots)
        if (r.stability.stable) return steady_state(p, r.delta);
    return steady_state(p, roots.front().delta);
}

}  // namespace omit
