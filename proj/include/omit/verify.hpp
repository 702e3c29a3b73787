#pragma once

// Self-checks run by `omit verify`: closed forms against the linear-solve route,
// the omega = 0 reduction, characteristic-root residuals and the thermal-weight
// branch switch.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "omit/analysis.hpp"
#include "omit/spectrum.hpp"
#include "omit/steadystate.hpp"

namespace omit {

struct CheckResult {
    std::string name;
    bool passed = false;
    double worst = 0.0;  // worst observed error in the check's own metric
    double tolerance = 0.0;
    int samples = 0;
};

inline double relative_difference(cplx a, cplx b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

/// Random valid parameter set scattered around `base`, with M = N.
template <class Rng>
ParameterSet random_parameter_draw(const ParameterSet& base, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto factor = [&](double lo, double hi) { return lo * std::pow(hi / lo, u(rng)); };
    ParameterSet p = base;
    p.name = base.name + "-draw";
    p.mechanics.mass_kg *= factor(0.5, 2.0);
    p.mechanics.gamma_m *= factor(0.5, 2.0);
    p.cavity.kappa *= factor(0.5, 2.0);
    p.drive.power_w = 30e-3 * u(rng);
    p.drive.detuning = FixedDetuning{p.mechanics.omega_m * (0.5 + u(rng))};
    p.squeezed.n_photons = 10.0 * u(rng);
    p.squeezed.m_correlation = p.squeezed.n_photons;
    p.squeezed.bandwidth = p.cavity.kappa * factor(0.5, 4.0);
    p.bath.temperature_k = u(rng) < 0.1 ? 0.0 : 0.3 * u(rng);
    return p;
}

inline std::vector<CheckResult> run_verification(const ParameterSet& base, unsigned seed = 20100517u) {
    std::mt19937_64 rng(seed);
    std::vector<CheckResult> out;
    const double wm = base.mechanics.omega_m;
    const SteadyState ss = resolve_steady_state(base);

    {
        CheckResult c{"transfer closed form == linear-solve oracle", true, 0.0, 1e-9, 100};
        std::uniform_real_distribution<double> w(-3.0 * wm, 3.0 * wm);
        for (int i = 0; i < c.samples; ++i) {
            const double omega = w(rng);
            const auto a = transfer(base, ss, omega);
            const auto b = oracle_transfer(base, ss, omega);
            c.worst = std::max({c.worst, relative_difference(a.v, b.v), relative_difference(a.e, b.e),
                                relative_difference(a.f, b.f)});
        }
        c.passed = c.worst < c.tolerance;
        out.push_back(c);
    }
    {
        CheckResult c{"X(0) from the full spectrum == closed form (M = N)", true, 0.0, 1e-10, 50};
        CheckResult roots{"characteristic root residuals", true, 0.0, kRootResidualTolerance, 0};
        CheckResult real{"X(omega) imaginary residue", true, 0.0, 1e-10, 0};
        for (int i = 0; i < c.samples;) {
            const ParameterSet p = random_parameter_draw(base, rng);
            const SteadyState s = resolve_steady_state(p);
            SpectrumPoint full, closed;
            try {
                full = detail::assemble_spectrum(p, s, p.squeezed, p.bath.temperature_k, 0.0);
                closed = x_at_zero(p, s, p.squeezed, p.bath.temperature_k);
            } catch (const PoleError&) {
                continue;
            }
            c.worst = std::max(c.worst, std::abs(full.total - closed.total) / std::abs(closed.total));
            const auto report = is_stable(p, s);
            roots.worst = std::max(roots.worst, report.max_residual);
            ++roots.samples;
            for (double x : {-0.7, -0.2, 0.05, 0.4, 0.9}) {
                const auto pt = detail::assemble_spectrum(p, s, p.squeezed, p.bath.temperature_k, x * p.mechanics.omega_m);
                real.worst = std::max(real.worst, pt.imag_residue / std::max(std::abs(pt.total), 1e-300));
                ++real.samples;
            }
            ++i;
        }
        c.passed = c.worst < c.tolerance;
        roots.passed = roots.worst < roots.tolerance;
        real.passed = real.worst < real.tolerance;
        out.push_back(c);
        out.push_back(roots);
        out.push_back(real);
    }
    {
        CheckResult c{"empty-cavity |E|^2 Lorentzian", true, 0.0, 1e-12, 0};
        ParameterSet p = base;
        p.drive.power_w = 0.0;
        const double k = p.cavity.kappa;
        for (double delta : {0.0, 0.5 * wm, wm, -0.8 * wm}) {
            const auto s = steady_state(p, delta);
            for (double x = -1.0; x <= 1.0; x += 0.125) {
                const double omega = x * wm;
                const double e2 = std::norm(transfer(p, s, omega + wm).e);
                const double dd = omega + wm - delta;
                const double expected = 4.0 * k * k / (k * k + dd * dd);
                c.worst = std::max(c.worst, std::abs(e2 - expected) / expected);
                ++c.samples;
            }
        }
        c.passed = c.worst < c.tolerance;
        out.push_back(c);
    }
    {
        CheckResult c{"thermal weight branch continuity", true, 0.0, 1e-8, 0};
        // both branches compared at the switch point: value and central-difference slope
        for (double t : {0.02, 0.1, 0.3}) {
            const double rate = detail::thermal_rate(t);
            for (double sign : {-1.0, 1.0}) {
                const double w0 = sign * kThermalSeriesSwitch * rate;
                const double h = 1e-4 * std::abs(w0);
                const double vs = detail::thermal_product_series(w0, rate);
                const double vd = detail::thermal_product_direct(w0, rate);
                const double slope_s = (detail::thermal_product_series(w0 + h, rate) - detail::thermal_product_series(w0 - h, rate)) / (2.0 * h);
                const double sd = (detail::thermal_product_direct(w0 + h, rate) - detail::thermal_product_direct(w0 - h, rate)) / (2.0 * h);
                c.worst = std::max({c.worst, std::abs(vs - vd) / std::abs(vd), std::abs(slope_s - sd) / std::abs(sd)});
                c.samples += 2;
            }
        }
        c.passed = c.worst < c.tolerance;
        out.push_back(c);
    }
    return out;
}

}  // namespace omit
