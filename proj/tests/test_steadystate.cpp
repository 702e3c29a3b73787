#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "omit/spectrum.hpp"
#include "omit/steadystate.hpp"

using namespace omit;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

ParameterSet weis(double power_w) {
    auto p = load_preset("weis");
    p.drive.power_w = power_w;
    return p;
}

// Coefficients of the degree-4 polynomial through five points (Newton divided differences,
// expanded to monomials). Test-side oracle for the symbolic expansion.
std::array<cplx, 5> interpolate_quartic(const std::array<cplx, 5>& x, const std::array<cplx, 5>& y) {
    std::array<cplx, 5> dd = y;
    for (std::size_t j = 1; j < 5; ++j)
        for (std::size_t i = 4; i >= j; --i) dd[i] = (dd[i] - dd[i - 1]) / (x[i] - x[i - j]);
    std::array<cplx, 5> poly{};
    poly[0] = dd[4];
    for (std::size_t k = 4; k-- > 0;) {
        // poly = poly * (w - x[k]) + dd[k]
        std::array<cplx, 5> next{};
        for (std::size_t m = 0; m < 4; ++m) {
            next[m + 1] += poly[m];
            next[m] -= poly[m] * x[k];
        }
        next[0] += dd[k];
        poly = next;
    }
    return poly;
}

}  // namespace

TEST(SteadyState, ZeroDrive) {
    const auto ss = steady_state(weis(0.0), 3.0e8);
    EXPECT_EQ(ss.c_s, cplx(0.0, 0.0));
    EXPECT_EQ(ss.q_s, 0.0);
    EXPECT_EQ(ss.p_s, 0.0);
}

TEST(SteadyState, WeisPhotonNumberFixture) {
    const auto p = weis(20e-3);
    const auto ss = steady_state(p, p.mechanics.omega_m);
    EXPECT_LT(rel(ss.photon_number(), 128105008.316715767), 1e-12);
}

TEST(SteadyState, ResonantDriveIsReal) {
    const auto p = weis(20e-3);
    const auto ss = steady_state(p, 0.0);
    EXPECT_EQ(ss.c_s.imag(), 0.0);
    EXPECT_DOUBLE_EQ(ss.c_s.real(), p.epsilon() / p.cavity.kappa);
}

TEST(SteadyState, ClosureRelations) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (const char* name : {"weis", "aspelmeyer"}) {
        auto p = load_preset(name);
        for (int i = 0; i < 20; ++i) {
            p.drive.power_w = 0.01 * (2.0 + u(rng));
            const double delta = u(rng) * p.mechanics.omega_m;
            const auto ss = steady_state(p, delta);
            const double k = p.cavity.kappa;
            EXPECT_EQ(ss.p_s, 0.0);
            EXPECT_LT(std::abs(ss.c_s * cplx(k, delta) - p.epsilon()) / p.epsilon(), 1e-15);
            EXPECT_LT(rel(ss.photon_number(), p.epsilon() * p.epsilon() / (k * k + delta * delta)), 1e-14);
            EXPECT_LT(rel(ss.q_s, 2.0 * p.g() * ss.photon_number() / p.mechanics.omega_m), 1e-15);
        }
    }
}

TEST(SelfConsistent, NoDriveGivesBareDetuning) {
    const auto p = weis(0.0);
    const auto roots = self_consistent_detunings(p, 1.7e8);
    ASSERT_EQ(roots.size(), 1u);
    EXPECT_NEAR(roots[0].delta, 1.7e8, 1e-6);
}

TEST(SelfConsistent, NoCouplingGivesBareDetuning) {
    auto p = weis(20e-3);
    p.cavity.declared_prefactor = 0.0;
    const auto roots = self_consistent_detunings(p, -4.2e7);
    ASSERT_EQ(roots.size(), 1u);
    EXPECT_NEAR(roots[0].delta, -4.2e7, 1e-6);
}

TEST(SelfConsistent, WeisThreeRootFixture) {
    // bare detuning chosen so that Delta = omega_m solves the cubic; reference roots
    // from a 30-digit polynomial solve
    const auto p = weis(20e-3);
    const double bare = 361719602.882810333;
    const auto roots = self_consistent_detunings(p, bare);
    ASSERT_EQ(roots.size(), 3u);
    const std::array<double, 3> expected{-38833721.8426162681, 75084325.8135240220, 325468998.911902580};
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_LT(rel(roots[i].delta, expected[i]), 1e-9);
        EXPECT_LT(roots[i].residual, 1e-9);
    }
    EXPECT_TRUE(std::is_sorted(roots.begin(), roots.end(),
                               [](const auto& a, const auto& b) { return a.delta < b.delta; }));
    // the upper root is the red-sideband operating point
    EXPECT_TRUE(roots[2].stability.stable);
}

TEST(SelfConsistent, RootsSatisfyTheCubic) {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const char* name : {"weis", "aspelmeyer"}) {
        auto p = load_preset(name);
        for (int i = 0; i < 40; ++i) {
            p.drive.power_w = 0.05 * u(rng);
            const double bare = (4.0 * u(rng) - 1.5) * p.mechanics.omega_m;
            const auto roots = self_consistent_detunings(p, bare);
            ASSERT_TRUE(roots.size() == 1 || roots.size() == 3) << roots.size();
            for (const auto& r : roots) {
                EXPECT_LT(r.residual, 1e-9);
                // Delta = bare - g Q_s closes
                const auto ss = steady_state(p, r.delta);
                EXPECT_LT(std::abs(bare - p.g() * ss.q_s - r.delta), 1e-6 * p.mechanics.omega_m);
            }
        }
    }
}

TEST(SelfConsistent, ResolveUsesFixedOrStableRoot) {
    auto p = weis(20e-3);
    EXPECT_DOUBLE_EQ(resolve_steady_state(p).delta, p.mechanics.omega_m);
    p.drive.detuning = SelfConsistentDetuning{361719602.882810333};
    const auto ss = resolve_steady_state(p);
    EXPECT_TRUE(is_stable(p, ss).stable);
}

TEST(CharacteristicPolynomial, DecoupledFactorisation) {
    const auto p = weis(0.0);
    const double d = 0.7 * p.mechanics.omega_m;
    const auto c = characteristic_polynomial(p, steady_state(p, d));
    const double wm = p.mechanics.omega_m, k = p.cavity.kappa;
    EXPECT_LT(std::abs(c[0] - cplx(wm * wm * (k * k + d * d), 0.0)) / std::abs(c[0]), 1e-15);
    EXPECT_EQ(c[4], cplx(1.0, 0.0));
}

TEST(CharacteristicPolynomial, WeisFixture) {
    const auto p = weis(10e-3);
    const auto c = characteristic_polynomial(p, steady_state(p, p.mechanics.omega_m));
    const std::array<cplx, 5> expected{cplx(1.091230827094694626e34, 0.0), cplx(0.0, -1.9996924613177856046e25),
                                       cplx(-220791340920065867.36, 0.0), cplx(0.0, 188753169.81298195735),
                                       cplx(1.0, 0.0)};
    for (std::size_t k = 0; k < 5; ++k) EXPECT_LT(std::abs(c[k] - expected[k]) / std::abs(expected[k]), 1e-12) << k;
}

TEST(CharacteristicPolynomial, MatchesDirectEvaluation) {
    std::mt19937 rng(9);
    for (const char* name : {"weis", "aspelmeyer"}) {
        auto p = load_preset(name);
        p.drive.power_w = 20e-3;
        const auto ss = steady_state(p, p.mechanics.omega_m);
        const auto c = characteristic_polynomial(p, ss);
        std::uniform_real_distribution<double> w(-3.0 * p.mechanics.omega_m, 3.0 * p.mechanics.omega_m);
        for (int i = 0; i < 100; ++i) {
            const double omega = w(rng);
            const cplx direct = d_of_omega(p, ss, omega);
            // normalise by the largest term so cancellations near the zeros don't inflate the ratio
            double scale = 0.0;
            for (std::size_t k = 0; k < 5; ++k) scale = std::max(scale, std::abs(c[k]) * std::pow(std::abs(omega), double(k)));
            EXPECT_LT(std::abs(evaluate_polynomial(c, cplx(omega, 0.0)) - direct) / scale, 1e-12);
        }
    }
}

TEST(CharacteristicPolynomial, FivePointFitRecoversCoefficients) {
    const auto p = weis(10e-3);
    const auto ss = steady_state(p, p.mechanics.omega_m);
    const double wm = p.mechanics.omega_m;
    std::array<cplx, 5> xs{}, ys{};
    for (std::size_t i = 0; i < 5; ++i) {
        xs[i] = cplx((static_cast<double>(i) - 2.0) * wm, 0.0);
        ys[i] = d_of_omega(p, ss, xs[i].real());
    }
    const auto fit = interpolate_quartic(xs, ys);
    const auto c = characteristic_polynomial(p, ss);
    EXPECT_NEAR(fit[4].real(), 1.0, 1e-9);
    EXPECT_NEAR(fit[4].imag(), 0.0, 1e-9);
    for (std::size_t k = 0; k < 5; ++k) {
        const double unit = std::pow(wm, 4.0 - static_cast<double>(k));
        EXPECT_LT(std::abs(fit[k] - c[k]) / unit, 1e-9) << k;
    }
}

TEST(Stability, DecoupledRoots) {
    const auto p = weis(0.0);
    const double wm = p.mechanics.omega_m, gm = p.mechanics.gamma_m, k = p.cavity.kappa, d = wm;
    const auto r = is_stable(p, steady_state(p, d));
    EXPECT_TRUE(r.stable);
    const double wp = std::sqrt(wm * wm - gm * gm / 4.0);
    const std::array<cplx, 4> expected{cplx(-d, -k), cplx(-wp, -gm / 2.0), cplx(wp, -gm / 2.0), cplx(d, -k)};
    // Delta = omega_m makes cavity and mechanical real parts coincide; match each expected root
    for (const auto& e : expected) {
        double best = 1e300;
        for (const auto& z : r.roots) best = std::min(best, std::abs(z - e));
        EXPECT_LT(best, 1e-6 * wm);
    }
    EXPECT_NEAR(r.margin, -gm / 2.0, 1e-6 * gm);
}

TEST(Stability, WeisOperatingPointIsStable) {
    for (double pw : {10e-3, 20e-3}) {
        const auto p = weis(pw);
        const auto r = is_stable(p, steady_state(p, p.mechanics.omega_m));
        EXPECT_TRUE(r.stable) << pw;
        EXPECT_LT(r.margin, r.threshold);
        EXPECT_LT(r.max_residual, 1e-8);
    }
}

TEST(Stability, NegativeDampingIsUnstable) {
    auto p = weis(0.0);
    p.mechanics.gamma_m = -p.mechanics.gamma_m;
    const auto r = is_stable(p, steady_state(p, p.mechanics.omega_m));
    EXPECT_FALSE(r.stable);
    EXPECT_GT(r.margin, 0.0);
}

TEST(Stability, BlueSidebandStrongDriveIsUnstable) {
    const auto p = weis(20e-3);
    EXPECT_FALSE(is_stable(p, steady_state(p, -p.mechanics.omega_m)).stable);
}

TEST(Stability, RootsSatisfyDirectEvaluation) {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const char* name : {"weis", "aspelmeyer"}) {
        auto p = load_preset(name);
        for (int i = 0; i < 50; ++i) {
            p.drive.power_w = 0.03 * u(rng);
            const auto ss = steady_state(p, (3.0 * u(rng) - 1.5) * p.mechanics.omega_m);
            const auto r = is_stable(p, ss);
            for (const auto& z : r.roots) {
                const double wm = p.mechanics.omega_m;
                // d at complex omega, written out
                const cplx mech = wm * wm - z * z - cplx(0.0, p.mechanics.gamma_m) * z;
                const cplx lossy = p.cavity.kappa - cplx(0.0, 1.0) * z;
                const cplx coupling = -4.0 * wm * ss.delta * p.g() * p.g() * ss.photon_number();
                const cplx cavity = lossy * lossy + ss.delta * ss.delta;
                const cplx d = coupling + mech * cavity;
                // |z|^4 alone is ill-conditioned for roots near omega = 0, so bound by the
                // magnitude of the terms that cancel
                const double terms = std::abs(coupling) + std::abs(mech) * (std::abs(lossy * lossy) + ss.delta * ss.delta);
                EXPECT_LT(std::abs(d) / std::max(std::abs(std::pow(z, 4)), terms), 1e-8);
                if (std::abs(z) > 0.1 * wm) EXPECT_LT(std::abs(d) / std::abs(std::pow(z, 4)), 1e-8);
            }
        }
    }
}

TEST(Stability, InvariantUnderRateRescaling) {
    for (double delta_over_wm : {1.0, 0.3, -1.0, -0.5}) {
        auto p = weis(20e-3);
        const auto base = is_stable(p, steady_state(p, delta_over_wm * p.mechanics.omega_m));
        for (double s : {0.1, 3.7, 10.0}) {
            auto q = p;
            q.mechanics.omega_m *= s;
            q.mechanics.gamma_m *= s;
            q.cavity.kappa *= s;
            // g^2 eps^2 must scale as s^4 for d to be homogeneous
            q.drive.power_w *= std::pow(s, 4);
            const auto r = is_stable(q, steady_state(q, delta_over_wm * q.mechanics.omega_m));
            EXPECT_EQ(r.stable, base.stable) << delta_over_wm << " " << s;
            EXPECT_LT(std::abs(r.margin / s - base.margin), 1e-6 * p.mechanics.gamma_m);
        }
    }
}
