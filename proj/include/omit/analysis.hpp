#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <future>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "omit/error.hpp"
#include "omit/params.hpp"
#include "omit/spectrum.hpp"
#include "omit/steadystate.hpp"

namespace omit {

// Uniform grid in omega / omega_m, endpoints included.
struct Grid {
    double min = -1.0;
    double max = 1.0;
    std::size_t count = 1601;

    void check() const {
        if (count < 2) throw InvalidParameters("grid needs at least 2 points");
        if (!(max > min) || !std::isfinite(min) || !std::isfinite(max))
            throw InvalidParameters("grid needs finite bounds with max > min");
    }

    double at(std::size_t i) const {
        if (i + 1 == count) return max;
        return min + (max - min) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
};

struct SweepRow {
    double x = 0.0;  // omega / omega_m
    SpectrumPoint point;
};

struct SweepTable {
    std::string scenario;
    Grid grid;
    ParameterSet params;
    SteadyState steady;
    StabilityReport stability;
    std::vector<SweepRow> rows;

    std::vector<double> totals() const {
        std::vector<double> t;
        t.reserve(rows.size());
        for (const auto& r : rows) t.push_back(r.point.total);
        return t;
    }
    double max_total() const {
        double m = -std::numeric_limits<double>::infinity();
        for (const auto& r : rows) m = std::max(m, r.point.total);
        return m;
    }
};

struct SweepOptions {
    unsigned threads = 1;
};

/// Evaluates X at every grid point. The steady state and its stability are computed once.
/// Rows come back in grid order whatever the thread count.
inline SweepTable sweep(const ParameterSet& params, const Grid& grid, std::string scenario = {},
                        SweepOptions options = {}) {
    grid.check();
    require_valid(params);
    const SpectrumModel model(params);

    SweepTable table;
    table.scenario = std::move(scenario);
    table.grid = grid;
    table.params = params;
    table.steady = model.steady();
    table.stability = model.stability();
    table.rows.resize(grid.count);

    const double wm = params.mechanics.omega_m;
    auto fill = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const double x = grid.at(i);
            table.rows[i] = {x, model.at(x * wm)};
        }
    };

    const std::size_t workers = std::clamp<std::size_t>(options.threads, 1, grid.count);
    if (workers == 1) {
        fill(0, grid.count);
        return table;
    }
    std::vector<std::future<void>> jobs;
    const std::size_t chunk = (grid.count + workers - 1) / workers;
    for (std::size_t begin = 0; begin < grid.count; begin += chunk)
        jobs.push_back(std::async(std::launch::async, fill, begin, std::min(grid.count, begin + chunk)));
    for (auto& j : jobs) j.get();
    return table;
}

// ---------------------------------------------------------------------------
// Dip extraction

inline constexpr const char* kDipWidthDefinition =
    "full width at half depth: level x_min + (mean(flanking maxima) - x_min)/2, "
    "crossings linearly interpolated; flanking maxima = largest local maxima on each side of "
    "the lowest interior local minimum";

struct DipReport {
    double x_min = 0.0;
    double omega_min_over_omega_m = 0.0;
    double width_over_omega_m = 0.0;
    double half_level = 0.0;
    double left_peak = 0.0;
    double right_peak = 0.0;
    double left_peak_x = 0.0;
    double right_peak_x = 0.0;
    std::string baseline = kDipWidthDefinition;
};

/// Dip metrics from (x, value) samples with strictly increasing x.
inline DipReport dip_metrics(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t n = ys.size();
    if (xs.size() != n) throw InvalidParameters("dip_metrics: x and y sizes differ");
    if (n < 3) throw NoDipError("no interior point: cannot extract a dip from fewer than 3 samples");

    // Plateaus count once: a run of equal values is an extremum if both neighbours agree.
    std::vector<std::size_t> minima, maxima;
    for (std::size_t i = 1; i + 1 < n;) {
        std::size_t j = i;
        while (j + 1 < n && ys[j + 1] == ys[i]) ++j;
        if (j + 1 >= n) break;
        if (ys[i - 1] > ys[i] && ys[j + 1] > ys[i]) minima.push_back((i + j) / 2);
        if (ys[i - 1] < ys[i] && ys[j + 1] < ys[i]) maxima.push_back((i + j) / 2);
        i = j + 1;
    }

    std::optional<std::size_t> best;
    for (std::size_t m : minima) {
        const bool left = std::any_of(maxima.begin(), maxima.end(), [&](std::size_t k) { return k < m; });
        const bool right = std::any_of(maxima.begin(), maxima.end(), [&](std::size_t k) { return k > m; });
        if (left && right && (!best || ys[m] < ys[*best])) best = m;
    }
    if (!best) throw NoDipError("no interior local minimum flanked by maxima");
    const std::size_t im = *best;

    // Largest maximum on each side; ties go to the one nearer the minimum.
    std::size_t il = 0, ir = 0;
    bool have_l = false, have_r = false;
    for (std::size_t k : maxima) {
        if (k < im && (!have_l || ys[k] >= ys[il])) { il = k; have_l = true; }
        if (k > im && (!have_r || ys[k] > ys[ir])) { ir = k; have_r = true; }
    }

    DipReport r;
    r.x_min = ys[im];
    r.omega_min_over_omega_m = xs[im];
    r.left_peak = ys[il];
    r.right_peak = ys[ir];
    r.left_peak_x = xs[il];
    r.right_peak_x = xs[ir];
    r.half_level = r.x_min + (0.5 * (r.left_peak + r.right_peak) - r.x_min) / 2.0;

    auto crossing = [&](std::size_t from, std::size_t to) -> double {
        // walk from the minimum towards a peak until the half level is reached
        const int step = to > from ? 1 : -1;
        for (std::size_t i = from; i != to; i = static_cast<std::size_t>(static_cast<long>(i) + step)) {
            const std::size_t j = static_cast<std::size_t>(static_cast<long>(i) + step);
            if (ys[j] >= r.half_level) {
                const double t = (r.half_level - ys[i]) / (ys[j] - ys[i]);
                return xs[i] + t * (xs[j] - xs[i]);
            }
        }
        throw NoDipError("flanking peak lies below the half-depth level");
    };
    r.width_over_omega_m = crossing(im, ir) - crossing(im, il);
    return r;
}

inline DipReport dip_metrics(const SweepTable& table) {
    std::vector<double> xs;
    xs.reserve(table.rows.size());
    for (const auto& row : table.rows) xs.push_back(row.x);
    return dip_metrics(xs, table.totals());
}

// ---------------------------------------------------------------------------
// Scenario comparisons

inline ParameterSet with_scenario(ParameterSet p, double power_w, double n_photons, double m_correlation,
                                  double temperature_k) {
    p.drive.power_w = power_w;
    p.squeezed.n_photons = n_photons;
    p.squeezed.m_correlation = m_correlation;
    p.bath.temperature_k = temperature_k;
    return p;
}

struct PhaseSensitivityComparison {
    SweepTable squeezed;           // M = sqrt(N(N+1))
    SweepTable phase_insensitive;  // M = 0
    double peak_ratio = 0.0;       // max X(M=0) / max X(M=max)
};

inline PhaseSensitivityComparison compare_phase_sensitivity(const ParameterSet& params, double power_w,
                                                            double n_photons, double temperature_k,
                                                            const Grid& grid, SweepOptions options = {}) {
    PhaseSensitivityComparison c;
    c.squeezed = sweep(with_scenario(params, power_w, n_photons, max_cross_correlation(n_photons), temperature_k),
                       grid, "M = sqrt(N(N+1))", options);
    c.phase_insensitive =
        sweep(with_scenario(params, power_w, n_photons, 0.0, temperature_k), grid, "M = 0", options);
    c.peak_ratio = c.phase_insensitive.max_total() / c.squeezed.max_total();
    return c;
}

struct TemperaturePoint {
    double temperature_k = 0.0;
    DipReport dip;
};

struct TemperatureScan {
    std::vector<TemperaturePoint> points;
    // (w[i+1] - w[i]) / w[i] and (x[i+1] - x[i]) / x[i] for consecutive temperatures
    std::vector<double> width_change;
    std::vector<double> min_change;
};

inline TemperatureScan temperature_scan(const ParameterSet& params, double power_w, double n_photons,
                                        double m_correlation, const std::vector<double>& temperatures_k,
                                        const Grid& grid, SweepOptions options = {}) {
    TemperatureScan scan;
    for (double t : temperatures_k) {
        const auto table = sweep(with_scenario(params, power_w, n_photons, m_correlation, t), grid, {}, options);
        scan.points.push_back({t, dip_metrics(table)});
    }
    for (std::size_t i = 1; i < scan.points.size(); ++i) {
        const auto& a = scan.points[i - 1].dip;
        const auto& b = scan.points[i].dip;
        scan.width_change.push_back((b.width_over_omega_m - a.width_over_omega_m) / a.width_over_omega_m);
        scan.min_change.push_back((b.x_min - a.x_min) / a.x_min);
    }
    return scan;
}

}  // namespace omit
