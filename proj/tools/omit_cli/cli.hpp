#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "omit/omit.hpp"
#include "omit/params_json.hpp"
#include "omit/verify.hpp"

namespace omit::cli {

using nlohmann::json;

class UsageError : public Error {
public:
    using Error::Error;
};

// Raw command-line state before resolution against a preset or config file.
struct ScenarioConfig {
    std::string preset;
    std::string config_path;
    std::optional<double> power_mw;
    std::optional<double> n_photons;
    std::string m_mode;  // max | zero | <float>; empty keeps the preset/file value
    std::optional<double> temp_mk;
    std::string delta;  // omega_m | <rad_s> | self-consistent:<bare rad_s>
    std::string gamma;  // <rad_s> | <x>kappa
    std::string grid = "-1:1:1601";
    std::string format;
    std::string out;
    bool allow_unstable = false;
    unsigned threads = 1;
};

inline double parse_double(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw UsageError("cannot parse " + what + " from '" + s + "'");
    }
    if (used != s.size()) throw UsageError("cannot parse " + what + " from '" + s + "'");
    return v;
}

inline Grid parse_grid(const std::string& spec) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
    if (parts.size() != 3) throw UsageError("--grid expects min:max:count, got '" + spec + "'");
    Grid g;
    g.min = parse_double(parts[0], "grid min");
    g.max = parse_double(parts[1], "grid max");
    const double count = parse_double(parts[2], "grid count");
    if (count < 2 || count != std::floor(count)) throw UsageError("grid count must be an integer >= 2");
    g.count = static_cast<std::size_t>(count);
    try {
        g.check();
    } catch (const InvalidParameters& e) {
        throw UsageError(e.what());
    }
    return g;
}

inline ParameterSet resolve_parameters(const ScenarioConfig& c) {
    ParameterSet p;
    if (!c.config_path.empty()) {
        std::ifstream in(c.config_path);
        if (!in) throw UsageError("cannot open config file '" + c.config_path + "'");
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::exception& e) {
            throw UsageError(std::string("config file is not valid JSON: ") + e.what());
        }
        if (!c.preset.empty() && !doc.contains("preset")) doc["preset"] = c.preset;
        p = from_json_document(doc);
    } else if (!c.preset.empty()) {
        p = load_preset(c.preset);
    } else {
        throw UsageError("no parameters: give --preset <name> or --config <file>");
    }

    if (c.power_mw) p.drive.power_w = *c.power_mw * 1e-3;
    if (c.n_photons) {
        p.squeezed.n_photons = *c.n_photons;
        if (c.m_mode.empty()) p.squeezed.m_correlation = max_cross_correlation(p.squeezed.n_photons);
    }
    if (c.m_mode == "max") p.squeezed.m_correlation = max_cross_correlation(p.squeezed.n_photons);
    else if (c.m_mode == "zero") p.squeezed.m_correlation = 0.0;
    else if (!c.m_mode.empty()) p.squeezed.m_correlation = parse_double(c.m_mode, "--m");
    if (c.temp_mk) p.bath.temperature_k = *c.temp_mk * 1e-3;

    const std::string sc_prefix = "self-consistent:";
    if (c.delta == "omega_m") p.drive.detuning = FixedDetuning{p.mechanics.omega_m};
    else if (c.delta.rfind(sc_prefix, 0) == 0)
        p.drive.detuning = SelfConsistentDetuning{parse_double(c.delta.substr(sc_prefix.size()), "bare detuning")};
    else if (!c.delta.empty()) p.drive.detuning = FixedDetuning{parse_double(c.delta, "--delta")};

    if (!c.gamma.empty()) {
        const std::string suffix = "kappa";
        if (c.gamma.size() > suffix.size() && c.gamma.ends_with(suffix))
            p.squeezed.bandwidth = parse_double(c.gamma.substr(0, c.gamma.size() - suffix.size()), "--gamma") * p.cavity.kappa;
        else p.squeezed.bandwidth = parse_double(c.gamma, "--gamma");
    }

    const auto report = validate(p);
    if (!report.ok()) {
        std::string msg = "invalid parameters:";
        for (const auto& v : report.violations) msg += " " + v + ";";
        throw UsageError(msg);
    }
    return p;
}

// ---------------------------------------------------------------------------
// Formatting

inline std::string fmt12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string spectrum_csv(const SweepTable& t) {
    std::string s = "omega_over_omega_m,x_total,x_squeezed,x_vacuum,x_thermal\n";
    for (const auto& r : t.rows) {
        s += fmt12(r.x) + ',' + fmt12(r.point.total) + ',' + fmt12(r.point.squeezed) + ',' +
             fmt12(r.point.vacuum) + ',' + fmt12(r.point.thermal) + '\n';
    }
    return s;
}

inline json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline json stability_json(const StabilityReport& r) {
    json roots = json::array();
    for (const auto& z : r.roots) roots.push_back(complex_json(z));
    json coeffs = json::array();
    for (const auto& c : r.coefficients) coeffs.push_back(complex_json(c));
    return {{"stable", r.stable},       {"margin_rad_s", r.margin},          {"threshold_rad_s", r.threshold},
            {"roots_rad_s", roots},     {"coefficients_ascending", coeffs},  {"max_root_residual", r.max_residual},
            {"max_root_residual_leading", r.max_residual_leading}};
}

inline json steady_json(const SteadyState& s) {
    return {{"c_s", complex_json(s.c_s)}, {"photon_number", s.photon_number()}, {"q_s", s.q_s}, {"p_s", s.p_s},
            {"delta_rad_s", s.delta}};
}

inline json point_json(const SpectrumPoint& p) {
    return {{"x_total", p.total},     {"x_squeezed", p.squeezed}, {"x_vacuum", p.vacuum},
            {"x_thermal", p.thermal}, {"imag_residue", p.imag_residue}};
}

inline json dip_json(const DipReport& d) {
    return {{"x_min", d.x_min},
            {"omega_min_over_omega_m", d.omega_min_over_omega_m},
            {"width_over_omega_m", d.width_over_omega_m},
            {"half_level", d.half_level},
            {"left_peak", {{"x", d.left_peak_x}, {"value", d.left_peak}}},
            {"right_peak", {{"x", d.right_peak_x}, {"value", d.right_peak}}},
            {"width_definition", d.baseline}};
}

inline json spectrum_json(const SweepTable& t) {
    json rows = json::array();
    for (const auto& r : t.rows) {
        json row = point_json(r.point);
        row["omega_over_omega_m"] = r.x;
        rows.push_back(row);
    }
    std::size_t negative_thermal = 0;
    for (const auto& r : t.rows) negative_thermal += r.point.negative_thermal ? 1 : 0;
    return {{"parameters", to_json_document(t.params)},
            {"grid", {{"min", t.grid.min}, {"max", t.grid.max}, {"count", t.grid.count}}},
            {"steady_state", steady_json(t.steady)},
            {"stability", stability_json(t.stability)},
            {"negative_thermal_points", negative_thermal},
            {"rows", rows}};
}

inline void write_output(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << content;
        return;
    }
    const std::filesystem::path target(path);
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("cannot write '" + tmp.string() + "'");
        f << content;
        if (!f.flush()) throw Error("write to '" + tmp.string() + "' failed");
    }
    std::filesystem::rename(tmp, target);
}

// ---------------------------------------------------------------------------
// Subcommands

struct RuntimeFailure : Error {
    using Error::Error;
};

inline SpectrumModel checked_model(const ParameterSet& p, bool allow_unstable) {
    SpectrumModel model(p);
    if (!model.stability().stable && !allow_unstable) {
        throw RuntimeFailure("steady state is unstable (max Im root = " + fmt12(model.stability().margin) +
                             " rad/s); pass --allow-unstable to evaluate anyway");
    }
    return model;
}

inline void echo_parameters(const ParameterSet& p, std::ostream& err) {
    err << "# parameters: " << to_json_document(p).dump() << '\n';
}

inline int run_spectrum(const ScenarioConfig& c, std::ostream& out, std::ostream& err) {
    const auto p = resolve_parameters(c);
    const auto grid = parse_grid(c.grid);
    checked_model(p, c.allow_unstable);
    const auto table = sweep(p, grid, "spectrum", {c.threads});
    const std::string format = c.format.empty() ? "csv" : c.format;
    if (format == "csv") {
        echo_parameters(p, err);
        write_output(c.out, spectrum_csv(table), out);
    } else if (format == "json") {
        write_output(c.out, spectrum_json(table).dump(2) + "\n", out);
    } else {
        throw UsageError("spectrum supports --format csv|json");
    }
    return 0;
}

inline int run_x0(const ScenarioConfig& c, std::ostream& out, std::ostream& err) {
    const auto p = resolve_parameters(c);
    const auto model = checked_model(p, c.allow_unstable);
    const auto pt = model.at_zero();
    const std::string format = c.format.empty() ? "json" : c.format;
    if (format == "json") {
        json j = point_json(pt);
        j.erase("imag_residue");
        j["parameters"] = to_json_document(p);
        j["stable"] = model.stability().stable;
        write_output(c.out, j.dump(2) + "\n", out);
    } else if (format == "text" || format == "csv") {
        echo_parameters(p, err);
        std::string s = format == "csv" ? "x_total,x_squeezed,x_vacuum,x_thermal\n" +
                                              fmt12(pt.total) + ',' + fmt12(pt.squeezed) + ',' +
                                              fmt12(pt.vacuum) + ',' + fmt12(pt.thermal) + '\n'
                                        : "squeezed  " + fmt12(pt.squeezed) + "\nvacuum    " + fmt12(pt.vacuum) +
                                              "\nthermal   " + fmt12(pt.thermal) + "\ntotal     " + fmt12(pt.total) + '\n';
        write_output(c.out, s, out);
    } else {
        throw UsageError("x0 supports --format json|text|csv");
    }
    return 0;
}

inline int run_dip(const ScenarioConfig& c, std::ostream& out, std::ostream&) {
    const auto p = resolve_parameters(c);
    const auto grid = parse_grid(c.grid);
    checked_model(p, c.allow_unstable);
    const auto table = sweep(p, grid, "dip", {c.threads});
    json j = dip_json(dip_metrics(table));
    j["parameters"] = to_json_document(p);
    j["grid"] = {{"min", grid.min}, {"max", grid.max}, {"count", grid.count}};
    j["stable"] = table.stability.stable;
    write_output(c.out, j.dump(2) + "\n", out);
    return 0;
}

inline int run_stability(const ScenarioConfig& c, std::ostream& out, std::ostream& err) {
    const auto p = resolve_parameters(c);
    const auto ss = resolve_steady_state(p);
    const auto report = is_stable(p, ss);
    const std::string format = c.format.empty() ? "json" : c.format;
    if (format == "json") {
        json j = stability_json(report);
        j["parameters"] = to_json_document(p);
        j["steady_state"] = steady_json(ss);
        if (const auto* sc = std::get_if<SelfConsistentDetuning>(&p.drive.detuning)) {
            json roots = json::array();
            for (const auto& r : self_consistent_detunings(p, sc->bare))
                roots.push_back({{"delta_rad_s", r.delta}, {"cubic_residual", r.residual}, {"stable", r.stability.stable}});
            j["self_consistent_roots"] = roots;
        }
        write_output(c.out, j.dump(2) + "\n", out);
    } else if (format == "text") {
        echo_parameters(p, err);
        std::ostringstream s;
        s << "root                 Re (rad/s)            Im (rad/s)\n";
        for (std::size_t i = 0; i < report.roots.size(); ++i) {
            char line[96];
            std::snprintf(line, sizeof line, "%-4zu %24.12g %21.12g\n", i, report.roots[i].real(), report.roots[i].imag());
            s << line;
        }
        s << "margin    " << fmt12(report.margin) << " rad/s\n";
        s << "residual  " << fmt12(report.max_residual) << '\n';
        s << "verdict   " << (report.stable ? "stable" : "unstable") << '\n';
        write_output(c.out, s.str(), out);
    } else {
        throw UsageError("stability supports --format json|text");
    }
    return 0;
}

inline int run_verify(const ScenarioConfig& c, std::ostream& out, std::ostream&) {
    ScenarioConfig base = c;
    if (base.preset.empty() && base.config_path.empty()) base.preset = "weis";
    const auto p = resolve_parameters(base);
    const auto checks = run_verification(p);
    bool all = true;
    json arr = json::array();
    for (const auto& chk : checks) {
        all = all && chk.passed;
        arr.push_back({{"name", chk.name}, {"passed", chk.passed}, {"worst", chk.worst},
                       {"tolerance", chk.tolerance}, {"samples", chk.samples}});
    }
    json j = {{"parameters", to_json_document(p)}, {"checks", arr}, {"all_passed", all}};
    write_output(c.out, j.dump(2) + "\n", out);
    return all ? 0 : 1;
}

inline int run_presets(const ScenarioConfig& c, std::ostream& out, std::ostream&) {
    json arr = json::array();
    for (const auto& name : preset_names()) arr.push_back(to_json_document(load_preset(name)));
    write_output(c.out, arr.dump(2) + "\n", out);
    return 0;
}

// ---------------------------------------------------------------------------

inline void add_scenario_options(CLI::App* sub, ScenarioConfig& c, bool with_grid) {
    sub->add_option("--preset", c.preset, "device preset (weis | aspelmeyer)");
    sub->add_option("--config", c.config_path, "JSON parameter file; flags override its values");
    sub->add_option("--power-mw", c.power_mw, "coupling-field power in mW");
    sub->add_option("--n", c.n_photons, "squeezed-vacuum photon number N");
    sub->add_option("--m", c.m_mode, "cross correlation M: max | zero | <value>");
    sub->add_option("--temp-mk", c.temp_mk, "bath temperature in mK");
    sub->add_option("--delta", c.delta, "effective detuning: omega_m | <rad/s> | self-consistent:<bare rad/s>");
    sub->add_option("--gamma", c.gamma, "squeezed bandwidth: <rad/s> | <x>kappa (default 2kappa)");
    if (with_grid) {
        sub->add_option("--grid", c.grid, "min:max:count in omega/omega_m")->capture_default_str();
        sub->add_option("--threads", c.threads, "worker threads for the sweep")->capture_default_str();
    }
    sub->add_option("--format", c.format, "output format");
    sub->add_option("--out", c.out, "output path (default stdout)");
    sub->add_flag("--allow-unstable", c.allow_unstable, "evaluate even when the steady state is unstable");
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Homodyne spectra of an optomechanical cavity probed by squeezed vacuum"};
    app.require_subcommand(1);
    ScenarioConfig c;

    auto* spectrum = app.add_subcommand("spectrum", "sweep X(omega) and write a plot-ready table");
    auto* x0 = app.add_subcommand("x0", "decompose X at the transparency point omega = 0");
    auto* dip = app.add_subcommand("dip", "locate the transparency dip and measure its width");
    auto* stability = app.add_subcommand("stability", "roots of the characteristic polynomial and verdict");
    auto* verify = app.add_subcommand("verify", "run the oracle and reduction self-checks");
    auto* presets = app.add_subcommand("presets", "list the built-in device presets");
    add_scenario_options(spectrum, c, true);
    add_scenario_options(x0, c, false);
    add_scenario_options(dip, c, true);
    add_scenario_options(stability, c, false);
    add_scenario_options(verify, c, false);
    presets->add_option("--out", c.out, "output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (*spectrum) return run_spectrum(c, out, err);
        if (*x0) return run_x0(c, out, err);
        if (*dip) return run_dip(c, out, err);
        if (*stability) return run_stability(c, out, err);
        if (*verify) return run_verify(c, out, err);
        if (*presets) return run_presets(c, out, err);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const UnknownPreset& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const PoleError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace omit::cli
