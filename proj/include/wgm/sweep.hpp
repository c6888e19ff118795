// sweep.hpp: sweep specification, config ingestion, parallel grid
// evaluation and CSV/JSON emission.

#pragma once

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <system_error>
#include <thread>
#include <vector>

#include "wgm/errors.hpp"
#include "wgm/lindblad.hpp"
#include "wgm/meanfield.hpp"
#include "wgm/model.hpp"
#include "wgm/weak_drive.hpp"

namespace wgm {

enum class Engine { MeanField, Lindblad, WeakDrive };

inline std::string to_string(Engine e) {
    switch (e) {
        case Engine::MeanField: return "mean_field";
        case Engine::Lindblad: return "lindblad";
        case Engine::WeakDrive: return "weak_drive";
    }
    return "?";
}

inline Engine engine_from_string(const std::string& s) {
    if (s == "mean_field" || s == "meanfield" || s == "MeanField") return Engine::MeanField;
    if (s == "lindblad" || s == "Lindblad") return Engine::Lindblad;
    if (s == "weak_drive" || s == "weakdrive" || s == "WeakDrive") return Engine::WeakDrive;
    throw ConfigError("unknown engine '" + s + "' (expected mean_field|lindblad|weak_drive)");
}

inline const std::vector<std::string>& known_observables() {
    static const std::vector<std::string> names = {"T", "eigenvalues", "g2", "g2_weak", "g3", "n_A", "n_C"};
    return names;
}

// Columns an observable expands to; complex quantities get _re/_im pairs.
inline std::vector<std::string> observable_columns(const std::string& name) {
    if (name == "eigenvalues") {
        return {"eigenvalues_plus_re", "eigenvalues_plus_im", "eigenvalues_minus_re", "eigenvalues_minus_im"};
    }
    return {name};
}

inline bool engine_supports(Engine e, const std::string& obs) {
    if (obs == "eigenvalues" || obs == "g2_weak") return true;
    switch (e) {
        case Engine::MeanField: return obs == "T" || obs == "n_C" || obs == "n_A";
        case Engine::Lindblad: return obs == "g2" || obs == "g3" || obs == "n_C" || obs == "n_A";
        case Engine::WeakDrive: return obs == "g2" || obs == "n_C" || obs == "n_A";
    }
    return false;
}

// ---------------------------------------------------------------- parameters

inline const std::vector<std::string>& sweepable_parameters() {
    static const std::vector<std::string> names = {
        "beta", "delta", "delta_c", "kerr", "drive", "drive_phase", "eps1_re", "eps1_im",
        "eps2_re", "eps2_im", "gamma_in", "gamma_ex", "m"};
    return names;
}

inline void set_parameter(ModelParams& p, const std::string& name, double v) {
    if (name == "beta") p.beta = v;
    else if (name == "delta") p.delta = v;
    else if (name == "delta_c") p.set_cavity_detuning(v);
    else if (name == "kerr") p.kerr = v;
    else if (name == "drive") p.drive = v;
    else if (name == "drive_phase") p.drive_phase = v;
    else if (name == "eps1_re") p.eps1.real(v);
    else if (name == "eps1_im") p.eps1.imag(v);
    else if (name == "eps2_re") p.eps2.real(v);
    else if (name == "eps2_im") p.eps2.imag(v);
    else if (name == "gamma_in") p.gamma_in = v;
    else if (name == "gamma_ex") p.gamma_ex = v;
    else if (name == "m") {
        if (v != std::round(v)) throw ConfigError("parameter m must be an integer");
        p.m = static_cast<int>(v);
    } else {
        throw ConfigError("unknown model parameter '" + name + "'");
    }
}

// Accepts plain numbers and simple multiples of pi: "pi", "pi/8", "3*pi/16", "-pi/4".
inline double parse_number(const std::string& raw) {
    std::string s;
    for (char c : raw) {
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    }
    if (s.empty()) throw ConfigError("empty numeric value");
    auto plain = [&](const std::string& t) {
        double v = 0.0;
        const auto* first = t.data();
        const auto* last = t.data() + t.size();
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last) throw ConfigError("cannot parse number '" + raw + "'");
        return v;
    };
    const auto pos = s.find("pi");
    if (pos == std::string::npos) return plain(s);
    double coef = 1.0;
    std::string head = s.substr(0, pos);
    if (head == "-") coef = -1.0;
    else if (head == "+" || head.empty()) coef = 1.0;
    else {
        if (head.back() == '*') head.pop_back();
        coef = plain(head);
    }
    double den = 1.0;
    const std::string tail = s.substr(pos + 2);
    if (!tail.empty()) {
        if (tail.front() != '/') throw ConfigError("cannot parse number '" + raw + "'");
        den = plain(tail.substr(1));
    }
    return coef * std::numbers::pi / den;
}

// ---------------------------------------------------------------- spec

struct AxisSpec {
    std::string name;
    double start{0.0};
    double stop{0.0};
    int count{2};

    // Evenly spaced, endpoints included; identical endpoints collapse to one point.
    std::vector<double> values() const {
        if (start == stop) return {start};
        std::vector<double> v(static_cast<std::size_t>(count));
        for (int k = 0; k < count; ++k) {
            v[static_cast<std::size_t>(k)] = k == count - 1 ? stop : start + (stop - start) * k / (count - 1);
        }
        return v;
    }
};

struct SweepSpec {
    ModelParams base;
    std::vector<AxisSpec> axes;
    std::vector<std::string> observables;
    Engine engine{Engine::MeanField};
    TruncationOptions truncation;
    LindbladOptions lindblad;

    void validate() const {
        base.validate();
        if (axes.size() > 2) throw ConfigError("at most two swept axes are supported");
        std::set<std::string> seen;
        for (const auto& ax : axes) {
            if (std::find(sweepable_parameters().begin(), sweepable_parameters().end(), ax.name) ==
                sweepable_parameters().end()) {
                throw ConfigError("axis '" + ax.name + "' is not a model parameter");
            }
            if (!seen.insert(ax.name).second) throw ConfigError("axis '" + ax.name + "' given twice");
            if (ax.count < 2) throw ConfigError("axis '" + ax.name + "' needs count >= 2");
        }
        std::set<std::string> obs_seen;
        for (const auto& o : observables) {
            if (std::find(known_observables().begin(), known_observables().end(), o) == known_observables().end()) {
                throw ConfigError("unknown observable '" + o + "'");
            }
            if (!obs_seen.insert(o).second) throw ConfigError("observable '" + o + "' given twice");
            if (!engine_supports(engine, o)) {
                throw ConfigError("observable '" + o + "' is not produced by engine " + to_string(engine));
            }
        }
        if (truncation.n_start < 3) throw ConfigError("truncation.n_start must be >= 3");
        if (truncation.step < 1) throw ConfigError("truncation.step must be >= 1");
        if (!(truncation.tol > 0.0)) throw ConfigError("truncation.tol must be > 0");
    }

    std::vector<std::string> sorted_observables() const {
        std::vector<std::string> v = observables;
        std::sort(v.begin(), v.end());
        return v;
    }

    // Swept axes in config order, observables alphabetically (expanded), then
    // n_levels_used, converged.
    std::vector<std::string> columns() const {
        std::vector<std::string> cols;
        for (const auto& ax : axes) cols.push_back(ax.name);
        for (const auto& o : sorted_observables()) {
            for (auto& c : observable_columns(o)) cols.push_back(std::move(c));
        }
        cols.insert(cols.end(), {"n_levels_used", "converged"});
        return cols;
    }

    std::size_t grid_size() const {
        std::size_t n = 1;
        for (const auto& ax : axes) n *= ax.values().size();
        return n;
    }
};

// ---------------------------------------------------------------- config

inline std::map<std::string, std::string> parse_key_values(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        auto trim = [](std::string s) {
            const auto first = s.find_first_not_of(" \t\r");
            if (first == std::string::npos) return std::string{};
            const auto last = s.find_last_not_of(" \t\r");
            return s.substr(first, last - first + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto first = item.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        const auto last = item.find_last_not_of(" \t");
        out.push_back(item.substr(first, last - first + 1));
    }
    return out;
}

inline bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("cannot parse boolean '" + s + "'");
}

// Applies one dotted key to the spec. Unknown keys are an error.
inline void apply_config_key(SweepSpec& spec, const std::string& key, const std::string& value) {
    if (key.rfind("base.", 0) == 0) {
        const std::string field = key.substr(5);
        if (field == "loss_convention") spec.base.loss = loss_convention_from_string(value);
        else set_parameter(spec.base, field, parse_number(value));
        return;
    }
    if (key.rfind("axes.", 0) == 0) {
        const auto dot = key.find('.', 5);
        if (dot == std::string::npos) throw ConfigError("malformed axis key '" + key + "'");
        const int idx = std::stoi(key.substr(5, dot - 5));
        if (idx < 0 || idx > 1) throw ConfigError("axis index must be 0 or 1 in '" + key + "'");
        if (spec.axes.size() <= static_cast<std::size_t>(idx)) spec.axes.resize(static_cast<std::size_t>(idx) + 1);
        AxisSpec& ax = spec.axes[static_cast<std::size_t>(idx)];
        const std::string field = key.substr(dot + 1);
        if (field == "name") ax.name = value;
        else if (field == "start") ax.start = parse_number(value);
        else if (field == "stop") ax.stop = parse_number(value);
        else if (field == "count") ax.count = std::stoi(value);
        else throw ConfigError("unknown axis field '" + field + "'");
        return;
    }
    if (key == "observables") { spec.observables = split_list(value); return; }
    if (key == "engine") { spec.engine = engine_from_string(value); return; }
    if (key == "truncation.n_start") { spec.truncation.n_start = std::stoi(value); return; }
    if (key == "truncation.step") { spec.truncation.step = std::stoi(value); return; }
    if (key == "truncation.n_cap") { spec.truncation.n_cap = std::stoi(value); return; }
    if (key == "truncation.tol") { spec.truncation.tol = parse_number(value); return; }
    if (key == "lindblad.commutator") {
        if (value == "verbatim") spec.lindblad.form = CommutatorForm::Verbatim;
        else if (value == "hermitian_part") spec.lindblad.form = CommutatorForm::HermitianPart;
        else throw ConfigError("unknown commutator form '" + value + "'");
        return;
    }
    if (key == "lindblad.rescale") { spec.lindblad.rescale_weak_drive = parse_bool(value); return; }
    throw ConfigError("unknown config key '" + key + "'");
}

// Defaults to the reference resonator parameters; config keys override.
inline SweepSpec parse_config(std::istream& in, SweepSpec spec = {ModelParams::reference(), {}, {}, Engine::MeanField, {}, {}}) {
    const auto kv = parse_key_values(in);
    // axes.* keys are applied after the rest so that base values are settled
    for (const auto& [k, v] : kv) {
        if (k.rfind("axes.", 0) != 0) apply_config_key(spec, k, v);
    }
    for (const auto& [k, v] : kv) {
        if (k.rfind("axes.", 0) == 0) apply_config_key(spec, k, v);
    }
    return spec;
}

inline SweepSpec load_config(const std::string& path, SweepSpec defaults = {ModelParams::reference(), {}, {}, Engine::MeanField, {}, {}}) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(f, std::move(defaults));
}

// ---------------------------------------------------------------- result

struct SweepRow {
    std::vector<double> axis_values;
    std::map<std::string, double> values;   // keyed by column name
    int n_levels_used{0};
    bool converged{false};
    int branches{0};
    std::string error;                      // empty when the point succeeded
};

struct SweepResult {
    SweepSpec spec;
    std::vector<SweepRow> rows;

    std::size_t failures() const {
        return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(),
                                                      [](const SweepRow& r) { return !r.error.empty(); }));
    }

    // Nonzero exit only if more than 10% of grid points failed.
    bool acceptable() const { return rows.empty() || 10 * failures() <= rows.size(); }
};

namespace detail {

inline void fill_model_observables(const SweepSpec& spec, const ModelParams& p, SweepRow& row) {
    const auto& obs = spec.observables;
    if (std::find(obs.begin(), obs.end(), "eigenvalues") != obs.end()) {
        const EffectiveModeSpectrum s = effective_spectrum(p);
        row.values["eigenvalues_plus_re"] = s.eigenvalues[0].real();
        row.values["eigenvalues_plus_im"] = s.eigenvalues[0].imag();
        row.values["eigenvalues_minus_re"] = s.eigenvalues[1].real();
        row.values["eigenvalues_minus_im"] = s.eigenvalues[1].imag();
    }
    if (std::find(obs.begin(), obs.end(), "g2_weak") != obs.end()) {
        row.values["g2_weak"] = g2_weak(p);
    }
}

inline void mark_failed(const SweepSpec& spec, SweepRow& row, const std::string& what) {
    for (const auto& o : spec.observables) {
        for (const auto& c : observable_columns(o)) {
            if (!row.values.count(c)) row.values[c] = std::numeric_limits<double>::quiet_NaN();
        }
    }
    row.converged = false;
    row.error = what;
}

inline bool wants(const SweepSpec& spec, const char* name) {
    return std::find(spec.observables.begin(), spec.observables.end(), name) != spec.observables.end();
}

inline void evaluate_point(const SweepSpec& spec, const ModelParams& p, SweepRow& row) {
    switch (spec.engine) {
        case Engine::Lindblad: {
            const SteadyStateResult r = solve_observables(p, spec.truncation, spec.lindblad);
            for (const char* name : {"g2", "g3", "n_C", "n_A"}) {
                if (wants(spec, name)) row.values[name] = r.observables.at(name);
            }
            row.n_levels_used = r.n_levels_used;
            row.converged = r.converged;
            break;
        }
        case Engine::WeakDrive: {
            const AmplitudeSet c = solve_amplitudes(p);
            if (wants(spec, "g2")) row.values["g2"] = g2_weak(c);
            if (wants(spec, "n_C")) row.values["n_C"] = weak_population_c(c);
            if (wants(spec, "n_A")) row.values["n_A"] = weak_population_a(c);
            row.converged = true;
            break;
        }
        case Engine::MeanField:
            throw Error("evaluate_point: mean-field points are evaluated along continuation chains");
    }
    fill_model_observables(spec, p, row);
}

inline void fill_mean_field_point(const SweepSpec& spec, const ModelParams& p, const MeanFieldSolution& sol,
                                  SweepRow& row) {
    row.branches = static_cast<int>(sol.roots.size());
    if (sol.roots.empty()) {
        std::string why = "no mean-field root converged";
        if (!sol.failures.empty()) why += " (" + sol.failures.front().reason + ")";
        throw SolverFailure(why, sol.failures.empty() ? 0.0 : sol.failures.front().residual);
    }
    const MeanFieldState& s = sol.roots.front();
    if (wants(spec, "T")) row.values["T"] = transmission(p, s);
    if (wants(spec, "n_C")) row.values["n_C"] = std::norm(s.alpha_c);
    if (wants(spec, "n_A")) row.values["n_A"] = std::norm(s.alpha_a);
    row.converged = true;
    fill_model_observables(spec, p, row);
}

template <class Task>
void run_pool(std::size_t n_tasks, int jobs, Task&& task) {
    const std::size_t workers = std::min<std::size_t>(n_tasks, static_cast<std::size_t>(std::max(jobs, 1)));
    if (workers <= 1) {
        for (std::size_t k = 0; k < n_tasks; ++k) task(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t k = next.fetch_add(1); k < n_tasks; k = next.fetch_add(1)) task(k);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace detail

// WGM_JOBS, when set to a positive integer, overrides the requested job count.
inline int resolve_jobs(int requested) {
    if (const char* env = std::getenv("WGM_JOBS")) {
        int v = 0;
        const std::string s(env);
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec == std::errc() && ptr == s.data() + s.size() && v > 0) return v;
    }
    if (requested > 0) return requested;
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

// Grid order: axis 0 varies fastest. Mean-field sweeps are continued along
// axis 0, one chain per value of axis 1; chains and all other engines'
// points run on the worker pool and land in rows by grid index.
inline SweepResult run_sweep(const SweepSpec& spec, int jobs = 1) {
    spec.validate();
    std::vector<std::vector<double>> axis_values;
    for (const auto& ax : spec.axes) axis_values.push_back(ax.values());
    const std::size_t n0 = axis_values.empty() ? 1 : axis_values[0].size();
    const std::size_t n1 = axis_values.size() < 2 ? 1 : axis_values[1].size();

    SweepResult result;
    result.spec = spec;
    result.rows.resize(n0 * n1);

    auto point_params = [&](std::size_t i0, std::size_t i1, SweepRow& row) {
        ModelParams p = spec.base;
        row.axis_values.clear();
        if (!axis_values.empty()) {
            set_parameter(p, spec.axes[0].name, axis_values[0][i0]);
            row.axis_values.push_back(axis_values[0][i0]);
        }
        if (axis_values.size() > 1) {
            set_parameter(p, spec.axes[1].name, axis_values[1][i1]);
            row.axis_values.push_back(axis_values[1][i1]);
        }
        return p.normalized();
    };

    if (spec.engine == Engine::MeanField) {
        detail::run_pool(n1, jobs, [&](std::size_t i1) {
            std::vector<MeanFieldState> previous;
            for (std::size_t i0 = 0; i0 < n0; ++i0) {
                SweepRow& row = result.rows[i1 * n0 + i0];
                try {
                    const ModelParams p = point_params(i0, i1, row);
                    p.validate();
                    const MeanFieldSolution sol = nonlinear_steady_state(p, previous);
                    detail::fill_mean_field_point(spec, p, sol, row);
                    previous = sol.roots;
                } catch (const std::exception& e) {
                    detail::mark_failed(spec, row, e.what());
                }
            }
        });
    } else {
        detail::run_pool(n0 * n1, jobs, [&](std::size_t idx) {
            SweepRow& row = result.rows[idx];
            try {
                const ModelParams p = point_params(idx % n0, idx / n0, row);
                p.validate();
                detail::evaluate_point(spec, p, row);
            } catch (const std::exception& e) {
                detail::mark_failed(spec, row, e.what());
            }
        });
    }
    return result;
}

// ---------------------------------------------------------------- emission

enum class OutputFormat { Csv, Json };

inline OutputFormat format_from_string(const std::string& s) {
    if (s == "csv") return OutputFormat::Csv;
    if (s == "json") return OutputFormat::Json;
    throw ConfigError("unknown output format '" + s + "' (expected csv|json)");
}

// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw Error("format_double: conversion failed");
    return std::string(buf, ptr);
}

inline double parse_double(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError("cannot parse CSV value '" + s + "'");
    return v;
}

// Plain table view of a CSV document.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

inline CsvTable to_table(const SweepResult& r) {
    CsvTable t;
    t.header = r.spec.columns();
    if (r.spec.observables.empty()) return t;
    const std::size_t n_axes = r.spec.axes.size();
    for (const auto& row : r.rows) {
        std::vector<double> vals;
        vals.reserve(t.header.size());
        for (std::size_t k = 0; k < n_axes; ++k) vals.push_back(row.axis_values.at(k));
        for (std::size_t c = n_axes; c + 2 < t.header.size(); ++c) {
            const auto it = row.values.find(t.header[c]);
            vals.push_back(it == row.values.end() ? std::numeric_limits<double>::quiet_NaN() : it->second);
        }
        vals.push_back(row.n_levels_used);
        vals.push_back(row.converged ? 1.0 : 0.0);
        t.rows.push_back(std::move(vals));
    }
    return t;
}

inline void write_csv(const CsvTable& t, std::ostream& out) {
    for (std::size_t c = 0; c < t.header.size(); ++c) out << (c ? "," : "") << t.header[c];
    out << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
        out << '\n';
    }
}

inline CsvTable read_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) return t;
    t.header = split_list(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        for (const auto& cell : split_list(line)) row.push_back(parse_double(cell));
        if (row.size() != t.header.size()) throw ConfigError("CSV row width differs from header");
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline nlohmann::json spec_to_json(const SweepSpec& s) {
    nlohmann::json j;
    j["schema_version"] = 1;
    const ModelParams& b = s.base;
    j["base"] = {{"eps1_re", b.eps1.real()}, {"eps1_im", b.eps1.imag()},
                 {"eps2_re", b.eps2.real()}, {"eps2_im", b.eps2.imag()},
                 {"m", b.m}, {"beta", b.beta}, {"kerr", b.kerr}, {"drive", b.drive},
                 {"drive_phase", b.drive_phase}, {"delta", b.delta},
                 {"gamma_in", b.gamma_in}, {"gamma_ex", b.gamma_ex},
                 {"loss_convention", to_string(b.loss)}};
    j["axes"] = nlohmann::json::array();
    for (const auto& ax : s.axes) {
        j["axes"].push_back({{"name", ax.name}, {"start", ax.start}, {"stop", ax.stop}, {"count", ax.count}});
    }
    j["observables"] = s.sorted_observables();
    j["engine"] = to_string(s.engine);
    j["truncation"] = {{"n_start", s.truncation.n_start}, {"step", s.truncation.step},
                       {"n_cap", s.truncation.n_cap}, {"tol", s.truncation.tol}};
    j["lindblad"] = {{"commutator", to_string(s.lindblad.form)}, {"rescale", s.lindblad.rescale_weak_drive}};
    return j;
}

inline nlohmann::json to_json(const SweepResult& r) {
    nlohmann::json j;
    j["spec"] = spec_to_json(r.spec);
    const CsvTable t = to_table(r);
    j["columns"] = t.header;
    j["rows"] = nlohmann::json::array();
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
        nlohmann::json row = nlohmann::json::object();
        for (std::size_t c = 0; c < t.header.size(); ++c) {
            const double v = t.rows[k][c];
            if (std::isnan(v)) row[t.header[c]] = nullptr;
            else row[t.header[c]] = v;
        }
        row["converged"] = r.rows[k].converged;
        row["branches"] = r.rows[k].branches;
        const auto& err = r.rows[k].error;
        row["error"] = err.empty() ? nlohmann::json(nullptr) : nlohmann::json(err);
        j["rows"].push_back(std::move(row));
    }
    return j;
}

inline void emit(const SweepResult& r, OutputFormat fmt, std::ostream& out) {
    if (fmt == OutputFormat::Csv) {
        write_csv(to_table(r), out);
    } else {
        out << to_json(r).dump(2) << '\n';
    }
}

inline void emit(const SweepResult& r, OutputFormat fmt, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error("cannot open '" + path + "' for writing: " + std::system_category().message(errno));
    emit(r, fmt, f);
    f.flush();
    if (!f) throw Error("write to '" + path + "' failed: " + std::system_category().message(errno));
}

} // namespace wgm
