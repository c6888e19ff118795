// wgm_cli: transmission, correlation and weak-drive sweeps and
// exceptional-point location for the two-scatterer resonator model.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "wgm/lindblad.hpp"
#include "wgm/model.hpp"
#include "wgm/sweep.hpp"

namespace {

struct SharedFlags {
    std::string config;
    std::string output;
    std::string format{"csv"};
    int jobs{0};
    std::string loss;
    int nmax{0};
    std::vector<std::string> overrides;
};

void add_shared(CLI::App* sub, SharedFlags& f, bool config_required) {
    auto* c = sub->add_option("--config", f.config, "key = value config file");
    if (config_required) c->required();
    sub->add_option("--output", f.output, "output path (default stdout)");
    sub->add_option("--format", f.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--jobs", f.jobs, "worker threads (WGM_JOBS overrides)");
    sub->add_option("--loss-convention", f.loss, "include_ex|paper_literal")
        ->check(CLI::IsMember({"include_ex", "paper_literal"}));
    sub->add_option("--nmax", f.nmax, "truncation cap N_max per mode");
    sub->add_option("--set", f.overrides, "extra config line key=value (repeatable)");
}

wgm::SweepSpec build_spec(const SharedFlags& f, wgm::Engine engine, const std::vector<std::string>& default_obs,
                          bool engine_from_config) {
    wgm::SweepSpec spec{wgm::ModelParams::reference(), {}, default_obs, engine, {}, {}};
    std::stringstream text;
    if (!f.config.empty()) {
        std::ifstream in(f.config);
        if (!in) throw wgm::ConfigError("cannot open config file '" + f.config + "'");
        text << in.rdbuf() << '\n';
    }
    for (const auto& o : f.overrides) text << o << '\n';
    spec = wgm::parse_config(text, spec);
    if (!engine_from_config) spec.engine = engine;
    if (!f.loss.empty()) spec.base.loss = wgm::loss_convention_from_string(f.loss);
    if (f.nmax > 0) spec.truncation.n_cap = f.nmax;
    return spec;
}

void write_output(const SharedFlags& f, const std::string& text) {
    if (f.output.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(f.output);
    if (!out) throw wgm::Error("cannot open '" + f.output + "' for writing");
    out << text;
    if (!out.flush()) throw wgm::Error("write to '" + f.output + "' failed");
}

int run_sweep_command(const SharedFlags& f, const wgm::SweepSpec& spec) {
    spec.validate();
    if (spec.engine == wgm::Engine::Lindblad) {
        const double nh = wgm::relative_nonhermiticity(wgm::build_hamiltonian(spec.base.normalized(), 3));
        if (spec.lindblad.form == wgm::CommutatorForm::Verbatim && nh > 1e-10) {
            std::cerr << "warning: Hamiltonian at the base point is non-Hermitian (relative " << nh
                      << "); the commutator uses it verbatim\n";
        }
    }
    const wgm::SweepResult result = wgm::run_sweep(spec, wgm::resolve_jobs(f.jobs));
    std::ostringstream out;
    wgm::emit(result, wgm::format_from_string(f.format), out);
    write_output(f, out.str());
    for (std::size_t k = 0; k < result.rows.size(); ++k) {
        if (!result.rows[k].error.empty()) {
            std::cerr << "point " << k << " failed: " << result.rows[k].error << '\n';
        }
    }
    if (!result.acceptable()) {
        std::cerr << result.failures() << " of " << result.rows.size() << " points failed\n";
        return 2;
    }
    return 0;
}

int run_ep_locate(const SharedFlags& f, const std::string& l_list) {
    const wgm::SweepSpec spec = build_spec(f, wgm::Engine::MeanField, {}, false);
    std::vector<int> ls;
    for (const auto& s : wgm::split_list(l_list)) ls.push_back(std::stoi(s));
    const auto angles = wgm::exceptional_angles(spec.base.normalized(), ls);
    std::ostringstream out;
    if (f.format == "json") {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& a : angles) {
            j.push_back({{"l", a.l},
                         {"vanishing", a.vanishing == wgm::VanishingCoupling::J1 ? "J1" : "J2"},
                         {"beta", a.beta},
                         {"coupling_abs", a.coupling_abs},
                         {"splitting_abs", a.splitting_abs}});
        }
        out << j.dump(2) << '\n';
    } else {
        out << "l,vanishing,beta,coupling_abs,splitting_abs\n";
        for (const auto& a : angles) {
            out << a.l << ',' << (a.vanishing == wgm::VanishingCoupling::J1 ? "J1" : "J2") << ','
                << wgm::format_double(a.beta) << ',' << wgm::format_double(a.coupling_abs) << ','
                << wgm::format_double(a.splitting_abs) << '\n';
        }
    }
    write_output(f, out.str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-scatterer whispering-gallery resonator: transmission, photon statistics, EP location"};
    app.require_subcommand(1);

    SharedFlags tf, cf, wf, ef, sf;
    std::string l_list = "1,3";
    auto* t = app.add_subcommand("transmission", "mean-field forward transmission");
    add_shared(t, tf, false);
    auto* c = app.add_subcommand("correlation", "master-equation g2, g3 and populations");
    add_shared(c, cf, false);
    auto* w = app.add_subcommand("weakdrive", "weak-drive amplitude estimate of g2");
    add_shared(w, wf, false);
    auto* e = app.add_subcommand("ep-locate", "exceptional-point scatterer angles");
    add_shared(e, ef, false);
    e->add_option("--l", l_list, "comma-separated odd integers l");
    auto* s = app.add_subcommand("sweep", "run the job described by a config file");
    add_shared(s, sf, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (t->parsed()) {
            return run_sweep_command(tf, build_spec(tf, wgm::Engine::MeanField, {"T"}, false));
        }
        if (c->parsed()) {
            return run_sweep_command(cf, build_spec(cf, wgm::Engine::Lindblad, {"g2", "g3", "n_A", "n_C"}, false));
        }
        if (w->parsed()) {
            return run_sweep_command(wf, build_spec(wf, wgm::Engine::WeakDrive, {"g2"}, false));
        }
        if (e->parsed()) return run_ep_locate(ef, l_list);
        if (s->parsed()) {
            return run_sweep_command(sf, build_spec(sf, wgm::Engine::MeanField, {}, true));
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 1;
    }
    return 1;
}
