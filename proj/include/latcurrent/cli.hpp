#pragma once

// Command-line front end. Subcommands: current, sweep, lyapunov, integral,
// spectrum, validate. A JSON config file supplies defaults; flags override.
// Exit codes: 0 ok, 1 validation-suite failure, 2 bad input, 3 numerical
// failure. Errors go to stderr as single-line JSON.

#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "latcurrent/experiments.hpp"

namespace latcurrent {

namespace cli_detail {

struct RawOptions {
    std::string config_path;
    std::string method;
    std::string out;
    std::string format;
    std::string potential;
    std::vector<int> dims;
    std::vector<long> sweep_ns;
    std::uint64_t seed = 0;
    double tol = 0.0;
    int realizations = 0;
    double alpha_in_l = 0, alpha_out_l = 0, alpha_in_r = 0, alpha_out_r = 0, beta = 0;
    double emin = 0, emax = 0, spacing = 0;
    long chain_length = 0;
    int samples = 0;
};

inline void add_common_options(CLI::App* sub, RawOptions& o) {
    sub->add_option("--config", o.config_path, "JSON config file; flags override its fields");
    sub->add_option("--seed", o.seed, "base seed for every derived stream");
    sub->add_option("--method", o.method, "linv|ode|energy_integral|closed_form");
    sub->add_option("--out", o.out, "output path (default: stdout)");
    sub->add_option("--format", o.format, "csv|jsonl");
    sub->add_option("--tol", o.tol, "method tolerance");
    sub->add_option("--realizations", o.realizations, "disorder realizations per point");
    sub->add_option("--dims", o.dims, "lattice extents, transport axis first")
        ->expected(-1);
    sub->add_option("--alpha-in-l", o.alpha_in_l, "injection rate at the left face");
    sub->add_option("--alpha-out-l", o.alpha_out_l, "extraction rate at the left face");
    sub->add_option("--alpha-in-r", o.alpha_in_r, "injection rate at the right face");
    sub->add_option("--alpha-out-r", o.alpha_out_r, "extraction rate at the right face");
    sub->add_option("--beta", o.beta, "dephasing rate");
    sub->add_option("--potential", o.potential,
                    "potential spec: JSON object or the shorthand 'zero'");
}

inline PotentialSpec parse_potential(const std::string& text) {
    if (text == "zero") return PotentialSpec::zero();
    return potential_from_json(nlohmann::json::parse(text));
}

inline bool given(const CLI::App* sub, const std::string& name) {
    const CLI::Option* opt = sub->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
}

inline ExperimentConfig build_config(const CLI::App* sub, const RawOptions& o) {
    ExperimentConfig cfg;
    if (!o.config_path.empty()) cfg = ExperimentConfig::from_file(o.config_path);
    if (given(sub, "--seed")) cfg.seed = o.seed;
    if (given(sub, "--method")) cfg.method = method_from_name(o.method);
    if (given(sub, "--out")) cfg.out_path = o.out;
    if (given(sub, "--format")) cfg.format = o.format;
    if (given(sub, "--tol")) cfg.tol = o.tol;
    if (given(sub, "--realizations")) cfg.realizations = o.realizations;
    if (given(sub, "--dims")) cfg.dims = o.dims;
    if (given(sub, "--alpha-in-l")) cfg.couplings.alpha_in_l = o.alpha_in_l;
    if (given(sub, "--alpha-out-l")) cfg.couplings.alpha_out_l = o.alpha_out_l;
    if (given(sub, "--alpha-in-r")) cfg.couplings.alpha_in_r = o.alpha_in_r;
    if (given(sub, "--alpha-out-r")) cfg.couplings.alpha_out_r = o.alpha_out_r;
    if (given(sub, "--beta")) cfg.couplings.beta = o.beta;
    if (given(sub, "--potential")) cfg.potential = parse_potential(o.potential);
    if (given(sub, "--ns")) cfg.sweep_ns = o.sweep_ns;
    if (given(sub, "--emin")) cfg.grid_min = o.emin;
    if (given(sub, "--emax")) cfg.grid_max = o.emax;
    if (given(sub, "--spacing")) cfg.grid_spacing = o.spacing;
    if (given(sub, "--chain-length")) cfg.chain_length = o.chain_length;
    if (given(sub, "--samples")) cfg.samples = o.samples;
    return cfg;
}

struct OstreamHolder {
    std::ofstream file;
    std::ostream* stream = &std::cout;

    explicit OstreamHolder(const std::string& path) {
        if (!path.empty()) {
            file.open(path);
            if (!file) throw ValidationError("cannot open output file: " + path);
            stream = &file;
        }
    }
};

}  // namespace cli_detail

inline int run_cli(std::vector<std::string> args) {
    using cli_detail::RawOptions;

    CLI::App app{"stationary currents of the boundary-driven lattice conduction model"};
    app.require_subcommand(1);

    RawOptions o;
    bool perturb_spectrum = false;

    CLI::App* current = app.add_subcommand("current", "stationary current of one configuration");
    CLI::App* sweep = app.add_subcommand("sweep", "current over a list of lengths, with decay fits");
    sweep->add_option("--ns", o.sweep_ns, "transport lengths, strictly increasing")->expected(-1);
    CLI::App* lyap = app.add_subcommand("lyapunov", "Lyapunov exponent scan over an energy grid");
    lyap->add_option("--emin", o.emin, "grid lower edge (default: -(C+1))");
    lyap->add_option("--emax", o.emax, "grid upper edge (default: C+1)");
    lyap->add_option("--spacing", o.spacing, "grid spacing (default 0.01)");
    lyap->add_option("--chain-length", o.chain_length, "transfer-product length");
    lyap->add_option("--samples", o.samples, "realizations per energy");
    CLI::App* integral =
        app.add_subcommand("integral", "noiseless current via the energy integral");
    CLI::App* spectrum = app.add_subcommand("spectrum", "eigenvalues of the vectorized generator");
    CLI::App* validate = app.add_subcommand("validate", "run the cross-method oracle suite");
    validate->add_flag("--inject-spectrum-defect", perturb_spectrum,
                       "test hook: deliberately perturb the spectrum check")
        ->group("");  // hidden

    for (CLI::App* sub : {current, sweep, lyap, integral, spectrum, validate})
        cli_detail::add_common_options(sub, o);

    std::reverse(args.begin(), args.end());  // CLI11 consumes reversed argv
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << nlohmann::json{{"error", "bad_arguments"}, {"what", e.what()}}.dump()
                  << std::endl;
        return 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    try {
        const ExperimentConfig cfg = cli_detail::build_config(sub, o);
        if (sub == current || sub == integral) {
            ExperimentConfig run = cfg;
            if (sub == integral) run.method = Method::EnergyIntegral;
            run.validate_common();
            RecordWriter writer(run.out_path, run.format, run.to_json());
            cmd_current(run, &writer);
            return 0;
        }
        if (sub == sweep) {
            cfg.validate_sweep();
            RecordWriter writer(cfg.out_path, cfg.format, cfg.to_json());
            cmd_sweep(cfg, &writer);
            return 0;
        }
        if (sub == lyap) {
            cli_detail::OstreamHolder out(cfg.out_path);
            cmd_lyapunov(cfg, nullptr, out.stream);
            return 0;
        }
        if (sub == spectrum) {
            cli_detail::OstreamHolder out(cfg.out_path);
            cmd_spectrum(cfg, out.stream);
            return 0;
        }
        // validate
        ValidationOptions vopts;
        vopts.perturb_spectrum = perturb_spectrum;
        if (cli_detail::given(sub, "--tol")) vopts.ode_linv_tol = cfg.tol;
        cli_detail::OstreamHolder out(cfg.out_path);
        return cmd_validate(vopts, out.stream);
    } catch (const ValidationError& e) {
        std::cerr << nlohmann::json{{"error", "validation"}, {"what", e.what()}}.dump()
                  << std::endl;
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << nlohmann::json{{"error", "numerical"}, {"what", e.what()}}.dump()
                  << std::endl;
        return 3;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << nlohmann::json{{"error", "validation"}, {"what", e.what()}}.dump()
                  << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << nlohmann::json{{"error", "internal"}, {"what", e.what()}}.dump()
                  << std::endl;
        return 3;
    }
}

}  // namespace latcurrent
