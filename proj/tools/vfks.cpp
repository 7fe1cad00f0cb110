#include "vfks/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

struct CommonFlags {
    std::string config_path;
    std::string output_dir;
    bool paper_fidelity = false;
};

void add_common(CLI::App* sub, CommonFlags& flags)
{
    sub->add_option("--config", flags.config_path, "key=value config file");
    sub->add_option("--output", flags.output_dir, "output directory");
    sub->add_flag("--paper-fidelity", flags.paper_fidelity, "explicit c update, dt=1e-6, 100 cells");
}

vfks::cli::RunConfig load(const CommonFlags& flags)
{
    vfks::cli::RunConfig config;
    if (!flags.config_path.empty()) config = vfks::cli::parse_config_file(flags.config_path);
    if (flags.paper_fidelity) config.apply_paper_fidelity();
    if (!flags.output_dir.empty()) config.output_dir = flags.output_dir;
    return config;
}

}  // namespace

int main(int argc, char** argv)
{
    using namespace vfks::cli;

    CLI::App app{"Volume-filling Keller-Segel numerical lab"};
    app.require_subcommand(1);
    CommonFlags flags;

    auto* simulate = app.add_subcommand("simulate", "run the finite-volume scheme");
    add_common(simulate, flags);

    auto* steady = app.add_subcommand("steady", "construct an increasing steady state");
    add_common(steady, flags);
    std::optional<double> steady_m, steady_chi;
    SteadyOptions steady_options;
    steady->add_option("--m", steady_m, "diffusion exponent (overrides config)");
    steady->add_option("--chi", steady_chi, "chemotactic sensitivity (overrides config)");
    steady->add_option("--scan-points", steady_options.scan_points, "lambda scan resolution");
    steady->add_flag("--scan-to-zero", steady_options.scan_to_zero, "scan lambda up to 0 instead of the lemma bound");

    std::vector<double> tau_values{1.0, 0.1, 0.01};
    auto* sweep_tau = app.add_subcommand("sweep-tau", "distance to the parabolic-elliptic limit");
    add_common(sweep_tau, flags);
    sweep_tau->add_option("--values", tau_values, "decreasing tau values");

    std::vector<double> eta_values{5.0, 0.5, 0.05};
    auto* sweep_eta = app.add_subcommand("sweep-eta", "distance to the vanishing-diffusion limit");
    add_common(sweep_eta, flags);
    sweep_eta->add_option("--values", eta_values, "decreasing eta values");

    auto* decay = app.add_subcommand("decay", "fit exponential decay towards the constant state");
    add_common(decay, flags);
    DecayOptions decay_options;
    decay->add_option("--fit-start", decay_options.fit_start, "start of the fit window");
    decay->add_option("--fit-end", decay_options.fit_end, "end of the fit window (default t_end)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kSuccess : kConfigError;
    }

    RunConfig config;
    try {
        config = load(flags);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    }

    if (simulate->parsed()) return cmd_simulate(config, std::cout, std::cerr);
    if (steady->parsed()) {
        if (steady_m) config.m = *steady_m;
        if (steady_chi) config.chi = *steady_chi;
        return cmd_steady(config, steady_options, std::cout, std::cerr);
    }
    if (sweep_tau->parsed()) return cmd_sweep(vfks::LimitKind::tau_zero, config, tau_values, std::cout, std::cerr);
    if (sweep_eta->parsed()) return cmd_sweep(vfks::LimitKind::eta_zero, config, eta_values, std::cout, std::cerr);
    return cmd_decay(config, decay_options, std::cout, std::cerr);
}
