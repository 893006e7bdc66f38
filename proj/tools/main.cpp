// Experiment CLI: run / tune / spectrum / sweep over flat key=value configs.
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rbffd/experiment.hpp"

namespace {

// --key=value overrides on top of the (optional) config file.
void apply_overrides(rbffd::ExperimentConfig& cfg, const std::vector<std::string>& extras) {
    for (const auto& arg : extras) {
        if (arg.rfind("--", 0) != 0)
            throw rbffd::ConfigError(arg + ": expected --key=value override");
        const auto eq = arg.find('=');
        if (eq == std::string::npos)
            throw rbffd::ConfigError(arg + ": expected --key=value override");
        cfg.set(arg.substr(2, eq - 2), arg.substr(eq + 1), arg);
    }
}

struct SubArgs {
    std::string config_path;
    std::string out_dir = "out";
};

void add_common(CLI::App* sub, SubArgs& args) {
    sub->add_option("config", args.config_path, "flat key=value config file");
    sub->add_option("-o,--out", args.out_dir, "output directory")->capture_default_str();
    sub->allow_extras();
}

rbffd::ExperimentConfig load(const SubArgs& args, CLI::App* sub) {
    rbffd::ExperimentConfig cfg;
    if (!args.config_path.empty()) cfg = rbffd::parse_config_file(args.config_path);
    apply_overrides(cfg, sub->remaining());
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"RBF-FD transport solver with spectral-radius-tuned hyperviscosity"};
    app.require_subcommand(1);

    SubArgs run_args, tune_args, spectrum_args, sweep_args;
    CLI::App* run = app.add_subcommand("run", "run one simulation, write metrics and snapshots");
    add_common(run, run_args);
    CLI::App* tune = app.add_subcommand("tune", "find c_opt for the configured problem");
    add_common(tune, tune_args);
    CLI::App* spectrum = app.add_subcommand("spectrum", "dump dense operator spectra");
    add_common(spectrum, spectrum_args);
    CLI::App* sweep = app.add_subcommand("sweep", "run the Cartesian product of sweep.* axes");
    add_common(sweep, sweep_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return rbffd::cmd_run(load(run_args, run), run_args.out_dir, std::cout);
        if (tune->parsed())
            return rbffd::cmd_tune(load(tune_args, tune), tune_args.out_dir, std::cout);
        if (spectrum->parsed())
            return rbffd::cmd_spectrum(load(spectrum_args, spectrum), spectrum_args.out_dir,
                                       std::cout);
        if (sweep->parsed())
            return rbffd::cmd_sweep(load(sweep_args, sweep), sweep_args.out_dir, std::cout);
    } catch (const rbffd::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return rbffd::kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return rbffd::kExitConfigError;
    }
    return rbffd::kExitOk;
}
