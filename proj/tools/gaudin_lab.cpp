// gaudin-lab: simulate Gaudin and spin Calogero-Moser flows from a JSON
// config, or run the built-in verification suites.

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "gaudin_lab/lab_cli.hpp"

int main(int argc, char **argv)
{
    namespace cli = gaudin_lab::cli;
    CLI::App app{"Numerical laboratory for rational and elliptic Gaudin models"};
    app.require_subcommand(1);

    std::string config_path, sim_out;
    auto *sim = app.add_subcommand("simulate", "Integrate the flows described by a config file");
    sim->add_option("config", config_path, "JSON run config")->required();
    sim->add_option("--out", sim_out, "Directory for relative output paths");

    std::string suite, verify_out;
    std::uint64_t seed = gaudin_lab::verify::default_seed;
    auto *ver = app.add_subcommand("verify", "Run a verification suite");
    ver->add_option("suite", suite, "weierstrass, rational, elliptic, univar, multiform, gradients or all")->required();
    ver->add_option("--seed", seed, "Seed for randomised checks");
    ver->add_option("--out", verify_out, "Directory for the JSON report (stdout when absent)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? cli::exit_ok : cli::exit_config_error;
    }
    if (sim->parsed()) {
        return cli::cmd_simulate(config_path, sim_out, std::cout, std::cerr);
    }
    return cli::cmd_verify(suite, seed, verify_out, std::cout, std::cerr);
}
