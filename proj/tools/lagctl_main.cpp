#include "lagctl/config.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Reduction, vibrational synthesis and verification for constraint-controlled Lagrangian systems"};
    app.require_subcommand(1, 1);

    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    for (const char* name : {"reduce", "synthesize", "simulate", "sweep", "check", "shoot"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config, "run configuration file")->required();
        sub->add_option("--out", out, "output directory")->required();
        sub->add_option("--seed", seed, "overrides the configured sampling seed");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : lagctl::kExitValidation;
    }
    const auto task = lagctl::parse_task(app.get_subcommands().front()->get_name());
    return lagctl::run(*task, config, out, seed, std::cerr);
}
