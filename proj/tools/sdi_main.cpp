#include <clocale>
#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sdi/runner.hpp"

namespace {

void add_common(CLI::App* cmd, sdi::RunOptions& opt, std::uint64_t& seed, bool& seed_set) {
    cmd->add_option("--config", opt.config_path, "JSON run configuration")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", opt.out_dir, "Output directory")->required();
    cmd->add_option("--threads", opt.threads, "Worker threads (pixel level)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "Random seed override")->each([&seed_set](const std::string&) {
        seed_set = true;
    });
}

}  // namespace

int main(int argc, char** argv) {
    std::setlocale(LC_ALL, "C");

    CLI::App app{"Standardized uni- and multivariate drought indices"};
    app.require_subcommand(1);

    sdi::RunOptions opt;
    std::uint64_t seed = 0;
    bool seed_set = false;

    CLI::App* cmd_si = app.add_subcommand("si", "Univariate standardized indices per variable");
    CLI::App* cmd_smi = app.add_subcommand("smi", "Multivariate standardized indices");
    CLI::App* cmd_analyze = app.add_subcommand("analyze", "Drought analytics over index files");
    add_common(cmd_si, opt, seed, seed_set);
    add_common(cmd_smi, opt, seed, seed_set);
    add_common(cmd_analyze, opt, seed, seed_set);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;  // usage problems count as configuration errors
    }
    if (seed_set) opt.seed = seed;

    try {
        if (cmd_si->parsed()) return sdi::run_si(opt);
        if (cmd_smi->parsed()) return sdi::run_smi(opt);
        return sdi::run_analyze(opt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
