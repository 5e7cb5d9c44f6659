// Batch front-end: parses a structured config file and dispatches to the
// solve / sweep / mc / efficiency commands.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gratlab/config.hpp"
#include "gratlab/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"gratlab - quasi-periodic Helmholtz grating scattering laboratory"};
    std::string config_path;
    std::string out_dir;
    int threads = 1;
    std::uint64_t seed = 0;
    bool seed_set = false;

    app.add_option("--config", config_path, "run configuration file (JSON)")->required();
    app.add_option("--out-dir", out_dir, "output directory (overrides config)");
    app.add_option("--threads", threads, "worker count for sweep/mc")->check(CLI::PositiveNumber);
    app.add_option_function<std::uint64_t>(
           "--seed", [&](std::uint64_t s) { seed = s; seed_set = true; },
           "master seed (overrides config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    gratlab::RunConfig cfg;
    try {
        cfg = gratlab::parse_config(config_path);
    } catch (const gratlab::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    gratlab::RunOptions opts;
    opts.out_dir = out_dir;
    opts.threads = threads;
    if (seed_set) opts.seed = seed;
    return gratlab::run(cfg, opts);
}
