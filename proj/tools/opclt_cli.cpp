// Copyright 2026 The opclt Authors
// SPDX-License-Identifier: Apache-2.0

#include "opclt/experiment.hpp"
#include "opclt/parallel.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

int main(int argc, char** argv)
{
    CLI::App app{"Monte Carlo laboratory for products of random matrix exponentials"};
    app.set_version_flag("--version", std::string(opclt::kVersion));
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run the suites of a config file");
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> suites;
    int workers = opclt::default_workers();
    run->add_option("config", config_path, "Config file (JSON)")->required();
    run->add_option("--seed", seed, "Override master_seed");
    run->add_option("--out", out_dir, "Override output_dir");
    run->add_option("--suites", suites, "Comma-separated suite list");
    run->add_option("--workers", workers, "Worker threads (default: OPCLT_WORKERS or cores)")
        ->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    opclt::ExperimentConfig cfg;
    try {
        cfg = opclt::load_config(config_path);
        if (seed)
            cfg.master_seed = *seed;
        if (out_dir)
            cfg.output_dir = *out_dir;
        if (suites)
            cfg.suites = opclt::parse_suite_list(*suites);
    } catch (const opclt::ConfigError& err) {
        std::cerr << "config error in " << config_path << ":\n";
        for (const auto& p : err.problems())
            std::cerr << "  " << p << '\n';
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 2;
    }

    std::cout << "family " << opclt::to_string(cfg.ens().family()) << ", dim "
              << cfg.ens().dim() << ", rho = " << opclt::format_double(cfg.ens().norm_bound())
              << '\n'
              << "digest " << cfg.digest() << ", workers " << workers << '\n';

    opclt::RunReport report;
    try {
        report = opclt::run(cfg, {workers, true});
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 2;
    }
    for (const auto& s : report.suites) {
        std::cout << s.name << ": " << s.status << " (" << s.seconds << " s)\n";
        for (const auto& c : s.checks)
            if (!c.at("passed").get<bool>())
                std::cout << "  failed " << c.at("name").get<std::string>() << " = "
                          << c.at("value").dump() << ", target " << c.at("target").get<std::string>()
                          << '\n';
        for (const auto& n : s.notes)
            std::cout << "  note: " << n << '\n';
    }
    std::cout << "wrote " << (cfg.output_dir / "summary.json").string() << '\n';
    return report.all_passed() ? 0 : 1;
}
