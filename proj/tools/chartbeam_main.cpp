// SPDX-License-Identifier: Apache-2.0
//
// chartbeam command line front end: scenario synthesis, offline
// training, tracking runs, configuration sweeps and timeliness drift
// experiments. Exit codes: 0 success, 1 validation error, 2 runtime
// failure.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chartbeam/harness.hpp"

namespace {

chartbeam::RunConfig resolve_config(const std::string& config_path,
                                    std::optional<std::uint64_t> seed_override,
                                    std::optional<std::string> out_override) {
    chartbeam::Config raw =
        config_path.empty() ? chartbeam::Config{} : chartbeam::Config::from_file(config_path);
    if (seed_override) raw.set("scenario.seed", std::to_string(*seed_override));
    if (out_override) raw.set("run.out_dir", *out_override);
    return chartbeam::RunConfig::from_config(raw);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"channel-charting based beam tracking harness"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    app.add_option("--config", config_path, "key=value configuration file")->expected(1);
    app.add_option("--seed", seed, "override scenario.seed");
    app.add_option("--out", out_dir, "override run.out_dir");

    auto* synth = app.add_subcommand("synth", "generate trajectory and feature files");
    auto* train = app.add_subcommand("train", "train the chart and build the mapping tables");
    std::vector<std::string> feature_files;
    train->add_option("features", feature_files, "feature CSV files (one per path)");

    auto* track = app.add_subcommand("track", "run the tracker and baselines");
    std::string model_path, table_tx_path, table_rx_path, selection_path;
    std::vector<std::string> trajectory_files;
    track->add_option("--model", model_path, "model file")->required();
    track->add_option("--table-tx", table_tx_path, "transmit-side table file")->required();
    track->add_option("--table-rx", table_rx_path, "receive-side table file")->required();
    track->add_option("--select", selection_path, "selection radii file")->required();
    track->add_option("trajectories", trajectory_files, "trajectory files");

    auto* sweep = app.add_subcommand("sweep", "input-dim x hidden-width error sweep");
    auto* timeliness = app.add_subcommand("timeliness", "error drift without retraining");
    auto* defaults = app.add_subcommand("defaults", "print every configuration default");

    CLI11_PARSE(app, argc, argv);

    try {
        if (defaults->parsed()) {
            std::cout << chartbeam::defaults_text();
            return 0;
        }
        const chartbeam::RunConfig config = resolve_config(config_path, seed, out_dir);
        if (synth->parsed()) {
            chartbeam::cmd_synth(config);
        } else if (train->parsed()) {
            chartbeam::cmd_train(config, feature_files);
        } else if (track->parsed()) {
            chartbeam::cmd_track(config, model_path, table_tx_path, table_rx_path, selection_path,
                                 trajectory_files);
        } else if (sweep->parsed()) {
            chartbeam::cmd_sweep(config);
        } else if (timeliness->parsed()) {
            chartbeam::cmd_timeliness(config);
        }
    } catch (const std::invalid_argument& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    } catch (const std::exception& err) {
        std::cerr << "runtime error: " << err.what() << "\n";
        return 2;
    }
    return 0;
}
