// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "chartbeam/harness.hpp"
#include "chartbeam/io_util.hpp"

using namespace chartbeam;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int count_lines(const std::string& text) {
    int n = 0;
    for (char c : text) n += c == '\n';
    return n;
}

fs::path fresh_dir(const char* name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

RunConfig tiny_run(const fs::path& out) {
    Config c;
    c.set("run.out_dir", out.string());
    c.set("run.n_paths", "2");
    c.set("run.n_tx", "16");
    c.set("run.n_rx", "16");
    c.set("scenario.n_steps", "50");
    c.set("train.epochs", "4");
    c.set("train.neg_window", "10");
    c.set("train.batch_size", "32");
    c.set("chart.hidden1", "16");
    c.set("keygen.k_res", "20");
    return RunConfig::from_config(c);
}

}  // namespace

TEST_CASE("config parser round trips the defaults and rejects junk") {
    const Config parsed = Config::from_string(defaults_text());
    const RunConfig run = RunConfig::from_config(parsed);
    CHECK(run.scenario.n_steps == 200);
    CHECK(run.train.epochs == 200);
    CHECK(run.keygen.k_res == 100);
    CHECK(std::isnan(run.tracker.snr_threshold_db));

    CHECK_THROWS_AS(Config::from_string("bogus.key = 1"), std::invalid_argument);
    CHECK_THROWS_AS(Config::from_string("run.n_paths 3"), std::invalid_argument);
    CHECK_THROWS_AS(RunConfig::from_config(Config::from_string("run.n_paths = abc")),
                    std::invalid_argument);

    Config bad;
    bad.set("run.n_tx", "32");  // not one of the supported codebook sizes
    CHECK_THROWS_AS(RunConfig::from_config(bad), std::invalid_argument);
}

TEST_CASE("synth is deterministic and emits the documented files") {
    const fs::path out1 = fresh_dir("chartbeam_synth_a");
    const fs::path out2 = fresh_dir("chartbeam_synth_b");
    cmd_synth(tiny_run(out1));
    cmd_synth(tiny_run(out2));

    for (const char* name : {"traj_000.txt", "traj_001.txt", "features_000.csv", "features_001.csv"}) {
        CHECK(slurp(out1 / name) == slurp(out2 / name));
    }
    // Header plus one row per step.
    CHECK(count_lines(slurp(out1 / "features_000.csv")) == 51);

    fs::remove_all(out1);
    fs::remove_all(out2);
}

TEST_CASE("train emits model, tables, selection and a loss history") {
    const fs::path out = fresh_dir("chartbeam_train_out");
    RunConfig run = tiny_run(out);
    cmd_synth(run);
    cmd_train(run, {(out / "features_000.csv").string(), (out / "features_001.csv").string()});

    CHECK(count_lines(slurp(out / "loss_history.csv")) == 1 + run.train.epochs);

    // Reloading the model reproduces encodings exactly.
    const ChartModel model = load_chart_model((out / "model.txt").string());
    std::vector<FeatureVector> features;
    std::vector<BeamPair> truth;
    load_feature_csv((out / "features_000.csv").string(), features, truth);
    const Eigen::MatrixXd x = feature_matrix(features, model.input_mode);
    const ChartModel model2 = load_chart_model((out / "model.txt").string());
    CHECK((chart_dataset(model, x) - chart_dataset(model2, x)).norm() == 0.0);

    // Zero-epoch training still writes a valid (untrained) model.
    RunConfig zero = run;
    zero.train.epochs = 0;
    const fs::path out0 = fresh_dir("chartbeam_train_zero");
    zero.out_dir = out0.string();
    cmd_synth(zero);
    cmd_train(zero, {(out0 / "features_000.csv").string(), (out0 / "features_001.csv").string()});
    CHECK(count_lines(slurp(out0 / "loss_history.csv")) == 1);
    CHECK(fs::exists(out0 / "model.txt"));

    fs::remove_all(out);
    fs::remove_all(out0);
}

TEST_CASE("track emits per-step records plus a recomputable summary") {
    const fs::path out = fresh_dir("chartbeam_track_out");
    RunConfig run = tiny_run(out);
    cmd_synth(run);
    cmd_train(run, {(out / "features_000.csv").string(), (out / "features_001.csv").string()});
    cmd_track(run, (out / "model.txt").string(), (out / "table_tx.txt").string(),
              (out / "table_rx.txt").string(), (out / "selection.txt").string(),
              {(out / "traj_000.txt").string(), (out / "traj_001.txt").string()});

    CHECK(count_lines(slurp(out / "track_000.csv")) == 51);
    CHECK(count_lines(slurp(out / "track_001.csv")) == 51);

    // The summary row for trajectory 0 must match a recomputation from
    // the raw record CSV.
    const TrackRecord rec = load_track_csv((out / "track_000.csv").string());
    const Metrics again = metrics_from_record(rec, 16, 16);
    const std::string summary = slurp(out / "summary.csv");
    std::istringstream rows(summary);
    std::string line;
    bool checked = false;
    while (std::getline(rows, line)) {
        if (line.rfind("tracker,0,", 0) != 0) continue;
        const std::vector<std::string> cols = io::split(line, ',');
        CHECK(std::stol(cols[3]) + std::stol(cols[4]) == again.e_ps());
        CHECK(std::stol(cols[5]) + std::stol(cols[6]) == again.e_pd());
        CHECK(std::stol(cols[7]) == again.n_s);
        checked = true;
    }
    CHECK(checked);

    CHECK_THROWS_AS(cmd_track(run, (out / "missing.txt").string(), (out / "table_tx.txt").string(),
                              (out / "table_rx.txt").string(), (out / "selection.txt").string(),
                              {(out / "traj_000.txt").string()}),
                    std::invalid_argument);
    fs::remove_all(out);
}

TEST_CASE("sweep writes one row per grid point") {
    const fs::path out = fresh_dir("chartbeam_sweep_out");
    RunConfig run = tiny_run(out);
    run.n_paths = 1;
    run.sweep_hidden = {8};
    run.sweep_modes = {"full5"};
    cmd_sweep(run);
    CHECK(count_lines(slurp(out / "sweep.csv")) == 2);  // header + 1 row

    RunConfig grid = run;
    grid.sweep_hidden = {4, 8};
    grid.sweep_modes = {"az3", "full5"};
    cmd_sweep(grid);
    CHECK(count_lines(slurp(out / "sweep.csv")) == 5);
    fs::remove_all(out);
}

TEST_CASE("timeliness emits the documented columns") {
    const fs::path out = fresh_dir("chartbeam_timeliness_out");
    RunConfig run = tiny_run(out);
    run.timeliness_k = 2;
    run.timeliness_codebooks = {16};
    cmd_timeliness(run);
    const std::string csv = slurp(out / "timeliness.csv");
    CHECK(count_lines(csv) == 3);  // header + 2 paths
    CHECK(csv.rfind("path_idx,e_ps_rate,e_pd_rate,codebook", 0) == 0);
    fs::remove_all(out);
}

#ifdef CHARTBEAM_CLI_PATH
TEST_CASE("the chartbeam binary wires the commands with honest exit codes") {
    const fs::path out = fresh_dir("chartbeam_cli_out");
    const std::string cli = CHARTBEAM_CLI_PATH;

    CHECK(std::system((cli + " defaults > " + (out / "defaults.txt").string()).c_str()) == 0);
    CHECK(Config::from_string(slurp(out / "defaults.txt")).values().size() > 30);

    std::ofstream cfg(out / "cfg.txt");
    cfg << "run.n_paths = 1\nrun.n_tx = 16\nrun.n_rx = 16\nscenario.n_steps = 40\n"
        << "train.epochs = 2\ntrain.neg_window = 10\nchart.hidden1 = 8\nkeygen.k_res = 20\n";
    cfg.close();

    const std::string base = cli + " --config " + (out / "cfg.txt").string() + " --out " + out.string();
    CHECK(std::system((base + " synth > /dev/null").c_str()) == 0);
    CHECK(std::system((base + " train " + (out / "features_000.csv").string() + " > /dev/null").c_str()) == 0);
    CHECK(std::system((base + " track --model " + (out / "model.txt").string() + " --table-tx " +
                       (out / "table_tx.txt").string() + " --table-rx " + (out / "table_rx.txt").string() +
                       " --select " + (out / "selection.txt").string() + " " +
                       (out / "traj_000.txt").string() + " > /dev/null")
                          .c_str()) == 0);

    // Validation failures exit with 1.
    std::ofstream bad(out / "bad.txt");
    bad << "scenario.n_steps = 0\n";
    bad.close();
    const int rc = std::system(
        (cli + " --config " + (out / "bad.txt").string() + " --out " + out.string() + " synth 2>/dev/null")
            .c_str());
    CHECK(WEXITSTATUS(rc) == 1);
    fs::remove_all(out);
}
#endif
