// SPDX-License-Identifier: Apache-2.0
//
// chartbeam: channel-charting based beam tracking
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "chartbeam/harness.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "chartbeam/io_util.hpp"

namespace fs = std::filesystem;

namespace chartbeam {

namespace {

std::string padded(int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%03d", i);
    return buf;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir);
}

ScenarioConfig scenario_for_path(const RunConfig& config, int index) {
    ScenarioConfig s = config.scenario;
    s.seed = config.scenario.seed + static_cast<std::uint64_t>(index);
    return s;
}

struct MetricsRow {
    std::string algo;
    std::string traj;
    Metrics m;
};

void write_summary(const std::vector<MetricsRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "algo,traj,n_steps,e_ps_t,e_ps_r,e_pd_t,e_pd_r,n_s,n_s_formula,pairs,accuracy,"
           "mean_scans_per_side\n";
    for (const MetricsRow& r : rows) {
        out << r.algo << ',' << r.traj << ',' << r.m.n_steps << ',' << r.m.e_ps_tx << ','
            << r.m.e_ps_rx << ',' << r.m.e_pd_tx << ',' << r.m.e_pd_rx << ',' << r.m.n_s << ','
            << r.m.n_s_formula << ',' << r.m.pairs_scanned << ',' << io::fmt(r.m.accuracy()) << ','
            << io::fmt(r.m.mean_scans_per_side()) << '\n';
    }
}

Metrics aggregate(const std::vector<Metrics>& all) {
    Metrics total;
    for (const Metrics& m : all) {
        total.e_ps_tx += m.e_ps_tx;
        total.e_ps_rx += m.e_ps_rx;
        total.e_pd_tx += m.e_pd_tx;
        total.e_pd_rx += m.e_pd_rx;
        total.n_s += m.n_s;
        total.n_s_formula += m.n_s_formula;
        total.pairs_scanned += m.pairs_scanned;
        total.zeta_tx += m.zeta_tx;
        total.zeta_rx += m.zeta_rx;
        total.n_steps += m.n_steps;
    }
    return total;
}

}  // namespace

TrackerContext TrainedPipeline::context() {
    TrackerContext ctx;
    ctx.model = &model;
    ctx.table_tx = &table_tx;
    ctx.table_rx = &table_rx;
    ctx.select_tx = select_tx;
    ctx.select_rx = select_rx;
    return ctx;
}

TrainedPipeline train_pipeline(const std::vector<std::vector<FeatureVector>>& series,
                               const std::vector<std::vector<BeamPair>>& truths,
                               const RunConfig& config) {
    if (series.empty() || series.size() != truths.size())
        throw std::invalid_argument("train_pipeline: need matching feature/truth series");

    std::vector<FeatureVector> pooled;
    std::vector<BeamPair> pooled_truth;
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (series[i].size() != truths[i].size())
            throw std::invalid_argument("train_pipeline: series length mismatch");
        pooled.insert(pooled.end(), series[i].begin(), series[i].end());
        pooled_truth.insert(pooled_truth.end(), truths[i].begin(), truths[i].end());
    }

    const Eigen::MatrixXd x = feature_matrix(pooled, config.input_mode);

    // Triplets are mined per series so that time windows never straddle
    // two unrelated walks.
    std::vector<Triplet> triplets;
    int offset = 0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        TrainConfig mine_cfg = config.train;
        mine_cfg.seed = config.train.seed + i;
        const Eigen::MatrixXd xi = feature_matrix(series[i], config.input_mode);
        for (const Triplet& t : mine_triplets(xi, mine_cfg))
            triplets.push_back(Triplet{t.anchor + offset, t.positive + offset, t.negative + offset});
        offset += static_cast<int>(series[i].size());
    }

    ChartConfig chart_cfg;
    chart_cfg.input_dim = input_mode_dim(config.input_mode);
    chart_cfg.hidden = config.chart_hidden();
    chart_cfg.activation = config.chart_activation;
    chart_cfg.seed = config.chart_seed;

    ChartModel init = make_chart_model(chart_cfg);
    init.input_mode = config.input_mode;
    init.fit_standardizer(x);

    TrainResult trained = train(x, triplets, config.train, init);

    TrainedPipeline pipe;
    pipe.model = std::move(trained.model);
    pipe.history = std::move(trained.history);

    const Eigen::MatrixXd chart = chart_dataset(pipe.model, x);
    std::vector<int> beams_tx(pooled_truth.size()), beams_rx(pooled_truth.size());
    for (std::size_t i = 0; i < pooled_truth.size(); ++i) {
        beams_tx[i] = pooled_truth[i].tx;
        beams_rx[i] = pooled_truth[i].rx;
    }
    pipe.table_tx = build_table(chart, beams_tx, config.keygen, config.hash_seed);
    pipe.table_rx = build_table(chart, beams_rx, config.keygen, config.hash_seed + 1);
    pipe.select_tx = calibrate_delta(pipe.table_tx, chart, config.target_set_size);
    pipe.select_rx = calibrate_delta(pipe.table_rx, chart, config.target_set_size);
    return pipe;
}

void save_selection(const SelectionConfig& tx, const SelectionConfig& rx, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_selection: cannot open " + path);
    out << "# chartbeam-selection v1\n";
    out << "delta_tx " << io::fmt(tx.delta) << ' ' << io::fmt(tx.delta_min) << ' '
        << io::fmt(tx.delta_max) << ' ' << tx.target_set_size << '\n';
    out << "delta_rx " << io::fmt(rx.delta) << ' ' << io::fmt(rx.delta_min) << ' '
        << io::fmt(rx.delta_max) << ' ' << rx.target_set_size << '\n';
}

void load_selection(const std::string& path, SelectionConfig& tx, SelectionConfig& rx) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_selection: cannot open " + path);
    std::string tok;
    while (in >> tok) {
        if (tok == "#") { std::string rest; std::getline(in, rest); continue; }
        if (tok == "delta_tx") { in >> tx.delta >> tx.delta_min >> tx.delta_max >> tx.target_set_size; continue; }
        if (tok == "delta_rx") { in >> rx.delta >> rx.delta_min >> rx.delta_max >> rx.target_set_size; continue; }
        throw std::runtime_error("load_selection: unexpected token '" + tok + "'");
    }
}

void cmd_synth(const RunConfig& config) {
    ensure_dir(config.out_dir);
    std::ostringstream manifest;
    manifest << "# chartbeam synth manifest\n";
    manifest << "base_seed " << config.scenario.seed << "\nn_paths " << config.n_paths << "\n";
    for (int i = 0; i < config.n_paths; ++i) {
        const ScenarioConfig scen = scenario_for_path(config, i);
        const Trajectory traj = generate_trajectory(scen);
        const std::string traj_path = config.out_dir + "/traj_" + padded(i) + ".txt";
        const std::string feat_path = config.out_dir + "/features_" + padded(i) + ".csv";
        save_trajectory(traj, traj_path);
        save_feature_csv(features_from_trajectory(traj), traj.truth, feat_path);
        manifest << "path " << i << " seed " << scen.seed << " file " << traj_path << "\n";
    }
    std::ofstream out(config.out_dir + "/manifest.txt");
    out << manifest.str();
    std::cout << manifest.str();
}

void cmd_train(const RunConfig& config, const std::vector<std::string>& feature_csvs) {
    if (feature_csvs.empty()) throw std::invalid_argument("train: no feature files given");
    ensure_dir(config.out_dir);

    std::vector<std::vector<FeatureVector>> series;
    std::vector<std::vector<BeamPair>> truths;
    for (const std::string& path : feature_csvs) {
        std::vector<FeatureVector> f;
        std::vector<BeamPair> b;
        load_feature_csv(path, f, b);
        if (static_cast<int>(f.size()) <= config.train.neg_window + 1)
            throw std::invalid_argument("train: dataset " + path + " shorter than the mining window");
        series.push_back(std::move(f));
        truths.push_back(std::move(b));
    }

    TrainedPipeline pipe = train_pipeline(series, truths, config);
    save_chart_model(pipe.model, config.out_dir + "/model.txt");
    pipe.table_tx.save(config.out_dir + "/table_tx.txt");
    pipe.table_rx.save(config.out_dir + "/table_rx.txt");
    save_selection(pipe.select_tx, pipe.select_rx, config.out_dir + "/selection.txt");

    std::ofstream hist(config.out_dir + "/loss_history.csv");
    hist << "epoch,triplet,reconstruction,total\n";
    for (std::size_t e = 0; e < pipe.history.size(); ++e)
        hist << e << ',' << io::fmt(pipe.history[e].triplet) << ','
             << io::fmt(pipe.history[e].reconstruction) << ',' << io::fmt(pipe.history[e].total())
             << '\n';

    std::cout << "trained on " << series.size() << " series; delta_tx=" << pipe.select_tx.delta
              << " delta_rx=" << pipe.select_rx.delta << "\n";
}

void cmd_track(const RunConfig& config, const std::string& model_path, const std::string& table_tx_path,
               const std::string& table_rx_path, const std::string& selection_path,
               const std::vector<std::string>& trajectory_files) {
    if (trajectory_files.empty()) throw std::invalid_argument("track: no trajectory files given");
    for (const std::string& p : {model_path, table_tx_path, table_rx_path, selection_path})
        if (!fs::exists(p)) throw std::invalid_argument("track: missing input file " + p);
    ensure_dir(config.out_dir);

    const ChartModel model = load_chart_model(model_path);
    const BeamMapTable table_tx_master = BeamMapTable::load(table_tx_path);
    const BeamMapTable table_rx_master = BeamMapTable::load(table_rx_path);
    SelectionConfig sel_tx, sel_rx;
    load_selection(selection_path, sel_tx, sel_rx);

    std::vector<MetricsRow> rows;
    std::vector<Metrics> tracker_all, exhaustive_all, sliding_all;
    for (std::size_t i = 0; i < trajectory_files.size(); ++i) {
        const Trajectory traj = load_trajectory(trajectory_files[i]);

        // Each path is evaluated independently: data updates apply within
        // a run but do not leak across paths.
        BeamMapTable table_tx = table_tx_master;
        BeamMapTable table_rx = table_rx_master;
        TrackerContext ctx{&model, &table_tx, &table_rx, sel_tx, sel_rx};
        const TrackResult result = run_tracker(traj, ctx, config.tracker);
        save_track_csv(result.record, config.out_dir + "/track_" + padded(static_cast<int>(i)) + ".csv");

        const Metrics exhaustive = exhaustive_baseline(traj);
        const Metrics sliding = sliding_window_baseline(traj, config.baseline_window).metrics;
        rows.push_back({"tracker", std::to_string(i), result.metrics});
        rows.push_back({"exhaustive", std::to_string(i), exhaustive});
        rows.push_back({"sliding_w" + std::to_string(config.baseline_window), std::to_string(i), sliding});
        tracker_all.push_back(result.metrics);
        exhaustive_all.push_back(exhaustive);
        sliding_all.push_back(sliding);
    }

    const Metrics t = aggregate(tracker_all);
    const Metrics e = aggregate(exhaustive_all);
    const Metrics s = aggregate(sliding_all);
    rows.push_back({"tracker", "all", t});
    rows.push_back({"exhaustive", "all", e});
    rows.push_back({"sliding_w" + std::to_string(config.baseline_window), "all", s});
    write_summary(rows, config.out_dir + "/summary.csv");

    const double reduction = 1.0 - static_cast<double>(t.n_s) / static_cast<double>(s.n_s);
    std::cout << "tracker: accuracy " << t.accuracy() << ", mean scans/side " << t.mean_scans_per_side()
              << ", E_ps " << t.e_ps() << ", E_pd " << t.e_pd() << ", N_s " << t.n_s << "\n";
    std::cout << "sliding_w" << config.baseline_window << ": accuracy " << s.accuracy() << ", N_s "
              << s.n_s << "\n";
    std::cout << "exhaustive: N_s " << e.n_s << "\n";
    std::cout << "scan reduction vs sliding window: " << reduction * 100.0 << "%\n";
}

void cmd_sweep(const RunConfig& config) {
    ensure_dir(config.out_dir);

    // Shared synthetic paths for the whole grid.
    std::vector<Trajectory> trajectories;
    std::vector<std::vector<FeatureVector>> series;
    std::vector<std::vector<BeamPair>> truths;
    for (int i = 0; i < config.n_paths; ++i) {
        trajectories.push_back(generate_trajectory(scenario_for_path(config, i)));
        series.push_back(features_from_trajectory(trajectories.back()));
        truths.push_back(trajectories.back().truth);
    }

    std::ofstream out(config.out_dir + "/sweep.csv");
    out << "input_mode,hidden,e_ps_rate,e_pd_rate\n";
    std::vector<std::pair<int, double>> full5_trend;
    for (const std::string& mode_name : config.sweep_modes) {
        for (int hidden : config.sweep_hidden) {
            RunConfig point = config;
            point.input_mode = input_mode_from_name(mode_name);
            point.chart_hidden1 = hidden;
            point.chart_hidden2 = 0;
            TrainedPipeline pipe = train_pipeline(series, truths, point);

            std::vector<Metrics> all;
            for (const Trajectory& traj : trajectories) {
                BeamMapTable table_tx = pipe.table_tx;
                BeamMapTable table_rx = pipe.table_rx;
                TrackerContext ctx{&pipe.model, &table_tx, &table_rx, pipe.select_tx, pipe.select_rx};
                all.push_back(run_tracker(traj, ctx, point.tracker).metrics);
            }
            const Metrics m = aggregate(all);
            out << mode_name << ',' << hidden << ',' << io::fmt(m.e_ps_rate()) << ','
                << io::fmt(m.e_pd_rate()) << '\n';
            std::cout << "sweep " << mode_name << " hidden=" << hidden << " E_ps_rate=" << m.e_ps_rate()
                      << " E_pd_rate=" << m.e_pd_rate() << "\n";
            if (mode_name == "full5" && hidden >= 4 && hidden <= 32)
                full5_trend.emplace_back(hidden, m.e_ps_rate());
        }
    }

    // Reported, not asserted: whether error falls with width over 4..32.
    if (full5_trend.size() >= 2) {
        bool monotone = true;
        for (std::size_t i = 1; i < full5_trend.size(); ++i)
            monotone = monotone && full5_trend[i].second <= full5_trend[i - 1].second;
        std::cout << "full5 positioning error monotone nonincreasing over widths 4..32: "
                  << (monotone ? "yes" : "no") << "\n";
    }
}

void cmd_timeliness(const RunConfig& config) {
    ensure_dir(config.out_dir);
    std::ofstream out(config.out_dir + "/timeliness.csv");
    out << "path_idx,e_ps_rate,e_pd_rate,codebook\n";
    for (int codebook : config.timeliness_codebooks) {
        RunConfig point = config;
        point.scenario.n_tx = codebook;
        point.scenario.n_rx = codebook;
        point.validate();

        const std::vector<Trajectory> stream =
            generate_trajectory_sequence(point.scenario, point.timeliness_k);
        TrainedPipeline pipe = train_pipeline({features_from_trajectory(stream[0])},
                                              {stream[0].truth}, point);
        TrackerContext ctx = pipe.context();
        const std::vector<Metrics> series = timeliness_eval(ctx, stream, point.tracker);
        for (std::size_t i = 0; i < series.size(); ++i) {
            out << i << ',' << io::fmt(series[i].e_ps_rate()) << ',' << io::fmt(series[i].e_pd_rate())
                << ',' << codebook << '\n';
            std::cout << "timeliness codebook=" << codebook << " path=" << i
                      << " E_ps_rate=" << series[i].e_ps_rate()
                      << " E_pd_rate=" << series[i].e_pd_rate() << "\n";
        }
    }
}

}  // namespace chartbeam
