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

#ifndef CHARTBEAM_TRACKER_HPP
#define CHARTBEAM_TRACKER_HPP

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "chartbeam/beam_map.hpp"
#include "chartbeam/charting.hpp"
#include "chartbeam/features.hpp"
#include "chartbeam/trajectory.hpp"

namespace chartbeam {

struct TrackerConfig {
    /// Misalignment threshold in dB; NaN means "calibrate to 10 dB below
    /// the trajectory's median aligned SNR".
    double snr_threshold_db = std::numeric_limits<double>::quiet_NaN();
    int neighbor_radius = 1;  // expand located beam by +-r with modular wrap
    int t_e = 1;              // history window length (averaged before encoding)
    int t_d = 0;              // history delay
    int max_candidates = 8;   // per-side cap after merging
    int retrain_interval = 0; // steps between chart refreshes, 0 = never

    void validate() const;
};

/// Everything the online loop needs: the trained chart and the per-side
/// mapping tables with their calibrated selection radii.
struct TrackerContext {
    const ChartModel* model = nullptr;
    BeamMapTable* table_tx = nullptr;
    BeamMapTable* table_rx = nullptr;
    SelectionConfig select_tx;
    SelectionConfig select_rx;
};

struct StepRecord {
    int t = 0;
    int located_tx = 0, located_rx = 0;
    int truth_tx = 0, truth_rx = 0;
    int pred_tx = 0, pred_rx = 0;
    int n_cand_tx = 0, n_cand_rx = 0;
    long scans = 0;  // distinct beam pairs measured this step
    bool e_tx = false, e_rx = false;
    bool misaligned = false;
    double snr_db = 0.0;
    bool fallback_tx = false, fallback_rx = false;  // nearest-anchor positioning
};

struct TrackRecord {
    std::vector<StepRecord> steps;
};

struct Metrics {
    long e_ps_tx = 0, e_ps_rx = 0;  // located != truth counts
    long e_pd_tx = 0, e_pd_rx = 0;  // truth missing from the scanned set
    long n_s = 0;                   // per-side search total (misalignment adds N_t + N_r)
    long n_s_formula = 0;           // same, with fallback steps counted as 2 searches
    long pairs_scanned = 0;         // distinct-pair total across steps
    long zeta_tx = 0, zeta_rx = 0;  // nearest-anchor fallback counts
    long n_steps = 0;

    long e_ps() const { return e_ps_tx + e_ps_rx; }
    long e_pd() const { return e_pd_tx + e_pd_rx; }
    double accuracy() const { return 1.0 - static_cast<double>(e_pd()) / (2.0 * n_steps); }
    double mean_scans_per_side() const { return static_cast<double>(n_s) / (2.0 * n_steps); }
    double e_ps_rate() const { return static_cast<double>(e_ps()) / (2.0 * n_steps); }
    double e_pd_rate() const { return static_cast<double>(e_pd()) / (2.0 * n_steps); }
};

struct TrackResult {
    TrackRecord record;
    Metrics metrics;
    std::vector<FeatureVector> update_features;  // appended by misalignment handling
    std::vector<BeamPair> update_beams;
};

struct LocateResult {
    Eigen::Vector2d y{0.0, 0.0};
    BeamPair located;
    std::vector<BeamCandidate> filtered_tx;  // delta-filtered table hits
    std::vector<BeamCandidate> filtered_rx;
    bool fallback_tx = false;
    bool fallback_rx = false;
};

/// Chart positioning: encode, look up each side's table, delta-filter,
/// take the highest-priority beam; an empty set falls back to the
/// nearest stored anchor (the first label a breadth-first search from
/// the query would touch).
LocateResult locate(const TrackerContext& ctx, const FeatureVector& x);

/// Located beam plus modular +-r neighbors, merged with the table hits
/// (priority order: located first, then hits desc / index asc), capped
/// at max_candidates.
std::vector<int> candidate_set(int located, const std::vector<BeamCandidate>& table_hits,
                               const TrackerConfig& config, int n_beams);

struct ScanOutcome {
    BeamPair best;
    long pairs = 0;
    double snr_db = 0.0;
};

/// Sweep the candidate product set and return the strongest pair (ties
/// to the lexicographically lowest indices). Power values reproduce the
/// exhaustive oracle bit for bit on shared pairs.
ScanOutcome scan_confirm(const Eigen::MatrixXcd& h, const std::vector<int>& cand_tx,
                         const std::vector<int>& cand_rx, const Codebook& cb_tx, const Codebook& cb_rx,
                         double noise_var, double tx_power);

/// Exhaustive recovery: oracle-best pair, table update at the current
/// chart point on both sides, and the sample appended for retraining.
BeamPair misalignment_handler(const Eigen::MatrixXcd& h, const Eigen::Vector2d& y,
                              const FeatureVector& x, const Codebook& cb_tx, const Codebook& cb_rx,
                              TrackerContext& ctx, std::vector<FeatureVector>& update_features,
                              std::vector<BeamPair>& update_beams);

/// Decode the chart point, pin the azimuth components to the confirmed
/// pair's beam-center angles, and advance the timestamp.
FeatureVector reconstruct_next_feature(const ChartModel& model, const Eigen::Vector2d& y,
                                       BeamPair confirmed, int n_tx, int n_rx, double next_tau);

/// Median aligned SNR over the trajectory minus 10 dB.
double default_snr_threshold(const Trajectory& trajectory);

using RetrainHook = std::function<void(const std::vector<FeatureVector>& update_features,
                                       const std::vector<BeamPair>& update_beams, TrackerContext& ctx)>;

/// The online loop: locate, candidate acquisition, scan for
/// confirmation, threshold check with exhaustive recovery, feature
/// reconstruction; accumulates E_ps / E_pd / N_s as it goes.
TrackResult run_tracker(const Trajectory& trajectory, TrackerContext& ctx, const TrackerConfig& config,
                        const RetrainHook& retrain = {});

/// Scans every pair each step; zero prediction error by construction.
Metrics exhaustive_baseline(const Trajectory& trajectory);

/// Scans +-w around the previous best on each side with modular wrap.
struct BaselineResult {
    Metrics metrics;
    std::vector<BeamPair> predicted;
    std::vector<std::vector<int>> windows_tx, windows_rx;
};
BaselineResult sliding_window_baseline(const Trajectory& trajectory, int w);

/// Per-trajectory error series across successive trajectories without
/// retraining the chart.
std::vector<Metrics> timeliness_eval(TrackerContext& ctx, const std::vector<Trajectory>& stream,
                                     const TrackerConfig& config);

/// Per-step CSV: t,located_t,located_r,truth_t,truth_r,pred_t,pred_r,
/// n_cand_t,n_cand_r,scans,e_t,e_r,misaligned,snr_db.
void save_track_csv(const TrackRecord& record, const std::string& path);
TrackRecord load_track_csv(const std::string& path);

/// Recompute the summary counters from raw records; used by the
/// self-consistency checks.
Metrics metrics_from_record(const TrackRecord& record, int n_tx, int n_rx);

}  // namespace chartbeam

#endif  // CHARTBEAM_TRACKER_HPP
