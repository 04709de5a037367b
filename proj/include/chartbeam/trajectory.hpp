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

#ifndef CHARTBEAM_TRAJECTORY_HPP
#define CHARTBEAM_TRAJECTORY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "chartbeam/channel.hpp"

namespace chartbeam {

/**
 * @brief Parameters of the synthetic UE walk.
 *
 * The walk is piecewise stationary: within a segment every path angle
 * drifts by at most angular_drift_rate per step; at segment boundaries
 * the dominant path may be replaced (a blockage-style beam jump) with
 * probability jump_probability, toggling between LOS and NLOS states.
 * Segment lengths default to the usual decorrelation intervals of 20 m
 * (LOS) and 45 m (NLOS) at 1 m/s and 1 s steps.
 */
struct ScenarioConfig {
    int n_steps = 200;
    double step_seconds = 1.0;
    int segment_length_los = 20;
    int segment_length_nlos = 45;
    int max_clusters = 5;
    double angular_drift_rate = 0.01;
    double jump_probability = 0.1;
    double nlos_gain_factor = 0.45;  // dominant-path magnitude in NLOS segments
    double noise_var = 0.01;
    double tx_power = 1.0;
    int n_tx = 64;
    int n_rx = 64;
    double spacing = 0.5;
    std::uint64_t seed = 1;

    void validate() const;
    ArrayGeometry tx_geometry() const { return ArrayGeometry::ula(n_tx, spacing); }
    ArrayGeometry rx_geometry() const { return ArrayGeometry::ula(n_rx, spacing); }
};

/// A generated walk: per-step path sets plus the oracle-best beam pair
/// and the stationary-segment id of every step. Channel matrices are
/// materialized on demand to keep long runs small in memory.
struct Trajectory {
    ScenarioConfig config;
    std::vector<std::vector<Path>> steps;
    std::vector<BeamPair> truth;
    std::vector<int> segment_ids;

    int n_steps() const { return static_cast<int>(steps.size()); }
    ChannelSnapshot snapshot_at(int t) const;
    double tau_at(int t) const { return n_steps() > 1 ? static_cast<double>(t) / (n_steps() - 1) : 0.0; }
};

/// Deterministic generator; identical config (seed included) gives a
/// bit-identical trajectory.
Trajectory generate_trajectory(const ScenarioConfig& config);

/// K back-to-back trajectories continuing one walk, for timeliness
/// experiments. Element 0 equals generate_trajectory(config).
std::vector<Trajectory> generate_trajectory_sequence(const ScenarioConfig& config, int k);

/// Stored oracle pairs (pure accessor).
const std::vector<BeamPair>& truth_beam_series(const Trajectory& trajectory);

/// Line-oriented text round trip: one step per line (t, segment id, L,
/// then per-path gain re/im and the four spatial angles).
void save_trajectory(const Trajectory& trajectory, const std::string& path);
Trajectory load_trajectory(const std::string& path);

}  // namespace chartbeam

#endif  // CHARTBEAM_TRAJECTORY_HPP
