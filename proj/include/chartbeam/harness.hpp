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

#ifndef CHARTBEAM_HARNESS_HPP
#define CHARTBEAM_HARNESS_HPP

#include <string>
#include <vector>

#include "chartbeam/config.hpp"

namespace chartbeam {

/// A trained chart, the per-side tables, and their calibrated selection
/// radii: everything cmd_track and the tracker tests consume.
struct TrainedPipeline {
    ChartModel model;
    BeamMapTable table_tx;
    BeamMapTable table_rx;
    SelectionConfig select_tx;
    SelectionConfig select_rx;
    std::vector<EpochLoss> history;

    TrackerContext context();
};

/// Offline phase over one or more feature series: per-series triplet
/// mining, joint training, per-side table construction, delta
/// calibration.
TrainedPipeline train_pipeline(const std::vector<std::vector<FeatureVector>>& series,
                               const std::vector<std::vector<BeamPair>>& truths,
                               const RunConfig& config);

/// Selection radii sidecar (delta_tx / delta_rx + bounds).
void save_selection(const SelectionConfig& tx, const SelectionConfig& rx, const std::string& path);
void load_selection(const std::string& path, SelectionConfig& tx, SelectionConfig& rx);

// Command implementations behind the CLI; they throw std::invalid_argument
// for validation problems and std::runtime_error for everything else.
void cmd_synth(const RunConfig& config);
void cmd_train(const RunConfig& config, const std::vector<std::string>& feature_csvs);
void cmd_track(const RunConfig& config, const std::string& model_path, const std::string& table_tx_path,
               const std::string& table_rx_path, const std::string& selection_path,
               const std::vector<std::string>& trajectory_files);
void cmd_sweep(const RunConfig& config);
void cmd_timeliness(const RunConfig& config);

}  // namespace chartbeam

#endif  // CHARTBEAM_HARNESS_HPP
