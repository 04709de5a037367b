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

#ifndef CHARTBEAM_CONFIG_HPP
#define CHARTBEAM_CONFIG_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chartbeam/beam_map.hpp"
#include "chartbeam/charting.hpp"
#include "chartbeam/tracker.hpp"
#include "chartbeam/trajectory.hpp"

namespace chartbeam {

/// Flat key=value configuration with section-prefixed keys
/// (e.g. scenario.n_steps). Unknown keys are rejected.
class Config {
public:
    /// Parses "key = value" lines; '#' starts a comment.
    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text);

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    int get_int(const std::string& key, int fallback) const;
    long get_long(const std::string& key, long fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::vector<int> get_int_list(const std::string& key, const std::vector<int>& fallback) const;
    std::vector<std::string> get_string_list(const std::string& key,
                                             const std::vector<std::string>& fallback) const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

/// Composite run configuration for the command line front end.
struct RunConfig {
    std::string out_dir = "out";
    int n_paths = 100;           // trajectories per multi-path evaluation
    int baseline_window = 2;     // sliding-window comparison width
    int timeliness_k = 12;       // successive trajectories per timeliness run
    std::vector<int> timeliness_codebooks{64, 128};
    std::vector<int> sweep_hidden{4, 8, 16, 32, 64, 128, 256, 512};
    std::vector<std::string> sweep_modes{"az3", "el3", "full5"};

    ScenarioConfig scenario;
    TrainConfig train;
    InputMode input_mode = InputMode::full5;
    int chart_hidden1 = 256;
    int chart_hidden2 = 0;  // 0 derives hidden1 / 4
    Activation chart_activation = Activation::tanh_fn;
    std::uint64_t chart_seed = 1;
    KeyGenConfig keygen;
    std::uint64_t hash_seed = 1;
    int target_set_size = 4;
    TrackerConfig tracker;

    std::vector<int> chart_hidden() const;
    void validate() const;

    static RunConfig from_config(const Config& config);
};

/// The full key/default/description schema, printable by `defaults`.
std::string defaults_text();

}  // namespace chartbeam

#endif  // CHARTBEAM_CONFIG_HPP
