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

#include "chartbeam/trajectory.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "chartbeam/io_util.hpp"

namespace chartbeam {

void ScenarioConfig::validate() const {
    if (n_steps < 2) throw std::invalid_argument("scenario: n_steps must be >= 2");
    if (max_clusters < 1) throw std::invalid_argument("scenario: max_clusters must be >= 1");
    if (jump_probability < 0.0 || jump_probability > 1.0)
        throw std::invalid_argument("scenario: jump_probability must be in [0, 1]");
    if (segment_length_los < 1 || segment_length_nlos < 1)
        throw std::invalid_argument("scenario: segment lengths must be >= 1");
    if (angular_drift_rate < 0.0) throw std::invalid_argument("scenario: drift rate must be >= 0");
    if (nlos_gain_factor <= 0.0 || nlos_gain_factor > 1.0)
        throw std::invalid_argument("scenario: nlos_gain_factor must be in (0, 1]");
    if (noise_var < 0.0) throw std::invalid_argument("scenario: noise_var must be >= 0");
    if (tx_power <= 0.0) throw std::invalid_argument("scenario: tx_power must be > 0");
    if (n_tx < 1 || n_rx < 1) throw std::invalid_argument("scenario: array sizes must be >= 1");
    if (step_seconds <= 0.0) throw std::invalid_argument("scenario: step_seconds must be > 0");
}

ChannelSnapshot Trajectory::snapshot_at(int t) const {
    if (t < 0 || t >= n_steps()) throw std::out_of_range("snapshot_at: step out of range");
    return channel_matrix(steps[t], config.rx_geometry(), config.tx_geometry(), t);
}

namespace {

constexpr double kAngleDrawLimit = 0.95;   // keep fresh paths off the reflection edge
constexpr double kSecondaryGainLo = 0.02;  // secondary clusters stay well below the
constexpr double kSecondaryGainHi = 0.08;  // dominant one so the oracle tracks it

double reflect_into_unit(double v) {
    while (v > 1.0 || v < -1.0) {
        if (v > 1.0) v = 2.0 - v;
        if (v < -1.0) v = -2.0 - v;
    }
    return v;
}

// One walk shared by a whole trajectory sequence; each next() call emits
// n_steps more steps without resetting the path state.
class Walker {
public:
    explicit Walker(const ScenarioConfig& config)
        : cfg_(config),
          rng_(config.seed),
          cb_tx_(dft_codebook(config.n_tx, Codebook::Side::tx)),
          cb_rx_(dft_codebook(config.n_rx, Codebook::Side::rx)) {
        const int n_paths =
            cfg_.max_clusters == 1 ? 1 : std::uniform_int_distribution<int>(2, cfg_.max_clusters)(rng_);
        paths_.resize(n_paths);
        paths_[0] = draw_path(1.0);
        for (int l = 1; l < n_paths; ++l)
            paths_[l] = draw_path(std::uniform_real_distribution<double>(kSecondaryGainLo, kSecondaryGainHi)(rng_));
        steps_left_ = cfg_.segment_length_los;
    }

    Trajectory next() {
        Trajectory traj;
        traj.config = cfg_;
        traj.steps.reserve(cfg_.n_steps);
        traj.truth.reserve(cfg_.n_steps);
        traj.segment_ids.reserve(cfg_.n_steps);

        for (int t = 0; t < cfg_.n_steps; ++t) {
            if (!first_step_) advance();
            first_step_ = false;

            traj.steps.push_back(paths_);
            traj.segment_ids.push_back(segment_id_);
            const ChannelSnapshot snap =
                channel_matrix(paths_, cfg_.rx_geometry(), cfg_.tx_geometry(), t);
            traj.truth.push_back(best_beam_oracle(snap.h, cb_tx_, cb_rx_).pair);
        }
        return traj;
    }

private:
    Path draw_path(double magnitude) {
        std::uniform_real_distribution<double> angle(-kAngleDrawLimit, kAngleDrawLimit);
        std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
        Path p;
        p.theta_t = angle(rng_);
        p.theta_r = angle(rng_);
        p.gain = std::polar(magnitude, phase(rng_));
        return p;
    }

    void advance() {
        bool jumped = false;
        if (steps_left_ == 0) {
            ++segment_id_;
            if (std::bernoulli_distribution(cfg_.jump_probability)(rng_)) {
                jumped = true;
                los_ = !los_;
                const double mag = los_ ? 1.0 : cfg_.nlos_gain_factor;
                paths_[0] = draw_path(mag);
            }
            steps_left_ = los_ ? cfg_.segment_length_los : cfg_.segment_length_nlos;
        }
        for (std::size_t l = 0; l < paths_.size(); ++l) {
            if (jumped && l == 0) continue;  // freshly drawn this step
            std::uniform_real_distribution<double> drift(-cfg_.angular_drift_rate, cfg_.angular_drift_rate);
            paths_[l].theta_t = reflect_into_unit(paths_[l].theta_t + drift(rng_));
            paths_[l].theta_r = reflect_into_unit(paths_[l].theta_r + drift(rng_));
        }
        --steps_left_;
    }

    ScenarioConfig cfg_;
    std::mt19937_64 rng_;
    Codebook cb_tx_, cb_rx_;
    std::vector<Path> paths_;
    bool los_ = true;
    bool first_step_ = true;
    int segment_id_ = 0;
    int steps_left_ = 0;
};

}  // namespace

Trajectory generate_trajectory(const ScenarioConfig& config) {
    config.validate();
    return Walker(config).next();
}

std::vector<Trajectory> generate_trajectory_sequence(const ScenarioConfig& config, int k) {
    config.validate();
    if (k < 1) throw std::invalid_argument("generate_trajectory_sequence: k must be >= 1");
    Walker walker(config);
    std::vector<Trajectory> out;
    out.reserve(k);
    for (int i = 0; i < k; ++i) out.push_back(walker.next());
    return out;
}

const std::vector<BeamPair>& truth_beam_series(const Trajectory& trajectory) {
    return trajectory.truth;
}

void save_trajectory(const Trajectory& trajectory, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_trajectory: cannot open " + path);
    const ScenarioConfig& c = trajectory.config;
    out << "# chartbeam-trajectory v1\n";
    out << "n_steps " << trajectory.n_steps() << "\n";
    out << "n_tx " << c.n_tx << "\nn_rx " << c.n_rx << "\n";
    out << "spacing " << io::fmt(c.spacing) << "\n";
    out << "noise_var " << io::fmt(c.noise_var) << "\ntx_power " << io::fmt(c.tx_power) << "\n";
    out << "step_seconds " << io::fmt(c.step_seconds) << "\nseed " << c.seed << "\n";
    for (int t = 0; t < trajectory.n_steps(); ++t) {
        const auto& paths = trajectory.steps[t];
        out << t << ' ' << trajectory.segment_ids[t] << ' ' << paths.size();
        for (const Path& p : paths) {
            out << ' ' << io::fmt(p.gain.real()) << ' ' << io::fmt(p.gain.imag()) << ' '
                << io::fmt(p.theta_t) << ' ' << io::fmt(p.theta_r) << ' ' << io::fmt(p.elev_t)
                << ' ' << io::fmt(p.elev_r);
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("save_trajectory: write failed for " + path);
}

Trajectory load_trajectory(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_trajectory: cannot open " + path);

    Trajectory traj;
    ScenarioConfig& c = traj.config;
    std::string line;
    int declared_steps = -1;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        // Header lines start with a key; step lines start with the step index.
        std::string first;
        ls >> first;
        if (first == "n_steps") { ls >> declared_steps; c.n_steps = declared_steps; continue; }
        if (first == "n_tx") { ls >> c.n_tx; continue; }
        if (first == "n_rx") { ls >> c.n_rx; continue; }
        if (first == "spacing") { ls >> c.spacing; continue; }
        if (first == "noise_var") { ls >> c.noise_var; continue; }
        if (first == "tx_power") { ls >> c.tx_power; continue; }
        if (first == "step_seconds") { ls >> c.step_seconds; continue; }
        if (first == "seed") { ls >> c.seed; continue; }

        int seg = 0;
        std::size_t n_paths = 0;
        ls >> seg >> n_paths;
        std::vector<Path> paths(n_paths);
        for (Path& p : paths) {
            double re = 0, im = 0;
            ls >> re >> im >> p.theta_t >> p.theta_r >> p.elev_t >> p.elev_r;
            p.gain = cd{re, im};
        }
        if (!ls) throw std::runtime_error("load_trajectory: malformed step line in " + path);
        traj.steps.push_back(std::move(paths));
        traj.segment_ids.push_back(seg);
    }
    if (declared_steps >= 0 && declared_steps != traj.n_steps())
        throw std::runtime_error("load_trajectory: step count mismatch in " + path);

    // Truth pairs are not stored; recompute them from the oracle.
    const Codebook cb_tx = dft_codebook(c.n_tx, Codebook::Side::tx);
    const Codebook cb_rx = dft_codebook(c.n_rx, Codebook::Side::rx);
    traj.truth.reserve(traj.n_steps());
    for (int t = 0; t < traj.n_steps(); ++t)
        traj.truth.push_back(best_beam_oracle(traj.snapshot_at(t).h, cb_tx, cb_rx).pair);
    return traj;
}

}  // namespace chartbeam
