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

#include "chartbeam/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "chartbeam/io_util.hpp"

namespace chartbeam {

namespace {

struct SchemaEntry {
    const char* key;
    const char* fallback;
    const char* description;
};

// One row per configuration key; `defaults` prints this table.
const SchemaEntry kSchema[] = {
    {"run.out_dir", "out", "output directory"},
    {"run.n_tx", "64", "transmit codebook size (16, 64 or 128)"},
    {"run.n_rx", "64", "receive codebook size (16, 64 or 128)"},
    {"run.n_paths", "100", "trajectories per multi-path evaluation"},
    {"run.baseline_window", "2", "sliding-window baseline half-width"},
    {"scenario.n_steps", "200", "steps per trajectory"},
    {"scenario.step_seconds", "1", "seconds per step"},
    {"scenario.segment_len_los", "20", "steps per stationary LOS segment"},
    {"scenario.segment_len_nlos", "45", "steps per stationary NLOS segment"},
    {"scenario.max_clusters", "5", "maximum propagation paths"},
    {"scenario.drift_rate", "0.01", "max per-step spatial-angle change"},
    {"scenario.jump_probability", "0.1", "dominant-path swap probability per segment boundary"},
    {"scenario.nlos_gain_factor", "0.45", "dominant-path magnitude in NLOS segments"},
    {"scenario.noise_var", "0.01", "noise variance"},
    {"scenario.tx_power", "1", "transmit power"},
    {"scenario.seed", "1", "base seed (trajectory i uses seed + i)"},
    {"train.learning_rate", "0.0001", "Adam step size"},
    {"train.batch_size", "256", "samples per gradient step"},
    {"train.epochs", "200", "training epochs"},
    {"train.delta", "1", "triplet margin"},
    {"train.loss_weight", "1", "reconstruction term weight"},
    {"train.pos_window", "2", "positive mining window W_p"},
    {"train.neg_window", "20", "negative mining window W_n"},
    {"train.seed", "1", "training seed"},
    {"chart.input_mode", "full5", "chart input dims: az3, el3 or full5"},
    {"chart.hidden1", "256", "first hidden width"},
    {"chart.hidden2", "0", "second hidden width (0 = hidden1/4)"},
    {"chart.activation", "tanh", "hidden nonlinearity: tanh or sigmoid"},
    {"chart.seed", "1", "weight init seed"},
    {"keygen.c", "2", "key generating factor"},
    {"keygen.k_res", "100", "key resolution factor"},
    {"hash.seed", "1", "universal-hash parameter seed"},
    {"select.target_set_size", "4", "delta calibration target set size"},
    {"tracker.snr_threshold_db", "nan", "misalignment threshold (nan = median aligned SNR - 10)"},
    {"tracker.neighbor_radius", "1", "candidate expansion radius"},
    {"tracker.t_e", "1", "history window length"},
    {"tracker.t_d", "0", "history delay"},
    {"tracker.max_candidates", "8", "per-side candidate cap"},
    {"tracker.retrain_interval", "0", "steps between chart retrains (0 = never)"},
    {"sweep.hidden_widths", "4,8,16,32,64,128,256,512", "first-hidden grid"},
    {"sweep.input_modes", "az3,el3,full5", "input-dim grid"},
    {"timeliness.k", "12", "successive trajectories without retraining"},
    {"timeliness.codebooks", "64,128", "codebook sizes for the timeliness run"},
};

bool known_key(const std::string& key) {
    for (const SchemaEntry& e : kSchema)
        if (key == e.key) return true;
    return false;
}

}  // namespace

Config Config::from_string(const std::string& text) {
    Config config;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string trimmed = io::trim(line);
        if (trimmed.empty()) continue;
        const std::size_t eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: missing '=' on line " + std::to_string(line_no));
        const std::string key = io::trim(trimmed.substr(0, eq));
        const std::string value = io::trim(trimmed.substr(eq + 1));
        if (key.empty() || value.empty())
            throw std::invalid_argument("config: empty key or value on line " + std::to_string(line_no));
        if (!known_key(key)) throw std::invalid_argument("config: unknown key '" + key + "'");
        config.values_[key] = value;
    }
    return config;
}

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str());
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

int Config::get_int(const std::string& key, int fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        std::size_t used = 0;
        const int v = std::stoi(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: '" + key + "' is not an integer");
    }
}

long Config::get_long(const std::string& key, long fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return std::stol(it->second);
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        return std::stoull(it->second);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: '" + key + "' is not an unsigned integer");
    }
}

double Config::get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (it->second == "inf") return std::numeric_limits<double>::infinity();
    if (it->second == "-inf") return -std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double v = std::stod(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: '" + key + "' is not a number");
    }
}

std::vector<int> Config::get_int_list(const std::string& key, const std::vector<int>& fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<int> out;
    for (const std::string& tok : io::split(it->second, ','))
        if (!io::trim(tok).empty()) out.push_back(std::stoi(io::trim(tok)));
    if (out.empty()) throw std::invalid_argument("config: '" + key + "' is an empty list");
    return out;
}

std::vector<std::string> Config::get_string_list(const std::string& key,
                                                 const std::vector<std::string>& fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<std::string> out;
    for (const std::string& tok : io::split(it->second, ','))
        if (!io::trim(tok).empty()) out.push_back(io::trim(tok));
    if (out.empty()) throw std::invalid_argument("config: '" + key + "' is an empty list");
    return out;
}

std::vector<int> RunConfig::chart_hidden() const {
    const int h2 = chart_hidden2 > 0 ? chart_hidden2 : std::max(2, chart_hidden1 / 4);
    return {chart_hidden1, h2};
}

void RunConfig::validate() const {
    scenario.validate();
    train.validate();
    keygen.validate();
    tracker.validate();
    const std::set<int> allowed{16, 64, 128};
    if (!allowed.count(scenario.n_tx) || !allowed.count(scenario.n_rx))
        throw std::invalid_argument("run: codebook sizes must be one of 16, 64, 128");
    if (n_paths < 1) throw std::invalid_argument("run: n_paths must be >= 1");
    if (baseline_window < 0) throw std::invalid_argument("run: baseline_window must be >= 0");
    if (timeliness_k < 1) throw std::invalid_argument("run: timeliness.k must be >= 1");
    if (chart_hidden1 < 1) throw std::invalid_argument("run: chart.hidden1 must be >= 1");
    if (target_set_size < 1) throw std::invalid_argument("run: select.target_set_size must be >= 1");
    if (out_dir.empty()) throw std::invalid_argument("run: out_dir must not be empty");
}

RunConfig RunConfig::from_config(const Config& c) {
    RunConfig r;
    r.out_dir = c.get_string("run.out_dir", r.out_dir);
    r.n_paths = c.get_int("run.n_paths", r.n_paths);
    r.baseline_window = c.get_int("run.baseline_window", r.baseline_window);
    r.timeliness_k = c.get_int("timeliness.k", r.timeliness_k);
    r.timeliness_codebooks = c.get_int_list("timeliness.codebooks", r.timeliness_codebooks);
    r.sweep_hidden = c.get_int_list("sweep.hidden_widths", r.sweep_hidden);
    r.sweep_modes = c.get_string_list("sweep.input_modes", r.sweep_modes);

    r.scenario.n_tx = c.get_int("run.n_tx", r.scenario.n_tx);
    r.scenario.n_rx = c.get_int("run.n_rx", r.scenario.n_rx);
    r.scenario.n_steps = c.get_int("scenario.n_steps", r.scenario.n_steps);
    r.scenario.step_seconds = c.get_double("scenario.step_seconds", r.scenario.step_seconds);
    r.scenario.segment_length_los = c.get_int("scenario.segment_len_los", r.scenario.segment_length_los);
    r.scenario.segment_length_nlos = c.get_int("scenario.segment_len_nlos", r.scenario.segment_length_nlos);
    r.scenario.max_clusters = c.get_int("scenario.max_clusters", r.scenario.max_clusters);
    r.scenario.angular_drift_rate = c.get_double("scenario.drift_rate", r.scenario.angular_drift_rate);
    r.scenario.jump_probability = c.get_double("scenario.jump_probability", r.scenario.jump_probability);
    r.scenario.nlos_gain_factor = c.get_double("scenario.nlos_gain_factor", r.scenario.nlos_gain_factor);
    r.scenario.noise_var = c.get_double("scenario.noise_var", r.scenario.noise_var);
    r.scenario.tx_power = c.get_double("scenario.tx_power", r.scenario.tx_power);
    r.scenario.seed = c.get_u64("scenario.seed", r.scenario.seed);

    r.train.learning_rate = c.get_double("train.learning_rate", r.train.learning_rate);
    r.train.batch_size = c.get_int("train.batch_size", r.train.batch_size);
    r.train.epochs = c.get_int("train.epochs", r.train.epochs);
    r.train.delta = c.get_double("train.delta", r.train.delta);
    r.train.loss_weight = c.get_double("train.loss_weight", r.train.loss_weight);
    r.train.pos_window = c.get_int("train.pos_window", r.train.pos_window);
    r.train.neg_window = c.get_int("train.neg_window", r.train.neg_window);
    r.train.seed = c.get_u64("train.seed", r.train.seed);

    r.input_mode = input_mode_from_name(c.get_string("chart.input_mode", "full5"));
    r.chart_hidden1 = c.get_int("chart.hidden1", r.chart_hidden1);
    r.chart_hidden2 = c.get_int("chart.hidden2", r.chart_hidden2);
    r.chart_activation = activation_from_name(c.get_string("chart.activation", "tanh"));
    r.chart_seed = c.get_u64("chart.seed", r.chart_seed);

    r.keygen.c = c.get_int("keygen.c", r.keygen.c);
    r.keygen.k_res = c.get_int("keygen.k_res", r.keygen.k_res);
    r.hash_seed = c.get_u64("hash.seed", r.hash_seed);
    r.target_set_size = c.get_int("select.target_set_size", r.target_set_size);

    r.tracker.snr_threshold_db = c.get_double("tracker.snr_threshold_db", r.tracker.snr_threshold_db);
    r.tracker.neighbor_radius = c.get_int("tracker.neighbor_radius", r.tracker.neighbor_radius);
    r.tracker.t_e = c.get_int("tracker.t_e", r.tracker.t_e);
    r.tracker.t_d = c.get_int("tracker.t_d", r.tracker.t_d);
    r.tracker.max_candidates = c.get_int("tracker.max_candidates", r.tracker.max_candidates);
    r.tracker.retrain_interval = c.get_int("tracker.retrain_interval", r.tracker.retrain_interval);

    r.validate();
    return r;
}

std::string defaults_text() {
    std::ostringstream out;
    for (const SchemaEntry& e : kSchema)
        out << e.key << " = " << e.fallback << "  # " << e.description << "\n";
    return out.str();
}

}  // namespace chartbeam
