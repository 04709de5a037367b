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

#include "chartbeam/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "chartbeam/io_util.hpp"

namespace chartbeam {

Eigen::VectorXd FeatureVector::as_vector() const {
    Eigen::VectorXd v(5);
    v << aoa_az, aod_el, aod_az, aoa_el, tau;
    return v;
}

FeatureVector FeatureVector::from_vector(const Eigen::VectorXd& v) {
    if (v.size() != 5) throw std::invalid_argument("FeatureVector: expected 5 dims");
    return FeatureVector{v(0), v(1), v(2), v(3), v(4)};
}

std::vector<int> input_mode_indices(InputMode mode) {
    switch (mode) {
        case InputMode::azimuths3: return {0, 2, 4};
        case InputMode::elevations3: return {1, 3, 4};
        case InputMode::full5: return {0, 1, 2, 3, 4};
    }
    throw std::invalid_argument("input_mode_indices: unknown mode");
}

int input_mode_dim(InputMode mode) { return static_cast<int>(input_mode_indices(mode).size()); }

std::string input_mode_name(InputMode mode) {
    switch (mode) {
        case InputMode::azimuths3: return "az3";
        case InputMode::elevations3: return "el3";
        case InputMode::full5: return "full5";
    }
    throw std::invalid_argument("input_mode_name: unknown mode");
}

InputMode input_mode_from_name(const std::string& name) {
    if (name == "az3") return InputMode::azimuths3;
    if (name == "el3") return InputMode::elevations3;
    if (name == "full5") return InputMode::full5;
    throw std::invalid_argument("input_mode_from_name: unknown mode '" + name + "'");
}

Eigen::VectorXd select_input(const FeatureVector& f, InputMode mode) {
    const Eigen::VectorXd full = f.as_vector();
    const std::vector<int> idx = input_mode_indices(mode);
    Eigen::VectorXd v(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) v(i) = full(idx[i]);
    return v;
}

Eigen::MatrixXd feature_matrix(const std::vector<FeatureVector>& features, InputMode mode) {
    Eigen::MatrixXd x(input_mode_dim(mode), features.size());
    for (std::size_t i = 0; i < features.size(); ++i) x.col(i) = select_input(features[i], mode);
    return x;
}

FeatureVector build_feature(const ChannelSnapshot& snapshot, double tau) {
    if (snapshot.paths.empty()) throw std::invalid_argument("build_feature: snapshot has no paths");
    const Path* dominant = &snapshot.paths.front();
    for (const Path& p : snapshot.paths)
        if (std::abs(p.gain) > std::abs(dominant->gain)) dominant = &p;
    return FeatureVector{dominant->theta_r, dominant->elev_t, dominant->theta_t, dominant->elev_r, tau};
}

std::vector<FeatureVector> features_from_trajectory(const Trajectory& trajectory) {
    std::vector<FeatureVector> out;
    out.reserve(trajectory.n_steps());
    for (int t = 0; t < trajectory.n_steps(); ++t) {
        ChannelSnapshot snap;
        snap.paths = trajectory.steps[t];
        snap.t = t;
        out.push_back(build_feature(snap, trajectory.tau_at(t)));
    }
    return out;
}

ScalingParams::ScalingParams(double omega_in, double sigma_in) : omega(omega_in), sigma(sigma_in) {
    if (!(omega > 0.0)) throw std::invalid_argument("ScalingParams: omega must be > 0");
    if (!(sigma > 0.0)) throw std::invalid_argument("ScalingParams: sigma must be > 0");
    beta = std::isinf(sigma) ? 1.0 : 1.0 + 1.0 / (2.0 * sigma);
}

SecondMoment raw_second_moment(const std::vector<Eigen::VectorXcd>& samples) {
    if (samples.empty()) throw std::invalid_argument("raw_second_moment: no samples");
    const Eigen::Index dim = samples.front().size();
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(dim, dim);
    for (const Eigen::VectorXcd& x : samples) {
        if (x.size() != dim) throw std::invalid_argument("raw_second_moment: length mismatch");
        acc.noalias() += x * x.adjoint();
    }
    acc /= static_cast<double>(samples.size());
    return SecondMoment{std::move(acc), static_cast<int>(samples.size())};
}

SecondMoment scale_r2m(const SecondMoment& x_bar, const ScalingParams& params) {
    const double norm = x_bar.mat.norm();
    if (!(norm > 0.0)) throw std::invalid_argument("scale_r2m: zero-norm second moment");
    const double factor = std::pow(params.omega, params.beta - 1.0) / std::pow(norm, params.beta);
    return SecondMoment{factor * x_bar.mat, x_bar.t_count};
}

double dissimilarity(const Eigen::VectorXd& y1, const Eigen::VectorXd& y2) {
    if (y1.size() != y2.size()) throw std::invalid_argument("dissimilarity: dimension mismatch");
    return (y1 - y2).norm();
}

Eigen::MatrixXd r2m_feature_matrix(const std::vector<FeatureVector>& features, int window,
                                   const ScalingParams& params) {
    if (window < 1) throw std::invalid_argument("r2m_feature_matrix: window must be >= 1");
    if (features.empty()) throw std::invalid_argument("r2m_feature_matrix: no features");
    Eigen::MatrixXd out(25, features.size());
    for (std::size_t t = 0; t < features.size(); ++t) {
        std::vector<Eigen::VectorXcd> batch;
        const std::size_t lo = t + 1 >= static_cast<std::size_t>(window) ? t + 1 - window : 0;
        for (std::size_t i = lo; i <= t; ++i)
            batch.push_back(features[i].as_vector().cast<cd>());
        const SecondMoment scaled = scale_r2m(raw_second_moment(batch), params);
        Eigen::MatrixXd real_part = scaled.mat.real();
        out.col(t) = Eigen::Map<Eigen::VectorXd>(real_part.data(), real_part.size());
    }
    return out;
}

void save_feature_csv(const std::vector<FeatureVector>& features, const std::vector<BeamPair>& truth,
                      const std::string& path) {
    if (features.size() != truth.size())
        throw std::invalid_argument("save_feature_csv: feature/truth length mismatch");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_feature_csv: cannot open " + path);
    out << "t,aoa_az,aod_el,aod_az,aoa_el,tau,truth_m,truth_n\n";
    for (std::size_t t = 0; t < features.size(); ++t) {
        const FeatureVector& f = features[t];
        out << t << ',' << io::fmt(f.aoa_az) << ',' << io::fmt(f.aod_el) << ',' << io::fmt(f.aod_az)
            << ',' << io::fmt(f.aoa_el) << ',' << io::fmt(f.tau) << ',' << truth[t].rx << ','
            << truth[t].tx << '\n';
    }
    if (!out) throw std::runtime_error("save_feature_csv: write failed for " + path);
}

void load_feature_csv(const std::string& path, std::vector<FeatureVector>& features,
                      std::vector<BeamPair>& truth) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_feature_csv: cannot open " + path);
    features.clear();
    truth.clear();
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (header) { header = false; continue; }
        const std::vector<std::string> cols = io::split(line, ',');
        if (cols.size() != 8) throw std::runtime_error("load_feature_csv: bad row in " + path);
        FeatureVector f;
        f.aoa_az = std::stod(cols[1]);
        f.aod_el = std::stod(cols[2]);
        f.aod_az = std::stod(cols[3]);
        f.aoa_el = std::stod(cols[4]);
        f.tau = std::stod(cols[5]);
        features.push_back(f);
        truth.push_back(BeamPair{std::stoi(cols[6]), std::stoi(cols[7])});
    }
}

}  // namespace chartbeam
