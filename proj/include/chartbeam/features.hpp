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

#ifndef CHARTBEAM_FEATURES_HPP
#define CHARTBEAM_FEATURES_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chartbeam/channel.hpp"
#include "chartbeam/trajectory.hpp"

namespace chartbeam {

/// Per-step CSI feature: dominant-path angles (sine-space) plus the
/// normalized timestamp, in the fixed order
/// [aoa azimuth, aod elevation, aod azimuth, aoa elevation, tau].
struct FeatureVector {
    double aoa_az = 0.0;
    double aod_el = 0.0;
    double aod_az = 0.0;
    double aoa_el = 0.0;
    double tau = 0.0;

    Eigen::VectorXd as_vector() const;
    static FeatureVector from_vector(const Eigen::VectorXd& v);
};

/// Chart input selection: both azimuths + tau, both elevations + tau,
/// or the full 5-dim feature.
enum class InputMode { azimuths3, elevations3, full5 };

std::vector<int> input_mode_indices(InputMode mode);
int input_mode_dim(InputMode mode);
std::string input_mode_name(InputMode mode);
InputMode input_mode_from_name(const std::string& name);

Eigen::VectorXd select_input(const FeatureVector& f, InputMode mode);

/// Column-per-sample matrix of selected feature dims.
Eigen::MatrixXd feature_matrix(const std::vector<FeatureVector>& features, InputMode mode);

/// Angles come from the strongest (max |gain|) path; tau is supplied by
/// the caller, already normalized to [0, 1].
FeatureVector build_feature(const ChannelSnapshot& snapshot, double tau);

/// Features for every step of a trajectory, tau = t / (n_steps - 1).
std::vector<FeatureVector> features_from_trajectory(const Trajectory& trajectory);

/// Path-loss scaling parameters; beta = 1 + 1/(2*sigma), with beta = 1
/// exactly when sigma is infinite.
struct ScalingParams {
    double omega = 1.0;
    double sigma = std::numeric_limits<double>::infinity();
    double beta = 1.0;

    ScalingParams() = default;
    ScalingParams(double omega_in, double sigma_in);
};

/// Sample-averaged outer product of CSI vectors (Hermitian PSD).
struct SecondMoment {
    Eigen::MatrixXcd mat;
    int t_count = 0;
};

/// X_bar = (1/T) sum_t x_t x_t^H. Rejects an empty sample list and
/// mismatched lengths.
SecondMoment raw_second_moment(const std::vector<Eigen::VectorXcd>& samples);

/// X_tilde = (omega^(beta-1) / ||X_bar||_F^beta) * X_bar. Rejects a
/// zero-norm input.
SecondMoment scale_r2m(const SecondMoment& x_bar, const ScalingParams& params);

/// Euclidean distance between chart points (the chart dissimilarity).
double dissimilarity(const Eigen::VectorXd& y1, const Eigen::VectorXd& y2);

/// Optional chart-input mode: per step, the scaled R2M of the trailing
/// `window` feature vectors, flattened column-major. Inputs are real so
/// the moment matrix is real symmetric; its real part is emitted.
Eigen::MatrixXd r2m_feature_matrix(const std::vector<FeatureVector>& features, int window,
                                   const ScalingParams& params);

/// Feature dataset CSV with columns
/// t,aoa_az,aod_el,aod_az,aoa_el,tau,truth_m,truth_n.
void save_feature_csv(const std::vector<FeatureVector>& features, const std::vector<BeamPair>& truth,
                      const std::string& path);
void load_feature_csv(const std::string& path, std::vector<FeatureVector>& features,
                      std::vector<BeamPair>& truth);

}  // namespace chartbeam

#endif  // CHARTBEAM_FEATURES_HPP
