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

#ifndef CHARTBEAM_CHANNEL_HPP
#define CHARTBEAM_CHANNEL_HPP

#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace chartbeam {

using cd = std::complex<double>;

/**
 * @brief Antenna array description.
 *
 * ULA arrays are described by their element count, planar arrays by an
 * M x N grid. Element spacing is given in wavelengths (default half).
 */
struct ArrayGeometry {
    enum class Kind { ula, planar };

    Kind kind = Kind::ula;
    int rows = 1;          // N for ULA, M for planar
    int cols = 1;          // N for planar, unused for ULA
    double spacing = 0.5;  // element spacing in wavelengths

    int n_elements() const { return kind == Kind::ula ? rows : rows * cols; }

    static ArrayGeometry ula(int n, double spacing = 0.5);
    static ArrayGeometry planar(int m, int n, double spacing = 0.5);
};

/// One propagation path. Angles are spatial (sine-space), in [-1, 1].
/// Elevation components stay zero for pure azimuth (ULA) scenarios.
struct Path {
    cd gain{1.0, 0.0};
    double theta_t = 0.0;  // spatial AoD azimuth
    double theta_r = 0.0;  // spatial AoA azimuth
    double elev_t = 0.0;   // spatial AoD elevation
    double elev_r = 0.0;   // spatial AoA elevation
};

/// The channel at one time step: the generating paths and the resulting
/// n_rx x n_tx matrix.
struct ChannelSnapshot {
    std::vector<Path> paths;
    Eigen::MatrixXcd h;
    int t = 0;
};

/// DFT beamforming codebook; column k is the beam vector c_k.
struct Codebook {
    enum class Side { tx, rx };

    Eigen::MatrixXcd vectors;
    Side side = Side::tx;

    int size() const { return static_cast<int>(vectors.cols()); }
    Eigen::VectorXcd beam(int k) const { return vectors.col(k); }
};

/// Receiver/transmitter beam index pair (m = combiner, n = precoder).
struct BeamPair {
    int rx = 0;
    int tx = 0;

    friend bool operator==(const BeamPair&, const BeamPair&) = default;
};

struct BeamSelection {
    BeamPair pair;
    double power = 0.0;
};

/// ULA steering vector: entry i = exp(j*2*pi*i*spacing*theta)/sqrt(N).
/// Rejects |theta| > 1.
Eigen::VectorXcd array_response(double theta, const ArrayGeometry& geometry);

/// Planar array response, element (m, n) = exp(j*k*(x_m sin(phi)cos(alpha)
/// + y_n sin(phi)sin(alpha))), flattened row-major over the M x N grid.
/// Angles are in radians; no normalization is applied.
Eigen::VectorXcd planar_response(double alpha, double phi, const ArrayGeometry& geometry);

/// N-beam DFT codebook; column k entry i = exp(j*2*pi*i*k/N)/sqrt(N).
Codebook dft_codebook(int n, Codebook::Side side = Codebook::Side::tx);

/// Spatial angle of the beam-center of codebook column k: 2k/N folded
/// into [-1, 1).
double beam_center_angle(int k, int n);

/// Nearest codebook index for a spatial angle in [-1, 1].
int quantize_to_beam(double theta, int n);

/// Sparse multipath channel H = sum_l beta_l a_r(theta_r) a_t(theta_t)^H
/// over ULA geometries. Rejects an empty path list and out-of-range angles.
ChannelSnapshot channel_matrix(const std::vector<Path>& paths, const ArrayGeometry& rx_geometry,
                               const ArrayGeometry& tx_geometry, int t = 0);

/// y = w^H H f x + w^H n with n circular complex Gaussian of per-element
/// variance noise_var. Deterministic when noise_var == 0.
cd received_signal(const Eigen::MatrixXcd& h, const Eigen::VectorXcd& f, const Eigen::VectorXcd& w,
                   cd pilot, double noise_var, std::mt19937_64& rng);

/// |w_m^H H f_n|^2 for the given index subsets; result(i, j) corresponds
/// to the pair (rx_idx[i], tx_idx[j]). All beam-sweeping paths (oracle,
/// candidate scans, baselines) share this primitive so restricted scans
/// reproduce the exhaustive values bit for bit.
Eigen::MatrixXd beam_powers(const Eigen::MatrixXcd& h, const Codebook& cb_rx, const Codebook& cb_tx,
                            const std::vector<int>& rx_idx, const std::vector<int>& tx_idx);

/// Exhaustive argmax of |w_m^H H f_n|^2; ties resolve to the lowest
/// (m, n) in lexicographic order.
BeamSelection best_beam_oracle(const Eigen::MatrixXcd& h, const Codebook& cb_tx, const Codebook& cb_rx);

/// 10*log10(tx_power * |w_m^H H f_n|^2 / noise_var); +inf when noise_var
/// is zero. Negative noise_var is rejected.
double snr_of_pair(const Eigen::MatrixXcd& h, int m, int n, const Codebook& cb_rx,
                   const Codebook& cb_tx, double noise_var, double tx_power);

}  // namespace chartbeam

#endif  // CHARTBEAM_CHANNEL_HPP
