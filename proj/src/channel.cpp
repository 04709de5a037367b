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

#include "chartbeam/channel.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace chartbeam {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
}

ArrayGeometry ArrayGeometry::ula(int n, double spacing) {
    if (n < 1) throw std::invalid_argument("ArrayGeometry: element count must be >= 1");
    if (spacing <= 0.0) throw std::invalid_argument("ArrayGeometry: spacing must be > 0");
    return ArrayGeometry{Kind::ula, n, 1, spacing};
}

ArrayGeometry ArrayGeometry::planar(int m, int n, double spacing) {
    if (m < 1 || n < 1) throw std::invalid_argument("ArrayGeometry: grid dims must be >= 1");
    if (spacing <= 0.0) throw std::invalid_argument("ArrayGeometry: spacing must be > 0");
    return ArrayGeometry{Kind::planar, m, n, spacing};
}

Eigen::VectorXcd array_response(double theta, const ArrayGeometry& geometry) {
    if (geometry.kind != ArrayGeometry::Kind::ula)
        throw std::invalid_argument("array_response: geometry must be ULA");
    if (!(std::abs(theta) <= 1.0))
        throw std::invalid_argument("array_response: |theta| must be <= 1");

    const int n = geometry.rows;
    const double norm = 1.0 / std::sqrt(static_cast<double>(n));
    Eigen::VectorXcd a(n);
    for (int i = 0; i < n; ++i) {
        const double phase = two_pi * i * geometry.spacing * theta;
        a(i) = std::polar(norm, phase);
    }
    return a;
}

Eigen::VectorXcd planar_response(double alpha, double phi, const ArrayGeometry& geometry) {
    if (geometry.kind != ArrayGeometry::Kind::planar)
        throw std::invalid_argument("planar_response: geometry must be planar");

    // k * x_m = 2*pi * m * spacing with coordinates in wavelength units.
    const double u = std::sin(phi) * std::cos(alpha);
    const double v = std::sin(phi) * std::sin(alpha);
    Eigen::VectorXcd a(geometry.rows * geometry.cols);
    for (int m = 0; m < geometry.rows; ++m) {
        for (int n = 0; n < geometry.cols; ++n) {
            const double phase = two_pi * geometry.spacing * (m * u + n * v);
            a(m * geometry.cols + n) = std::polar(1.0, phase);
        }
    }
    return a;
}

Codebook dft_codebook(int n, Codebook::Side side) {
    if (n < 1) throw std::invalid_argument("dft_codebook: size must be >= 1");
    const double norm = 1.0 / std::sqrt(static_cast<double>(n));
    Eigen::MatrixXcd c(n, n);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            c(i, k) = std::polar(norm, two_pi * i * k / static_cast<double>(n));
    return Codebook{std::move(c), side};
}

double beam_center_angle(int k, int n) {
    if (k < 0 || k >= n) throw std::invalid_argument("beam_center_angle: index out of range");
    return k < (n + 1) / 2 ? 2.0 * k / n : 2.0 * (k - n) / n;
}

int quantize_to_beam(double theta, int n) {
    if (!(std::abs(theta) <= 1.0))
        throw std::invalid_argument("quantize_to_beam: |theta| must be <= 1");
    const long k = std::lround(theta * n / 2.0);
    return static_cast<int>(((k % n) + n) % n);
}

ChannelSnapshot channel_matrix(const std::vector<Path>& paths, const ArrayGeometry& rx_geometry,
                               const ArrayGeometry& tx_geometry, int t) {
    if (paths.empty()) throw std::invalid_argument("channel_matrix: path list is empty");
    if (rx_geometry.kind != ArrayGeometry::Kind::ula || tx_geometry.kind != ArrayGeometry::Kind::ula)
        throw std::invalid_argument("channel_matrix: geometries must be ULA");

    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(rx_geometry.n_elements(), tx_geometry.n_elements());
    for (const Path& p : paths) {
        const Eigen::VectorXcd ar = array_response(p.theta_r, rx_geometry);
        const Eigen::VectorXcd at = array_response(p.theta_t, tx_geometry);
        h.noalias() += p.gain * (ar * at.adjoint());
    }
    return ChannelSnapshot{paths, std::move(h), t};
}

cd received_signal(const Eigen::MatrixXcd& h, const Eigen::VectorXcd& f, const Eigen::VectorXcd& w,
                   cd pilot, double noise_var, std::mt19937_64& rng) {
    if (f.size() != h.cols() || w.size() != h.rows())
        throw std::invalid_argument("received_signal: dimension mismatch");
    if (noise_var < 0.0) throw std::invalid_argument("received_signal: noise_var must be >= 0");

    cd y = w.dot(h * f) * pilot;
    if (noise_var > 0.0) {
        // Circular complex Gaussian: each component has variance noise_var/2.
        std::normal_distribution<double> gauss(0.0, std::sqrt(noise_var / 2.0));
        cd wn{0.0, 0.0};
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            const cd n{gauss(rng), gauss(rng)};
            wn += std::conj(w(i)) * n;
        }
        y += wn;
    }
    return y;
}

Eigen::MatrixXd beam_powers(const Eigen::MatrixXcd& h, const Codebook& cb_rx, const Codebook& cb_tx,
                            const std::vector<int>& rx_idx, const std::vector<int>& tx_idx) {
    Eigen::MatrixXd p(rx_idx.size(), tx_idx.size());
    Eigen::VectorXcd hf(h.rows());
    for (std::size_t j = 0; j < tx_idx.size(); ++j) {
        if (tx_idx[j] < 0 || tx_idx[j] >= cb_tx.size())
            throw std::invalid_argument("beam_powers: tx index out of range");
        hf.noalias() = h * cb_tx.vectors.col(tx_idx[j]);
        for (std::size_t i = 0; i < rx_idx.size(); ++i) {
            if (rx_idx[i] < 0 || rx_idx[i] >= cb_rx.size())
                throw std::invalid_argument("beam_powers: rx index out of range");
            p(i, j) = std::norm(cb_rx.vectors.col(rx_idx[i]).dot(hf));
        }
    }
    return p;
}

BeamSelection best_beam_oracle(const Eigen::MatrixXcd& h, const Codebook& cb_tx, const Codebook& cb_rx) {
    if (cb_rx.size() != h.rows() || cb_tx.size() != h.cols())
        throw std::invalid_argument("best_beam_oracle: codebook sizes must match channel dims");

    std::vector<int> all_rx(cb_rx.size()), all_tx(cb_tx.size());
    for (int i = 0; i < cb_rx.size(); ++i) all_rx[i] = i;
    for (int i = 0; i < cb_tx.size(); ++i) all_tx[i] = i;
    const Eigen::MatrixXd p = beam_powers(h, cb_rx, cb_tx, all_rx, all_tx);

    BeamSelection best{{0, 0}, p(0, 0)};
    for (int m = 0; m < p.rows(); ++m)
        for (int n = 0; n < p.cols(); ++n)
            if (p(m, n) > best.power) best = BeamSelection{{m, n}, p(m, n)};
    return best;
}

double snr_of_pair(const Eigen::MatrixXcd& h, int m, int n, const Codebook& cb_rx,
                   const Codebook& cb_tx, double noise_var, double tx_power) {
    if (noise_var < 0.0) throw std::invalid_argument("snr_of_pair: noise_var must be >= 0");
    const Eigen::MatrixXd p = beam_powers(h, cb_rx, cb_tx, {m}, {n});
    if (noise_var == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(tx_power * p(0, 0) / noise_var);
}

}  // namespace chartbeam
