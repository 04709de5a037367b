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

#ifndef CHARTBEAM_CHARTING_HPP
#define CHARTBEAM_CHARTING_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chartbeam/features.hpp"

namespace chartbeam {

enum class Activation { tanh_fn, sigmoid_fn };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string& name);

struct AffineLayer {
    Eigen::MatrixXd weight;
    Eigen::VectorXd bias;
};

/// (anchor, positive, negative) index triple into a dataset; mining
/// guarantees d(x_a, x_p) <= d(x_a, x_n) in feature space.
struct Triplet {
    int anchor = 0;
    int positive = 0;
    int negative = 0;
};

struct TrainConfig {
    double learning_rate = 1e-4;
    int batch_size = 256;
    int epochs = 200;
    double delta = 1.0;        // triplet margin
    double loss_weight = 1.0;  // reconstruction term weight
    int pos_window = 2;        // W_p: positives from |i - j| <= W_p
    int neg_window = 20;       // W_n: negatives from |i - k| > W_n
    std::uint64_t seed = 1;

    void validate() const;
};

struct ChartConfig {
    int input_dim = 5;
    std::vector<int> hidden = {256, 64};
    int latent_dim = 2;
    Activation activation = Activation::tanh_fn;
    std::uint64_t seed = 1;
};

/**
 * @brief The chart autoencoder.
 *
 * Affine layers with a bounded monotone activation between them; the
 * latent output and the final reconstruction stay linear. The decoder
 * mirrors the encoder dimensions in reverse. Inputs are z-scored with
 * statistics stored in the model.
 */
class ChartModel {
public:
    std::vector<AffineLayer> layers;  // encoder stack then decoder stack
    int encoder_depth = 0;
    Activation activation = Activation::tanh_fn;
    Eigen::VectorXd input_mean;
    Eigen::VectorXd input_scale;
    InputMode input_mode = InputMode::full5;  // which feature dims feed the chart

    int input_dim() const { return static_cast<int>(layers.front().weight.cols()); }
    int latent_dim() const { return static_cast<int>(layers[encoder_depth - 1].weight.rows()); }
    int depth() const { return static_cast<int>(layers.size()); }

    /// Per-dimension z-score statistics from a column-per-sample matrix;
    /// constant dimensions get unit scale.
    void fit_standardizer(const Eigen::MatrixXd& x);

    Eigen::MatrixXd standardize(const Eigen::MatrixXd& x) const;
    Eigen::MatrixXd unstandardize(const Eigen::MatrixXd& xs) const;

    Eigen::VectorXd encode(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd encode_batch(const Eigen::MatrixXd& x) const;
    Eigen::VectorXd decode(const Eigen::VectorXd& y) const;
    Eigen::MatrixXd decode_batch(const Eigen::MatrixXd& y) const;

    // Flat parameter views (per layer: weight column-major, then bias).
    Eigen::Index parameter_count() const;
    Eigen::VectorXd parameters() const;
    void set_parameters(const Eigen::VectorXd& theta);
};

/// Glorot-uniform weights, zero biases, identity standardizer.
ChartModel make_chart_model(const ChartConfig& config);

/// One triplet per anchor where possible: positive uniform within the
/// pos_window, negative uniform outside the neg_window, resampled (up
/// to 10 draws) until the feature-space ordering holds, else skipped.
std::vector<Triplet> mine_triplets(const Eigen::MatrixXd& x, const TrainConfig& config);

/// Mean hinge over triplets: max(0, ||ya - yp|| - ||ya - yn|| + delta).
double triplet_loss(const ChartModel& model, const Eigen::MatrixXd& x,
                    const std::vector<Triplet>& triplets, double delta);

/// Same hinge evaluated on precomputed chart points (column i = point i).
double triplet_loss_from_chart(const Eigen::MatrixXd& chart, const std::vector<Triplet>& triplets,
                               double delta);

/// Mean squared round-trip error (1/N) sum ||x - G^-1(G(x))||^2.
double reconstruction_loss(const ChartModel& model, const Eigen::MatrixXd& x);

/// Batch objective C_n + loss_weight * C_r with its analytic gradient in
/// packed parameter order (pass grad = nullptr to skip the backward pass).
double loss_and_gradient(const ChartModel& model, const Eigen::MatrixXd& x_recon,
                         const Eigen::MatrixXd& x_anchor, const Eigen::MatrixXd& x_positive,
                         const Eigen::MatrixXd& x_negative, double delta, double loss_weight,
                         Eigen::VectorXd* grad);

struct EpochLoss {
    double triplet = 0.0;
    double reconstruction = 0.0;
    double total() const { return triplet + reconstruction; }
};

struct TrainResult {
    ChartModel model;
    std::vector<EpochLoss> history;  // one entry per epoch (mean batch losses)
};

/// Adam minimization of C_n + loss_weight * C_r. Deterministic for a
/// fixed seed; throws if the loss turns non-finite.
TrainResult train(const Eigen::MatrixXd& x, const std::vector<Triplet>& triplets,
                  const TrainConfig& config, const ChartModel& init);
TrainResult train(const Eigen::MatrixXd& x, const TrainConfig& config, const ChartModel& init);

/// Encode every column, order preserved (latent_dim x n).
Eigen::MatrixXd chart_dataset(const ChartModel& model, const Eigen::MatrixXd& x);

/// Mean over points of |kNN(chart) intersect kNN(features)| / k.
double neighborhood_preservation(const Eigen::MatrixXd& chart, const Eigen::MatrixXd& features, int k);

/// Versioned text dump; reloading reproduces encodings bit for bit.
void save_chart_model(const ChartModel& model, const std::string& path);
ChartModel load_chart_model(const std::string& path);

}  // namespace chartbeam

#endif  // CHARTBEAM_CHARTING_HPP
