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

#include "chartbeam/charting.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "chartbeam/io_util.hpp"

namespace chartbeam {

namespace {

constexpr double kNormEps = 1e-12;  // distances below this get a zero hinge direction

Eigen::MatrixXd apply_activation(Activation a, const Eigen::MatrixXd& z) {
    switch (a) {
        case Activation::tanh_fn: return z.array().tanh().matrix();
        case Activation::sigmoid_fn: return (1.0 / (1.0 + (-z.array()).exp())).matrix();
    }
    throw std::logic_error("apply_activation: unknown activation");
}

// Derivative expressed through the activation output.
Eigen::ArrayXXd activation_grad(Activation a, const Eigen::MatrixXd& out) {
    switch (a) {
        case Activation::tanh_fn: return 1.0 - out.array().square();
        case Activation::sigmoid_fn: return out.array() * (1.0 - out.array());
    }
    throw std::logic_error("activation_grad: unknown activation");
}

struct StackCache {
    Eigen::MatrixXd input;              // standardized input of the first layer
    std::vector<Eigen::MatrixXd> post;  // output of each layer in the range
};

// Layer l is followed by the activation unless it produces the latent
// code or the final reconstruction.
bool layer_has_activation(const ChartModel& m, int l) {
    return l != m.encoder_depth - 1 && l != m.depth() - 1;
}

Eigen::MatrixXd forward_range(const ChartModel& m, int first, int last, const Eigen::MatrixXd& in,
                              StackCache* cache) {
    Eigen::MatrixXd cur = in;
    if (cache) {
        cache->input = in;
        cache->post.clear();
        cache->post.reserve(last - first);
    }
    for (int l = first; l < last; ++l) {
        Eigen::MatrixXd z = (m.layers[l].weight * cur).colwise() + m.layers[l].bias;
        cur = layer_has_activation(m, l) ? apply_activation(m.activation, z) : std::move(z);
        if (cache) cache->post.push_back(cur);
    }
    return cur;
}

// Accumulates dL/dW, dL/db for layers [first, last) given dL/d(output).
void backward_range(const ChartModel& m, int first, int last, const StackCache& cache,
                    Eigen::MatrixXd grad_out, std::vector<AffineLayer>& grads) {
    for (int l = last - 1; l >= first; --l) {
        if (layer_has_activation(m, l))
            grad_out.array() *= activation_grad(m.activation, cache.post[l - first]);
        const Eigen::MatrixXd& layer_in = l == first ? cache.input : cache.post[l - first - 1];
        grads[l].weight.noalias() += grad_out * layer_in.transpose();
        grads[l].bias.noalias() += grad_out.rowwise().sum();
        if (l > first) grad_out = m.layers[l].weight.transpose() * grad_out;
    }
}

std::vector<AffineLayer> zero_grads(const ChartModel& m) {
    std::vector<AffineLayer> g(m.layers.size());
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        g[l].weight = Eigen::MatrixXd::Zero(m.layers[l].weight.rows(), m.layers[l].weight.cols());
        g[l].bias = Eigen::VectorXd::Zero(m.layers[l].bias.size());
    }
    return g;
}

// Mean hinge over the batch; writes d(loss)/d(encoding) for all three roles.
double triplet_batch_loss(const Eigen::MatrixXd& ya, const Eigen::MatrixXd& yp,
                          const Eigen::MatrixXd& yn, double delta, Eigen::MatrixXd* da,
                          Eigen::MatrixXd* dp, Eigen::MatrixXd* dn) {
    const Eigen::Index b = ya.cols();
    double loss = 0.0;
    if (da) {
        da->setZero(ya.rows(), b);
        dp->setZero(ya.rows(), b);
        dn->setZero(ya.rows(), b);
    }
    for (Eigen::Index i = 0; i < b; ++i) {
        const Eigen::VectorXd u = ya.col(i) - yp.col(i);
        const Eigen::VectorXd v = ya.col(i) - yn.col(i);
        const double du = u.norm();
        const double dv = v.norm();
        const double margin = du - dv + delta;
        if (margin <= 0.0) continue;
        loss += margin;
        if (!da) continue;
        const Eigen::VectorXd uh = du > kNormEps ? (u / du).eval() : Eigen::VectorXd::Zero(u.size());
        const Eigen::VectorXd vh = dv > kNormEps ? (v / dv).eval() : Eigen::VectorXd::Zero(v.size());
        da->col(i) = (uh - vh) / static_cast<double>(b);
        dp->col(i) = -uh / static_cast<double>(b);
        dn->col(i) = vh / static_cast<double>(b);
    }
    return loss / static_cast<double>(b);
}

struct BatchLoss {
    double triplet = 0.0;
    double reconstruction = 0.0;
};

// Gradient of C_n(batch) + loss_weight * C_r(recon batch) on standardized
// inputs; accumulates into grads when non-null.
BatchLoss batch_loss_and_grads(const ChartModel& m, const Eigen::MatrixXd& xs_recon,
                               const Eigen::MatrixXd& xsa, const Eigen::MatrixXd& xsp,
                               const Eigen::MatrixXd& xsn, double delta, double loss_weight,
                               std::vector<AffineLayer>* grads) {
    BatchLoss out;
    const int enc = m.encoder_depth;
    const int all = m.depth();

    if (xsa.cols() > 0) {
        StackCache ca, cp, cn;
        const Eigen::MatrixXd ya = forward_range(m, 0, enc, xsa, grads ? &ca : nullptr);
        const Eigen::MatrixXd yp = forward_range(m, 0, enc, xsp, grads ? &cp : nullptr);
        const Eigen::MatrixXd yn = forward_range(m, 0, enc, xsn, grads ? &cn : nullptr);
        Eigen::MatrixXd da, dp, dn;
        out.triplet = triplet_batch_loss(ya, yp, yn, delta, grads ? &da : nullptr,
                                         grads ? &dp : nullptr, grads ? &dn : nullptr);
        if (grads) {
            backward_range(m, 0, enc, ca, std::move(da), *grads);
            backward_range(m, 0, enc, cp, std::move(dp), *grads);
            backward_range(m, 0, enc, cn, std::move(dn), *grads);
        }
    }

    if (xs_recon.cols() > 0 && loss_weight != 0.0) {
        StackCache cache;
        const Eigen::MatrixXd xhat = forward_range(m, 0, all, xs_recon, grads ? &cache : nullptr);
        const Eigen::MatrixXd residual = xhat - xs_recon;
        // Raw-unit error: the residual per dimension is scaled back by the
        // standardizer, so the squared error carries scale^2.
        const Eigen::ArrayXd scale2 = m.input_scale.array().square();
        out.reconstruction =
            (residual.array().square().colwise() * scale2).sum() / static_cast<double>(xs_recon.cols());
        if (grads) {
            Eigen::MatrixXd dout =
                (residual.array().colwise() * scale2).matrix() *
                (2.0 * loss_weight / static_cast<double>(xs_recon.cols()));
            backward_range(m, 0, all, cache, std::move(dout), *grads);
        }
    }
    return out;
}

void pack_grads(const std::vector<AffineLayer>& grads, Eigen::VectorXd& out) {
    Eigen::Index total = 0;
    for (const AffineLayer& g : grads) total += g.weight.size() + g.bias.size();
    out.resize(total);
    Eigen::Index at = 0;
    for (const AffineLayer& g : grads) {
        out.segment(at, g.weight.size()) = Eigen::Map<const Eigen::VectorXd>(g.weight.data(), g.weight.size());
        at += g.weight.size();
        out.segment(at, g.bias.size()) = g.bias;
        at += g.bias.size();
    }
}

struct AdamState {
    std::vector<AffineLayer> m, v;
    long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    explicit AdamState(const ChartModel& model) : m(zero_grads(model)), v(zero_grads(model)) {}
};

void adam_step(ChartModel& model, const std::vector<AffineLayer>& grads, AdamState& st, double lr) {
    ++st.step;
    const double c1 = 1.0 - std::pow(st.beta1, st.step);
    const double c2 = 1.0 - std::pow(st.beta2, st.step);
    const auto update = [&](auto& param, auto& m1, auto& m2, const auto& g) {
        m1 = st.beta1 * m1 + (1.0 - st.beta1) * g;
        m2 = (st.beta2 * m2.array() + (1.0 - st.beta2) * g.array().square()).matrix();
        param.array() -= lr * (m1.array() / c1) / ((m2.array() / c2).sqrt() + st.eps);
    };
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        update(model.layers[l].weight, st.m[l].weight, st.v[l].weight, grads[l].weight);
        update(model.layers[l].bias, st.m[l].bias, st.v[l].bias, grads[l].bias);
    }
}

}  // namespace

std::string activation_name(Activation a) {
    return a == Activation::tanh_fn ? "tanh" : "sigmoid";
}

Activation activation_from_name(const std::string& name) {
    if (name == "tanh") return Activation::tanh_fn;
    if (name == "sigmoid") return Activation::sigmoid_fn;
    throw std::invalid_argument("activation_from_name: unknown activation '" + name + "'");
}

void TrainConfig::validate() const {
    if (!(delta > 0.0)) throw std::invalid_argument("train: delta must be > 0");
    if (pos_window < 1 || neg_window <= pos_window)
        throw std::invalid_argument("train: need neg_window > pos_window >= 1");
    if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
    if (epochs < 0) throw std::invalid_argument("train: epochs must be >= 0");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("train: learning_rate must be > 0");
    if (loss_weight < 0.0) throw std::invalid_argument("train: loss_weight must be >= 0");
}

void ChartModel::fit_standardizer(const Eigen::MatrixXd& x) {
    if (x.rows() != input_dim()) throw std::invalid_argument("fit_standardizer: dimension mismatch");
    if (x.cols() < 1) throw std::invalid_argument("fit_standardizer: empty dataset");
    input_mean = x.rowwise().mean();
    const Eigen::ArrayXd var =
        (x.colwise() - input_mean).array().square().rowwise().sum() / static_cast<double>(x.cols());
    input_scale = var.sqrt().matrix();
    for (Eigen::Index d = 0; d < input_scale.size(); ++d)
        if (input_scale(d) < 1e-12) input_scale(d) = 1.0;
}

Eigen::MatrixXd ChartModel::standardize(const Eigen::MatrixXd& x) const {
    return ((x.colwise() - input_mean).array().colwise() / input_scale.array()).matrix();
}

Eigen::MatrixXd ChartModel::unstandardize(const Eigen::MatrixXd& xs) const {
    return (xs.array().colwise() * input_scale.array()).matrix().colwise() + input_mean;
}

Eigen::VectorXd ChartModel::encode(const Eigen::VectorXd& x) const {
    return encode_batch(x);
}

Eigen::MatrixXd ChartModel::encode_batch(const Eigen::MatrixXd& x) const {
    if (x.rows() != input_dim()) throw std::invalid_argument("encode: dimension mismatch");
    return forward_range(*this, 0, encoder_depth, standardize(x), nullptr);
}

Eigen::VectorXd ChartModel::decode(const Eigen::VectorXd& y) const {
    return decode_batch(y);
}

Eigen::MatrixXd ChartModel::decode_batch(const Eigen::MatrixXd& y) const {
    if (y.rows() != latent_dim()) throw std::invalid_argument("decode: dimension mismatch");
    return unstandardize(forward_range(*this, encoder_depth, depth(), y, nullptr));
}

Eigen::Index ChartModel::parameter_count() const {
    Eigen::Index total = 0;
    for (const AffineLayer& l : layers) total += l.weight.size() + l.bias.size();
    return total;
}

Eigen::VectorXd ChartModel::parameters() const {
    Eigen::VectorXd theta(parameter_count());
    Eigen::Index at = 0;
    for (const AffineLayer& l : layers) {
        theta.segment(at, l.weight.size()) = Eigen::Map<const Eigen::VectorXd>(l.weight.data(), l.weight.size());
        at += l.weight.size();
        theta.segment(at, l.bias.size()) = l.bias;
        at += l.bias.size();
    }
    return theta;
}

void ChartModel::set_parameters(const Eigen::VectorXd& theta) {
    if (theta.size() != parameter_count())
        throw std::invalid_argument("set_parameters: size mismatch");
    Eigen::Index at = 0;
    for (AffineLayer& l : layers) {
        Eigen::Map<Eigen::VectorXd>(l.weight.data(), l.weight.size()) = theta.segment(at, l.weight.size());
        at += l.weight.size();
        l.bias = theta.segment(at, l.bias.size());
        at += l.bias.size();
    }
}

ChartModel make_chart_model(const ChartConfig& config) {
    if (config.input_dim < 1 || config.latent_dim < 1)
        throw std::invalid_argument("make_chart_model: dims must be >= 1");
    if (config.latent_dim >= config.input_dim)
        throw std::invalid_argument("make_chart_model: latent_dim must be < input_dim");
    for (int h : config.hidden)
        if (h < 1) throw std::invalid_argument("make_chart_model: hidden sizes must be >= 1");

    std::vector<int> dims;
    dims.push_back(config.input_dim);
    dims.insert(dims.end(), config.hidden.begin(), config.hidden.end());
    dims.push_back(config.latent_dim);
    for (std::size_t i = dims.size() - 1; i-- > 0;) dims.push_back(dims[i]);  // mirrored decoder

    ChartModel m;
    m.encoder_depth = static_cast<int>(config.hidden.size()) + 1;
    m.activation = config.activation;
    std::mt19937_64 rng(config.seed);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const int fan_in = dims[l];
        const int fan_out = dims[l + 1];
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> u(-bound, bound);
        AffineLayer layer;
        layer.weight.resize(fan_out, fan_in);
        for (int c = 0; c < fan_in; ++c)
            for (int r = 0; r < fan_out; ++r) layer.weight(r, c) = u(rng);
        layer.bias = Eigen::VectorXd::Zero(fan_out);
        m.layers.push_back(std::move(layer));
    }
    m.input_mean = Eigen::VectorXd::Zero(config.input_dim);
    m.input_scale = Eigen::VectorXd::Ones(config.input_dim);
    return m;
}

std::vector<Triplet> mine_triplets(const Eigen::MatrixXd& x, const TrainConfig& config) {
    config.validate();
    const int n = static_cast<int>(x.cols());
    if (n <= config.neg_window + 1)
        throw std::invalid_argument("mine_triplets: dataset shorter than neg_window + 2");

    std::mt19937_64 rng(config.seed);
    std::vector<Triplet> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - config.pos_window);
        const int hi = std::min(n - 1, i + config.pos_window);
        int j = std::uniform_int_distribution<int>(lo, hi - 1)(rng);
        if (j >= i) ++j;  // skip the anchor itself

        // Negatives live in [0, i - W_n) and (i + W_n, n).
        const int left = std::max(0, i - config.neg_window);
        const int right = std::max(0, n - 1 - (i + config.neg_window));
        if (left + right == 0) continue;
        const double dpos = (x.col(i) - x.col(j)).norm();
        bool found = false;
        int k = 0;
        for (int attempt = 0; attempt < 10 && !found; ++attempt) {
            const int r = std::uniform_int_distribution<int>(0, left + right - 1)(rng);
            k = r < left ? r : i + config.neg_window + 1 + (r - left);
            found = dpos <= (x.col(i) - x.col(k)).norm();
        }
        if (found) out.push_back(Triplet{i, j, k});
    }
    return out;
}

double triplet_loss(const ChartModel& model, const Eigen::MatrixXd& x,
                    const std::vector<Triplet>& triplets, double delta) {
    if (triplets.empty()) throw std::invalid_argument("triplet_loss: empty batch");
    return triplet_loss_from_chart(chart_dataset(model, x), triplets, delta);
}

double triplet_loss_from_chart(const Eigen::MatrixXd& chart, const std::vector<Triplet>& triplets,
                               double delta) {
    if (triplets.empty()) throw std::invalid_argument("triplet_loss_from_chart: empty batch");
    double loss = 0.0;
    for (const Triplet& t : triplets) {
        const double du = (chart.col(t.anchor) - chart.col(t.positive)).norm();
        const double dv = (chart.col(t.anchor) - chart.col(t.negative)).norm();
        loss += std::max(0.0, du - dv + delta);
    }
    return loss / static_cast<double>(triplets.size());
}

double reconstruction_loss(const ChartModel& model, const Eigen::MatrixXd& x) {
    if (x.cols() == 0) throw std::invalid_argument("reconstruction_loss: empty batch");
    double total = 0.0;
    constexpr Eigen::Index chunk = 4096;
    for (Eigen::Index at = 0; at < x.cols(); at += chunk) {
        const Eigen::Index w = std::min(chunk, x.cols() - at);
        const Eigen::MatrixXd block = x.middleCols(at, w);
        const Eigen::MatrixXd xhat = model.decode_batch(model.encode_batch(block));
        total += (xhat - block).squaredNorm();
    }
    return total / static_cast<double>(x.cols());
}

double loss_and_gradient(const ChartModel& model, const Eigen::MatrixXd& x_recon,
                         const Eigen::MatrixXd& x_anchor, const Eigen::MatrixXd& x_positive,
                         const Eigen::MatrixXd& x_negative, double delta, double loss_weight,
                         Eigen::VectorXd* grad) {
    std::vector<AffineLayer> grads;
    if (grad) grads = zero_grads(model);
    const BatchLoss loss = batch_loss_and_grads(
        model, model.standardize(x_recon), model.standardize(x_anchor),
        model.standardize(x_positive), model.standardize(x_negative), delta, loss_weight,
        grad ? &grads : nullptr);
    if (grad) pack_grads(grads, *grad);
    return loss.triplet + loss_weight * loss.reconstruction;
}

TrainResult train(const Eigen::MatrixXd& x, const std::vector<Triplet>& triplets,
                  const TrainConfig& config, const ChartModel& init) {
    config.validate();
    if (x.rows() != init.input_dim()) throw std::invalid_argument("train: dimension mismatch");
    if (triplets.empty()) throw std::invalid_argument("train: no triplets mined");

    TrainResult result{init, {}};
    if (config.epochs == 0) return result;

    ChartModel& model = result.model;
    const Eigen::MatrixXd xs = model.standardize(x);
    AdamState adam(model);
    std::mt19937_64 rng(config.seed);

    std::vector<int> order(triplets.size());
    std::iota(order.begin(), order.end(), 0);

    const auto gather = [&](const std::vector<int>& batch, auto role) {
        Eigen::MatrixXd out(xs.rows(), batch.size());
        for (std::size_t i = 0; i < batch.size(); ++i) out.col(i) = xs.col(role(triplets[batch[i]]));
        return out;
    };

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double sum_cn = 0.0, sum_cr = 0.0;
        std::size_t seen = 0;
        for (std::size_t at = 0; at < order.size(); at += config.batch_size) {
            const std::size_t w = std::min<std::size_t>(config.batch_size, order.size() - at);
            std::vector<int> batch(order.begin() + at, order.begin() + at + w);
            const Eigen::MatrixXd xa = gather(batch, [](const Triplet& t) { return t.anchor; });
            const Eigen::MatrixXd xp = gather(batch, [](const Triplet& t) { return t.positive; });
            const Eigen::MatrixXd xn = gather(batch, [](const Triplet& t) { return t.negative; });

            std::vector<AffineLayer> grads = zero_grads(model);
            // Reconstruction runs on the batch anchors.
            const BatchLoss loss =
                batch_loss_and_grads(model, xa, xa, xp, xn, config.delta, config.loss_weight, &grads);
            if (!std::isfinite(loss.triplet) || !std::isfinite(loss.reconstruction))
                throw std::runtime_error("train: loss diverged (non-finite) at epoch " +
                                         std::to_string(epoch));
            adam_step(model, grads, adam, config.learning_rate);
            sum_cn += loss.triplet * w;
            sum_cr += loss.reconstruction * w;
            seen += w;
        }
        result.history.push_back(
            EpochLoss{sum_cn / seen, config.loss_weight * sum_cr / seen});
    }
    return result;
}

TrainResult train(const Eigen::MatrixXd& x, const TrainConfig& config, const ChartModel& init) {
    return train(x, mine_triplets(x, config), config, init);
}

Eigen::MatrixXd chart_dataset(const ChartModel& model, const Eigen::MatrixXd& x) {
    Eigen::MatrixXd chart(model.latent_dim(), x.cols());
    constexpr Eigen::Index chunk = 4096;
    for (Eigen::Index at = 0; at < x.cols(); at += chunk) {
        const Eigen::Index w = std::min(chunk, x.cols() - at);
        chart.middleCols(at, w) = model.encode_batch(x.middleCols(at, w));
    }
    return chart;
}

double neighborhood_preservation(const Eigen::MatrixXd& chart, const Eigen::MatrixXd& features, int k) {
    const Eigen::Index n = chart.cols();
    if (features.cols() != n) throw std::invalid_argument("neighborhood_preservation: size mismatch");
    if (k < 1 || k >= n) throw std::invalid_argument("neighborhood_preservation: need 1 <= k < n");

    const auto knn = [&](const Eigen::MatrixXd& pts, Eigen::Index i) {
        std::vector<std::pair<double, Eigen::Index>> d;
        d.reserve(n - 1);
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != i) d.emplace_back((pts.col(i) - pts.col(j)).squaredNorm(), j);
        std::partial_sort(d.begin(), d.begin() + k, d.end());
        std::vector<Eigen::Index> idx(k);
        for (int q = 0; q < k; ++q) idx[q] = d[q].second;
        std::sort(idx.begin(), idx.end());
        return idx;
    };

    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto a = knn(chart, i);
        const auto b = knn(features, i);
        std::vector<Eigen::Index> common;
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
        total += static_cast<double>(common.size()) / k;
    }
    return total / static_cast<double>(n);
}

void save_chart_model(const ChartModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_chart_model: cannot open " + path);
    out << "# chartbeam-model v1\n";
    out << "activation " << activation_name(model.activation) << "\n";
    out << "input_mode " << input_mode_name(model.input_mode) << "\n";
    out << "encoder_depth " << model.encoder_depth << "\n";
    out << "n_layers " << model.depth() << "\n";
    out << "mean";
    for (Eigen::Index d = 0; d < model.input_mean.size(); ++d) out << ' ' << io::fmt(model.input_mean(d));
    out << "\nscale";
    for (Eigen::Index d = 0; d < model.input_scale.size(); ++d) out << ' ' << io::fmt(model.input_scale(d));
    out << '\n';
    for (int l = 0; l < model.depth(); ++l) {
        const AffineLayer& layer = model.layers[l];
        out << "layer " << l << ' ' << layer.weight.rows() << ' ' << layer.weight.cols() << '\n';
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
                out << (c ? " " : "") << io::fmt(layer.weight(r, c));
            out << '\n';
        }
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r)
            out << (r ? " " : "") << io::fmt(layer.bias(r));
        out << '\n';
    }
    if (!out) throw std::runtime_error("save_chart_model: write failed for " + path);
}

ChartModel load_chart_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_chart_model: cannot open " + path);
    ChartModel m;
    std::string tok;
    int n_layers = 0;
    while (in >> tok) {
        if (tok == "#") { std::string rest; std::getline(in, rest); continue; }
        if (tok == "activation") { in >> tok; m.activation = activation_from_name(tok); continue; }
        if (tok == "input_mode") { in >> tok; m.input_mode = input_mode_from_name(tok); continue; }
        if (tok == "encoder_depth") { in >> m.encoder_depth; continue; }
        if (tok == "n_layers") { in >> n_layers; continue; }
        if (tok == "mean" || tok == "scale") {
            // Dimension is known once the first layer header was read; mean
            // and scale precede layers, so infer from the line itself.
            std::string rest;
            std::getline(in, rest);
            std::istringstream ls(rest);
            std::vector<double> vals;
            double v = 0;
            while (ls >> v) vals.push_back(v);
            Eigen::VectorXd vec = Eigen::Map<Eigen::VectorXd>(vals.data(), vals.size());
            (tok == "mean" ? m.input_mean : m.input_scale) = vec;
            continue;
        }
        if (tok == "layer") {
            int idx = 0;
            Eigen::Index rows = 0, cols = 0;
            in >> idx >> rows >> cols;
            AffineLayer layer;
            layer.weight.resize(rows, cols);
            for (Eigen::Index r = 0; r < rows; ++r)
                for (Eigen::Index c = 0; c < cols; ++c) in >> layer.weight(r, c);
            layer.bias.resize(rows);
            for (Eigen::Index r = 0; r < rows; ++r) in >> layer.bias(r);
            if (!in) throw std::runtime_error("load_chart_model: malformed layer in " + path);
            m.layers.push_back(std::move(layer));
            continue;
        }
        throw std::runtime_error("load_chart_model: unexpected token '" + tok + "' in " + path);
    }
    if (static_cast<int>(m.layers.size()) != n_layers || m.encoder_depth < 1)
        throw std::runtime_error("load_chart_model: inconsistent header in " + path);
    return m;
}

}  // namespace chartbeam
