// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "chartbeam/charting.hpp"
#include "chartbeam/trajectory.hpp"

using namespace chartbeam;

namespace {

ChartModel zero_model(int input_dim = 5, std::vector<int> hidden = {8, 4}) {
    ChartConfig cfg;
    cfg.input_dim = input_dim;
    cfg.hidden = std::move(hidden);
    cfg.seed = 1;
    ChartModel m = make_chart_model(cfg);
    for (AffineLayer& l : m.layers) {
        l.weight.setZero();
        l.bias.setZero();
    }
    return m;
}

// Planted 2-D subspace model: encoder keeps dims (0, 2), decoder puts
// them back; the round trip is the identity on such inputs.
ChartModel planted_model() {
    ChartModel m;
    m.encoder_depth = 1;
    AffineLayer enc;
    enc.weight = Eigen::MatrixXd::Zero(2, 5);
    enc.weight(0, 0) = 1.0;
    enc.weight(1, 2) = 1.0;
    enc.bias = Eigen::VectorXd::Zero(2);
    AffineLayer dec;
    dec.weight = Eigen::MatrixXd::Zero(5, 2);
    dec.weight(0, 0) = 1.0;
    dec.weight(2, 1) = 1.0;
    dec.bias = Eigen::VectorXd::Zero(5);
    m.layers = {enc, dec};
    m.input_mean = Eigen::VectorXd::Zero(5);
    m.input_scale = Eigen::VectorXd::Ones(5);
    return m;
}

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int dim, int n, double span = 1.0) {
    std::uniform_real_distribution<double> u(-span, span);
    Eigen::MatrixXd x(dim, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < dim; ++i) x(i, j) = u(rng);
    return x;
}

Eigen::MatrixXd standard_dataset(int n_trajectories = 3) {
    ScenarioConfig scen;
    scen.n_steps = 120;
    scen.n_tx = 64;
    scen.n_rx = 64;
    std::vector<FeatureVector> pooled;
    for (int i = 0; i < n_trajectories; ++i) {
        scen.seed = 100 + i;
        const std::vector<FeatureVector> f = features_from_trajectory(generate_trajectory(scen));
        pooled.insert(pooled.end(), f.begin(), f.end());
    }
    return feature_matrix(pooled, InputMode::full5);
}

}  // namespace

TEST_CASE("encode with zero weights collapses to the origin") {
    const ChartModel m = zero_model();
    std::mt19937_64 rng(1);
    const Eigen::MatrixXd x = random_matrix(rng, 5, 7);
    const Eigen::MatrixXd y = m.encode_batch(x);
    CHECK(y.rows() == 2);
    CHECK(y.norm() == 0.0);
    CHECK(m.decode(Eigen::Vector2d(0.3, -0.2)).norm() == 0.0);
}

TEST_CASE("a planted linear encoder selects coordinates") {
    const ChartModel m = planted_model();
    Eigen::VectorXd x(5);
    x << 0.7, 0.1, -0.4, 0.2, 0.9;
    const Eigen::VectorXd y = m.encode(x);
    CHECK(y(0) == doctest::Approx(0.7));
    CHECK(y(1) == doctest::Approx(-0.4));
}

TEST_CASE("encode and decode match an independent layer-by-layer oracle") {
    ChartConfig cfg;
    cfg.input_dim = 5;
    cfg.hidden = {6, 3};
    cfg.seed = 77;
    ChartModel m = make_chart_model(cfg);
    std::mt19937_64 rng(5);
    const Eigen::MatrixXd data = random_matrix(rng, 5, 20, 2.0);
    m.fit_standardizer(data);

    for (int j = 0; j < data.cols(); ++j) {
        // Oracle: explicit loop, scalar ops only.
        Eigen::VectorXd cur = data.col(j);
        for (int d = 0; d < 5; ++d) cur(d) = (cur(d) - m.input_mean(d)) / m.input_scale(d);
        for (int l = 0; l < m.depth(); ++l) {
            Eigen::VectorXd z = m.layers[l].weight * cur + m.layers[l].bias;
            const bool act = l != m.encoder_depth - 1 && l != m.depth() - 1;
            if (act)
                for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = std::tanh(z(i));
            cur = z;
            if (l == m.encoder_depth - 1) {
                const Eigen::VectorXd y = m.encode(data.col(j));
                CHECK((y - cur).norm() < 1e-12);
            }
        }
        for (int d = 0; d < 5; ++d) cur(d) = cur(d) * m.input_scale(d) + m.input_mean(d);
        const Eigen::VectorXd xhat = m.decode(m.encode(data.col(j)));
        CHECK((xhat - cur).norm() < 1e-12);
    }
}

TEST_CASE("mine_triplets emits near positives and respects the ordering") {
    TrainConfig cfg;
    cfg.pos_window = 1;
    cfg.neg_window = 2;
    cfg.seed = 3;
    std::mt19937_64 rng(9);
    const Eigen::MatrixXd tiny = random_matrix(rng, 3, 4);
    for (const Triplet& t : mine_triplets(tiny, cfg))
        CHECK(std::abs(t.anchor - t.positive) == 1);

    Eigen::MatrixXd three = random_matrix(rng, 3, 3);
    CHECK_THROWS_AS(mine_triplets(three, cfg), std::invalid_argument);

    cfg.pos_window = 2;
    cfg.neg_window = 10;
    const Eigen::MatrixXd x = random_matrix(rng, 4, 80);
    const std::vector<Triplet> triplets = mine_triplets(x, cfg);
    CHECK(!triplets.empty());
    for (const Triplet& t : triplets) {
        CHECK(t.anchor != t.positive);
        CHECK(std::abs(t.anchor - t.positive) <= cfg.pos_window);
        CHECK(std::abs(t.anchor - t.negative) > cfg.neg_window);
        CHECK((x.col(t.anchor) - x.col(t.positive)).norm() <=
              (x.col(t.anchor) - x.col(t.negative)).norm());
    }

    const std::vector<Triplet> again = mine_triplets(x, cfg);
    REQUIRE(again.size() == triplets.size());
    for (std::size_t i = 0; i < triplets.size(); ++i) {
        CHECK(again[i].anchor == triplets[i].anchor);
        CHECK(again[i].positive == triplets[i].positive);
        CHECK(again[i].negative == triplets[i].negative);
    }
}

TEST_CASE("collapsed model yields a triplet loss of exactly delta") {
    const ChartModel m = zero_model();
    std::mt19937_64 rng(11);
    const Eigen::MatrixXd x = random_matrix(rng, 5, 40);
    const std::vector<Triplet> triplets{{0, 1, 30}, {5, 6, 39}, {10, 11, 0}};
    CHECK(triplet_loss(m, x, triplets, 1.0) == 1.0);
    CHECK(triplet_loss(m, x, triplets, 0.25) == 0.25);
}

TEST_CASE("well-separated embeddings have zero triplet loss") {
    Eigen::MatrixXd chart(2, 3);
    chart << 0.0, 0.1, 9.0, 0.0, 0.0, 9.0;
    CHECK(triplet_loss_from_chart(chart, {{0, 1, 2}}, 1.0) == 0.0);
}

TEST_CASE("triplet loss matches a hand computation on a tiny model") {
    // One affine encoder to R^1: y = w . x.
    ChartModel m;
    m.encoder_depth = 1;
    AffineLayer enc;
    enc.weight = Eigen::MatrixXd::Zero(1, 2);
    enc.weight(0, 0) = 0.5;
    enc.weight(0, 1) = -0.25;
    enc.bias = Eigen::VectorXd::Zero(1);
    AffineLayer dec;
    dec.weight = Eigen::MatrixXd::Zero(2, 1);
    dec.bias = Eigen::VectorXd::Zero(2);
    m.layers = {enc, dec};
    m.input_mean = Eigen::VectorXd::Zero(2);
    m.input_scale = Eigen::VectorXd::Ones(2);

    Eigen::MatrixXd x(2, 4);
    x << 1.0, 2.0, -1.0, 4.0, 0.0, 2.0, 4.0, -4.0;
    // y = [0.5, 0.5, -1.5, 3.0]
    const double term1 = std::max(0.0, std::abs(0.5 - 0.5) - std::abs(0.5 - (-1.5)) + 1.0);
    const double term2 = std::max(0.0, std::abs(0.5 - (-1.5)) - std::abs(0.5 - 3.0) + 1.0);
    const double expected = 0.5 * (term1 + term2);
    CHECK(std::abs(triplet_loss(m, x, {{0, 1, 2}, {0, 2, 3}}, 1.0) - expected) < 1e-12);
}

TEST_CASE("reconstruction loss: identity round trip and zero model") {
    const ChartModel planted = planted_model();
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(5, 3);
    x(0, 0) = 0.4;
    x(2, 0) = -0.8;
    x(0, 1) = -1.0;
    x(2, 2) = 2.5;
    CHECK(reconstruction_loss(planted, x) == 0.0);

    const ChartModel zeros = zero_model();
    std::mt19937_64 rng(13);
    const Eigen::MatrixXd data = random_matrix(rng, 5, 9);
    double expected = 0.0;
    for (int j = 0; j < 9; ++j) expected += data.col(j).squaredNorm();
    expected /= 9.0;
    CHECK(reconstruction_loss(zeros, data) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("reconstruction loss matches an independent computation") {
    ChartConfig cfg;
    cfg.input_dim = 4;
    cfg.hidden = {5};
    cfg.latent_dim = 2;
    cfg.seed = 19;
    ChartModel m = make_chart_model(cfg);
    std::mt19937_64 rng(17);
    const Eigen::MatrixXd x = random_matrix(rng, 4, 12);
    m.fit_standardizer(x);
    double expected = 0.0;
    for (int j = 0; j < 12; ++j)
        expected += (x.col(j) - m.decode(m.encode(x.col(j)))).squaredNorm();
    expected /= 12.0;
    CHECK(reconstruction_loss(m, x) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("analytic gradients agree with central finite differences") {
    // Three-layer encoder (mirrored decoder) with random weights.
    ChartConfig cfg;
    cfg.input_dim = 5;
    cfg.hidden = {8, 4};
    cfg.seed = 23;
    ChartModel m = make_chart_model(cfg);
    std::mt19937_64 rng(29);
    const Eigen::MatrixXd x = random_matrix(rng, 5, 16, 1.5);
    m.fit_standardizer(x);

    const Eigen::MatrixXd xa = x.leftCols(5);
    const Eigen::MatrixXd xp = x.middleCols(5, 5);
    const Eigen::MatrixXd xn = x.middleCols(10, 5);

    Eigen::VectorXd grad;
    loss_and_gradient(m, x, xa, xp, xn, 1.0, 1.0, &grad);

    const Eigen::VectorXd theta = m.parameters();
    std::normal_distribution<double> g(0.0, 1.0);
    const double h = 1e-5;
    for (int dir = 0; dir < 10; ++dir) {
        Eigen::VectorXd d(theta.size());
        for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = g(rng);
        d.normalize();

        ChartModel probe = m;
        probe.set_parameters(theta + h * d);
        const double lp = loss_and_gradient(probe, x, xa, xp, xn, 1.0, 1.0, nullptr);
        probe.set_parameters(theta - h * d);
        const double lm = loss_and_gradient(probe, x, xa, xp, xn, 1.0, 1.0, nullptr);

        const double numeric = (lp - lm) / (2.0 * h);
        const double analytic = grad.dot(d);
        CHECK(std::abs(numeric - analytic) / std::max(1.0, std::abs(numeric)) <= 1e-4);
    }
}

TEST_CASE("train with zero epochs returns the initialized model unchanged") {
    ChartConfig cfg;
    cfg.input_dim = 5;
    cfg.hidden = {6, 3};
    cfg.seed = 31;
    const ChartModel init = make_chart_model(cfg);
    std::mt19937_64 rng(31);
    const Eigen::MatrixXd x = random_matrix(rng, 5, 60);
    TrainConfig tc;
    tc.epochs = 0;
    const TrainResult result = train(x, tc, init);
    CHECK(result.history.empty());
    CHECK((result.model.parameters() - init.parameters()).norm() == 0.0);
}

TEST_CASE("training reduces the smoothed loss on the standard dataset") {
    const Eigen::MatrixXd x = standard_dataset(2);
    ChartConfig cfg;
    cfg.input_dim = 5;
    cfg.hidden = {32, 8};
    cfg.seed = 37;
    ChartModel init = make_chart_model(cfg);
    init.fit_standardizer(x);

    TrainConfig tc;
    tc.epochs = 40;
    tc.learning_rate = 1e-3;
    tc.batch_size = 64;
    tc.seed = 37;
    const TrainResult result = train(x, tc, init);
    REQUIRE(result.history.size() == 40);

    const auto smoothed = [&](int end) {
        double sum = 0.0;
        for (int e = end - 5; e < end; ++e) sum += result.history[e].total();
        return sum / 5.0;
    };
    CHECK(smoothed(40) < result.history[0].total());
}

TEST_CASE("training is deterministic and aborts on non-finite data") {
    std::mt19937_64 rng(41);
    const Eigen::MatrixXd x = random_matrix(rng, 5, 50);
    ChartConfig cfg;
    cfg.input_dim = 5;
    cfg.hidden = {6, 3};
    cfg.seed = 43;
    ChartModel init = make_chart_model(cfg);
    init.fit_standardizer(x);
    TrainConfig tc;
    tc.epochs = 5;
    tc.batch_size = 16;
    tc.neg_window = 10;

    const TrainResult a = train(x, tc, init);
    const TrainResult b = train(x, tc, init);
    CHECK((a.model.parameters() - b.model.parameters()).norm() == 0.0);

    Eigen::MatrixXd poisoned = x;
    poisoned(2, 7) = std::numeric_limits<double>::quiet_NaN();
    ChartModel init2 = init;  // standardizer already fitted on clean data
    CHECK_THROWS_AS(train(poisoned, mine_triplets(x, tc), tc, init2), std::runtime_error);
}

TEST_CASE("chart_dataset preserves order and matches pointwise encode") {
    ChartConfig cfg;
    cfg.input_dim = 4;
    cfg.hidden = {5};
    cfg.seed = 47;
    ChartModel m = make_chart_model(cfg);
    std::mt19937_64 rng(47);
    const Eigen::MatrixXd x = random_matrix(rng, 4, 25);
    m.fit_standardizer(x);

    const Eigen::MatrixXd chart = chart_dataset(m, x);
    CHECK(chart.cols() == 25);
    for (int j = 0; j < 25; ++j) CHECK((chart.col(j) - m.encode(x.col(j))).norm() < 1e-13);

    const Eigen::MatrixXd constant = x.col(3).replicate(1, 10);
    const Eigen::MatrixXd cchart = chart_dataset(m, constant);
    for (int j = 1; j < 10; ++j) CHECK((cchart.col(j) - cchart.col(0)).norm() == 0.0);
}

TEST_CASE("neighborhood preservation: identity, random baseline, isometry") {
    std::mt19937_64 rng(53);
    const Eigen::MatrixXd pts = random_matrix(rng, 2, 120, 2.0);
    CHECK(neighborhood_preservation(pts, pts, 10) == doctest::Approx(1.0));

    // A random chart scores close to k / (n - 1).
    const Eigen::MatrixXd chart = random_matrix(rng, 2, 120, 2.0);
    const double np = neighborhood_preservation(chart, pts, 10);
    CHECK(np < 3.0 * 10.0 / 119.0);

    // Rotation + translation leave the score unchanged.
    Eigen::Matrix2d rot;
    const double a = 0.7;
    rot << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    Eigen::MatrixXd moved = rot * chart;
    moved.colwise() += Eigen::Vector2d(3.0, -1.0);
    CHECK(neighborhood_preservation(moved, pts, 10) == doctest::Approx(np).epsilon(1e-12));
}

TEST_CASE("triplet loss is invariant under chart isometries") {
    ChartConfig cfg;
    cfg.input_dim = 5;
    cfg.hidden = {6, 3};
    cfg.seed = 59;
    ChartModel m = make_chart_model(cfg);
    std::mt19937_64 rng(59);
    const Eigen::MatrixXd x = random_matrix(rng, 5, 60);
    m.fit_standardizer(x);
    TrainConfig tc;
    const std::vector<Triplet> triplets = mine_triplets(x, tc);

    const Eigen::MatrixXd chart = chart_dataset(m, x);
    const double base = triplet_loss_from_chart(chart, triplets, 1.0);

    Eigen::Matrix2d rot;
    const double a = -1.1;
    rot << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    Eigen::MatrixXd moved = rot * chart;
    moved.colwise() += Eigen::Vector2d(-7.0, 2.5);
    CHECK(triplet_loss_from_chart(moved, triplets, 1.0) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("model serialization round trips bit-exactly") {
    ChartConfig cfg;
    cfg.input_dim = 5;
    cfg.hidden = {7, 3};
    cfg.seed = 61;
    ChartModel m = make_chart_model(cfg);
    std::mt19937_64 rng(61);
    const Eigen::MatrixXd x = random_matrix(rng, 5, 30, 3.0);
    m.fit_standardizer(x);
    m.input_mode = InputMode::azimuths3;

    const std::string path =
        (std::filesystem::temp_directory_path() / "chartbeam_model_roundtrip.txt").string();
    save_chart_model(m, path);
    const ChartModel loaded = load_chart_model(path);
    std::remove(path.c_str());

    CHECK(loaded.input_mode == InputMode::azimuths3);
    CHECK(loaded.encoder_depth == m.encoder_depth);
    CHECK((loaded.parameters() - m.parameters()).norm() == 0.0);
    for (int j = 0; j < 5; ++j)
        CHECK((loaded.encode(x.col(j)) - m.encode(x.col(j))).norm() == 0.0);
}
