// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "chartbeam/channel.hpp"

using namespace chartbeam;

namespace {

std::vector<Path> random_paths(std::mt19937_64& rng, int l) {
    std::uniform_real_distribution<double> angle(-1.0, 1.0);
    std::uniform_real_distribution<double> mag(0.1, 1.0);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::vector<Path> paths(l);
    for (Path& p : paths) {
        p.theta_t = angle(rng);
        p.theta_r = angle(rng);
        p.gain = std::polar(mag(rng), phase(rng));
    }
    return paths;
}

}  // namespace

TEST_CASE("array_response zero angle gives all-equal entries") {
    const Eigen::VectorXcd a = array_response(0.0, ArrayGeometry::ula(4));
    for (int i = 0; i < 4; ++i) {
        CHECK(a(i).real() == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(a(i).imag() == doctest::Approx(0.0).epsilon(1e-14));
    }
}

TEST_CASE("array_response endfire angle flips the second element") {
    const Eigen::VectorXcd a = array_response(1.0, ArrayGeometry::ula(2));
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(a(0) - cd{r, 0.0}) < 1e-12);
    CHECK(std::abs(a(1) - cd{-r, 0.0}) < 1e-12);
}

TEST_CASE("array_response inner products follow the Dirichlet kernel") {
    const ArrayGeometry g = ArrayGeometry::ula(8);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> angle(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const double t1 = angle(rng);
        const double t2 = angle(rng);
        const double delta = t1 - t2;
        const cd ip = array_response(t1, g).adjoint() * array_response(t2, g);
        const double denom = 8.0 * std::sin(std::numbers::pi * 0.5 * delta);
        const double expected = denom == 0.0
                                    ? 1.0
                                    : std::abs(std::sin(8.0 * std::numbers::pi * 0.5 * delta) / denom);
        CHECK(std::abs(std::abs(ip) - expected) < 1e-10);
    }
}

TEST_CASE("array_response rejects invalid spatial angles") {
    CHECK_THROWS_AS(array_response(1.5, ArrayGeometry::ula(4)), std::invalid_argument);
    CHECK_THROWS_AS(array_response(-1.01, ArrayGeometry::ula(4)), std::invalid_argument);
    CHECK_THROWS_AS(array_response(0.0, ArrayGeometry::planar(2, 2)), std::invalid_argument);
}

TEST_CASE("steering vectors have unit norm") {
    for (int n : {1, 2, 7, 16, 64})
        CHECK(array_response(0.37, ArrayGeometry::ula(n)).norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("planar_response broadside gives the all-ones vector") {
    const Eigen::VectorXcd a = planar_response(1.234, 0.0, ArrayGeometry::planar(2, 2));
    REQUIRE(a.size() == 4);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(a(i) - cd{1.0, 0.0}) < 1e-14);
}

TEST_CASE("planar_response single element is one") {
    const Eigen::VectorXcd a = planar_response(0.4, 0.9, ArrayGeometry::planar(1, 1));
    REQUIRE(a.size() == 1);
    CHECK(std::abs(a(0) - cd{1.0, 0.0}) < 1e-14);
}

TEST_CASE("planar_response factorizes as a Kronecker product of line responses") {
    const int m = 3, n = 4;
    const double spacing = 0.5;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.2, 1.2);
    for (int trial = 0; trial < 20; ++trial) {
        const double alpha = u(rng);
        const double phi = u(rng);
        const Eigen::VectorXcd a = planar_response(alpha, phi, ArrayGeometry::planar(m, n, spacing));
        const double tx = std::sin(phi) * std::cos(alpha);
        const double ty = std::sin(phi) * std::sin(alpha);
        // Independent oracle: unnormalized per-axis phase ramps.
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < n; ++j) {
                const cd row = std::polar(1.0, 2.0 * std::numbers::pi * spacing * i * tx);
                const cd col = std::polar(1.0, 2.0 * std::numbers::pi * spacing * j * ty);
                CHECK(std::abs(a(i * n + j) - row * col) < 1e-12);
            }
        }
    }
}

TEST_CASE("dft_codebook smallest sizes") {
    const Codebook c1 = dft_codebook(1);
    CHECK(std::abs(c1.vectors(0, 0) - cd{1.0, 0.0}) < 1e-15);

    const Codebook c2 = dft_codebook(2);
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(c2.vectors(0, 0) - cd{r, 0.0}) < 1e-15);
    CHECK(std::abs(c2.vectors(1, 0) - cd{r, 0.0}) < 1e-15);
    CHECK(std::abs(c2.vectors(0, 1) - cd{r, 0.0}) < 1e-15);
    CHECK(std::abs(c2.vectors(1, 1) - cd{-r, 0.0}) < 1e-12);
}

TEST_CASE("dft_codebook columns are orthonormal") {
    for (int n : {4, 8, 16, 64, 128, 256}) {
        const Codebook cb = dft_codebook(n);
        const Eigen::MatrixXcd gram = cb.vectors.adjoint() * cb.vectors;
        CHECK((gram - Eigen::MatrixXcd::Identity(n, n)).norm() <= 1e-10);
        for (int k = 0; k < n; ++k)
            CHECK(cb.vectors.col(k).norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("beam centers quantize back to their own index") {
    for (int n : {4, 5, 16, 64, 128})
        for (int k = 0; k < n; ++k) CHECK(quantize_to_beam(beam_center_angle(k, n), n) == k);
}

TEST_CASE("channel_matrix single broadside path") {
    std::vector<Path> paths{Path{}};
    const ChannelSnapshot snap = channel_matrix(paths, ArrayGeometry::ula(2), ArrayGeometry::ula(2));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(std::abs(snap.h(i, j) - cd{0.5, 0.0}) < 1e-14);
}

TEST_CASE("channel_matrix rank is bounded by the path count") {
    std::mt19937_64 rng(3);
    const ArrayGeometry g = ArrayGeometry::ula(8);
    std::uniform_int_distribution<int> ln(1, 4);
    for (int trial = 0; trial < 100; ++trial) {
        const int l = ln(rng);
        const ChannelSnapshot snap = channel_matrix(random_paths(rng, l), g, g);
        const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(snap.h);
        int rank = 0;
        for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
            rank += svd.singularValues()(i) > 1e-9;
        CHECK(rank <= l);
    }
}

TEST_CASE("channel_matrix Frobenius norm equals the single-path gain") {
    std::vector<Path> paths{Path{cd{0.0, 0.7}, 0.3, -0.2}};
    const ChannelSnapshot snap = channel_matrix(paths, ArrayGeometry::ula(8), ArrayGeometry::ula(4));
    CHECK(snap.h.norm() == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("channel_matrix is linear in the path gains") {
    const ArrayGeometry g = ArrayGeometry::ula(4);
    const Path base{cd{0.4, 0.1}, 0.5, -0.7};
    Path b2 = base;
    b2.gain = cd{-0.2, 0.9};
    Path sum = base;
    sum.gain = base.gain + b2.gain;
    const Eigen::MatrixXcd lhs = channel_matrix({sum}, g, g).h;
    const Eigen::MatrixXcd rhs = channel_matrix({base}, g, g).h + channel_matrix({b2}, g, g).h;
    CHECK((lhs - rhs).norm() < 1e-12);
}

TEST_CASE("channel_matrix rejects an empty path list") {
    CHECK_THROWS_AS(channel_matrix({}, ArrayGeometry::ula(2), ArrayGeometry::ula(2)),
                    std::invalid_argument);
}

TEST_CASE("received_signal zero channel, zero noise") {
    std::mt19937_64 rng(1);
    const Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2, 2);
    const Eigen::VectorXcd f = array_response(0.0, ArrayGeometry::ula(2));
    const cd y = received_signal(h, f, f, cd{1.0, 0.0}, 0.0, rng);
    CHECK(std::abs(y) < 1e-15);
}

TEST_CASE("received_signal aligned beams reach unit gain") {
    std::mt19937_64 rng(1);
    const ArrayGeometry g = ArrayGeometry::ula(8);
    const Path p{cd{1.0, 0.0}, 0.25, -0.5};
    const ChannelSnapshot snap = channel_matrix({p}, g, g);
    const cd y = received_signal(snap.h, array_response(p.theta_t, g), array_response(p.theta_r, g),
                                 cd{1.0, 0.0}, 0.0, rng);
    CHECK(std::abs(y - cd{1.0, 0.0}) < 1e-12);
}

TEST_CASE("received_signal magnitude matches the alignment-metric product") {
    std::mt19937_64 rng(5);
    const ArrayGeometry g = ArrayGeometry::ula(8);
    std::uniform_real_distribution<double> angle(-1.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        const Path p{cd{1.0, 0.0}, angle(rng), angle(rng)};
        const ChannelSnapshot snap = channel_matrix({p}, g, g);
        const Eigen::VectorXcd f = array_response(angle(rng), g);
        const Eigen::VectorXcd w = array_response(angle(rng), g);
        const cd y = received_signal(snap.h, f, w, cd{1.0, 0.0}, 0.0, rng);
        const cd gamma_r = w.dot(array_response(p.theta_r, g));
        const cd gamma_t = array_response(p.theta_t, g).dot(f);
        CHECK(std::abs(std::abs(y) - std::abs(gamma_r * gamma_t)) < 1e-12);
    }
}

TEST_CASE("received_signal rejects negative noise and is seed-reproducible") {
    std::mt19937_64 rng(1);
    const Eigen::MatrixXcd h = Eigen::MatrixXcd::Identity(2, 2);
    const Eigen::VectorXcd f = array_response(0.0, ArrayGeometry::ula(2));
    CHECK_THROWS_AS(received_signal(h, f, f, cd{1.0, 0.0}, -0.1, rng), std::invalid_argument);

    std::mt19937_64 a(42), b(42);
    const cd ya = received_signal(h, f, f, cd{1.0, 0.0}, 0.3, a);
    const cd yb = received_signal(h, f, f, cd{1.0, 0.0}, 0.3, b);
    CHECK(ya == yb);
}

TEST_CASE("best_beam_oracle trivial size") {
    const ChannelSnapshot snap = channel_matrix({Path{}}, ArrayGeometry::ula(1), ArrayGeometry::ula(1));
    const BeamSelection sel = best_beam_oracle(snap.h, dft_codebook(1), dft_codebook(1));
    CHECK(sel.pair == BeamPair{0, 0});
}

TEST_CASE("best_beam_oracle recovers on-grid angles") {
    const int n = 16;
    const ArrayGeometry g = ArrayGeometry::ula(n);
    const Codebook cb = dft_codebook(n);
    for (int k = 0; k < n; ++k) {
        const Path p{cd{1.0, 0.0}, beam_center_angle(k, n), beam_center_angle((k * 5 + 3) % n, n)};
        const ChannelSnapshot snap = channel_matrix({p}, g, g);
        const BeamSelection sel = best_beam_oracle(snap.h, cb, cb);
        CHECK(sel.pair.tx == k);
        CHECK(sel.pair.rx == (k * 5 + 3) % n);
    }
}

TEST_CASE("best_beam_oracle equals an independent double-loop brute force") {
    std::mt19937_64 rng(17);
    const int n = 8;
    const ArrayGeometry g = ArrayGeometry::ula(n);
    const Codebook cb_tx = dft_codebook(n, Codebook::Side::tx);
    const Codebook cb_rx = dft_codebook(n, Codebook::Side::rx);
    for (int trial = 0; trial < 100; ++trial) {
        const ChannelSnapshot snap = channel_matrix(random_paths(rng, 3), g, g);
        const BeamSelection sel = best_beam_oracle(snap.h, cb_tx, cb_rx);

        int best_m = 0, best_n = 0;
        double best_p = -1.0;
        for (int m = 0; m < n; ++m) {
            for (int nn = 0; nn < n; ++nn) {
                const cd v = cb_rx.vectors.col(m).adjoint() * snap.h * cb_tx.vectors.col(nn);
                if (std::norm(v) > best_p) {
                    best_p = std::norm(v);
                    best_m = m;
                    best_n = nn;
                }
            }
        }
        CHECK(sel.pair.rx == best_m);
        CHECK(sel.pair.tx == best_n);
    }
}

TEST_CASE("best_beam_oracle is invariant to positive scaling") {
    std::mt19937_64 rng(23);
    const ArrayGeometry g = ArrayGeometry::ula(8);
    const Codebook cb = dft_codebook(8);
    for (int trial = 0; trial < 20; ++trial) {
        const ChannelSnapshot snap = channel_matrix(random_paths(rng, 2), g, g);
        const BeamSelection a = best_beam_oracle(snap.h, cb, cb);
        const BeamSelection b = best_beam_oracle(3.7 * snap.h, cb, cb);
        CHECK(a.pair == b.pair);
    }
}

TEST_CASE("snr_of_pair arithmetic") {
    const ArrayGeometry g = ArrayGeometry::ula(4);
    const Codebook cb = dft_codebook(4);
    const Path p{cd{1.0, 0.0}, 0.0, 0.0};
    const ChannelSnapshot snap = channel_matrix({p}, g, g);
    // Aligned broadside pair has |w^H H f|^2 = 1.
    CHECK(snr_of_pair(snap.h, 0, 0, cb, cb, 1.0, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
    const double shift =
        snr_of_pair(snap.h, 0, 0, cb, cb, 0.5, 1.0) - snr_of_pair(snap.h, 0, 0, cb, cb, 1.0, 1.0);
    CHECK(shift == doctest::Approx(10.0 * std::log10(2.0)).epsilon(1e-12));
    CHECK(shift == doctest::Approx(3.0103).epsilon(1e-4));
    CHECK(std::isinf(snr_of_pair(snap.h, 0, 0, cb, cb, 0.0, 1.0)));
}

TEST_CASE("snr_of_pair matches a hand computation") {
    std::mt19937_64 rng(29);
    const ArrayGeometry g = ArrayGeometry::ula(8);
    const Codebook cb = dft_codebook(8);
    const ChannelSnapshot snap = channel_matrix(random_paths(rng, 2), g, g);
    const cd v = cb.vectors.col(3).adjoint() * snap.h * cb.vectors.col(5);
    const double expected = 10.0 * std::log10(2.5 * std::norm(v) / 0.04);
    CHECK(snr_of_pair(snap.h, 3, 5, cb, cb, 0.04, 2.5) == doctest::Approx(expected).epsilon(1e-12));
}
