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

#include "chartbeam/beam_map.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "chartbeam/io_util.hpp"

namespace chartbeam {

namespace {

// Largest prime below 2^62; used when the exact keys outgrow the 64-bit
// prime search (h_cd only ever sees the key modulo s, and the spread
// factor c^(k+1) is a unit mod s, so distinct grid sums stay distinct).
constexpr std::uint64_t kMersenne61 = (std::uint64_t{1} << 61) - 1;

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t mod) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % mod);
}

std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t mod) {
    std::uint64_t result = 1 % mod;
    base %= mod;
    while (exp) {
        if (exp & 1) result = mulmod(result, base, mod);
        base = mulmod(base, base, mod);
        exp >>= 1;
    }
    return result;
}

}  // namespace

std::string key_to_string(chart_key key) {
    if (key == 0) return "0";
    std::string out;
    while (key) {
        out.push_back(static_cast<char>('0' + static_cast<int>(key % 10)));
        key /= 10;
    }
    std::reverse(out.begin(), out.end());
    return out;
}

chart_key key_from_string(const std::string& s) {
    chart_key key = 0;
    for (char ch : s) {
        if (ch < '0' || ch > '9') throw std::invalid_argument("key_from_string: non-digit");
        key = key * 10 + static_cast<unsigned>(ch - '0');
    }
    return key;
}

void KeyGenConfig::validate() const {
    if (c < 2) throw std::invalid_argument("keygen: c must be >= 2");
    if (k_res < 1) throw std::invalid_argument("keygen: k_res must be >= 1");
    // c^(k+1) must fit a 128-bit key with room for the grid sum.
    if ((k_res + 1) * std::log2(static_cast<double>(c)) > 106.0)
        throw std::invalid_argument("keygen: c^(k_res+1) exceeds the key range");
}

chart_key make_key(const Eigen::Vector2d& y, const KeyGenConfig& config) {
    config.validate();
    if (!std::isfinite(y(0)) || !std::isfinite(y(1)))
        throw std::invalid_argument("make_key: non-finite chart coordinate");

    const auto cell = [&](double coord, double shift) {
        const double f = std::floor(config.k_res * (coord - shift));
        // Queries slightly below the training minimum clamp to the edge cell.
        return f < 0.0 ? std::int64_t{0} : static_cast<std::int64_t>(f);
    };
    const std::int64_t sum = cell(y(0), config.origin_shift(0)) + cell(y(1), config.origin_shift(1));
    if (sum > (std::int64_t{1} << 20))
        throw std::invalid_argument("make_key: grid sum out of range (chart coordinates too large)");

    chart_key spread = 1;
    for (int i = 0; i < config.k_res + 1; ++i) spread *= static_cast<unsigned>(config.c);
    return spread * static_cast<chart_key>(sum);
}

void HashParams::validate() const {
    if (m < 1) throw std::invalid_argument("hash: m must be >= 1");
    if (s <= m) throw std::invalid_argument("hash: s must exceed m");
    if (!is_prime(s)) throw std::invalid_argument("hash: s must be prime");
    if (c < 1 || c >= s) throw std::invalid_argument("hash: c must be in [1, s-1]");
    if (d >= s) throw std::invalid_argument("hash: d must be in [0, s-1]");
}

std::uint64_t universal_hash(chart_key key, const HashParams& params) {
    const std::uint64_t a = static_cast<std::uint64_t>(key % params.s);
    const std::uint64_t inner =
        static_cast<std::uint64_t>((static_cast<unsigned __int128>(params.c) * a + params.d) % params.s);
    return inner % params.m;
}

bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n == p) return true;
        if (n % p == 0) return false;
    }
    std::uint64_t d = n - 1;
    int r = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++r;
    }
    // Deterministic witness set for the full 64-bit range.
    for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        std::uint64_t x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool witness = true;
        for (int i = 0; i < r - 1; ++i) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                witness = false;
                break;
            }
        }
        if (witness) return false;
    }
    return true;
}

std::uint64_t next_prime(std::uint64_t n) {
    if (n < 2) return 2;
    std::uint64_t candidate = n + 1;
    while (!is_prime(candidate)) ++candidate;
    return candidate;
}

HashParams draw_hash_params(std::uint64_t s, std::uint64_t m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    HashParams params;
    params.s = s;
    params.m = m;
    params.c = std::uniform_int_distribution<std::uint64_t>(1, s - 1)(rng);
    params.d = std::uniform_int_distribution<std::uint64_t>(0, s - 1)(rng);
    params.validate();
    return params;
}

void SelectionConfig::validate() const {
    if (delta < delta_min || delta > delta_max)
        throw std::invalid_argument("selection: delta out of [delta_min, delta_max]");
    if (target_set_size < 1) throw std::invalid_argument("selection: target_set_size must be >= 1");
}

BeamMapTable::BeamMapTable(KeyGenConfig keygen, HashParams hash)
    : keygen_(std::move(keygen)), hash_(hash) {
    keygen_.validate();
    hash_.validate();
    slots_.resize(hash_.m);
}

BeamMapTable::Node* BeamMapTable::find_node(chart_key key) {
    auto& chain = slots_[universal_hash(key, hash_)];
    for (Node& node : chain)
        if (node.key == key) return &node;
    return nullptr;
}

const BeamMapTable::Node* BeamMapTable::find_node(chart_key key, int* probes) const {
    const auto& chain = slots_[universal_hash(key, hash_)];
    int walked = 0;
    for (const Node& node : chain) {
        ++walked;
        if (node.key == key) {
            if (probes) *probes = walked;
            return &node;
        }
    }
    if (probes) *probes = walked;
    return nullptr;
}

void BeamMapTable::insert_key(chart_key key, int beam, const Eigen::Vector2d& anchor) {
    Node* node = find_node(key);
    if (!node) {
        slots_[universal_hash(key, hash_)].push_back(Node{key, {}});
        node = &slots_[universal_hash(key, hash_)].back();
        ++n_keys_;
    }
    for (BeamCandidate& cand : node->candidates) {
        if (cand.beam == beam) {
            ++cand.hits;
            return;
        }
    }
    node->candidates.push_back(BeamCandidate{beam, anchor, 1});
}

void BeamMapTable::insert(const Eigen::Vector2d& y, int beam) {
    insert_key(make_key(y, keygen_), beam, y);
}

LookupResult BeamMapTable::lookup_key(chart_key key) const {
    LookupResult result;
    const Node* node = find_node(key, &result.probes);
    if (node) {
        result.candidates = node->candidates;
        std::sort(result.candidates.begin(), result.candidates.end(),
                  [](const BeamCandidate& a, const BeamCandidate& b) {
                      return a.hits != b.hits ? a.hits > b.hits : a.beam < b.beam;
                  });
    }
    return result;
}

LookupResult BeamMapTable::lookup(const Eigen::Vector2d& y) const {
    return lookup_key(make_key(y, keygen_));
}

void BeamMapTable::update(const Eigen::Vector2d& y, int beam) {
    const chart_key key = make_key(y, keygen_);
    Node* node = find_node(key);
    if (!node) {
        slots_[universal_hash(key, hash_)].push_back(Node{key, {}});
        node = &slots_[universal_hash(key, hash_)].back();
        ++n_keys_;
    }
    int max_hits = 0;
    for (const BeamCandidate& cand : node->candidates) max_hits = std::max(max_hits, cand.hits);
    for (BeamCandidate& cand : node->candidates) {
        if (cand.beam == beam) {
            cand.hits = max_hits + 1;
            cand.anchor = y;
            return;
        }
    }
    node->candidates.push_back(BeamCandidate{beam, y, max_hits + 1});
}

double BeamMapTable::mean_successful_probes() const {
    if (n_keys_ == 0) return 0.0;
    double total = 0.0;
    for (const auto& chain : slots_)
        for (std::size_t pos = 0; pos < chain.size(); ++pos) total += static_cast<double>(pos + 1);
    return total / static_cast<double>(n_keys_);
}

std::vector<BeamCandidate> BeamMapTable::all_candidates() const {
    std::vector<BeamCandidate> out;
    for (const auto& chain : slots_)
        for (const Node& node : chain)
            out.insert(out.end(), node.candidates.begin(), node.candidates.end());
    return out;
}

const BeamCandidate* BeamMapTable::nearest_anchor(const Eigen::Vector2d& y) const {
    const BeamCandidate* best = nullptr;
    double best_dist = std::numeric_limits<double>::infinity();
    for (const auto& chain : slots_) {
        for (const Node& node : chain) {
            for (const BeamCandidate& cand : node.candidates) {
                const double d = (y - cand.anchor).squaredNorm();
                if (d < best_dist || (d == best_dist && best && cand.beam < best->beam)) {
                    best_dist = d;
                    best = &cand;
                }
            }
        }
    }
    return best;
}

void BeamMapTable::check_invariants() const {
    std::size_t counted = 0;
    for (std::size_t slot = 0; slot < slots_.size(); ++slot) {
        for (const Node& node : slots_[slot]) {
            if (universal_hash(node.key, hash_) != slot)
                throw std::logic_error("beam map: node stored in the wrong slot");
            if (node.candidates.empty())
                throw std::logic_error("beam map: empty candidate set");
            ++counted;
        }
    }
    if (counted != n_keys_) throw std::logic_error("beam map: key count mismatch");
}

void BeamMapTable::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("beam map save: cannot open " + path);
    out << "# chartbeam-table v1\n";
    out << "s " << hash_.s << "\nm " << hash_.m << "\nc " << hash_.c << "\nd " << hash_.d << "\n";
    out << "keygen_c " << keygen_.c << "\nkeygen_k " << keygen_.k_res << "\n";
    out << "origin_shift " << io::fmt(keygen_.origin_shift(0)) << ' '
        << io::fmt(keygen_.origin_shift(1)) << "\n";
    for (const auto& chain : slots_) {
        for (const Node& node : chain) {
            out << "node " << key_to_string(node.key) << ' ' << node.candidates.size() << '\n';
            for (const BeamCandidate& cand : node.candidates)
                out << "cand " << cand.beam << ' ' << io::fmt(cand.anchor(0)) << ' '
                    << io::fmt(cand.anchor(1)) << ' ' << cand.hits << '\n';
        }
    }
    if (!out) throw std::runtime_error("beam map save: write failed for " + path);
}

BeamMapTable BeamMapTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("beam map load: cannot open " + path);
    KeyGenConfig keygen;
    HashParams hash;
    std::vector<std::pair<chart_key, std::vector<BeamCandidate>>> nodes;
    std::string tok;
    while (in >> tok) {
        if (tok == "#") { std::string rest; std::getline(in, rest); continue; }
        if (tok == "s") { in >> hash.s; continue; }
        if (tok == "m") { in >> hash.m; continue; }
        if (tok == "c") { in >> hash.c; continue; }
        if (tok == "d") { in >> hash.d; continue; }
        if (tok == "keygen_c") { in >> keygen.c; continue; }
        if (tok == "keygen_k") { in >> keygen.k_res; continue; }
        if (tok == "origin_shift") { in >> keygen.origin_shift(0) >> keygen.origin_shift(1); continue; }
        if (tok == "node") {
            std::string key;
            std::size_t count = 0;
            in >> key >> count;
            nodes.emplace_back(key_from_string(key), std::vector<BeamCandidate>());
            nodes.back().second.reserve(count);
            continue;
        }
        if (tok == "cand") {
            if (nodes.empty()) throw std::runtime_error("beam map load: cand before node");
            BeamCandidate cand;
            in >> cand.beam >> cand.anchor(0) >> cand.anchor(1) >> cand.hits;
            nodes.back().second.push_back(cand);
            continue;
        }
        throw std::runtime_error("beam map load: unexpected token '" + tok + "'");
    }
    BeamMapTable table(keygen, hash);
    for (auto& [key, cands] : nodes) {
        table.slots_[universal_hash(key, hash)].push_back(Node{key, std::move(cands)});
        ++table.n_keys_;
    }
    return table;
}

BeamMapTable build_table(const Eigen::MatrixXd& chart, const std::vector<int>& beams,
                         const KeyGenConfig& keygen_base, std::uint64_t hash_seed) {
    if (chart.cols() == 0) throw std::invalid_argument("build_table: empty training set");
    if (static_cast<std::size_t>(chart.cols()) != beams.size())
        throw std::invalid_argument("build_table: chart/beam size mismatch");
    if (chart.rows() != 2) throw std::invalid_argument("build_table: charts must be 2-D");

    KeyGenConfig keygen = keygen_base;
    keygen.origin_shift = chart.rowwise().minCoeff();

    chart_key max_key = 0;
    for (Eigen::Index i = 0; i < chart.cols(); ++i)
        max_key = std::max(max_key, make_key(chart.col(i), keygen));

    const std::uint64_t m = next_prime(std::max<std::uint64_t>(2, chart.cols()) - 1);
    std::uint64_t s;
    if (max_key < (chart_key{1} << 61))
        s = next_prime(std::max<std::uint64_t>(static_cast<std::uint64_t>(max_key), m));
    else
        s = kMersenne61;

    BeamMapTable table(keygen, draw_hash_params(s, m, hash_seed));
    for (Eigen::Index i = 0; i < chart.cols(); ++i) table.insert(chart.col(i), beams[i]);
    return table;
}

std::vector<BeamCandidate> select_beams(const std::vector<BeamCandidate>& candidates,
                                        const Eigen::Vector2d& y_query, const SelectionConfig& config) {
    std::vector<BeamCandidate> kept;
    for (const BeamCandidate& cand : candidates)
        if ((y_query - cand.anchor).norm() <= config.delta) kept.push_back(cand);
    return kept;
}

SelectionConfig calibrate_delta(const BeamMapTable& table, const Eigen::MatrixXd& validation_chart,
                                int target_set_size) {
    if (validation_chart.cols() == 0) throw std::invalid_argument("calibrate_delta: empty validation set");
    if (target_set_size < 1) throw std::invalid_argument("calibrate_delta: target must be >= 1");

    // Pairwise-distance range over (a capped sample of) the validation
    // charts: delta_min is the closest nonzero pair, delta_max the widest.
    const Eigen::Index n = validation_chart.cols();
    const Eigen::Index stride = std::max<Eigen::Index>(1, n / 2048);
    std::vector<Eigen::Index> sample;
    for (Eigen::Index i = 0; i < n; i += stride) sample.push_back(i);

    double dmin = std::numeric_limits<double>::infinity();
    double dmax = 0.0;
    for (std::size_t a = 0; a < sample.size(); ++a) {
        for (std::size_t b = a + 1; b < sample.size(); ++b) {
            const double d = (validation_chart.col(sample[a]) - validation_chart.col(sample[b])).norm();
            dmax = std::max(dmax, d);
            if (d > 0.0) dmin = std::min(dmin, d);
        }
    }
    if (!std::isfinite(dmin)) dmin = 0.0;  // all points coincide

    SelectionConfig config;
    config.delta_min = dmin;
    config.delta_max = dmax;
    config.target_set_size = target_set_size;

    const auto mean_set_size = [&](double delta) {
        SelectionConfig probe{delta, dmin, dmax, target_set_size};
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const LookupResult hit = table.lookup(validation_chart.col(i));
            total += static_cast<double>(select_beams(hit.candidates, validation_chart.col(i), probe).size());
        }
        return total / static_cast<double>(n);
    };

    if (mean_set_size(dmin) >= target_set_size) {
        config.delta = dmin;
        return config;
    }
    double lo = dmin, hi = dmax;
    for (int iter = 0; iter < 30; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mean_set_size(mid) >= target_set_size)
            hi = mid;
        else
            lo = mid;
    }
    config.delta = hi;
    return config;
}

}  // namespace chartbeam
