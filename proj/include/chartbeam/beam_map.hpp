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

#ifndef CHARTBEAM_BEAM_MAP_HPP
#define CHARTBEAM_BEAM_MAP_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace chartbeam {

/// Keys can exceed 64 bits for the default generating factor, so they
/// are carried as 128-bit integers end to end.
using chart_key = unsigned __int128;

std::string key_to_string(chart_key key);
chart_key key_from_string(const std::string& s);

/// Chart-coordinate key generation: ky = c^(k+1) * (floor(k*(y1-o1)) +
/// floor(k*(y2-o2))).
struct KeyGenConfig {
    int c = 2;                              // generating factor
    int k_res = 100;                        // resolution factor k
    Eigen::Vector2d origin_shift{0.0, 0.0};

    void validate() const;
};

chart_key make_key(const Eigen::Vector2d& y, const KeyGenConfig& config);

/// Universal family h_cd(a) = ((c*a + d) mod s) mod m with s prime.
struct HashParams {
    std::uint64_t s = 0;  // prime modulus
    std::uint64_t m = 0;  // slot count
    std::uint64_t c = 1;  // in [1, s-1]
    std::uint64_t d = 0;  // in [0, s-1]

    void validate() const;
};

std::uint64_t universal_hash(chart_key key, const HashParams& params);

/// Deterministic Miller-Rabin for 64-bit integers.
bool is_prime(std::uint64_t n);
std::uint64_t next_prime(std::uint64_t n);

/// Random (c, d) draw from the family for the given s, m.
HashParams draw_hash_params(std::uint64_t s, std::uint64_t m, std::uint64_t seed);

/// A candidate beam stored in the table: its index, the chart anchor it
/// was recorded at, and a hit count used as lookup priority.
struct BeamCandidate {
    int beam = 0;
    Eigen::Vector2d anchor{0.0, 0.0};
    int hits = 0;
};

struct SelectionConfig {
    double delta = 0.0;
    double delta_min = 0.0;
    double delta_max = 0.0;
    int target_set_size = 4;

    void validate() const;
};

struct LookupResult {
    std::vector<BeamCandidate> candidates;  // priority order: hits desc, beam asc
    int probes = 0;                         // chain nodes touched
};

/**
 * @brief Chained mapping table from chart-coordinate keys to candidate
 * beam sets.
 *
 * Single writer, many readers: build/update are exclusive, lookups are
 * const. Distinct grid cells can share a key (the key function sums two
 * floors); the delta filter downstream is the mitigation for that.
 */
class BeamMapTable {
public:
    BeamMapTable() = default;
    BeamMapTable(KeyGenConfig keygen, HashParams hash);

    const KeyGenConfig& keygen() const { return keygen_; }
    const HashParams& hash_params() const { return hash_; }
    std::size_t slot_count() const { return slots_.size(); }
    std::size_t key_count() const { return n_keys_; }
    double load_factor() const { return static_cast<double>(n_keys_) / slots_.size(); }

    void insert(const Eigen::Vector2d& y, int beam);
    void insert_key(chart_key key, int beam, const Eigen::Vector2d& anchor);

    LookupResult lookup(const Eigen::Vector2d& y) const;
    LookupResult lookup_key(chart_key key) const;

    /// Merge the observed best beam at K(y) with top priority (hit count
    /// one above the current maximum of its set).
    void update(const Eigen::Vector2d& y, int beam);

    /// Mean 1-based chain position over every stored key (the expected
    /// successful-search cost, <= 1 + load factor for universal hashing).
    double mean_successful_probes() const;

    /// All stored (anchor, beam) pairs.
    std::vector<BeamCandidate> all_candidates() const;

    /// Closest stored anchor to the query (ties to the lowest beam
    /// index); nullptr when the table is empty.
    const BeamCandidate* nearest_anchor(const Eigen::Vector2d& y) const;

    /// Chain-reachability and count audit; throws on violation.
    void check_invariants() const;

    void save(const std::string& path) const;
    static BeamMapTable load(const std::string& path);

private:
    struct Node {
        chart_key key = 0;
        std::vector<BeamCandidate> candidates;
    };

    Node* find_node(chart_key key);
    const Node* find_node(chart_key key, int* probes) const;

    KeyGenConfig keygen_;
    HashParams hash_;
    std::vector<std::vector<Node>> slots_;
    std::size_t n_keys_ = 0;
};

/// Offline construction: one insert per (chart point, truth beam), with
/// the origin shift set to the componentwise chart minimum, m the
/// smallest prime >= the training size (load factor about 1), and s the
/// smallest prime above the largest key when that fits, else 2^61 - 1.
BeamMapTable build_table(const Eigen::MatrixXd& chart, const std::vector<int>& beams,
                         const KeyGenConfig& keygen_base, std::uint64_t hash_seed);

/// Keep candidates whose anchors lie within delta of the query point.
std::vector<BeamCandidate> select_beams(const std::vector<BeamCandidate>& candidates,
                                        const Eigen::Vector2d& y_query, const SelectionConfig& config);

/// Smallest delta whose mean filtered-set size over the validation
/// charts reaches target_set_size; bisection over the pairwise-distance
/// range, at most 30 iterations.
SelectionConfig calibrate_delta(const BeamMapTable& table, const Eigen::MatrixXd& validation_chart,
                                int target_set_size);

}  // namespace chartbeam

#endif  // CHARTBEAM_BEAM_MAP_HPP
