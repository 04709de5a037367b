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

#include "chartbeam/tracker.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "chartbeam/io_util.hpp"

namespace chartbeam {

void TrackerConfig::validate() const {
    if (neighbor_radius < 0) throw std::invalid_argument("tracker: neighbor_radius must be >= 0");
    if (max_candidates < 1) throw std::invalid_argument("tracker: max_candidates must be >= 1");
    if (t_e < 1) throw std::invalid_argument("tracker: t_e must be >= 1");
    if (t_d < 0) throw std::invalid_argument("tracker: t_d must be >= 0");
    if (retrain_interval < 0) throw std::invalid_argument("tracker: retrain_interval must be >= 0");
}

namespace {

Eigen::Vector2d encode_feature(const ChartModel& model, const FeatureVector& x) {
    if (model.latent_dim() != 2) throw std::invalid_argument("tracker: chart must be 2-D");
    const Eigen::VectorXd y = model.encode(select_input(x, model.input_mode));
    return Eigen::Vector2d(y(0), y(1));
}

struct SideLocate {
    int beam = 0;
    std::vector<BeamCandidate> filtered;
    bool fallback = false;
};

SideLocate locate_side(const BeamMapTable& table, const SelectionConfig& select,
                       const Eigen::Vector2d& y) {
    SideLocate out;
    const LookupResult hit = table.lookup(y);
    out.filtered = select_beams(hit.candidates, y, select);
    if (!out.filtered.empty()) {
        // The closest surviving label represents the query (the key
        // function aliases whole grid diagonals, so hit counts alone
        // would favor popular but distant anchors). Ties go to the
        // more-often-confirmed beam.
        const BeamCandidate* best = &out.filtered.front();
        double best_dist = (y - best->anchor).squaredNorm();
        for (const BeamCandidate& cand : out.filtered) {
            const double d = (y - cand.anchor).squaredNorm();
            if (d < best_dist || (d == best_dist && (cand.hits > best->hits ||
                                                     (cand.hits == best->hits && cand.beam < best->beam)))) {
                best = &cand;
                best_dist = d;
            }
        }
        out.beam = best->beam;
        return out;
    }
    out.fallback = true;
    const BeamCandidate* nearest = table.nearest_anchor(y);
    if (!nearest) throw std::runtime_error("locate: table holds no anchors");
    out.beam = nearest->beam;
    return out;
}

// Mean of the last t_e inputs ending t_d steps back (clipped to what
// exists); with the defaults this is just the newest feature.
FeatureVector effective_feature(const std::vector<FeatureVector>& history, int t_e, int t_d) {
    const int newest = static_cast<int>(history.size()) - 1 - t_d;
    const int start = std::max(0, newest - t_e + 1);
    if (newest < 0) return history.back();
    FeatureVector mean;
    int count = 0;
    for (int i = start; i <= newest; ++i) {
        mean.aoa_az += history[i].aoa_az;
        mean.aod_el += history[i].aod_el;
        mean.aod_az += history[i].aod_az;
        mean.aoa_el += history[i].aoa_el;
        mean.tau += history[i].tau;
        ++count;
    }
    mean.aoa_az /= count;
    mean.aod_el /= count;
    mean.aod_az /= count;
    mean.aoa_el /= count;
    mean.tau /= count;
    return mean;
}

}  // namespace

LocateResult locate(const TrackerContext& ctx, const FeatureVector& x) {
    LocateResult out;
    out.y = encode_feature(*ctx.model, x);
    SideLocate tx = locate_side(*ctx.table_tx, ctx.select_tx, out.y);
    SideLocate rx = locate_side(*ctx.table_rx, ctx.select_rx, out.y);
    out.located = BeamPair{rx.beam, tx.beam};
    out.filtered_tx = std::move(tx.filtered);
    out.filtered_rx = std::move(rx.filtered);
    out.fallback_tx = tx.fallback;
    out.fallback_rx = rx.fallback;
    return out;
}

std::vector<int> candidate_set(int located, const std::vector<BeamCandidate>& table_hits,
                               const TrackerConfig& config, int n_beams) {
    config.validate();
    if (located < 0 || located >= n_beams) throw std::invalid_argument("candidate_set: located out of range");

    std::vector<int> out{located};
    const auto push_unique = [&](int beam) {
        if (std::find(out.begin(), out.end(), beam) == out.end() &&
            static_cast<int>(out.size()) < config.max_candidates)
            out.push_back(beam);
    };

    // Table hits first (hits desc, index asc), so beams recorded by the
    // data-update path survive the cap even when far from the located one.
    std::vector<BeamCandidate> sorted = table_hits;
    std::sort(sorted.begin(), sorted.end(), [](const BeamCandidate& a, const BeamCandidate& b) {
        return a.hits != b.hits ? a.hits > b.hits : a.beam < b.beam;
    });
    for (const BeamCandidate& cand : sorted) push_unique(((cand.beam % n_beams) + n_beams) % n_beams);

    std::vector<int> neighbors;
    for (int r = 1; r <= config.neighbor_radius; ++r) {
        neighbors.push_back(((located - r) % n_beams + n_beams) % n_beams);
        neighbors.push_back((located + r) % n_beams);
    }
    std::sort(neighbors.begin(), neighbors.end());
    for (int beam : neighbors) push_unique(beam);
    return out;
}

ScanOutcome scan_confirm(const Eigen::MatrixXcd& h, const std::vector<int>& cand_tx,
                         const std::vector<int>& cand_rx, const Codebook& cb_tx, const Codebook& cb_rx,
                         double noise_var, double tx_power) {
    if (cand_tx.empty() || cand_rx.empty())
        throw std::invalid_argument("scan_confirm: empty candidate set");
    const Eigen::MatrixXd p = beam_powers(h, cb_rx, cb_tx, cand_rx, cand_tx);

    ScanOutcome out;
    out.pairs = static_cast<long>(cand_rx.size()) * static_cast<long>(cand_tx.size());
    double best_power = -1.0;
    for (std::size_t i = 0; i < cand_rx.size(); ++i) {
        for (std::size_t j = 0; j < cand_tx.size(); ++j) {
            const BeamPair pair{cand_rx[i], cand_tx[j]};
            const bool better =
                p(i, j) > best_power ||
                (p(i, j) == best_power && (pair.rx < out.best.rx ||
                                           (pair.rx == out.best.rx && pair.tx < out.best.tx)));
            if (better) {
                best_power = p(i, j);
                out.best = pair;
            }
        }
    }
    out.snr_db = noise_var == 0.0 ? std::numeric_limits<double>::infinity()
                                  : 10.0 * std::log10(tx_power * best_power / noise_var);
    return out;
}

BeamPair misalignment_handler(const Eigen::MatrixXcd& h, const Eigen::Vector2d& y,
                              const FeatureVector& x, const Codebook& cb_tx, const Codebook& cb_rx,
                              TrackerContext& ctx, std::vector<FeatureVector>& update_features,
                              std::vector<BeamPair>& update_beams) {
    const BeamPair best = best_beam_oracle(h, cb_tx, cb_rx).pair;
    ctx.table_tx->update(y, best.tx);
    ctx.table_rx->update(y, best.rx);
    update_features.push_back(x);
    update_beams.push_back(best);
    return best;
}

FeatureVector reconstruct_next_feature(const ChartModel& model, const Eigen::Vector2d& y,
                                       BeamPair confirmed, int n_tx, int n_rx, double next_tau) {
    const Eigen::VectorXd decoded = model.decode(Eigen::Vector2d(y));
    // Expand the decoded dims back onto the full 5-dim layout.
    FeatureVector next;
    const std::vector<int> idx = input_mode_indices(model.input_mode);
    Eigen::VectorXd full = Eigen::VectorXd::Zero(5);
    for (std::size_t i = 0; i < idx.size(); ++i) full(idx[i]) = decoded(i);
    next = FeatureVector::from_vector(full);
    // The azimuths are pinned to the confirmed pair's beam centers (the
    // nearest-codebook quantization of the decoded angles resolves to
    // this pair when the autoencoder round trip is faithful).
    next.aoa_az = beam_center_angle(confirmed.rx, n_rx);
    next.aod_az = beam_center_angle(confirmed.tx, n_tx);
    next.tau = next_tau;
    return next;
}

double default_snr_threshold(const Trajectory& trajectory) {
    const ScenarioConfig& c = trajectory.config;
    const Codebook cb_tx = dft_codebook(c.n_tx, Codebook::Side::tx);
    const Codebook cb_rx = dft_codebook(c.n_rx, Codebook::Side::rx);
    std::vector<double> snrs;
    snrs.reserve(trajectory.n_steps());
    for (int t = 0; t < trajectory.n_steps(); ++t) {
        const ChannelSnapshot snap = trajectory.snapshot_at(t);
        snrs.push_back(snr_of_pair(snap.h, trajectory.truth[t].rx, trajectory.truth[t].tx, cb_rx,
                                   cb_tx, c.noise_var, c.tx_power));
    }
    std::sort(snrs.begin(), snrs.end());
    return snrs[snrs.size() / 2] - 10.0;
}

TrackResult run_tracker(const Trajectory& trajectory, TrackerContext& ctx, const TrackerConfig& config,
                        const RetrainHook& retrain) {
    config.validate();
    if (!ctx.model || !ctx.table_tx || !ctx.table_rx)
        throw std::invalid_argument("run_tracker: context not initialized");

    const ScenarioConfig& scen = trajectory.config;
    const Codebook cb_tx = dft_codebook(scen.n_tx, Codebook::Side::tx);
    const Codebook cb_rx = dft_codebook(scen.n_rx, Codebook::Side::rx);
    const double threshold =
        std::isnan(config.snr_threshold_db) ? default_snr_threshold(trajectory) : config.snr_threshold_db;

    TrackResult result;
    Metrics& metrics = result.metrics;
    metrics.n_steps = trajectory.n_steps();

    std::vector<FeatureVector> inputs;  // x_0 is genie-aligned, the rest reconstructed
    inputs.push_back(build_feature(trajectory.snapshot_at(0), trajectory.tau_at(0)));

    for (int t = 0; t < trajectory.n_steps(); ++t) {
        const ChannelSnapshot snap = trajectory.snapshot_at(t);
        const FeatureVector x_t = effective_feature(inputs, config.t_e, config.t_d);

        const LocateResult loc = locate(ctx, x_t);
        if (!std::isfinite(loc.y(0)) || !std::isfinite(loc.y(1)))
            throw std::runtime_error("run_tracker: chart coordinate is not finite");

        const std::vector<int> cand_tx =
            candidate_set(loc.located.tx, loc.filtered_tx, config, scen.n_tx);
        const std::vector<int> cand_rx =
            candidate_set(loc.located.rx, loc.filtered_rx, config, scen.n_rx);

        const ScanOutcome scan =
            scan_confirm(snap.h, cand_tx, cand_rx, cb_tx, cb_rx, scen.noise_var, scen.tx_power);

        StepRecord rec;
        rec.t = t;
        rec.located_tx = loc.located.tx;
        rec.located_rx = loc.located.rx;
        rec.truth_tx = trajectory.truth[t].tx;
        rec.truth_rx = trajectory.truth[t].rx;
        rec.n_cand_tx = static_cast<int>(cand_tx.size());
        rec.n_cand_rx = static_cast<int>(cand_rx.size());
        rec.fallback_tx = loc.fallback_tx;
        rec.fallback_rx = loc.fallback_rx;
        rec.snr_db = scan.snr_db;

        BeamPair confirmed = scan.best;
        rec.misaligned = scan.snr_db < threshold;
        if (rec.misaligned) {
            confirmed = misalignment_handler(snap.h, loc.y, x_t, cb_tx, cb_rx, ctx,
                                             result.update_features, result.update_beams);
            rec.scans = static_cast<long>(scen.n_tx) * scen.n_rx;  // the sweep covers every pair
            rec.e_tx = false;
            rec.e_rx = false;
        } else {
            rec.scans = scan.pairs;
            rec.e_tx = std::find(cand_tx.begin(), cand_tx.end(), rec.truth_tx) == cand_tx.end();
            rec.e_rx = std::find(cand_rx.begin(), cand_rx.end(), rec.truth_rx) == cand_rx.end();
        }
        rec.pred_tx = confirmed.tx;
        rec.pred_rx = confirmed.rx;

        metrics.e_ps_tx += rec.located_tx != rec.truth_tx;
        metrics.e_ps_rx += rec.located_rx != rec.truth_rx;
        metrics.e_pd_tx += rec.e_tx;
        metrics.e_pd_rx += rec.e_rx;
        metrics.zeta_tx += rec.fallback_tx;
        metrics.zeta_rx += rec.fallback_rx;
        metrics.pairs_scanned += rec.scans;

        long side_scans = rec.n_cand_tx + rec.n_cand_rx;
        long formula_scans = (rec.fallback_tx ? 2 : rec.n_cand_tx) + (rec.fallback_rx ? 2 : rec.n_cand_rx);
        if (rec.misaligned) {
            side_scans += scen.n_tx + scen.n_rx;
            formula_scans += scen.n_tx + scen.n_rx;
        }
        metrics.n_s += side_scans;
        metrics.n_s_formula += formula_scans;

        result.record.steps.push_back(rec);

        if (t + 1 < trajectory.n_steps()) {
            inputs.push_back(reconstruct_next_feature(*ctx.model, loc.y, confirmed, scen.n_tx,
                                                      scen.n_rx, trajectory.tau_at(t + 1)));
            if (config.retrain_interval > 0 && retrain && (t + 1) % config.retrain_interval == 0)
                retrain(result.update_features, result.update_beams, ctx);
        }
    }
    return result;
}

Metrics exhaustive_baseline(const Trajectory& trajectory) {
    Metrics metrics;
    metrics.n_steps = trajectory.n_steps();
    const long n = trajectory.n_steps();
    metrics.n_s = n * (trajectory.config.n_tx + trajectory.config.n_rx);
    metrics.n_s_formula = metrics.n_s;
    metrics.pairs_scanned = n * static_cast<long>(trajectory.config.n_tx) * trajectory.config.n_rx;
    return metrics;
}

BaselineResult sliding_window_baseline(const Trajectory& trajectory, int w) {
    if (w < 0) throw std::invalid_argument("sliding_window_baseline: w must be >= 0");
    const ScenarioConfig& scen = trajectory.config;
    const Codebook cb_tx = dft_codebook(scen.n_tx, Codebook::Side::tx);
    const Codebook cb_rx = dft_codebook(scen.n_rx, Codebook::Side::rx);

    const auto window_around = [w](int center, int n) {
        std::vector<int> out;
        for (int r = -w; r <= w; ++r) out.push_back(((center + r) % n + n) % n);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    };

    BaselineResult result;
    Metrics& metrics = result.metrics;
    metrics.n_steps = trajectory.n_steps();
    BeamPair prev = trajectory.truth[0];
    for (int t = 0; t < trajectory.n_steps(); ++t) {
        const std::vector<int> wtx = window_around(prev.tx, scen.n_tx);
        const std::vector<int> wrx = window_around(prev.rx, scen.n_rx);
        const ScanOutcome scan = scan_confirm(trajectory.snapshot_at(t).h, wtx, wrx, cb_tx, cb_rx,
                                              scen.noise_var, scen.tx_power);
        const BeamPair truth = trajectory.truth[t];
        metrics.e_ps_tx += scan.best.tx != truth.tx;
        metrics.e_ps_rx += scan.best.rx != truth.rx;
        metrics.e_pd_tx += std::find(wtx.begin(), wtx.end(), truth.tx) == wtx.end();
        metrics.e_pd_rx += std::find(wrx.begin(), wrx.end(), truth.rx) == wrx.end();
        metrics.n_s += static_cast<long>(wtx.size()) + wrx.size();
        metrics.pairs_scanned += scan.pairs;
        result.predicted.push_back(scan.best);
        result.windows_tx.push_back(wtx);
        result.windows_rx.push_back(wrx);
        prev = scan.best;
    }
    metrics.n_s_formula = metrics.n_s;
    return result;
}

std::vector<Metrics> timeliness_eval(TrackerContext& ctx, const std::vector<Trajectory>& stream,
                                     const TrackerConfig& config) {
    std::vector<Metrics> out;
    out.reserve(stream.size());
    for (const Trajectory& traj : stream) out.push_back(run_tracker(traj, ctx, config).metrics);
    return out;
}

void save_track_csv(const TrackRecord& record, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_track_csv: cannot open " + path);
    out << "t,located_t,located_r,truth_t,truth_r,pred_t,pred_r,n_cand_t,n_cand_r,scans,e_t,e_r,"
           "misaligned,snr_db\n";
    for (const StepRecord& r : record.steps) {
        out << r.t << ',' << r.located_tx << ',' << r.located_rx << ',' << r.truth_tx << ','
            << r.truth_rx << ',' << r.pred_tx << ',' << r.pred_rx << ',' << r.n_cand_tx << ','
            << r.n_cand_rx << ',' << r.scans << ',' << (r.e_tx ? 1 : 0) << ',' << (r.e_rx ? 1 : 0)
            << ',' << (r.misaligned ? 1 : 0) << ',' << io::fmt(r.snr_db) << '\n';
    }
    if (!out) throw std::runtime_error("save_track_csv: write failed for " + path);
}

TrackRecord load_track_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_track_csv: cannot open " + path);
    TrackRecord record;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (header) { header = false; continue; }
        const std::vector<std::string> cols = io::split(line, ',');
        if (cols.size() != 14) throw std::runtime_error("load_track_csv: bad row in " + path);
        StepRecord r;
        r.t = std::stoi(cols[0]);
        r.located_tx = std::stoi(cols[1]);
        r.located_rx = std::stoi(cols[2]);
        r.truth_tx = std::stoi(cols[3]);
        r.truth_rx = std::stoi(cols[4]);
        r.pred_tx = std::stoi(cols[5]);
        r.pred_rx = std::stoi(cols[6]);
        r.n_cand_tx = std::stoi(cols[7]);
        r.n_cand_rx = std::stoi(cols[8]);
        r.scans = std::stol(cols[9]);
        r.e_tx = cols[10] == "1";
        r.e_rx = cols[11] == "1";
        r.misaligned = cols[12] == "1";
        r.snr_db = std::stod(cols[13]);
        record.steps.push_back(r);
    }
    return record;
}

Metrics metrics_from_record(const TrackRecord& record, int n_tx, int n_rx) {
    Metrics m;
    m.n_steps = static_cast<long>(record.steps.size());
    for (const StepRecord& r : record.steps) {
        m.e_ps_tx += r.located_tx != r.truth_tx;
        m.e_ps_rx += r.located_rx != r.truth_rx;
        m.e_pd_tx += r.e_tx;
        m.e_pd_rx += r.e_rx;
        m.zeta_tx += r.fallback_tx;
        m.zeta_rx += r.fallback_rx;
        m.pairs_scanned += r.scans;
        long side = r.n_cand_tx + r.n_cand_rx;
        long formula = (r.fallback_tx ? 2 : r.n_cand_tx) + (r.fallback_rx ? 2 : r.n_cand_rx);
        if (r.misaligned) {
            side += n_tx + n_rx;
            formula += n_tx + n_rx;
        }
        m.n_s += side;
        m.n_s_formula += formula;
    }
    return m;
}

}  // namespace chartbeam
