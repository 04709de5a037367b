// SPDX-License-Identifier: Apache-2.0
//
// chartbeam python module: the main operations of the C++ core.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "chartbeam/harness.hpp"

namespace py = pybind11;
using namespace chartbeam;

PYBIND11_MODULE(_chartbeam, m) {
    m.doc() = "channel-charting based mmWave beam tracking";

    py::class_<ArrayGeometry>(m, "ArrayGeometry")
        .def_static("ula", &ArrayGeometry::ula, py::arg("n"), py::arg("spacing") = 0.5)
        .def_static("planar", &ArrayGeometry::planar, py::arg("m"), py::arg("n"),
                    py::arg("spacing") = 0.5)
        .def_property_readonly("n_elements", &ArrayGeometry::n_elements);

    py::class_<Path>(m, "Path")
        .def(py::init([](cd gain, double theta_t, double theta_r, double elev_t, double elev_r) {
                 return Path{gain, theta_t, theta_r, elev_t, elev_r};
             }),
             py::arg("gain") = cd{1.0, 0.0}, py::arg("theta_t") = 0.0, py::arg("theta_r") = 0.0,
             py::arg("elev_t") = 0.0, py::arg("elev_r") = 0.0)
        .def_readwrite("gain", &Path::gain)
        .def_readwrite("theta_t", &Path::theta_t)
        .def_readwrite("theta_r", &Path::theta_r);

    py::class_<ChannelSnapshot>(m, "ChannelSnapshot")
        .def_readonly("h", &ChannelSnapshot::h)
        .def_readonly("t", &ChannelSnapshot::t)
        .def_readonly("paths", &ChannelSnapshot::paths);

    py::class_<Codebook>(m, "Codebook")
        .def_readonly("vectors", &Codebook::vectors)
        .def_property_readonly("size", &Codebook::size);

    py::class_<BeamPair>(m, "BeamPair")
        .def(py::init([](int rx, int tx) { return BeamPair{rx, tx}; }), py::arg("rx"), py::arg("tx"))
        .def_readwrite("rx", &BeamPair::rx)
        .def_readwrite("tx", &BeamPair::tx)
        .def("__eq__", [](const BeamPair& a, const BeamPair& b) { return a == b; })
        .def("__repr__", [](const BeamPair& p) {
            return "BeamPair(rx=" + std::to_string(p.rx) + ", tx=" + std::to_string(p.tx) + ")";
        });

    m.def("array_response", &array_response, py::arg("theta"), py::arg("geometry"));
    m.def("planar_response", &planar_response, py::arg("alpha"), py::arg("phi"), py::arg("geometry"));
    m.def(
        "dft_codebook", [](int n) { return dft_codebook(n); }, py::arg("n"));
    m.def("beam_center_angle", &beam_center_angle, py::arg("k"), py::arg("n"));
    m.def("quantize_to_beam", &quantize_to_beam, py::arg("theta"), py::arg("n"));
    m.def(
        "channel_matrix",
        [](const std::vector<Path>& paths, const ArrayGeometry& rx, const ArrayGeometry& tx, int t) {
            return channel_matrix(paths, rx, tx, t);
        },
        py::arg("paths"), py::arg("rx_geometry"), py::arg("tx_geometry"), py::arg("t") = 0);
    m.def(
        "best_beam_oracle",
        [](const Eigen::MatrixXcd& h, const Codebook& cb_tx, const Codebook& cb_rx) {
            const BeamSelection sel = best_beam_oracle(h, cb_tx, cb_rx);
            return py::make_tuple(sel.pair.rx, sel.pair.tx, sel.power);
        },
        py::arg("h"), py::arg("cb_tx"), py::arg("cb_rx"));
    m.def(
        "snr_of_pair",
        [](const Eigen::MatrixXcd& h, int m_idx, int n_idx, const Codebook& cb_rx,
           const Codebook& cb_tx, double noise_var, double tx_power) {
            return snr_of_pair(h, m_idx, n_idx, cb_rx, cb_tx, noise_var, tx_power);
        },
        py::arg("h"), py::arg("m"), py::arg("n"), py::arg("cb_rx"), py::arg("cb_tx"),
        py::arg("noise_var"), py::arg("tx_power") = 1.0);

    py::class_<ScenarioConfig>(m, "ScenarioConfig")
        .def(py::init<>())
        .def_readwrite("n_steps", &ScenarioConfig::n_steps)
        .def_readwrite("segment_length_los", &ScenarioConfig::segment_length_los)
        .def_readwrite("segment_length_nlos", &ScenarioConfig::segment_length_nlos)
        .def_readwrite("max_clusters", &ScenarioConfig::max_clusters)
        .def_readwrite("angular_drift_rate", &ScenarioConfig::angular_drift_rate)
        .def_readwrite("jump_probability", &ScenarioConfig::jump_probability)
        .def_readwrite("noise_var", &ScenarioConfig::noise_var)
        .def_readwrite("tx_power", &ScenarioConfig::tx_power)
        .def_readwrite("n_tx", &ScenarioConfig::n_tx)
        .def_readwrite("n_rx", &ScenarioConfig::n_rx)
        .def_readwrite("seed", &ScenarioConfig::seed);

    py::class_<Trajectory>(m, "Trajectory")
        .def_property_readonly("n_steps", &Trajectory::n_steps)
        .def_readonly("truth", &Trajectory::truth)
        .def_readonly("segment_ids", &Trajectory::segment_ids)
        .def("snapshot_at", &Trajectory::snapshot_at, py::arg("t"))
        .def("features", [](const Trajectory& t) {
            std::vector<Eigen::VectorXd> out;
            for (const FeatureVector& f : features_from_trajectory(t)) out.push_back(f.as_vector());
            return out;
        });

    m.def("generate_trajectory", &generate_trajectory, py::arg("config"));
    m.def("generate_trajectory_sequence", &generate_trajectory_sequence, py::arg("config"),
          py::arg("k"));
    m.def("save_trajectory", &save_trajectory, py::arg("trajectory"), py::arg("path"));
    m.def("load_trajectory", &load_trajectory, py::arg("path"));

    py::class_<HashParams>(m, "HashParams")
        .def(py::init([](std::uint64_t s, std::uint64_t slots, std::uint64_t c, std::uint64_t d) {
                 return HashParams{s, slots, c, d};
             }),
             py::arg("s"), py::arg("m"), py::arg("c"), py::arg("d"));
    m.def(
        "universal_hash",
        [](std::uint64_t key, const HashParams& params) {
            return universal_hash(static_cast<chart_key>(key), params);
        },
        py::arg("key"), py::arg("params"));
    py::class_<KeyGenConfig>(m, "KeyGenConfig")
        .def(py::init<>())
        .def_readwrite("c", &KeyGenConfig::c)
        .def_readwrite("k_res", &KeyGenConfig::k_res);
    m.def(
        "make_key",
        [](const Eigen::VectorXd& y, const KeyGenConfig& cfg) {
            if (y.size() != 2) throw std::invalid_argument("make_key: expected a 2-vector");
            return py::str(key_to_string(make_key(Eigen::Vector2d(y(0), y(1)), cfg)));
        },
        py::arg("y"), py::arg("config"),
        "Returns the key as a decimal string (it can exceed 64 bits).");

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("delta", &TrainConfig::delta)
        .def_readwrite("loss_weight", &TrainConfig::loss_weight)
        .def_readwrite("pos_window", &TrainConfig::pos_window)
        .def_readwrite("neg_window", &TrainConfig::neg_window)
        .def_readwrite("seed", &TrainConfig::seed);

    py::class_<ChartModel>(m, "ChartModel")
        .def("encode", &ChartModel::encode, py::arg("x"))
        .def("encode_batch", &ChartModel::encode_batch, py::arg("x"))
        .def("decode", &ChartModel::decode, py::arg("y"))
        .def_property_readonly("input_dim", &ChartModel::input_dim)
        .def_property_readonly("latent_dim", &ChartModel::latent_dim);

    m.def("save_chart_model", &save_chart_model, py::arg("model"), py::arg("path"));
    m.def("load_chart_model", &load_chart_model, py::arg("path"));
    m.def("neighborhood_preservation", &neighborhood_preservation, py::arg("chart"),
          py::arg("features"), py::arg("k"));

    py::class_<Metrics>(m, "Metrics")
        .def_readonly("e_ps_tx", &Metrics::e_ps_tx)
        .def_readonly("e_ps_rx", &Metrics::e_ps_rx)
        .def_readonly("e_pd_tx", &Metrics::e_pd_tx)
        .def_readonly("e_pd_rx", &Metrics::e_pd_rx)
        .def_readonly("n_s", &Metrics::n_s)
        .def_readonly("n_steps", &Metrics::n_steps)
        .def("e_ps", &Metrics::e_ps)
        .def("e_pd", &Metrics::e_pd)
        .def("accuracy", &Metrics::accuracy)
        .def("mean_scans_per_side", &Metrics::mean_scans_per_side);

    py::class_<TrackerConfig>(m, "TrackerConfig")
        .def(py::init<>())
        .def_readwrite("snr_threshold_db", &TrackerConfig::snr_threshold_db)
        .def_readwrite("neighbor_radius", &TrackerConfig::neighbor_radius)
        .def_readwrite("max_candidates", &TrackerConfig::max_candidates);

    // End-to-end convenience: offline phase + online loop over a set of
    // seeded trajectories, mirroring the command line pipeline.
    m.def(
        "run_pipeline",
        [](const ScenarioConfig& scenario, const TrainConfig& train_cfg,
           const TrackerConfig& tracker_cfg, int n_paths, int hidden) {
            Config c;
            RunConfig run = RunConfig::from_config(c);
            run.scenario = scenario;
            run.train = train_cfg;
            run.tracker = tracker_cfg;
            run.n_paths = n_paths;
            run.chart_hidden1 = hidden;
            run.validate();

            std::vector<Trajectory> trajectories;
            std::vector<std::vector<FeatureVector>> series;
            std::vector<std::vector<BeamPair>> truths;
            for (int i = 0; i < n_paths; ++i) {
                ScenarioConfig scen = scenario;
                scen.seed = scenario.seed + static_cast<std::uint64_t>(i);
                trajectories.push_back(generate_trajectory(scen));
                series.push_back(features_from_trajectory(trajectories.back()));
                truths.push_back(trajectories.back().truth);
            }
            TrainedPipeline pipe = train_pipeline(series, truths, run);

            std::vector<Metrics> all;
            for (const Trajectory& traj : trajectories) {
                BeamMapTable table_tx = pipe.table_tx;
                BeamMapTable table_rx = pipe.table_rx;
                TrackerContext ctx{&pipe.model, &table_tx, &table_rx, pipe.select_tx, pipe.select_rx};
                all.push_back(run_tracker(traj, ctx, run.tracker).metrics);
            }
            return all;
        },
        py::arg("scenario"), py::arg("train"), py::arg("tracker") = TrackerConfig{},
        py::arg("n_paths") = 4, py::arg("hidden") = 32);
}
