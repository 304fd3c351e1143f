#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "covi/harness.hpp"
#include "covi/observability.hpp"

namespace py = pybind11;
using namespace covi;

namespace {

SimConfig config_from_kwargs(const py::dict& overrides) {
    nlohmann::json doc;
    for (const auto& item : overrides) {
        const std::string key = py::cast<std::string>(item.first);
        if (py::isinstance<py::sequence>(item.second) && !py::isinstance<py::str>(item.second)) {
            auto seq = py::cast<std::vector<double>>(item.second);
            doc[key] = seq;
        } else {
            doc[key] = py::cast<double>(item.second);
        }
    }
    SimConfig cfg = config_from_json(doc);
    if (doc.contains("seed")) {
        cfg.seed = static_cast<std::uint64_t>(doc["seed"].get<double>());
    }
    return cfg;
}

py::dict estimate_to_dict(const ClosedFormEstimate& est) {
    py::dict d;
    d["R_A"] = est.R_A;
    d["V_A"] = est.V_A;
    d["O_A"] = est.O_A;
    d["O_A_raw"] = est.O_A_raw;
    d["lambdas"] = est.lambdas;
    d["residual_norm"] = est.residual_norm;
    d["condition"] = est.condition;
    d["orthonormality_defect"] = est.orthonormality_defect;
    d["nonpositive_lambda"] = est.nonpositive_lambda;
    return d;
}

Window window_from_config(const SimConfig& cfg, double window_s, CameraMode mode) {
    return window_from_logs(simulate_trial_logs(cfg), window_s, mode);
}

CameraMode mode_from_string(const std::string& mode) {
    if (mode == "single") {
        return CameraMode::SingleCamera;
    }
    if (mode == "dual") {
        return CameraMode::DualSynchronized;
    }
    throw std::invalid_argument("mode must be 'single' or 'dual'");
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Cooperative visual-inertial closed-form initialization";
    m.attr("__version__") = "0.1.0";

    py::register_exception<Error>(m, "CoviError");

    m.def("skew", &skew, py::arg("v"),
          "Skew matrix in the project's sign convention: skew(v) @ u == cross(u, v)");
    m.def("quat_to_rot",
          [](double w, double x, double y, double z) { return quat_to_rot(Quat{w, x, y, z}); },
          py::arg("w"), py::arg("x"), py::arg("y"), py::arg("z"));
    m.def("rot_from_euler",
          py::overload_cast<double, double, double>(&rot_from_euler),
          py::arg("roll"), py::arg("pitch"), py::arg("yaw"));
    m.def("rot_to_euler", &rot_to_euler, py::arg("O"));
    m.def("project_to_so3", &project_to_so3, py::arg("M"));

    m.def(
        "solve_trial",
        [](const py::dict& config, double window_s, const std::string& mode) {
            const SimConfig cfg = config_from_kwargs(config);
            const CameraMode cm = mode_from_string(mode);
            const Window w = window_from_config(cfg, window_s, cm);
            const auto epochs = preintegrate_window(w);
            return estimate_to_dict(solve_closed_form(epochs, cm));
        },
        py::arg("config") = py::dict(), py::arg("window_s") = 4.0, py::arg("mode") = "dual",
        "Simulate one trial and run the closed-form solver on it");

    m.def(
        "calibrate_trial",
        [](const py::dict& config, double window_s, const std::string& mode, int max_iterations) {
            const SimConfig cfg = config_from_kwargs(config);
            const CameraMode cm = mode_from_string(mode);
            const Window w = window_from_config(cfg, window_s, cm);
            CalibrationOptions opts;
            opts.max_iterations = max_iterations;
            const CalibrationResult res = estimate_gyro_bias(w, cm, opts);
            py::dict d;
            d["gyro_bias1"] = res.bias.b1;
            d["gyro_bias2"] = res.bias.b2;
            d["cost"] = res.cost;
            d["iterations"] = res.iterations;
            d["converged"] = res.converged;
            d["estimate"] = estimate_to_dict(res.estimate);
            return d;
        },
        py::arg("config") = py::dict(), py::arg("window_s") = 4.0, py::arg("mode") = "dual",
        py::arg("max_iterations") = 600,
        "Simulate one trial and estimate the gyro biases by residual minimization");

    m.def(
        "run_trial",
        [](const py::dict& config, double window_s, const std::string& mode, bool calibrate) {
            TrialSpec spec;
            spec.config = config_from_kwargs(config);
            spec.window_s = window_s;
            spec.mode = mode_from_string(mode);
            spec.calibrate = calibrate;
            const TrialOutcome out = run_trial(spec);
            py::dict d;
            d["scale_err"] = out.errors.scale_err;
            d["speed_err"] = out.errors.speed_err;
            d["orient_err"] = out.errors.orient_err;
            d["residual"] = out.residual_norm;
            d["failed"] = out.failed;
            d["failure"] = out.failure;
            return d;
        },
        py::arg("config") = py::dict(), py::arg("window_s") = 4.0, py::arg("mode") = "dual",
        py::arg("calibrate") = false,
        "Simulate, solve and score one trial against ground truth");

    m.def(
        "gramian_rank",
        [](const std::string& variant, const std::string& camera, double eps, int excitations) {
            SystemVariant v;
            if (variant == "biased22") {
                v.state_model = StateModel::Biased22;
            } else if (variant == "unbiased20") {
                v.state_model = StateModel::Unbiased20;
            } else {
                throw std::invalid_argument("variant must be 'biased22' or 'unbiased20'");
            }
            if (camera == "one") {
                v.output_model = OutputModel::OneCamera;
            } else if (camera == "two") {
                v.output_model = OutputModel::TwoCameras;
            } else if (camera == "azimuth") {
                v.output_model = OutputModel::AzimuthOnly;
            } else {
                throw std::invalid_argument("camera must be 'one', 'two' or 'azimuth'");
            }
            ExcitationConfig cfg;
            cfg.replicates = excitations;
            const Eigen::VectorXd nominal = v.state_model == StateModel::Biased22
                                                ? default_biased_state()
                                                : default_unbiased_state();
            const RankReport rep = empirical_gramian_rank(v, nominal, cfg, eps);
            py::dict d;
            d["rank"] = rep.numerical_rank;
            d["expected_rank"] = rep.expected_rank;
            d["gap_ratio"] = rep.gap_ratio;
            d["conclusive"] = rep.conclusive;
            d["singular_values"] = rep.singular_values;
            return d;
        },
        py::arg("variant") = "biased22", py::arg("camera") = "one", py::arg("eps") = 1e-5,
        py::arg("excitations") = 5,
        "Empirical observability Gramian rank of a system variant");
}
