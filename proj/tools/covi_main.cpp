#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "covi/harness.hpp"
#include "covi/observability.hpp"

namespace {

using namespace covi;

SimConfig load_config(const std::string& path) {
    SimConfig cfg;
    if (!path.empty()) {
        cfg = read_config_json(path);
    }
    return cfg;
}

CameraMode parse_mode(const std::string& mode) {
    if (mode == "single") {
        return CameraMode::SingleCamera;
    }
    if (mode == "dual") {
        return CameraMode::DualSynchronized;
    }
    throw CLI::ValidationError("--mode", "expected 'single' or 'dual'");
}

nlohmann::json estimate_to_json(const ClosedFormEstimate& est) {
    nlohmann::json doc;
    doc["R_A_m"] = {est.R_A.x(), est.R_A.y(), est.R_A.z()};
    doc["V_A_mps"] = {est.V_A.x(), est.V_A.y(), est.V_A.z()};
    const Vec3 rpy = rot_to_euler(est.O_A);
    doc["O_A_rpy_rad"] = {rpy.x(), rpy.y(), rpy.z()};
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < 3; ++r) {
        rows.push_back({est.O_A(r, 0), est.O_A(r, 1), est.O_A(r, 2)});
    }
    doc["O_A"] = rows;
    doc["lambdas_m"] = est.lambdas;
    doc["residual_norm"] = est.residual_norm;
    doc["condition"] = est.condition;
    doc["orthonormality_defect"] = est.orthonormality_defect;
    doc["nonpositive_lambda"] = est.nonpositive_lambda;
    return doc;
}

int run_simulate(const std::string& config_path, const std::optional<std::uint64_t>& seed,
                 double gyro_bias_dps, double accel_bias_mps2, const std::string& out_dir) {
    SimConfig cfg = load_config(config_path);
    cfg = apply_sweep_biases(cfg, gyro_bias_dps, accel_bias_mps2);
    if (seed) {
        cfg.seed = *seed;
    }
    const TrialLogs logs = simulate_trial_logs(cfg);
    write_trial_logs(out_dir, logs);
    std::cout << "wrote " << out_dir << "/{imu1,imu2,bearings1,bearings2}.csv and config.json\n";
    return 0;
}

int run_solve(const std::string& in_dir, const std::string& mode_str, double window_s,
              const std::string& dump_path) {
    const TrialLogs logs = read_trial_logs(in_dir);
    const CameraMode mode = parse_mode(mode_str);
    const Window window = window_from_logs(logs, window_s, mode);
    const auto epochs = preintegrate_window(window);
    const ClosedFormProblem problem = assemble(epochs, mode);
    const LeastSquaresSolution sol = solve_least_squares(problem);
    const ClosedFormEstimate est = extract_estimate(sol, problem);
    if (!dump_path.empty()) {
        std::ofstream out(dump_path);
        out << problem_debug_json(problem, &sol) << '\n';
    }
    std::cout << estimate_to_json(est).dump(2) << '\n';
    return 0;
}

int run_calibrate(const std::string& in_dir, const std::string& mode_str, double window_s,
                  const CalibrationOptions& opts) {
    const TrialLogs logs = read_trial_logs(in_dir);
    const CameraMode mode = parse_mode(mode_str);
    const Window window = window_from_logs(logs, window_s, mode);
    const CalibrationResult res = estimate_gyro_bias(window, mode, opts);

    nlohmann::json doc;
    doc["gyro_bias1_dps"] = {res.bias.b1.x() * kRadToDeg, res.bias.b1.y() * kRadToDeg,
                             res.bias.b1.z() * kRadToDeg};
    doc["gyro_bias2_dps"] = {res.bias.b2.x() * kRadToDeg, res.bias.b2.y() * kRadToDeg,
                             res.bias.b2.z() * kRadToDeg};
    doc["cost"] = res.cost;
    doc["iterations"] = res.iterations;
    doc["converged"] = res.converged;
    doc["clipped"] = res.clipped;
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& [iter, cost] : res.cost_trace) {
        trace.push_back({iter, cost});
    }
    doc["cost_trace"] = std::move(trace);
    doc["estimate"] = estimate_to_json(res.estimate);
    std::cout << doc.dump(2) << '\n';
    return 0;
}

int run_rank(const std::string& state_str, const std::string& camera_str, double eps,
             int excitations, double horizon) {
    SystemVariant variant;
    if (state_str == "biased22") {
        variant.state_model = StateModel::Biased22;
    } else if (state_str == "unbiased20") {
        variant.state_model = StateModel::Unbiased20;
    } else {
        throw CLI::ValidationError("--variant", "expected 'biased22' or 'unbiased20'");
    }
    if (camera_str == "one") {
        variant.output_model = OutputModel::OneCamera;
    } else if (camera_str == "two") {
        variant.output_model = OutputModel::TwoCameras;
    } else if (camera_str == "azimuth") {
        variant.output_model = OutputModel::AzimuthOnly;
    } else {
        throw CLI::ValidationError("--camera", "expected 'one', 'two' or 'azimuth'");
    }

    ExcitationConfig cfg;
    cfg.replicates = excitations;
    cfg.horizon_s = horizon;
    const Eigen::VectorXd nominal = variant.state_model == StateModel::Biased22
                                        ? default_biased_state()
                                        : default_unbiased_state();
    const RankReport report = empirical_gramian_rank(variant, nominal, cfg, eps);

    nlohmann::json doc;
    doc["state_model"] = state_str;
    doc["output_model"] = camera_str;
    doc["numerical_rank"] = report.numerical_rank;
    doc["expected_rank"] = report.expected_rank;
    doc["gap_ratio"] = report.gap_ratio;
    doc["tolerance"] = report.tolerance;
    doc["epsilon"] = report.epsilon;
    doc["conclusive"] = report.conclusive;
    doc["singular_values"] = report.singular_values;
    std::cout << doc.dump(2) << '\n';
    return report.conclusive && report.numerical_rank == report.expected_rank ? 0 : 1;
}

int run_sweep_cmd(const SweepSpec& spec, const std::string& out_dir) {
    const SweepResult result = run_sweep(spec);
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream csv(std::filesystem::path(out_dir) / "sweep.csv");
        csv << sweep_csv(result);
    }
    {
        std::ofstream json(std::filesystem::path(out_dir) / "summary.json");
        json << sweep_summary_json(spec, result) << '\n';
    }
    std::cout << "wrote " << out_dir << "/sweep.csv and summary.json ("
              << result.rows.size() << " rows)\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cooperative visual-inertial closed-form initialization toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::string in_dir;
    std::string mode = "dual";
    std::string dump_path;
    std::uint64_t seed = 0;
    double window_s = 4.0;
    double gyro_bias_dps = 0.0;
    double accel_bias_mps2 = 0.0;
    CalibrationOptions calib_opts;
    double calib_step_dps = 0.2;
    double calib_bound_dps = 5.0;

    auto* simulate = app.add_subcommand("simulate", "synthesize measurement logs");
    simulate->add_option("--config", config_path, "JSON config overriding defaults");
    simulate->add_option("--seed", seed, "RNG seed");
    simulate->add_option("--gyro-bias", gyro_bias_dps, "per-axis gyro bias, deg/s");
    simulate->add_option("--accel-bias", accel_bias_mps2, "accelerometer bias magnitude, m/s^2");
    simulate->add_option("--out", out_dir, "output directory");

    auto* solve = app.add_subcommand("solve", "closed-form estimate from logs");
    solve->add_option("--in", in_dir, "log directory")->required();
    solve->add_option("--mode", mode, "single|dual");
    solve->add_option("--window", window_s, "window length, s");
    solve->add_option("--dump", dump_path, "write (Xi, b, x) debug JSON here");

    auto* calibrate = app.add_subcommand("calibrate", "gyro-bias estimation from logs");
    calibrate->add_option("--in", in_dir, "log directory")->required();
    calibrate->add_option("--mode", mode, "single|dual");
    calibrate->add_option("--window", window_s, "window length, s");
    calibrate->add_option("--max-iterations", calib_opts.max_iterations, "simplex iterations");
    calibrate->add_option("--tolerance", calib_opts.relative_tolerance, "relative cost tolerance");
    calibrate->add_option("--simplex-scale", calib_step_dps, "initial simplex scale, deg/s");
    calibrate->add_option("--bias-bound", calib_bound_dps, "componentwise bias bound, deg/s");

    std::string variant_str = "biased22";
    std::string camera_str = "one";
    double eps = 1e-5;
    int excitations = 5;
    double horizon = 2.0;
    auto* rank = app.add_subcommand("rank", "empirical observability Gramian rank");
    rank->add_option("--variant", variant_str, "biased22|unbiased20");
    rank->add_option("--camera", camera_str, "one|two|azimuth");
    rank->add_option("--eps", eps, "perturbation size");
    rank->add_option("--excitations", excitations, "random excitation replicates");
    rank->add_option("--horizon", horizon, "horizon, s");

    SweepSpec sweep_spec;
    std::string windows_str = "1.5,2,2.5,3,3.5,4";
    std::string gyro_list = "0";
    std::string accel_list = "0";
    bool calibrate_flag = false;
    auto* sweep = app.add_subcommand("sweep", "Monte-Carlo error sweep");
    sweep->add_option("--config", config_path, "JSON config overriding defaults");
    sweep->add_option("--windows", windows_str, "comma-separated windows, s");
    sweep->add_option("--gyro-bias", gyro_list, "comma-separated per-axis gyro biases, deg/s");
    sweep->add_option("--accel-bias", accel_list, "comma-separated accel-bias magnitudes, m/s^2");
    sweep->add_option("--trials", sweep_spec.trials, "trials per cell");
    sweep->add_option("--seed", seed, "base seed");
    sweep->add_option("--mode", mode, "single|dual");
    sweep->add_flag("--calibrate", calibrate_flag, "run the gyro-bias estimator per trial");
    sweep->add_option("--threads", sweep_spec.threads, "worker threads");
    sweep->add_option("--out", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            const std::optional<std::uint64_t> seed_opt =
                simulate->count("--seed") ? std::optional<std::uint64_t>(seed) : std::nullopt;
            return run_simulate(config_path, seed_opt, gyro_bias_dps, accel_bias_mps2, out_dir);
        }
        if (solve->parsed()) {
            return run_solve(in_dir, mode, window_s, dump_path);
        }
        if (calibrate->parsed()) {
            calib_opts.initial_step_rad = calib_step_dps * kDegToRad;
            calib_opts.bias_bound_rad = calib_bound_dps * kDegToRad;
            return run_calibrate(in_dir, mode, window_s, calib_opts);
        }
        if (rank->parsed()) {
            return run_rank(variant_str, camera_str, eps, excitations, horizon);
        }
        if (sweep->parsed()) {
            auto parse_list = [](const std::string& s) {
                std::vector<double> out;
                std::stringstream ss(s);
                std::string item;
                while (std::getline(ss, item, ',')) {
                    out.push_back(std::stod(item));
                }
                return out;
            };
            sweep_spec.windows_s = parse_list(windows_str);
            sweep_spec.gyro_bias_dps = parse_list(gyro_list);
            sweep_spec.accel_bias_mps2 = parse_list(accel_list);
            sweep_spec.mode = parse_mode(mode);
            sweep_spec.calibrate = calibrate_flag;
            if (!config_path.empty()) {
                sweep_spec.base = read_config_json(config_path);
            }
            if (sweep->count("--seed") > 0) {
                sweep_spec.base.seed = seed;
            }
            return run_sweep_cmd(sweep_spec, out_dir);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
