#include "covi/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <sstream>
#include <thread>

namespace covi {

namespace {

double wrap_angle(double a) {
    while (a > M_PI) {
        a -= 2.0 * M_PI;
    }
    while (a < -M_PI) {
        a += 2.0 * M_PI;
    }
    return a;
}

ErrorTriple quantile_triple(double q, std::vector<double> scale, std::vector<double> speed,
                            std::vector<double> orient) {
    auto pick = [&](std::vector<double>& v) {
        if (v.empty()) {
            return 0.0;
        }
        std::sort(v.begin(), v.end());
        const double pos = q * (static_cast<double>(v.size()) - 1.0);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, v.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        return v[lo] * (1.0 - frac) + v[hi] * frac;
    };
    return {pick(scale), pick(speed), pick(orient)};
}

} // namespace

int epochs_for_window(double window_s, double camera_rate_hz) {
    const int n = static_cast<int>(std::floor(camera_rate_hz * window_s + 1e-9)) + 1;
    return std::min(n, 20);
}

ErrorComputation compute_errors(const ClosedFormEstimate& estimate,
                                const RelativeState& truth_at_start,
                                const std::vector<double>& truth_lambdas) {
    if (estimate.lambdas.size() != truth_lambdas.size()) {
        throw std::invalid_argument("compute_errors: epoch grids differ");
    }
    ErrorComputation out;

    double scale_sum = 0.0;
    int scale_terms = 0;
    for (std::size_t j = 0; j < truth_lambdas.size(); ++j) {
        if (truth_lambdas[j] < 1e-12) {
            out.excluded_scale_terms = true;
            continue;
        }
        scale_sum += std::abs(estimate.lambdas[j] - truth_lambdas[j]) / truth_lambdas[j];
        ++scale_terms;
    }
    out.errors.scale_err = scale_terms > 0 ? scale_sum / scale_terms : 0.0;

    const double speed_norm = truth_at_start.V.norm();
    if (speed_norm < 1e-12) {
        out.excluded_speed = true;
        out.errors.speed_err = std::numeric_limits<double>::quiet_NaN();
    } else {
        double sum = 0.0;
        for (int c = 0; c < 3; ++c) {
            sum += std::abs(estimate.V_A(c) - truth_at_start.V(c)) / speed_norm;
        }
        out.errors.speed_err = sum / 3.0;
    }

    const Vec3 rpy_est = rot_to_euler(estimate.O_A);
    const Vec3 rpy_true = rot_to_euler(truth_at_start.O());
    double orient_sum = 0.0;
    for (int c = 0; c < 3; ++c) {
        orient_sum += std::abs(wrap_angle(rpy_est(c) - rpy_true(c))) / M_PI;
    }
    out.errors.orient_err = orient_sum / 3.0;
    return out;
}

Window window_from_logs(const TrialLogs& logs, double window_s, CameraMode mode) {
    const int n = epochs_for_window(window_s, logs.config.camera_rate_hz);
    Window w;
    w.t_start = logs.bearings1.front().t;
    w.t_end = w.t_start + (n - 1) / logs.config.camera_rate_hz;
    w.imu1 = logs.imu1;
    w.imu2 = logs.imu2;
    w.bearings1 = logs.bearings1;
    if (mode == CameraMode::DualSynchronized) {
        w.bearings2 = logs.bearings2;
    }
    return w;
}

TrialOutcome run_trial(const TrialSpec& spec) {
    TrialOutcome outcome;
    try {
        const auto [truth1, truth2] = generate_trajectories(spec.config);
        TrialLogs logs;
        logs.config = spec.config;
        logs.imu1 = synthesize_imu(truth1, spec.config, 1);
        logs.imu2 = synthesize_imu(truth2, spec.config, 2);
        logs.bearings1 = synthesize_bearings(truth1, truth2, spec.config, 1);
        if (spec.mode == CameraMode::DualSynchronized) {
            logs.bearings2 = synthesize_bearings(truth2, truth1, spec.config, 2);
        }
        const Window window = window_from_logs(logs, spec.window_s, spec.mode);

        ClosedFormEstimate estimate;
        if (spec.calibrate) {
            const CalibrationResult calib =
                estimate_gyro_bias(window, spec.mode, spec.calib_options);
            estimate = calib.estimate;
            outcome.bias_estimate = calib.bias;
            outcome.calibration_cost = calib.cost;
        } else {
            const auto epochs = preintegrate_window(window);
            estimate = solve_closed_form(epochs, spec.mode);
        }

        const RelativeState truth_start = relative_truth(truth1, truth2, window.t_start);
        std::vector<double> truth_lambdas;
        const int n = epochs_for_window(spec.window_s, spec.config.camera_rate_hz);
        truth_lambdas.reserve(n);
        for (int j = 0; j < n; ++j) {
            const double t = window.t_start + j / spec.config.camera_rate_hz;
            truth_lambdas.push_back(relative_truth(truth1, truth2, t).R.norm());
        }

        const ErrorComputation errs = compute_errors(estimate, truth_start, truth_lambdas);
        outcome.errors = errs.errors;
        outcome.residual_norm = estimate.residual_norm;
        outcome.condition = estimate.condition;
    } catch (const std::exception& e) {
        outcome.failed = true;
        outcome.failure = e.what();
    }
    return outcome;
}

SimConfig apply_sweep_biases(SimConfig cfg, double gyro_bias_dps, double accel_bias_mps2) {
    const Vec3 gyro = gyro_bias_dps * kDegToRad * Vec3::Ones();
    const Vec3 accel = accel_bias_mps2 / std::sqrt(3.0) * Vec3::Ones();
    cfg.gyro_bias1 = gyro;
    cfg.gyro_bias2 = gyro;
    cfg.accel_bias1 = accel;
    cfg.accel_bias2 = accel;
    return cfg;
}

SweepResult run_sweep(const SweepSpec& spec) {
    if (spec.trials < 1) {
        throw ConfigError("run_sweep: trials must be >= 1");
    }
    for (double w : spec.windows_s) {
        if (w > spec.base.duration_s + 1e-9) {
            throw ConfigError("run_sweep: window exceeds trial duration");
        }
    }

    struct Cell {
        double window;
        double gyro;
        double accel;
    };
    std::vector<Cell> cells;
    for (double w : spec.windows_s) {
        for (double g : spec.gyro_bias_dps) {
            for (double a : spec.accel_bias_mps2) {
                cells.push_back({w, g, a});
            }
        }
    }

    SweepResult result;
    result.seed = spec.base.seed;
    result.rows.resize(cells.size() * static_cast<std::size_t>(spec.trials));

    const int total = static_cast<int>(result.rows.size());
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (int idx = next.fetch_add(1); idx < total; idx = next.fetch_add(1)) {
            const int cell_idx = idx / spec.trials;
            const int trial = idx % spec.trials;
            const Cell& cell = cells[cell_idx];

            TrialSpec ts;
            ts.config = apply_sweep_biases(spec.base, cell.gyro, cell.accel);
            ts.config.seed = spec.base.seed + static_cast<std::uint64_t>(trial);
            ts.window_s = cell.window;
            ts.mode = spec.mode;
            ts.calibrate = spec.calibrate;
            ts.calib_options = spec.calib_options;
            const TrialOutcome outcome = run_trial(ts);

            TrialRow row;
            row.window_s = cell.window;
            row.gyro_bias_dps = cell.gyro;
            row.accel_bias_mps2 = cell.accel;
            row.trial = trial;
            row.errors = outcome.errors;
            row.residual = outcome.residual_norm;
            row.failed = outcome.failed;
            result.rows[idx] = row;
        }
    };

    const int threads = std::max(1, spec.threads);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int i = 0; i < threads; ++i) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }

    // Per-cell aggregation over the non-failed rows.
    for (std::size_t c = 0; c < cells.size(); ++c) {
        CellStats stats;
        stats.window_s = cells[c].window;
        stats.gyro_bias_dps = cells[c].gyro;
        stats.accel_bias_mps2 = cells[c].accel;
        std::vector<double> scale, speed, orient;
        for (int t = 0; t < spec.trials; ++t) {
            const TrialRow& row = result.rows[c * spec.trials + t];
            ++stats.trials;
            if (row.failed) {
                ++stats.failed;
                continue;
            }
            scale.push_back(row.errors.scale_err);
            speed.push_back(row.errors.speed_err);
            orient.push_back(row.errors.orient_err);
        }
        auto mean_of = [](const std::vector<double>& v) {
            if (v.empty()) {
                return 0.0;
            }
            double s = 0.0;
            for (double x : v) {
                s += x;
            }
            return s / static_cast<double>(v.size());
        };
        auto std_of = [&](const std::vector<double>& v, double m) {
            if (v.size() < 2) {
                return 0.0;
            }
            double s = 0.0;
            for (double x : v) {
                s += (x - m) * (x - m);
            }
            return std::sqrt(s / (static_cast<double>(v.size()) - 1.0));
        };
        stats.mean = {mean_of(scale), mean_of(speed), mean_of(orient)};
        stats.stddev = {std_of(scale, stats.mean.scale_err), std_of(speed, stats.mean.speed_err),
                        std_of(orient, stats.mean.orient_err)};
        stats.median = quantile_triple(0.5, scale, speed, orient);
        stats.q10 = quantile_triple(0.1, scale, speed, orient);
        stats.q90 = quantile_triple(0.9, scale, speed, orient);
        result.cells.push_back(stats);
    }

    const std::string cfg_str = config_to_json(spec.base).dump();
    std::ostringstream hash;
    hash << std::hex << std::hash<std::string>{}(cfg_str);
    result.config_hash = hash.str();
    return result;
}

std::string sweep_csv(const SweepResult& result) {
    std::ostringstream out;
    out << "window_s,gyro_bias_dps,accel_bias_mps2,trial,scale_err,speed_err,orient_err,"
           "residual,failed\n";
    for (const auto& row : result.rows) {
        out << format_double(row.window_s) << ',' << format_double(row.gyro_bias_dps) << ','
            << format_double(row.accel_bias_mps2) << ',' << row.trial << ','
            << format_double(row.errors.scale_err) << ',' << format_double(row.errors.speed_err)
            << ',' << format_double(row.errors.orient_err) << ',' << format_double(row.residual)
            << ',' << (row.failed ? 1 : 0) << '\n';
    }
    return out.str();
}

std::string sweep_summary_json(const SweepSpec& spec, const SweepResult& result) {
    nlohmann::json doc;
    doc["seed"] = result.seed;
    doc["config_hash"] = result.config_hash;
    doc["trials_per_cell"] = spec.trials;
    doc["mode"] = spec.mode == CameraMode::SingleCamera ? "single" : "dual";
    doc["calibrate"] = spec.calibrate;

    nlohmann::json cells = nlohmann::json::array();
    auto triple = [](const ErrorTriple& e) {
        return nlohmann::json{{"scale", e.scale_err}, {"speed", e.speed_err},
                              {"orientation", e.orient_err}};
    };
    for (const auto& c : result.cells) {
        nlohmann::json cell;
        cell["window_s"] = c.window_s;
        cell["gyro_bias_dps"] = c.gyro_bias_dps;
        cell["accel_bias_mps2"] = c.accel_bias_mps2;
        cell["trials"] = c.trials;
        cell["failed"] = c.failed;
        cell["mean"] = triple(c.mean);
        cell["stddev"] = triple(c.stddev);
        cell["median"] = triple(c.median);
        cell["q10"] = triple(c.q10);
        cell["q90"] = triple(c.q90);
        cells.push_back(std::move(cell));
    }
    doc["cells"] = std::move(cells);
    return doc.dump(2);
}

} // namespace covi
