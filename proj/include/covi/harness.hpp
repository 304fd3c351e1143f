#pragma once

#include <optional>
#include <string>
#include <vector>

#include "covi/calibration.hpp"
#include "covi/io.hpp"

namespace covi {

struct ErrorTriple {
    double scale_err = 0.0;  // mean relative error of the per-epoch distances
    double speed_err = 0.0;  // mean per-component error of V, normalized by |V|
    double orient_err = 0.0; // mean |roll/pitch/yaw error| / pi
};

struct ErrorComputation {
    ErrorTriple errors;
    bool excluded_scale_terms = false; // distances below 1e-12 skipped
    bool excluded_speed = false;       // |V| below 1e-12
};

// Epoch count for a window of length W: floor(rate*W)+1, capped at 20
// (4 s at 5 Hz counts as 20 epochs).
int epochs_for_window(double window_s, double camera_rate_hz);

ErrorComputation compute_errors(const ClosedFormEstimate& estimate,
                                const RelativeState& truth_at_start,
                                const std::vector<double>& truth_lambdas);

struct TrialSpec {
    SimConfig config;
    double window_s = 4.0;
    CameraMode mode = CameraMode::DualSynchronized;
    bool calibrate = false;
    CalibrationOptions calib_options;
};

struct TrialOutcome {
    ErrorTriple errors;
    double residual_norm = 0.0;
    double condition = 0.0;
    bool failed = false;
    std::string failure;
    std::optional<BiasVector> bias_estimate;
    std::optional<double> calibration_cost;
};

// simulate -> preintegrate -> (calibrate) -> solve -> extract -> errors.
// Solver degeneracy and other recoverable failures are reported in the
// outcome rather than thrown.
TrialOutcome run_trial(const TrialSpec& spec);

// Same chain on pre-recorded logs (no error computation without truth).
Window window_from_logs(const TrialLogs& logs, double window_s, CameraMode mode);

struct SweepSpec {
    std::vector<double> windows_s = {1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
    std::vector<double> gyro_bias_dps = {0.0};    // per-axis bias on both agents
    std::vector<double> accel_bias_mps2 = {0.0};  // bias magnitude on both agents
    int trials = 100;
    CameraMode mode = CameraMode::DualSynchronized;
    bool calibrate = false;
    SimConfig base;  // base.seed is the sweep seed; trial k runs at seed+k
    CalibrationOptions calib_options;
    int threads = 1;
};

struct TrialRow {
    double window_s = 0.0;
    double gyro_bias_dps = 0.0;
    double accel_bias_mps2 = 0.0;
    int trial = 0;
    ErrorTriple errors;
    double residual = 0.0;
    bool failed = false;
};

struct CellStats {
    double window_s = 0.0;
    double gyro_bias_dps = 0.0;
    double accel_bias_mps2 = 0.0;
    int trials = 0;
    int failed = 0;
    ErrorTriple mean;
    ErrorTriple stddev;
    ErrorTriple median;
    ErrorTriple q10;
    ErrorTriple q90;
};

struct SweepResult {
    std::vector<TrialRow> rows;   // ordered by (window, gyro, accel, trial)
    std::vector<CellStats> cells;
    std::string config_hash;
    std::uint64_t seed = 0;
};

// Full grid; trials are independent and deterministic per (base seed + trial
// index), so any thread count yields identical rows.
SweepResult run_sweep(const SweepSpec& spec);

// Applies the sweep's per-axis gyro bias and magnitude-style accel bias to a
// config.
SimConfig apply_sweep_biases(SimConfig cfg, double gyro_bias_dps, double accel_bias_mps2);

std::string sweep_csv(const SweepResult& result);
std::string sweep_summary_json(const SweepSpec& spec, const SweepResult& result);

} // namespace covi
