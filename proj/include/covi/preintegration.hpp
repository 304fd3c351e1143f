#pragma once

#include <optional>
#include <vector>

#include "covi/simulation.hpp"

namespace covi {

// Attitude of an agent relative to its window-start frame, at every IMU
// sample of the window: M(t) = O(t_A)^T O(t). M maps current local-frame
// coordinates into the (non-rotating) frame aligned with the local frame at
// t_start. Satisfies dM/dt = M [omega]x^T in the skew convention of skew().
struct AttitudeTrack {
    double t_start = 0.0;
    double dt = 0.0;
    std::vector<Mat3> M;

    int index_of(double t) const;
    const Mat3& at(double t) const;
    double t_end() const { return t_start + dt * (static_cast<double>(M.size()) - 1.0); }
};

// Integrated per-epoch quantities feeding the closed-form linear system.
struct PreintegratedEpoch {
    int j = 0;           // 1-based epoch index
    double t = 0.0;      // epoch time (s)
    double delta = 0.0;  // t - t_start
    Mat3 M1 = Mat3::Identity();
    Mat3 M2 = Mat3::Identity();
    Vec3 alpha1 = Vec3::Zero(); // integral of agent-1 specific force in the start frame (m/s)
    Vec3 beta1 = Vec3::Zero();  // double integral (m)
    Vec3 alpha2 = Vec3::Zero();
    Vec3 beta2 = Vec3::Zero();
    Vec3 mu = Vec3::Zero();     // de-rotated bearing of agent 2 from agent 1
    std::optional<Vec3> nu;     // de-rotated bearing of agent 1 from agent 2
};

// A measurement window (t_start, t_end) with the raw streams it spans.
// bearings2 present means dual synchronized-camera mode.
struct Window {
    double t_start = 0.0;
    double t_end = 0.0;
    ImuSequence imu1;
    ImuSequence imu2;
    BearingSequence bearings1;
    std::optional<BearingSequence> bearings2;
    double max_length_s = 4.0;

    bool dual() const { return bearings2.has_value(); }
    void validate() const; // throws ConfigError
};

struct PreintegrationDiagnostics {
    double max_epoch_skew = 0.0; // worst bearing-to-IMU-sample snap (s)
    int epochs = 0;
};

// Attitude over [t_start, t_end] by per-sample rotation-exponential
// composition, exact for piecewise-constant rates aligned to the sample grid.
// Throws MissingDataError if the stream does not cover the interval or has
// gaps.
AttitudeTrack integrate_attitude_track(const ImuSequence& gyro_stream, double t_start,
                                       double t_end);

// Convenience: attitude at a single time.
Mat3 integrate_attitude(const ImuSequence& gyro_stream, double t_start, double t);

struct AccumulatedSignals {
    std::vector<Vec3> alpha;
    std::vector<Vec3> beta;
};

// Running single and double integrals of the specific force rotated into the
// start frame (A_start = M * a_measured), evaluated at the given epoch times.
// alpha accumulates by the left-rectangle rule and beta by the trapezoid on
// alpha, which together integrate a sample-aligned piecewise-constant
// specific force exactly.
AccumulatedSignals accumulate_signals(const ImuSequence& imu, const AttitudeTrack& attitude,
                                      const std::vector<double>& epoch_times);

// De-rotate camera bearings into the start frame: mu_j = M(t_j) * direction_j.
std::vector<Vec3> rotate_bearings(const BearingSequence& bearings,
                                  const AttitudeTrack& attitude);

// Subtract a constant bias from every gyro sample.
ImuSequence debias_gyro(const ImuSequence& stream, const Vec3& bias);

// Full chain: attitudes, signals and de-rotated bearings for every camera
// epoch of the window. Camera epochs are snapped to the nearest IMU sample
// (max skew dt/2, reported in diagnostics). Dual-camera windows require both
// cameras to share identical epoch times (SynchronizationError otherwise).
std::vector<PreintegratedEpoch> preintegrate_window(const Window& window,
                                                    PreintegrationDiagnostics* diag = nullptr);

} // namespace covi
