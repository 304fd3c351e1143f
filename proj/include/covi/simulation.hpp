#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "covi/geometry.hpp"

namespace covi {

// Two-agent random-motion setup. Defaults reproduce the reference scenario:
// 4 s trials, 500 Hz IMU, 5 Hz camera, piecewise-constant body rates and
// inertial accelerations redrawn every 0.1 s.
struct SimConfig {
    double duration_s = 4.0;
    double imu_rate_hz = 500.0;
    double camera_rate_hz = 5.0;

    // Per-axis std of the zero-mean inputs held constant over each block.
    double angular_rate_std_dps = 30.0;
    double inertial_accel_std_mps2 = 1.0;
    double input_hold_s = 0.1;

    // Sensor errors.
    double accel_noise_std_mps2 = 0.03;
    double gyro_noise_std_dps = 0.1;
    double bearing_noise_var_deg2 = 1.0;

    // Constant sensor biases (measured = true + bias + noise).
    Vec3 gyro_bias1 = Vec3::Zero();  // rad/s
    Vec3 accel_bias1 = Vec3::Zero(); // m/s^2
    Vec3 gyro_bias2 = Vec3::Zero();
    Vec3 accel_bias2 = Vec3::Zero();

    double gravity_mps2 = kDefaultGravity;
    std::uint64_t seed = 0;

    // Initial conditions (global frame; Euler angles are roll, pitch, yaw).
    Vec3 r1_0 = {0.0, 0.0, 0.0};
    Vec3 r2_0 = {1.0, 1.0, 1.0};
    Vec3 v1_0 = {0.1, -0.1, 0.0};
    Vec3 v2_0 = {0.2, 0.8, 0.1};
    Vec3 euler1_0 = {0.2 * M_PI, -0.3 * M_PI, 0.8 * M_PI};
    Vec3 euler2_0 = {0.2 * M_PI, 0.3 * M_PI, -0.8 * M_PI};

    double imu_dt() const { return 1.0 / imu_rate_hz; }
    int imu_samples() const { return static_cast<int>(std::lround(duration_s * imu_rate_hz)) + 1; }
    int camera_decimation() const { return static_cast<int>(std::lround(imu_rate_hz / camera_rate_hz)); }

    // Throws ConfigError on inconsistent rates or nonpositive durations.
    void validate() const;
};

// Ground-truth trajectory sampled at the IMU rate. q is the orientation of
// the agent's local frame: quat_rotate(q, u_local) gives global coordinates.
// accel is the body-frame specific force (inertial acceleration plus gravity),
// i.e. what an ideal accelerometer would read.
struct AgentTruth {
    std::vector<double> t;
    std::vector<Vec3> r;
    std::vector<Vec3> v;
    std::vector<Quat> q;
    std::vector<Vec3> accel;
    std::vector<Vec3> omega;

    int size() const { return static_cast<int>(t.size()); }
};

// Relative state of agent 2 seen from agent 1's local frame.
struct RelativeState {
    Vec3 R;
    Vec3 V;
    Quat q; // quat_to_rot(q) maps agent-2 local coordinates into agent-1's
    Mat3 O() const { return quat_to_rot(q); }
};

struct ImuSample {
    double t;
    Vec3 gyro;  // rad/s
    Vec3 accel; // m/s^2
};

struct BearingSample {
    double t;
    Vec3 direction; // unit vector in the observer's current local frame
};

using ImuSequence = std::vector<ImuSample>;
using BearingSequence = std::vector<BearingSample>;

// Deterministic per (cfg.seed); agent 1 starts at the origin, agent 2 at
// r2_0. Inputs are redrawn every input_hold_s and held constant, so the
// states admit exact per-interval propagation (velocity linear, position
// quadratic, orientation by the rotation exponential).
std::pair<AgentTruth, AgentTruth> generate_trajectories(const SimConfig& cfg);

// Exact relative state at a sample time: R = (q1)^-1 (r2 - r1),
// V = (q1)^-1 (v2 - v1), q = conj(q1) q2. t must lie on the sample grid.
RelativeState relative_truth(const AgentTruth& truth1, const AgentTruth& truth2, double t);

// measured = true + constant bias + iid zero-mean Gaussian noise.
// agent_index selects the bias set and the noise stream (1 or 2).
ImuSequence synthesize_imu(const AgentTruth& truth, const SimConfig& cfg, int agent_index);

// Bearings of `target` seen from `observer` at the camera rate. The true unit
// vector is perturbed by a small random rotation with per-axis angle std
// sqrt(bearing_noise_var_deg2) deg. observer_index (1 or 2) selects the noise
// stream. Throws DegenerateGeometryError if the agents come within 1e-6 m at
// a camera epoch.
BearingSequence synthesize_bearings(const AgentTruth& observer, const AgentTruth& target,
                                    const SimConfig& cfg, int observer_index);

namespace detail {
// Independent substreams derived from one seed.
std::mt19937_64 make_rng(std::uint64_t seed, std::uint32_t stream);
} // namespace detail

} // namespace covi
