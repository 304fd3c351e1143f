#pragma once

#include <cstdint>
#include <vector>

#include "covi/geometry.hpp"

namespace covi {

enum class StateModel {
    Unbiased20, // global two-agent state [r1 v1 q1 r2 v2 q2]
    Biased22,   // relative state plus biases [R V q Bw1 Ba1 Bw2 Ba2]
};

enum class OutputModel {
    TwoCameras, // pinhole ratios from both agents
    OneCamera,  // pinhole ratios from agent 1 only
    AzimuthOnly // h_u from agent 1 only (linear camera)
};

struct SystemVariant {
    StateModel state_model = StateModel::Biased22;
    OutputModel output_model = OutputModel::OneCamera;
    bool include_norm_outputs = true;

    int state_dim() const { return state_model == StateModel::Unbiased20 ? 20 : 22; }
    int output_dim() const;
    // Rank the underlying analysis predicts for this variant.
    int expected_rank() const;
};

// Random piecewise-constant excitation and integration settings.
struct ExcitationConfig {
    double horizon_s = 2.0;
    double step_s = 0.002;        // RK4 step
    double output_rate_hz = 100.0;
    double input_hold_s = 0.1;
    // Milder rotational excitation than the trajectory simulator: the pinhole
    // outputs blow up whenever the relative position crosses the image plane,
    // which strong tumbling makes near-certain over a 2 s horizon.
    double angular_rate_std_dps = 10.0;
    double inertial_accel_std_mps2 = 1.0;
    double gravity_mps2 = kDefaultGravity;
    int replicates = 5;
    std::uint64_t seed = 1;
    int max_resamples = 50;      // retries when a trajectory hits the pinhole singularity
    double pinhole_guard = 0.05; // reject when |p_z| drops below this (m)
};

struct RankReport {
    std::vector<double> singular_values; // descending
    int numerical_rank = 0;
    int expected_rank = 0;
    double gap_ratio = 0.0; // sigma_rank / sigma_rank+1
    double tolerance = 1e-12;
    double epsilon = 0.0;
    bool conclusive = false; // gap_ratio > 1e3
};

// Piecewise-constant 12-dim inputs [omega1 accel1 omega2 accel2], one row per
// hold block.
using InputBlocks = std::vector<Eigen::Matrix<double, 12, 1>>;

InputBlocks draw_excitation(const ExcitationConfig& cfg, std::uint64_t seed);

// Right-hand side of the variant's state ODE. For Biased22 the inputs are the
// measured signals and the biases in the state are subtracted to recover the
// true rates and specific forces.
Eigen::VectorXd variant_dynamics(const SystemVariant& variant, const Eigen::VectorXd& state,
                                 const Eigen::Matrix<double, 12, 1>& input, double gravity);

// RK4 propagation with outputs sampled at output_rate_hz. Quaternion state
// components are never renormalized, so norm perturbations propagate.
// Throws DegenerateGeometryError when a pinhole denominator crosses the guard.
struct OutputTrajectory {
    std::vector<double> t;
    std::vector<Eigen::VectorXd> y;
};
OutputTrajectory propagate_variant(const SystemVariant& variant, const Eigen::VectorXd& state,
                                   const InputBlocks& inputs, const ExcitationConfig& cfg);

// Empirical observability Gramian G = sum_t J(t)^T J(t) dt with
// J = dy(t)/dx0 by central differences, averaged over cfg.replicates random
// excitations. Rank at 1e-6 relative tolerance with a 10^3 spectral-gap guard.
RankReport empirical_gramian_rank(const SystemVariant& variant, const Eigen::VectorXd& nominal,
                                  const ExcitationConfig& cfg, double epsilon);

// Max output divergence of two initial states under identical inputs.
double mode_consistency_check(const SystemVariant& variant, const Eigen::VectorXd& state_a,
                              const Eigen::VectorXd& state_b, const ExcitationConfig& cfg,
                              std::uint64_t excitation_seed);

// Nominal states built from the default two-agent scenario.
Eigen::VectorXd default_unbiased_state();
Eigen::VectorXd default_biased_state(const Vec3& gyro_bias1 = Vec3(0.3, -0.2, 0.4) * kDegToRad,
                                     const Vec3& accel_bias1 = Vec3(0.02, 0.03, -0.01),
                                     const Vec3& gyro_bias2 = Vec3(-0.1, 0.2, 0.3) * kDegToRad,
                                     const Vec3& accel_bias2 = Vec3(-0.03, 0.01, 0.02));

} // namespace covi
