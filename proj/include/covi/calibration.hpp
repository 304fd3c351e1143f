#pragma once

#include <utility>
#include <vector>

#include "covi/solver.hpp"

namespace covi {

// Gyro biases of the two agents, rad/s.
struct BiasVector {
    Vec3 b1 = Vec3::Zero();
    Vec3 b2 = Vec3::Zero();

    Eigen::Matrix<double, 6, 1> stacked() const {
        Eigen::Matrix<double, 6, 1> v;
        v << b1, b2;
        return v;
    }
    static BiasVector from_stacked(const Eigen::Matrix<double, 6, 1>& v) {
        return {v.head<3>(), v.tail<3>()};
    }
};

struct CalibrationOptions {
    int max_iterations = 600;
    double relative_tolerance = 1e-12;
    double initial_step_rad = 0.2 * kDegToRad; // initial simplex scale per axis
    double bias_bound_rad = 5.0 * kDegToRad;   // componentwise bound on B
};

struct CalibrationResult {
    BiasVector bias;
    ClosedFormEstimate estimate; // closed form re-solved at the estimated bias
    double cost = 0.0;
    std::vector<std::pair<int, double>> cost_trace; // (iteration, best cost so far)
    int iterations = 0;
    bool converged = false;
    bool clipped = false; // optimum pinned to the bias bound
};

// Cost(B) = |Xi x - b|^2 after removing B from the two gyro streams and
// re-running the whole preintegration + assembly + least-squares chain.
// Solver degeneracy surfaces as +infinity.
double residual_cost(const BiasVector& bias, const Window& window, CameraMode mode);

// Derivative-free simplex descent (Nelder-Mead) on residual_cost, started at
// B = 0. Stops when the simplex cost spread falls below relative_tolerance or
// the iteration budget runs out.
CalibrationResult estimate_gyro_bias(const Window& window, CameraMode mode,
                                     const CalibrationOptions& options = {});

} // namespace covi
