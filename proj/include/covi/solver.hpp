#pragma once

#include <optional>
#include <string>
#include <vector>

#include "covi/preintegration.hpp"

namespace covi {

enum class CameraMode { SingleCamera, DualSynchronized };

// Slice map of the unknown vector x.
//
// Single camera (3n equations, 15+n unknowns):
//   [ R_A (3) | V_A (3) | O_A column-major (9) | lambda_1..lambda_n ]
// Dual synchronized cameras (6n equations, 21+n unknowns):
//   [ R_A | V_A | -O_A^T R_A (3) | -O_A^T V_A (3) | O_A column-major | lambdas ]
// The cross slices are the position and velocity of agent 1 in agent 2's
// start frame; the linear solve treats them as independent unknowns.
struct UnknownLayout {
    CameraMode mode = CameraMode::SingleCamera;
    int n_epochs = 0;

    bool dual() const { return mode == CameraMode::DualSynchronized; }
    int r_offset() const { return 0; }
    int v_offset() const { return 3; }
    int cross_r_offset() const { return 6; }  // dual only
    int cross_v_offset() const { return 9; }  // dual only
    int o_offset() const { return dual() ? 12 : 6; }
    int lambda_offset() const { return o_offset() + 9; }
    int unknowns() const { return lambda_offset() + n_epochs; }
    int equations() const { return (dual() ? 6 : 3) * n_epochs; }
    // Smallest epoch count making the system strictly overdetermined.
    int min_epochs() const { return dual() ? 5 : 8; }
};

struct ClosedFormProblem {
    CameraMode mode = CameraMode::SingleCamera;
    UnknownLayout layout;
    Eigen::MatrixXd Xi;
    Eigen::VectorXd b;
};

struct LeastSquaresSolution {
    Eigen::VectorXd x;
    double residual_norm = 0.0;
    double condition = 0.0; // |R_11 / R_kk| of the column-pivoted QR
    int rank = 0;
};

struct ClosedFormEstimate {
    Vec3 R_A = Vec3::Zero();
    Vec3 V_A = Vec3::Zero();
    Mat3 O_A_raw = Mat3::Identity();
    Mat3 O_A = Mat3::Identity(); // O_A_raw projected to SO(3)
    std::vector<double> lambdas;
    double residual_norm = 0.0;
    double condition = 0.0;
    double orthonormality_defect = 0.0; // ||O_raw^T O_raw - I||_F
    bool nonpositive_lambda = false;
    std::optional<Vec3> cross_r; // dual: decoded -O_A^T R_A slice
    std::optional<Vec3> cross_v; // dual: decoded -O_A^T V_A slice
};

// Block-row j encodes xi_A + eta_A*Delta_j + O_A*beta2_j - lambda_j*mu_j = beta1_j.
ClosedFormProblem assemble_single(const std::vector<PreintegratedEpoch>& epochs);

// Interleaves the single-camera rows with the second-camera rows
//   xi'_A + eta'_A*Delta_j + O_A^T*beta1_j - lambda_j*nu_j = beta2_j,
// sharing the per-epoch scales lambda_j.
ClosedFormProblem assemble_dual(const std::vector<PreintegratedEpoch>& epochs);

ClosedFormProblem assemble(const std::vector<PreintegratedEpoch>& epochs, CameraMode mode);

// Column-pivoted Householder QR with rank tolerance 1e-10 relative to the
// leading pivot. Requires a strictly overdetermined system (n >= 8 single,
// n >= 5 dual). Throws DegenerateMotionError when the numerical rank drops
// below the unknown count.
LeastSquaresSolution solve_least_squares(const ClosedFormProblem& problem);

ClosedFormEstimate extract_estimate(const LeastSquaresSolution& solution,
                                    const ClosedFormProblem& problem);

// assemble + solve + extract.
ClosedFormEstimate solve_closed_form(const std::vector<PreintegratedEpoch>& epochs,
                                     CameraMode mode);

// Unknown vector that a perfect estimator would return, built from ground
// truth at the window start and the per-epoch distances.
Eigen::VectorXd encode_unknowns(const Vec3& R_A, const Vec3& V_A, const Mat3& O_A,
                                const std::vector<double>& lambdas, CameraMode mode);

// (Xi, b, x, residual) as a JSON document for offline inspection and
// cross-implementation diffing.
std::string problem_debug_json(const ClosedFormProblem& problem,
                               const LeastSquaresSolution* solution = nullptr);

} // namespace covi
