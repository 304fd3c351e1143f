#include "covi/solver.hpp"

#include <json.hpp>

namespace covi {

namespace {

void check_epochs(const std::vector<PreintegratedEpoch>& epochs, bool need_nu) {
    if (epochs.size() < 2) {
        throw std::invalid_argument("assemble: at least two epochs required");
    }
    for (std::size_t j = 0; j < epochs.size(); ++j) {
        if (j > 0 && !(epochs[j].delta > epochs[j - 1].delta)) {
            throw std::invalid_argument("assemble: epoch offsets must be strictly increasing");
        }
        if (need_nu && !epochs[j].nu.has_value()) {
            throw SynchronizationError("assemble_dual: epoch lacks the second-camera bearing");
        }
    }
}

} // namespace

ClosedFormProblem assemble_single(const std::vector<PreintegratedEpoch>& epochs) {
    check_epochs(epochs, false);
    const int n = static_cast<int>(epochs.size());

    ClosedFormProblem p;
    p.mode = CameraMode::SingleCamera;
    p.layout = UnknownLayout{CameraMode::SingleCamera, n};
    p.Xi = Eigen::MatrixXd::Zero(p.layout.equations(), p.layout.unknowns());
    p.b = Eigen::VectorXd::Zero(p.layout.equations());

    const Mat3 I = Mat3::Identity();
    for (int j = 0; j < n; ++j) {
        const auto& e = epochs[j];
        const int row = 3 * j;
        p.Xi.block<3, 3>(row, p.layout.r_offset()) = I;
        p.Xi.block<3, 3>(row, p.layout.v_offset()) = e.delta * I;
        for (int c = 0; c < 3; ++c) {
            p.Xi.block<3, 3>(row, p.layout.o_offset() + 3 * c) = e.beta2(c) * I;
        }
        p.Xi.block<3, 1>(row, p.layout.lambda_offset() + j) = -e.mu;
        p.b.segment<3>(row) = e.beta1;
    }
    return p;
}

ClosedFormProblem assemble_dual(const std::vector<PreintegratedEpoch>& epochs) {
    check_epochs(epochs, true);
    const int n = static_cast<int>(epochs.size());

    ClosedFormProblem p;
    p.mode = CameraMode::DualSynchronized;
    p.layout = UnknownLayout{CameraMode::DualSynchronized, n};
    p.Xi = Eigen::MatrixXd::Zero(p.layout.equations(), p.layout.unknowns());
    p.b = Eigen::VectorXd::Zero(p.layout.equations());

    const Mat3 I = Mat3::Identity();
    for (int j = 0; j < n; ++j) {
        const auto& e = epochs[j];
        const int mu_row = 6 * j;
        const int nu_row = 6 * j + 3;

        p.Xi.block<3, 3>(mu_row, p.layout.r_offset()) = I;
        p.Xi.block<3, 3>(mu_row, p.layout.v_offset()) = e.delta * I;
        for (int c = 0; c < 3; ++c) {
            p.Xi.block<3, 3>(mu_row, p.layout.o_offset() + 3 * c) = e.beta2(c) * I;
        }
        p.Xi.block<3, 1>(mu_row, p.layout.lambda_offset() + j) = -e.mu;
        p.b.segment<3>(mu_row) = e.beta1;

        p.Xi.block<3, 3>(nu_row, p.layout.cross_r_offset()) = I;
        p.Xi.block<3, 3>(nu_row, p.layout.cross_v_offset()) = e.delta * I;
        // Column c holds the c-th column of O_A; the single nonzero row of
        // each block places beta1 . w^c into output component c, so the three
        // blocks together contribute O_A^T beta1.
        for (int c = 0; c < 3; ++c) {
            p.Xi.block<1, 3>(nu_row + c, p.layout.o_offset() + 3 * c) = e.beta1.transpose();
        }
        p.Xi.block<3, 1>(nu_row, p.layout.lambda_offset() + j) = -e.nu.value();
        p.b.segment<3>(nu_row) = e.beta2;
    }
    return p;
}

ClosedFormProblem assemble(const std::vector<PreintegratedEpoch>& epochs, CameraMode mode) {
    return mode == CameraMode::SingleCamera ? assemble_single(epochs) : assemble_dual(epochs);
}

LeastSquaresSolution solve_least_squares(const ClosedFormProblem& problem) {
    const auto& layout = problem.layout;
    if (layout.n_epochs < layout.min_epochs()) {
        throw std::invalid_argument("solve_least_squares: too few epochs for an overdetermined system");
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(problem.Xi);
    qr.setThreshold(1e-10);

    LeastSquaresSolution sol;
    sol.rank = static_cast<int>(qr.rank());
    const auto diag = qr.matrixQR().diagonal();
    const double lead = std::abs(diag(0));
    const double tail = std::abs(diag(layout.unknowns() - 1));
    sol.condition = tail > 0.0 ? lead / tail : std::numeric_limits<double>::infinity();
    if (sol.rank < layout.unknowns()) {
        throw DegenerateMotionError("solve_least_squares: rank " + std::to_string(sol.rank) +
                                    " < " + std::to_string(layout.unknowns()) +
                                    " unknowns (insufficient excitation)");
    }
    sol.x = qr.solve(problem.b);
    sol.residual_norm = (problem.Xi * sol.x - problem.b).norm();
    return sol;
}

ClosedFormEstimate extract_estimate(const LeastSquaresSolution& solution,
                                    const ClosedFormProblem& problem) {
    const auto& layout = problem.layout;
    if (solution.x.size() != layout.unknowns()) {
        throw std::invalid_argument("extract_estimate: solution length does not match layout");
    }
    if (!solution.x.allFinite()) {
        throw std::invalid_argument("extract_estimate: non-finite entries in the solution");
    }

    ClosedFormEstimate est;
    est.R_A = solution.x.segment<3>(layout.r_offset());
    est.V_A = solution.x.segment<3>(layout.v_offset());
    for (int c = 0; c < 3; ++c) {
        est.O_A_raw.col(c) = solution.x.segment<3>(layout.o_offset() + 3 * c);
    }
    est.O_A = project_to_so3(est.O_A_raw);
    est.orthonormality_defect =
        (est.O_A_raw.transpose() * est.O_A_raw - Mat3::Identity()).norm();
    est.lambdas.resize(layout.n_epochs);
    for (int j = 0; j < layout.n_epochs; ++j) {
        est.lambdas[j] = solution.x(layout.lambda_offset() + j);
        if (est.lambdas[j] <= 0.0) {
            est.nonpositive_lambda = true;
        }
    }
    est.residual_norm = solution.residual_norm;
    est.condition = solution.condition;
    if (layout.dual()) {
        est.cross_r = solution.x.segment<3>(layout.cross_r_offset());
        est.cross_v = solution.x.segment<3>(layout.cross_v_offset());
    }
    return est;
}

ClosedFormEstimate solve_closed_form(const std::vector<PreintegratedEpoch>& epochs,
                                     CameraMode mode) {
    const ClosedFormProblem problem = assemble(epochs, mode);
    return extract_estimate(solve_least_squares(problem), problem);
}

Eigen::VectorXd encode_unknowns(const Vec3& R_A, const Vec3& V_A, const Mat3& O_A,
                                const std::vector<double>& lambdas, CameraMode mode) {
    UnknownLayout layout{mode, static_cast<int>(lambdas.size())};
    Eigen::VectorXd x = Eigen::VectorXd::Zero(layout.unknowns());
    x.segment<3>(layout.r_offset()) = R_A;
    x.segment<3>(layout.v_offset()) = V_A;
    if (layout.dual()) {
        x.segment<3>(layout.cross_r_offset()) = -O_A.transpose() * R_A;
        x.segment<3>(layout.cross_v_offset()) = -O_A.transpose() * V_A;
    }
    for (int c = 0; c < 3; ++c) {
        x.segment<3>(layout.o_offset() + 3 * c) = O_A.col(c);
    }
    for (std::size_t j = 0; j < lambdas.size(); ++j) {
        x(layout.lambda_offset() + static_cast<int>(j)) = lambdas[j];
    }
    return x;
}

std::string problem_debug_json(const ClosedFormProblem& problem,
                               const LeastSquaresSolution* solution) {
    nlohmann::json doc;
    doc["mode"] = problem.mode == CameraMode::SingleCamera ? "single" : "dual";
    doc["epochs"] = problem.layout.n_epochs;
    doc["rows"] = problem.layout.equations();
    doc["cols"] = problem.layout.unknowns();

    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < problem.Xi.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < problem.Xi.cols(); ++j) {
            row.push_back(problem.Xi(i, j));
        }
        rows.push_back(std::move(row));
    }
    doc["Xi"] = std::move(rows);
    doc["b"] = std::vector<double>(problem.b.data(), problem.b.data() + problem.b.size());
    if (solution != nullptr) {
        doc["x"] = std::vector<double>(solution->x.data(), solution->x.data() + solution->x.size());
        doc["residual_norm"] = solution->residual_norm;
        doc["condition"] = solution->condition;
        doc["rank"] = solution->rank;
    }
    return doc.dump(2);
}

} // namespace covi
