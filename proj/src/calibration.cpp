#include "covi/calibration.hpp"

#include <algorithm>
#include <limits>

namespace covi {

namespace {

Window debiased(const Window& window, const BiasVector& bias) {
    Window w = window;
    w.imu1 = debias_gyro(window.imu1, bias.b1);
    w.imu2 = debias_gyro(window.imu2, bias.b2);
    return w;
}

using Vec6 = Eigen::Matrix<double, 6, 1>;

} // namespace

double residual_cost(const BiasVector& bias, const Window& window, CameraMode mode) {
    try {
        const auto epochs = preintegrate_window(debiased(window, bias));
        const ClosedFormProblem problem = assemble(epochs, mode);
        const LeastSquaresSolution sol = solve_least_squares(problem);
        return sol.residual_norm * sol.residual_norm;
    } catch (const DegenerateMotionError&) {
        return std::numeric_limits<double>::infinity();
    }
}

CalibrationResult estimate_gyro_bias(const Window& window, CameraMode mode,
                                     const CalibrationOptions& options) {
    const int dim = 6;
    const double bound = options.bias_bound_rad;

    auto clip = [&](Vec6 v) {
        for (int i = 0; i < dim; ++i) {
            v(i) = std::clamp(v(i), -bound, bound);
        }
        return v;
    };
    auto cost_at = [&](const Vec6& v) {
        return residual_cost(BiasVector::from_stacked(v), window, mode);
    };

    // Initial simplex: origin plus one step along each axis.
    std::vector<Vec6> pts(dim + 1, Vec6::Zero());
    std::vector<double> f(dim + 1);
    for (int i = 0; i < dim; ++i) {
        pts[i + 1](i) = options.initial_step_rad;
    }
    for (int i = 0; i <= dim; ++i) {
        f[i] = cost_at(pts[i]);
    }

    Vec6 best_x = pts[0];
    double best_f = f[0];
    auto note_best = [&](const Vec6& x, double fx) {
        if (fx < best_f) {
            best_f = fx;
            best_x = x;
        }
    };
    for (int i = 0; i <= dim; ++i) {
        note_best(pts[i], f[i]);
    }

    CalibrationResult result;
    result.cost_trace.push_back({0, best_f});

    std::vector<int> order(dim + 1);
    int iter = 0;
    bool converged = false;
    for (iter = 1; iter <= options.max_iterations; ++iter) {
        for (int i = 0; i <= dim; ++i) {
            order[i] = i;
        }
        std::sort(order.begin(), order.end(), [&](int a, int b) { return f[a] < f[b]; });
        const int lo = order[0];
        const int hi = order[dim];
        const int second_hi = order[dim - 1];

        if (f[hi] - f[lo] <= options.relative_tolerance * (std::abs(f[lo]) + 1e-300)) {
            converged = true;
            result.cost_trace.push_back({iter, best_f});
            break;
        }

        Vec6 centroid = Vec6::Zero();
        for (int i = 0; i <= dim; ++i) {
            if (i != hi) {
                centroid += pts[i];
            }
        }
        centroid /= dim;

        const Vec6 reflected = clip(centroid + (centroid - pts[hi]));
        const double f_reflected = cost_at(reflected);
        note_best(reflected, f_reflected);

        if (f_reflected < f[lo]) {
            const Vec6 expanded = clip(centroid + 2.0 * (centroid - pts[hi]));
            const double f_expanded = cost_at(expanded);
            note_best(expanded, f_expanded);
            if (f_expanded < f_reflected) {
                pts[hi] = expanded;
                f[hi] = f_expanded;
            } else {
                pts[hi] = reflected;
                f[hi] = f_reflected;
            }
        } else if (f_reflected < f[second_hi]) {
            pts[hi] = reflected;
            f[hi] = f_reflected;
        } else {
            const bool outside = f_reflected < f[hi];
            const Vec6 contracted =
                clip(outside ? centroid + 0.5 * (reflected - centroid)
                             : centroid + 0.5 * (pts[hi] - centroid));
            const double f_contracted = cost_at(contracted);
            note_best(contracted, f_contracted);
            if (f_contracted < std::min(f_reflected, f[hi])) {
                pts[hi] = contracted;
                f[hi] = f_contracted;
            } else {
                // Shrink toward the best vertex.
                for (int i = 0; i <= dim; ++i) {
                    if (i == lo) {
                        continue;
                    }
                    pts[i] = clip(pts[lo] + 0.5 * (pts[i] - pts[lo]));
                    f[i] = cost_at(pts[i]);
                    note_best(pts[i], f[i]);
                }
            }
        }
        result.cost_trace.push_back({iter, best_f});
    }

    result.iterations = std::min(iter, options.max_iterations);
    result.converged = converged;
    result.bias = BiasVector::from_stacked(best_x);
    result.cost = best_f;
    result.clipped = (best_x.cwiseAbs().maxCoeff() >= bound - 1e-15);

    const auto epochs = preintegrate_window(debiased(window, result.bias));
    result.estimate = solve_closed_form(epochs, mode);
    return result;
}

} // namespace covi
