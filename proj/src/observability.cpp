#include "covi/observability.hpp"

#include <cmath>
#include <random>

#include "covi/simulation.hpp"

namespace covi {

namespace {

using Vec12 = Eigen::Matrix<double, 12, 1>;

Quat quat_slice(const Eigen::VectorXd& x, int off) {
    return {x(off), x(off + 1), x(off + 2), x(off + 3)};
}

void set_quat(Eigen::VectorXd& x, int off, const Quat& q) {
    x(off) = q.w;
    x(off + 1) = q.x;
    x(off + 2) = q.y;
    x(off + 3) = q.z;
}

Eigen::Vector4d quat_deriv_body(const Quat& q, const Vec3& omega) {
    const Quat d = quat_mul(q, pure_quat(omega));
    return {0.5 * d.w, 0.5 * d.x, 0.5 * d.y, 0.5 * d.z};
}

// dot q = -1/2 omega1_q q + 1/2 q omega2_q (relative-rotation kinematics).
Eigen::Vector4d quat_deriv_relative(const Quat& q, const Vec3& omega1, const Vec3& omega2) {
    const Quat a = quat_mul(pure_quat(omega1), q);
    const Quat b = quat_mul(q, pure_quat(omega2));
    return {0.5 * (b.w - a.w), 0.5 * (b.x - a.x), 0.5 * (b.y - a.y), 0.5 * (b.z - a.z)};
}

} // namespace

Eigen::VectorXd variant_dynamics(const SystemVariant& variant, const Eigen::VectorXd& x,
                                 const Vec12& u, double gravity) {
    Eigen::VectorXd dx(x.size());
    const Vec3 omega1 = u.segment<3>(0);
    const Vec3 accel1 = u.segment<3>(3);
    const Vec3 omega2 = u.segment<3>(6);
    const Vec3 accel2 = u.segment<3>(9);

    if (variant.state_model == StateModel::Unbiased20) {
        const Vec3 gravity_down(0.0, 0.0, -gravity);
        const Quat q1 = quat_slice(x, 6);
        const Quat q2 = quat_slice(x, 16);
        dx.segment<3>(0) = x.segment<3>(3);
        dx.segment<3>(3) = quat_rotate(q1, accel1) + gravity_down;
        dx.segment<4>(6) = quat_deriv_body(q1, omega1);
        dx.segment<3>(10) = x.segment<3>(13);
        dx.segment<3>(13) = quat_rotate(q2, accel2) + gravity_down;
        dx.segment<4>(16) = quat_deriv_body(q2, omega2);
    } else {
        // Inputs are the measured signals; the biases stored in the state are
        // removed to recover the true rates and specific forces.
        const Vec3 w1 = omega1 - x.segment<3>(10);
        const Vec3 a1 = accel1 - x.segment<3>(13);
        const Vec3 w2 = omega2 - x.segment<3>(16);
        const Vec3 a2 = accel2 - x.segment<3>(19);
        const Vec3 R = x.segment<3>(0);
        const Vec3 V = x.segment<3>(3);
        const Quat q = quat_slice(x, 6);
        dx.segment<3>(0) = skew(w1) * R + V;
        dx.segment<3>(3) = skew(w1) * V + quat_rotate(q, a2) - a1;
        dx.segment<4>(6) = quat_deriv_relative(q, w1, w2);
        dx.segment<12>(10).setZero();
    }
    return dx;
}

namespace {

void append_pinhole(const Vec3& p, double guard, bool azimuth_only, Eigen::VectorXd& y,
                    int& idx) {
    if (std::abs(p.z()) < guard) {
        throw DegenerateGeometryError("propagate_variant: pinhole denominator crossed the guard");
    }
    y(idx++) = p.x() / p.z();
    if (!azimuth_only) {
        y(idx++) = p.y() / p.z();
    }
}

Eigen::VectorXd outputs(const SystemVariant& variant, const Eigen::VectorXd& x, double guard) {
    Eigen::VectorXd y(variant.output_dim());
    int idx = 0;
    const bool azimuth = variant.output_model == OutputModel::AzimuthOnly;

    if (variant.state_model == StateModel::Unbiased20) {
        const Quat q1 = quat_slice(x, 6);
        const Quat q2 = quat_slice(x, 16);
        const Vec3 dr = x.segment<3>(10) - x.segment<3>(0);
        append_pinhole(quat_rotate(q1.conj(), dr), guard, azimuth, y, idx);
        if (variant.output_model == OutputModel::TwoCameras) {
            append_pinhole(quat_rotate(q2.conj(), -dr), guard, false, y, idx);
        }
        if (variant.include_norm_outputs) {
            y(idx++) = q1.w * q1.w + q1.x * q1.x + q1.y * q1.y + q1.z * q1.z;
            y(idx++) = q2.w * q2.w + q2.x * q2.x + q2.y * q2.y + q2.z * q2.z;
        }
    } else {
        const Vec3 R = x.segment<3>(0);
        const Quat q = quat_slice(x, 6);
        append_pinhole(R, guard, azimuth, y, idx);
        if (variant.output_model == OutputModel::TwoCameras) {
            append_pinhole(quat_rotate(q.conj(), -R), guard, false, y, idx);
        }
        if (variant.include_norm_outputs) {
            y(idx++) = q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z;
        }
    }
    return y;
}

} // namespace

int SystemVariant::output_dim() const {
    int dim = 0;
    switch (output_model) {
    case OutputModel::TwoCameras:
        dim = 4;
        break;
    case OutputModel::OneCamera:
        dim = 2;
        break;
    case OutputModel::AzimuthOnly:
        dim = 1;
        break;
    }
    if (include_norm_outputs) {
        dim += state_model == StateModel::Unbiased20 ? 2 : 1;
    }
    return dim;
}

int SystemVariant::expected_rank() const {
    // Unbiased: 9 physical modes (R, V, relative Euler angles) plus the two
    // quaternion norms when observed. Biased: those 9, the 12 bias components
    // and the relative-quaternion norm.
    if (state_model == StateModel::Unbiased20) {
        return 9 + (include_norm_outputs ? 2 : 0);
    }
    return 21 + (include_norm_outputs ? 1 : 0);
}

InputBlocks draw_excitation(const ExcitationConfig& cfg, std::uint64_t seed) {
    auto rng = detail::make_rng(seed, 101);
    std::normal_distribution<double> omega_dist(0.0, cfg.angular_rate_std_dps * kDegToRad);
    std::normal_distribution<double> accel_dist(0.0, cfg.inertial_accel_std_mps2);

    const int blocks =
        static_cast<int>(std::ceil(cfg.horizon_s / cfg.input_hold_s - 1e-12));
    InputBlocks in;
    in.reserve(blocks);
    for (int b = 0; b < blocks; ++b) {
        Vec12 u;
        for (int i = 0; i < 3; ++i) {
            u(i) = omega_dist(rng);
        }
        for (int i = 3; i < 6; ++i) {
            u(i) = accel_dist(rng);
        }
        for (int i = 6; i < 9; ++i) {
            u(i) = omega_dist(rng);
        }
        for (int i = 9; i < 12; ++i) {
            u(i) = accel_dist(rng);
        }
        // Specific forces hover around +g on the body z axis.
        u(5) += cfg.gravity_mps2;
        u(11) += cfg.gravity_mps2;
        in.push_back(u);
    }
    return in;
}

OutputTrajectory propagate_variant(const SystemVariant& variant, const Eigen::VectorXd& state,
                                   const InputBlocks& inputs, const ExcitationConfig& cfg) {
    if (state.size() != variant.state_dim()) {
        throw std::invalid_argument("propagate_variant: state dimension mismatch");
    }
    const double dt = cfg.step_s;
    const int steps = static_cast<int>(std::lround(cfg.horizon_s / dt));
    const int out_every = static_cast<int>(std::lround(1.0 / (cfg.output_rate_hz * dt)));
    const int hold_steps = static_cast<int>(std::lround(cfg.input_hold_s / dt));

    OutputTrajectory traj;
    traj.t.reserve(steps / out_every + 1);
    traj.y.reserve(steps / out_every + 1);

    Eigen::VectorXd x = state;
    for (int k = 0; k <= steps; ++k) {
        if (k % out_every == 0) {
            traj.t.push_back(k * dt);
            traj.y.push_back(outputs(variant, x, cfg.pinhole_guard));
        }
        if (k == steps) {
            break;
        }
        const Vec12& u = inputs[std::min<std::size_t>(k / hold_steps, inputs.size() - 1)];
        const Eigen::VectorXd k1 = variant_dynamics(variant, x, u, cfg.gravity_mps2);
        const Eigen::VectorXd k2 = variant_dynamics(variant, x + 0.5 * dt * k1, u, cfg.gravity_mps2);
        const Eigen::VectorXd k3 = variant_dynamics(variant, x + 0.5 * dt * k2, u, cfg.gravity_mps2);
        const Eigen::VectorXd k4 = variant_dynamics(variant, x + dt * k3, u, cfg.gravity_mps2);
        x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return traj;
}

RankReport empirical_gramian_rank(const SystemVariant& variant, const Eigen::VectorXd& nominal,
                                  const ExcitationConfig& cfg, double epsilon) {
    if (epsilon < 1e-6 || epsilon > 1e-3) {
        throw std::invalid_argument("empirical_gramian_rank: epsilon outside [1e-6, 1e-3]");
    }
    const int dim = variant.state_dim();
    const double dt_out = 1.0 / cfg.output_rate_hz;

    Eigen::MatrixXd gramian = Eigen::MatrixXd::Zero(dim, dim);
    int accepted = 0;
    std::uint64_t seed = cfg.seed;
    int attempts = 0;
    while (accepted < cfg.replicates) {
        if (++attempts > cfg.replicates + cfg.max_resamples) {
            throw DegenerateGeometryError(
                "empirical_gramian_rank: could not find enough singularity-free excitations");
        }
        const InputBlocks inputs = draw_excitation(cfg, seed++);
        try {
            // Sensitivity of every output sample to every initial-state
            // component. Fourth-order central differences: the O(eps^2)
            // bleed of a plain central difference is large enough to lift
            // exactly-unobservable directions above the rank tolerance once
            // the Gramian is equilibrated.
            std::vector<OutputTrajectory> p1(dim), m1(dim), p2(dim), m2(dim);
            for (int i = 0; i < dim; ++i) {
                auto shifted = [&](double delta) {
                    Eigen::VectorXd x = nominal;
                    x(i) += delta;
                    return propagate_variant(variant, x, inputs, cfg);
                };
                p1[i] = shifted(epsilon);
                m1[i] = shifted(-epsilon);
                p2[i] = shifted(2.0 * epsilon);
                m2[i] = shifted(-2.0 * epsilon);
            }
            const std::size_t samples = p1[0].y.size();
            Eigen::MatrixXd J(variant.output_dim(), dim);
            for (std::size_t s = 0; s < samples; ++s) {
                for (int i = 0; i < dim; ++i) {
                    J.col(i) = (m2[i].y[s] - p2[i].y[s] + 8.0 * (p1[i].y[s] - m1[i].y[s])) /
                               (12.0 * epsilon);
                }
                gramian += J.transpose() * J * dt_out;
            }
            ++accepted;
        } catch (const DegenerateGeometryError&) {
            continue; // resample the excitation
        }
    }
    gramian /= static_cast<double>(cfg.replicates);

    // The state mixes units (m, m/s, quaternion components, rad/s, m/s^2), so
    // the raw Gramian spectrum spreads over many decades even among observable
    // modes. Equilibrate by the diagonal before ranking: a congruence
    // transform, rank-preserving.
    const double max_diag = gramian.diagonal().maxCoeff();
    Eigen::VectorXd scale(dim);
    for (int i = 0; i < dim; ++i) {
        scale(i) = 1.0 / std::sqrt(std::max(gramian(i, i), 1e-30 * max_diag));
    }
    const Eigen::MatrixXd balanced = scale.asDiagonal() * gramian * scale.asDiagonal();

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(balanced);
    RankReport report;
    report.expected_rank = variant.expected_rank();
    report.epsilon = epsilon;
    report.singular_values.assign(svd.singularValues().data(),
                                  svd.singularValues().data() + dim);
    const double sigma_max = report.singular_values.front();
    report.tolerance = 1e-12;
    int rank = 0;
    for (double s : report.singular_values) {
        if (s > report.tolerance * sigma_max) {
            ++rank;
        }
    }
    report.numerical_rank = rank;
    if (rank < dim && report.singular_values[rank] > 0.0) {
        report.gap_ratio = report.singular_values[rank - 1] / report.singular_values[rank];
    } else {
        report.gap_ratio = std::numeric_limits<double>::infinity();
    }
    report.conclusive = report.gap_ratio > 1e3;
    return report;
}

double mode_consistency_check(const SystemVariant& variant, const Eigen::VectorXd& state_a,
                              const Eigen::VectorXd& state_b, const ExcitationConfig& cfg,
                              std::uint64_t excitation_seed) {
    const InputBlocks inputs = draw_excitation(cfg, excitation_seed);
    const OutputTrajectory ya = propagate_variant(variant, state_a, inputs, cfg);
    const OutputTrajectory yb = propagate_variant(variant, state_b, inputs, cfg);
    double max_div = 0.0;
    for (std::size_t s = 0; s < ya.y.size(); ++s) {
        max_div = std::max(max_div, (ya.y[s] - yb.y[s]).cwiseAbs().maxCoeff());
    }
    return max_div;
}

// The pinhole output model needs |p_z| bounded away from zero at the nominal,
// so the rank-check geometry keeps the second agent well in front of both
// cameras instead of reusing the trajectory-simulation initial conditions.
namespace {
const Vec3 kNominalR1(0.0, 0.0, 0.0);
const Vec3 kNominalR2(0.4, 0.3, 1.6);
const Vec3 kNominalV1(0.1, -0.1, 0.0);
const Vec3 kNominalV2(0.15, 0.1, -0.05);
const Vec3 kNominalEuler1(0.1, -0.15, 0.3);
const Vec3 kNominalEuler2(0.3, -0.2, 0.5);
} // namespace

Eigen::VectorXd default_unbiased_state() {
    Eigen::VectorXd x(20);
    x.segment<3>(0) = kNominalR1;
    x.segment<3>(3) = kNominalV1;
    set_quat(x, 6, quat_from_euler(kNominalEuler1.x(), kNominalEuler1.y(), kNominalEuler1.z()));
    x.segment<3>(10) = kNominalR2;
    x.segment<3>(13) = kNominalV2;
    set_quat(x, 16, quat_from_euler(kNominalEuler2.x(), kNominalEuler2.y(), kNominalEuler2.z()));
    return x;
}

Eigen::VectorXd default_biased_state(const Vec3& gyro_bias1, const Vec3& accel_bias1,
                                     const Vec3& gyro_bias2, const Vec3& accel_bias2) {
    const Quat q1 = quat_from_euler(kNominalEuler1.x(), kNominalEuler1.y(), kNominalEuler1.z());
    const Quat q2 = quat_from_euler(kNominalEuler2.x(), kNominalEuler2.y(), kNominalEuler2.z());
    Eigen::VectorXd x(22);
    x.segment<3>(0) = quat_rotate(q1.conj(), kNominalR2 - kNominalR1);
    x.segment<3>(3) = quat_rotate(q1.conj(), kNominalV2 - kNominalV1);
    set_quat(x, 6, quat_mul(q1.conj(), q2).normalized());
    x.segment<3>(10) = gyro_bias1;
    x.segment<3>(13) = accel_bias1;
    x.segment<3>(16) = gyro_bias2;
    x.segment<3>(19) = accel_bias2;
    return x;
}

} // namespace covi
