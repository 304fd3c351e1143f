#include "covi/simulation.hpp"

#include <cmath>

namespace covi {

namespace {

constexpr std::uint32_t kStreamInputs1 = 1;
constexpr std::uint32_t kStreamInputs2 = 2;
constexpr std::uint32_t kStreamImuNoise1 = 3;
constexpr std::uint32_t kStreamImuNoise2 = 4;
constexpr std::uint32_t kStreamBearing1 = 5;
constexpr std::uint32_t kStreamBearing2 = 6;

Vec3 draw_vec3(std::mt19937_64& rng, std::normal_distribution<double>& dist) {
    const double a = dist(rng);
    const double b = dist(rng);
    const double c = dist(rng);
    return {a, b, c};
}

struct InputBlocks {
    std::vector<Vec3> omega;   // body rate, rad/s
    std::vector<Vec3> accel;   // inertial acceleration, global frame, m/s^2
};

InputBlocks draw_inputs(const SimConfig& cfg, std::uint32_t stream) {
    auto rng = detail::make_rng(cfg.seed, stream);
    std::normal_distribution<double> omega_dist(0.0, cfg.angular_rate_std_dps * kDegToRad);
    std::normal_distribution<double> accel_dist(0.0, cfg.inertial_accel_std_mps2);

    const int hold_steps = static_cast<int>(std::lround(cfg.input_hold_s * cfg.imu_rate_hz));
    const int intervals = cfg.imu_samples() - 1;
    const int blocks = (intervals + hold_steps - 1) / hold_steps;

    InputBlocks in;
    in.omega.reserve(blocks);
    in.accel.reserve(blocks);
    for (int b = 0; b < blocks; ++b) {
        in.omega.push_back(cfg.angular_rate_std_dps > 0.0 ? draw_vec3(rng, omega_dist) : Vec3::Zero());
        in.accel.push_back(cfg.inertial_accel_std_mps2 > 0.0 ? draw_vec3(rng, accel_dist)
                                                             : Vec3::Zero());
    }
    return in;
}

AgentTruth propagate(const SimConfig& cfg, const Vec3& r0, const Vec3& v0, const Vec3& euler0,
                     const InputBlocks& in) {
    const int n = cfg.imu_samples();
    const double dt = cfg.imu_dt();
    const int hold_steps = static_cast<int>(std::lround(cfg.input_hold_s * cfg.imu_rate_hz));
    const Vec3 gravity_up(0.0, 0.0, cfg.gravity_mps2);

    AgentTruth truth;
    truth.t.resize(n);
    truth.r.resize(n);
    truth.v.resize(n);
    truth.q.resize(n);
    truth.accel.resize(n);
    truth.omega.resize(n);

    Vec3 r = r0;
    Vec3 v = v0;
    Quat q = quat_from_euler(euler0.x(), euler0.y(), euler0.z());

    auto block_of = [&](int k) {
        const int b = k / hold_steps;
        return std::min<int>(b, static_cast<int>(in.omega.size()) - 1);
    };

    for (int k = 0; k < n; ++k) {
        const int b = block_of(k);
        truth.t[k] = k * dt;
        truth.r[k] = r;
        truth.v[k] = v;
        truth.q[k] = q;
        truth.omega[k] = in.omega[b];
        // Specific force: the accelerometer senses inertial acceleration plus
        // gravity, expressed in the local frame.
        truth.accel[k] = quat_rotate(q.conj(), in.accel[b] + gravity_up);

        if (k + 1 < n) {
            // Inputs are constant over the interval: closed-form step.
            r += v * dt + 0.5 * in.accel[b] * dt * dt;
            v += in.accel[b] * dt;
            q = quat_mul(q, quat_from_rotvec(in.omega[b] * dt)).normalized();
        }
    }
    return truth;
}

int sample_index(const AgentTruth& truth, double t) {
    if (truth.t.empty()) {
        throw std::out_of_range("relative_truth: empty trajectory");
    }
    const double dt = truth.t.size() > 1 ? truth.t[1] - truth.t[0] : 1.0;
    const int k = static_cast<int>(std::lround((t - truth.t.front()) / dt));
    if (k < 0 || k >= truth.size() || std::abs(truth.t[k] - t) > 1e-9) {
        throw std::out_of_range("relative_truth: time off the sample grid");
    }
    return k;
}

} // namespace

void SimConfig::validate() const {
    if (!(duration_s > 0.0)) {
        throw ConfigError("SimConfig: duration must be positive");
    }
    if (!(imu_rate_hz > 0.0) || !(camera_rate_hz > 0.0)) {
        throw ConfigError("SimConfig: rates must be positive");
    }
    const double ratio = imu_rate_hz / camera_rate_hz;
    if (std::abs(ratio - std::lround(ratio)) > 1e-9) {
        throw ConfigError("SimConfig: IMU rate must be an integer multiple of the camera rate");
    }
    const double hold_steps = input_hold_s * imu_rate_hz;
    if (!(input_hold_s > 0.0) || std::abs(hold_steps - std::lround(hold_steps)) > 1e-9) {
        throw ConfigError("SimConfig: input hold must be a whole number of IMU intervals");
    }
    if (accel_noise_std_mps2 < 0.0 || gyro_noise_std_dps < 0.0 || bearing_noise_var_deg2 < 0.0 ||
        angular_rate_std_dps < 0.0 || inertial_accel_std_mps2 < 0.0) {
        throw ConfigError("SimConfig: noise parameters must be nonnegative");
    }
}

std::pair<AgentTruth, AgentTruth> generate_trajectories(const SimConfig& cfg) {
    cfg.validate();
    const InputBlocks in1 = draw_inputs(cfg, kStreamInputs1);
    const InputBlocks in2 = draw_inputs(cfg, kStreamInputs2);
    return {propagate(cfg, cfg.r1_0, cfg.v1_0, cfg.euler1_0, in1),
            propagate(cfg, cfg.r2_0, cfg.v2_0, cfg.euler2_0, in2)};
}

RelativeState relative_truth(const AgentTruth& truth1, const AgentTruth& truth2, double t) {
    const int k = sample_index(truth1, t);
    const Quat q1 = truth1.q[k];
    const Quat q2 = truth2.q[k];
    RelativeState rel;
    rel.R = quat_rotate(q1.conj(), truth2.r[k] - truth1.r[k]);
    rel.V = quat_rotate(q1.conj(), truth2.v[k] - truth1.v[k]);
    rel.q = quat_mul(q1.conj(), q2).normalized();
    return rel;
}

ImuSequence synthesize_imu(const AgentTruth& truth, const SimConfig& cfg, int agent_index) {
    const bool first = agent_index == 1;
    const Vec3 gyro_bias = first ? cfg.gyro_bias1 : cfg.gyro_bias2;
    const Vec3 accel_bias = first ? cfg.accel_bias1 : cfg.accel_bias2;
    auto rng = detail::make_rng(cfg.seed, first ? kStreamImuNoise1 : kStreamImuNoise2);
    std::normal_distribution<double> gyro_noise(0.0, cfg.gyro_noise_std_dps * kDegToRad);
    std::normal_distribution<double> accel_noise(0.0, cfg.accel_noise_std_mps2);

    ImuSequence out;
    out.reserve(truth.size());
    for (int k = 0; k < truth.size(); ++k) {
        ImuSample s;
        s.t = truth.t[k];
        s.gyro = truth.omega[k] + gyro_bias;
        s.accel = truth.accel[k] + accel_bias;
        if (cfg.gyro_noise_std_dps > 0.0) {
            s.gyro += draw_vec3(rng, gyro_noise);
        }
        if (cfg.accel_noise_std_mps2 > 0.0) {
            s.accel += draw_vec3(rng, accel_noise);
        }
        out.push_back(s);
    }
    return out;
}

BearingSequence synthesize_bearings(const AgentTruth& observer, const AgentTruth& target,
                                    const SimConfig& cfg, int observer_index) {
    auto rng = detail::make_rng(cfg.seed, observer_index == 1 ? kStreamBearing1 : kStreamBearing2);
    const double angle_std = std::sqrt(cfg.bearing_noise_var_deg2) * kDegToRad;
    std::normal_distribution<double> angle_noise(0.0, angle_std);

    const int decim = cfg.camera_decimation();
    BearingSequence out;
    out.reserve(observer.size() / decim + 1);
    for (int k = 0; k < observer.size(); k += decim) {
        const Vec3 offset = target.r[k] - observer.r[k];
        const double dist = offset.norm();
        if (dist < 1e-6) {
            throw DegenerateGeometryError("synthesize_bearings: agents coincide at a camera epoch");
        }
        BearingSample s;
        s.t = observer.t[k];
        s.direction = quat_rotate(observer.q[k].conj(), offset / dist);
        if (cfg.bearing_noise_var_deg2 > 0.0) {
            s.direction = (rodrigues(draw_vec3(rng, angle_noise)) * s.direction).normalized();
        }
        out.push_back(s);
    }
    return out;
}

namespace detail {

std::mt19937_64 make_rng(std::uint64_t seed, std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                      static_cast<std::uint32_t>(seed >> 32), stream};
    return std::mt19937_64(seq);
}

} // namespace detail

} // namespace covi
