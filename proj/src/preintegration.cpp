#include "covi/preintegration.hpp"

#include <cmath>

namespace covi {

namespace {

double stream_dt(const ImuSequence& s) {
    if (s.size() < 2) {
        throw MissingDataError("IMU stream has fewer than two samples");
    }
    return s[1].t - s[0].t;
}

// Index of the sample at time t; throws if t is off the grid or the stream
// has a gap at the landing index.
int stream_index(const ImuSequence& s, double t, double dt) {
    const int k = static_cast<int>(std::lround((t - s.front().t) / dt));
    if (k < 0 || k >= static_cast<int>(s.size()) || std::abs(s[k].t - t) > 1e-9) {
        throw MissingDataError("IMU stream does not cover the requested time");
    }
    return k;
}

} // namespace

int AttitudeTrack::index_of(double t) const {
    const int k = static_cast<int>(std::lround((t - t_start) / dt));
    if (k < 0 || k >= static_cast<int>(M.size()) ||
        std::abs(t_start + k * dt - t) > 1e-9) {
        throw MissingDataError("attitude track does not cover the requested time");
    }
    return k;
}

const Mat3& AttitudeTrack::at(double t) const { return M[index_of(t)]; }

void Window::validate() const {
    if (!(t_end > t_start)) {
        throw ConfigError("Window: t_end must exceed t_start");
    }
    if (t_end - t_start > max_length_s + 1e-9) {
        throw ConfigError("Window: longer than the configured maximum");
    }
    if (imu1.size() < 2 || imu2.size() < 2) {
        throw MissingDataError("Window: IMU streams must have at least two samples");
    }
    if (bearings1.size() < 2) {
        throw ConfigError("Window: at least two camera epochs required");
    }
}

AttitudeTrack integrate_attitude_track(const ImuSequence& gyro_stream, double t_start,
                                       double t_end) {
    const double dt = stream_dt(gyro_stream);
    const int k0 = stream_index(gyro_stream, t_start, dt);
    const int k1 = stream_index(gyro_stream, t_end, dt);
    if (k1 < k0) {
        throw MissingDataError("integrate_attitude: t precedes t_start");
    }

    AttitudeTrack track;
    track.t_start = t_start;
    track.dt = dt;
    track.M.reserve(k1 - k0 + 1);
    Mat3 M = Mat3::Identity();
    track.M.push_back(M);
    for (int k = k0; k < k1; ++k) {
        if (std::abs(gyro_stream[k + 1].t - gyro_stream[k].t - dt) > 1e-9) {
            throw MissingDataError("integrate_attitude: gap in gyro stream");
        }
        M = M * rodrigues(gyro_stream[k].gyro * dt);
        track.M.push_back(M);
    }
    return track;
}

Mat3 integrate_attitude(const ImuSequence& gyro_stream, double t_start, double t) {
    return integrate_attitude_track(gyro_stream, t_start, t).M.back();
}

AccumulatedSignals accumulate_signals(const ImuSequence& imu, const AttitudeTrack& attitude,
                                      const std::vector<double>& epoch_times) {
    const double dt = stream_dt(imu);
    const int k0 = stream_index(imu, attitude.t_start, dt);

    AccumulatedSignals out;
    out.alpha.reserve(epoch_times.size());
    out.beta.reserve(epoch_times.size());

    Vec3 alpha = Vec3::Zero();
    Vec3 beta = Vec3::Zero();
    std::size_t next_epoch = 0;
    const int steps = static_cast<int>(attitude.M.size());
    for (int i = 0; i < steps; ++i) {
        const double t = attitude.t_start + i * dt;
        while (next_epoch < epoch_times.size() &&
               std::abs(epoch_times[next_epoch] - t) <= 1e-9) {
            out.alpha.push_back(alpha);
            out.beta.push_back(beta);
            ++next_epoch;
        }
        if (i + 1 < steps) {
            const Vec3 rotated = attitude.M[i] * imu[k0 + i].accel;
            beta += dt * alpha + 0.5 * dt * dt * rotated;
            alpha += dt * rotated;
        }
    }
    if (next_epoch != epoch_times.size()) {
        throw MissingDataError("accumulate_signals: epoch outside the attitude track");
    }
    return out;
}

std::vector<Vec3> rotate_bearings(const BearingSequence& bearings,
                                  const AttitudeTrack& attitude) {
    std::vector<Vec3> out;
    out.reserve(bearings.size());
    for (const auto& b : bearings) {
        out.push_back(attitude.at(b.t) * b.direction);
    }
    return out;
}

ImuSequence debias_gyro(const ImuSequence& stream, const Vec3& bias) {
    ImuSequence out = stream;
    for (auto& s : out) {
        s.gyro -= bias;
    }
    return out;
}

std::vector<PreintegratedEpoch> preintegrate_window(const Window& window,
                                                    PreintegrationDiagnostics* diag) {
    window.validate();
    const double dt = stream_dt(window.imu1);
    if (std::abs(stream_dt(window.imu2) - dt) > 1e-9) {
        throw ConfigError("preintegrate_window: IMU streams have different rates");
    }

    // Snap camera epochs to the IMU grid.
    double max_skew = 0.0;
    auto snap = [&](double t) {
        const double snapped = window.imu1.front().t +
                               dt * std::lround((t - window.imu1.front().t) / dt);
        const double skew = std::abs(snapped - t);
        if (skew > 0.5 * dt + 1e-12) {
            throw MissingDataError("preintegrate_window: bearing epoch too far from IMU grid");
        }
        max_skew = std::max(max_skew, skew);
        return snapped;
    };

    std::vector<double> epochs;
    std::vector<Vec3> raw_mu;
    for (const auto& b : window.bearings1) {
        const double t = snap(b.t);
        if (t < window.t_start - 1e-9 || t > window.t_end + 1e-9) {
            continue;
        }
        epochs.push_back(t);
        raw_mu.push_back(b.direction);
    }
    if (epochs.size() < 2) {
        throw ConfigError("preintegrate_window: fewer than two epochs in the window");
    }
    if (std::abs(epochs.front() - window.t_start) > 1e-9) {
        throw ConfigError("preintegrate_window: first epoch must coincide with t_start");
    }
    const double t_last = epochs.back();

    std::vector<Vec3> raw_nu;
    if (window.dual()) {
        std::size_t idx = 0;
        for (const auto& b : *window.bearings2) {
            const double t = snap(b.t);
            if (t < window.t_start - 1e-9 || t > window.t_end + 1e-9) {
                continue;
            }
            if (idx >= epochs.size() || std::abs(t - epochs[idx]) > 1e-9) {
                throw SynchronizationError("preintegrate_window: cameras are not synchronized");
            }
            raw_nu.push_back(b.direction);
            ++idx;
        }
        if (idx != epochs.size()) {
            throw SynchronizationError("preintegrate_window: cameras are not synchronized");
        }
    }

    const AttitudeTrack att1 = integrate_attitude_track(window.imu1, window.t_start, t_last);
    const AttitudeTrack att2 = integrate_attitude_track(window.imu2, window.t_start, t_last);
    const AccumulatedSignals sig1 = accumulate_signals(window.imu1, att1, epochs);
    const AccumulatedSignals sig2 = accumulate_signals(window.imu2, att2, epochs);

    std::vector<PreintegratedEpoch> out;
    out.reserve(epochs.size());
    for (std::size_t j = 0; j < epochs.size(); ++j) {
        PreintegratedEpoch e;
        e.j = static_cast<int>(j) + 1;
        e.t = epochs[j];
        e.delta = epochs[j] - window.t_start;
        e.M1 = att1.at(epochs[j]);
        e.M2 = att2.at(epochs[j]);
        e.alpha1 = sig1.alpha[j];
        e.beta1 = sig1.beta[j];
        e.alpha2 = sig2.alpha[j];
        e.beta2 = sig2.beta[j];
        e.mu = e.M1 * raw_mu[j];
        if (window.dual()) {
            e.nu = e.M2 * raw_nu[j];
        }
        out.push_back(e);
    }

    if (diag != nullptr) {
        diag->max_epoch_skew = max_skew;
        diag->epochs = static_cast<int>(epochs.size());
    }
    return out;
}

} // namespace covi
