#include "covi/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace covi {

namespace {

std::vector<double> parse_row(const std::string& line, std::size_t expected,
                              const std::string& context) {
    std::vector<double> out;
    out.reserve(expected);
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        out.push_back(std::stod(field));
    }
    if (out.size() != expected) {
        throw ConfigError(context + ": expected " + std::to_string(expected) +
                          " columns, got " + std::to_string(out.size()));
    }
    return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open " + path.string());
    }
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write " + path.string());
    }
    return out;
}

nlohmann::json vec_to_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

Vec3 vec_from_json(const nlohmann::json& j) {
    return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

} // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_imu_csv(const std::filesystem::path& path, const ImuSequence& seq) {
    auto out = open_output(path);
    out << "t[s],wx[rad/s],wy[rad/s],wz[rad/s],ax[m/s2],ay[m/s2],az[m/s2]\n";
    for (const auto& s : seq) {
        out << format_double(s.t) << ',' << format_double(s.gyro.x()) << ','
            << format_double(s.gyro.y()) << ',' << format_double(s.gyro.z()) << ','
            << format_double(s.accel.x()) << ',' << format_double(s.accel.y()) << ','
            << format_double(s.accel.z()) << '\n';
    }
}

ImuSequence read_imu_csv(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::string line;
    std::getline(in, line); // header
    ImuSequence seq;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto row = parse_row(line, 7, path.string());
        seq.push_back({row[0], {row[1], row[2], row[3]}, {row[4], row[5], row[6]}});
    }
    return seq;
}

void write_bearing_csv(const std::filesystem::path& path, const BearingSequence& seq) {
    auto out = open_output(path);
    out << "t[s],dx[-],dy[-],dz[-]\n";
    for (const auto& s : seq) {
        out << format_double(s.t) << ',' << format_double(s.direction.x()) << ','
            << format_double(s.direction.y()) << ',' << format_double(s.direction.z()) << '\n';
    }
}

BearingSequence read_bearing_csv(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::string line;
    std::getline(in, line); // header
    BearingSequence seq;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto row = parse_row(line, 4, path.string());
        seq.push_back({row[0], {row[1], row[2], row[3]}});
    }
    return seq;
}

nlohmann::json config_to_json(const SimConfig& cfg) {
    nlohmann::json doc;
    doc["duration_s"] = cfg.duration_s;
    doc["imu_rate_hz"] = cfg.imu_rate_hz;
    doc["camera_rate_hz"] = cfg.camera_rate_hz;
    doc["angular_rate_std_dps"] = cfg.angular_rate_std_dps;
    doc["inertial_accel_std_mps2"] = cfg.inertial_accel_std_mps2;
    doc["input_hold_s"] = cfg.input_hold_s;
    doc["accel_noise_std_mps2"] = cfg.accel_noise_std_mps2;
    doc["gyro_noise_std_dps"] = cfg.gyro_noise_std_dps;
    doc["bearing_noise_var_deg2"] = cfg.bearing_noise_var_deg2;
    doc["gyro_bias1"] = vec_to_json(cfg.gyro_bias1);
    doc["accel_bias1"] = vec_to_json(cfg.accel_bias1);
    doc["gyro_bias2"] = vec_to_json(cfg.gyro_bias2);
    doc["accel_bias2"] = vec_to_json(cfg.accel_bias2);
    doc["gravity_mps2"] = cfg.gravity_mps2;
    doc["seed"] = cfg.seed;
    doc["r1_0"] = vec_to_json(cfg.r1_0);
    doc["r2_0"] = vec_to_json(cfg.r2_0);
    doc["v1_0"] = vec_to_json(cfg.v1_0);
    doc["v2_0"] = vec_to_json(cfg.v2_0);
    doc["euler1_0"] = vec_to_json(cfg.euler1_0);
    doc["euler2_0"] = vec_to_json(cfg.euler2_0);
    return doc;
}

SimConfig config_from_json(const nlohmann::json& doc) {
    SimConfig cfg;
    auto get = [&](const char* key, auto& target) {
        if (doc.contains(key)) {
            target = doc.at(key);
        }
    };
    auto get_vec = [&](const char* key, Vec3& target) {
        if (doc.contains(key)) {
            target = vec_from_json(doc.at(key));
        }
    };
    get("duration_s", cfg.duration_s);
    get("imu_rate_hz", cfg.imu_rate_hz);
    get("camera_rate_hz", cfg.camera_rate_hz);
    get("angular_rate_std_dps", cfg.angular_rate_std_dps);
    get("inertial_accel_std_mps2", cfg.inertial_accel_std_mps2);
    get("input_hold_s", cfg.input_hold_s);
    get("accel_noise_std_mps2", cfg.accel_noise_std_mps2);
    get("gyro_noise_std_dps", cfg.gyro_noise_std_dps);
    get("bearing_noise_var_deg2", cfg.bearing_noise_var_deg2);
    get_vec("gyro_bias1", cfg.gyro_bias1);
    get_vec("accel_bias1", cfg.accel_bias1);
    get_vec("gyro_bias2", cfg.gyro_bias2);
    get_vec("accel_bias2", cfg.accel_bias2);
    get("gravity_mps2", cfg.gravity_mps2);
    get("seed", cfg.seed);
    get_vec("r1_0", cfg.r1_0);
    get_vec("r2_0", cfg.r2_0);
    get_vec("v1_0", cfg.v1_0);
    get_vec("v2_0", cfg.v2_0);
    get_vec("euler1_0", cfg.euler1_0);
    get_vec("euler2_0", cfg.euler2_0);
    return cfg;
}

void write_config_json(const std::filesystem::path& path, const SimConfig& cfg) {
    auto out = open_output(path);
    out << config_to_json(cfg).dump(2) << '\n';
}

SimConfig read_config_json(const std::filesystem::path& path) {
    auto in = open_input(path);
    nlohmann::json doc;
    in >> doc;
    return config_from_json(doc);
}

void write_trial_logs(const std::filesystem::path& dir, const TrialLogs& logs) {
    std::filesystem::create_directories(dir);
    write_imu_csv(dir / "imu1.csv", logs.imu1);
    write_imu_csv(dir / "imu2.csv", logs.imu2);
    write_bearing_csv(dir / "bearings1.csv", logs.bearings1);
    write_bearing_csv(dir / "bearings2.csv", logs.bearings2);
    write_config_json(dir / "config.json", logs.config);
}

TrialLogs read_trial_logs(const std::filesystem::path& dir) {
    TrialLogs logs;
    logs.config = read_config_json(dir / "config.json");
    logs.imu1 = read_imu_csv(dir / "imu1.csv");
    logs.imu2 = read_imu_csv(dir / "imu2.csv");
    logs.bearings1 = read_bearing_csv(dir / "bearings1.csv");
    logs.bearings2 = read_bearing_csv(dir / "bearings2.csv");
    return logs;
}

TrialLogs simulate_trial_logs(const SimConfig& cfg) {
    const auto [truth1, truth2] = generate_trajectories(cfg);
    TrialLogs logs;
    logs.config = cfg;
    logs.imu1 = synthesize_imu(truth1, cfg, 1);
    logs.imu2 = synthesize_imu(truth2, cfg, 2);
    logs.bearings1 = synthesize_bearings(truth1, truth2, cfg, 1);
    logs.bearings2 = synthesize_bearings(truth2, truth1, cfg, 2);
    return logs;
}

} // namespace covi
