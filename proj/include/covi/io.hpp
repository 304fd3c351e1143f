#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "covi/simulation.hpp"

namespace covi {

// 17 significant digits; parses back to the identical double.
std::string format_double(double v);

// Measurement log schema: one CSV per stream plus a JSON sidecar carrying the
// full SimConfig for provenance.
void write_imu_csv(const std::filesystem::path& path, const ImuSequence& seq);
ImuSequence read_imu_csv(const std::filesystem::path& path);

void write_bearing_csv(const std::filesystem::path& path, const BearingSequence& seq);
BearingSequence read_bearing_csv(const std::filesystem::path& path);

nlohmann::json config_to_json(const SimConfig& cfg);
SimConfig config_from_json(const nlohmann::json& doc);
void write_config_json(const std::filesystem::path& path, const SimConfig& cfg);
SimConfig read_config_json(const std::filesystem::path& path);

struct TrialLogs {
    SimConfig config;
    ImuSequence imu1;
    ImuSequence imu2;
    BearingSequence bearings1; // agent 1 observing agent 2
    BearingSequence bearings2; // agent 2 observing agent 1
};

// imu1.csv, imu2.csv, bearings1.csv, bearings2.csv, config.json under dir.
void write_trial_logs(const std::filesystem::path& dir, const TrialLogs& logs);
TrialLogs read_trial_logs(const std::filesystem::path& dir);

// Simulate one trial and collect its logs.
TrialLogs simulate_trial_logs(const SimConfig& cfg);

} // namespace covi
