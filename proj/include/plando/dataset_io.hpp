#pragma once

#include "plando/scenarios.hpp"
#include "plando/serialization.hpp"

#include <filesystem>

namespace plando {

/// Keys missing from the JSON keep the defaults of the named system.
void to_json(Json& j, const ScenarioConfig& c);
void from_json(const Json& j, ScenarioConfig& c);

ScenarioConfig load_scenario_config(const std::filesystem::path& path);

/// Time in the first column, one state component per remaining column.
void write_trajectory_csv(const std::filesystem::path& path, const Eigen::VectorXd& times,
                          const Eigen::MatrixXd& states);
/// Returns (times, states) with states N x rows.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> read_trajectory_csv(const std::filesystem::path& path);

/// Layout: manifest.json plus <split>/<index>.csv for train, valid and test.
/// `extra` is copied into the manifest (e.g. kernel and MLP settings from the
/// config file).
void write_dataset(const std::filesystem::path& dir, const Dataset& dataset, const Json& extra = Json::object());
Dataset read_dataset(const std::filesystem::path& dir);
/// One of "train", "valid", "test".
Split read_split(const std::filesystem::path& dir, const std::string& name);
Json read_manifest(const std::filesystem::path& dir);

}  // namespace plando
