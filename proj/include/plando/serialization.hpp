#pragma once

#include "plando/lando.hpp"
#include "plando/neural.hpp"
#include "plando/pipeline.hpp"
#include "plando/pod.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <filesystem>

namespace plando {

using Json = nlohmann::json;

// Matrices are stored as {"rows", "cols", "data"} with data in row-major order.
Json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const Json& j);
Json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const Json& j);

void to_json(Json& j, const KernelSpec& k);
void from_json(const Json& j, KernelSpec& k);

void to_json(Json& j, const LandoModel& m);
void from_json(const Json& j, LandoModel& m);

void to_json(Json& j, const MlpConfig& c);
void from_json(const Json& j, MlpConfig& c);
void to_json(Json& j, const AffineScaler& s);
void from_json(const Json& j, AffineScaler& s);
void to_json(Json& j, const NeuralMap& m);
void from_json(const Json& j, NeuralMap& m);

void to_json(Json& j, const PodBasis& b);
void from_json(const Json& j, PodBasis& b);

void to_json(Json& j, const OfflineBundle& b);
void from_json(const Json& j, OfflineBundle& b);
void to_json(Json& j, const OnlineModel& m);
void from_json(const Json& j, OnlineModel& m);
void to_json(Json& j, const ErrorReport& r);
void from_json(const Json& j, ErrorReport& r);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

template <typename T>
T load(const std::filesystem::path& path) {
  return read_json_file(path).get<T>();
}

template <typename T>
void save(const std::filesystem::path& path, const T& value) {
  write_json_file(path, Json(value));
}

}  // namespace plando
