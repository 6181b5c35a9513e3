#include "plando/serialization.hpp"

#include <fstream>
#include <stdexcept>

namespace plando {
namespace {

constexpr int kFormatVersion = 1;

void check_format(const Json& j, const char* what) {
  if (!j.is_object()) throw std::invalid_argument(std::string(what) + ": expected a JSON object");
  if (j.contains("format_version") && j.at("format_version").get<int>() != kFormatVersion)
    throw std::invalid_argument(std::string(what) + ": unsupported format_version");
}

Json bounds_to_json(const Bounds& bounds) {
  Json out = Json::array();
  for (const auto& [lo, hi] : bounds) out.push_back({lo, hi});
  return out;
}

Bounds bounds_from_json(const Json& j) {
  Bounds out;
  for (const auto& b : j) out.emplace_back(b.at(0).get<double>(), b.at(1).get<double>());
  return out;
}

Json entries_to_json(const std::vector<BundleEntry>& entries) {
  Json out = Json::array();
  for (const auto& e : entries) out.push_back({{"mu", vector_to_json(e.mu)}, {"model", e.model}});
  return out;
}

std::vector<BundleEntry> entries_from_json(const Json& j) {
  std::vector<BundleEntry> out;
  for (const auto& e : j) out.push_back({vector_from_json(e.at("mu")), e.at("model").get<LandoModel>()});
  return out;
}

}  // namespace

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json data = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const Json& data = j.at("data");
  if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(rows * cols))
    throw std::invalid_argument("matrix JSON: data length does not match rows x cols");
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!data[k].is_number()) throw std::invalid_argument("matrix JSON: non-numeric entry");
      m(r, c) = data[k++].get<double>();
    }
  return m;
}

Json vector_to_json(const Eigen::VectorXd& v) {
  return Json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from_json(const Json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

// ---------------------------------------------------------------------------

void to_json(Json& j, const KernelSpec& k) {
  j = {{"kind", to_string(k.kind)}, {"degree", k.degree}, {"offset", k.offset}, {"lengthscale", k.lengthscale}};
}

void from_json(const Json& j, KernelSpec& k) {
  KernelSpec out;
  out.kind = kernel_kind_from_string(j.at("kind").get<std::string>());
  out.degree = j.value("degree", out.degree);
  out.offset = j.value("offset", out.offset);
  out.lengthscale = j.value("lengthscale", out.lengthscale);
  out.validate();
  k = out;
}

void to_json(Json& j, const LandoModel& m) {
  const SparseDictionary& d = m.dictionary;
  j = {{"format_version", kFormatVersion},
       {"kernel", m.kernel},
       {"mode", to_string(m.mode)},
       {"state_dim", m.state_dim()},
       {"dictionary",
        {{"columns", matrix_to_json(d.columns)},
         {"chol", matrix_to_json(d.chol)},
         {"nu", d.threshold},
         {"jitter", d.jitter},
         {"seed", d.seed},
         {"source_indices", d.source_indices}}},
       {"weights", matrix_to_json(m.weights)},
       {"fit_residual", m.fit_residual}};
}

void from_json(const Json& j, LandoModel& m) {
  check_format(j, "LandoModel");
  LandoModel out;
  out.kernel = j.at("kernel").get<KernelSpec>();
  out.mode = mode_from_string(j.at("mode").get<std::string>());
  const Json& d = j.at("dictionary");
  const Eigen::MatrixXd columns = matrix_from_json(d.at("columns"));
  const double jitter = d.value("jitter", 0.0);
  if (d.contains("chol")) {
    out.dictionary.kernel = out.kernel;
    out.dictionary.columns = columns;
    out.dictionary.chol = matrix_from_json(d.at("chol"));
    out.dictionary.jitter = jitter;
    if (out.dictionary.chol.rows() != columns.cols() || out.dictionary.chol.cols() != columns.cols())
      throw std::invalid_argument("LandoModel JSON: Cholesky factor does not match the dictionary size");
  } else {
    out.dictionary = SparseDictionary::from_columns(out.kernel, columns, jitter);
  }
  out.dictionary.threshold = d.value("nu", 0.0);
  out.dictionary.seed = d.value("seed", std::uint64_t{0});
  if (d.contains("source_indices")) out.dictionary.source_indices = d.at("source_indices").get<std::vector<Eigen::Index>>();
  out.weights = matrix_from_json(j.at("weights"));
  out.fit_residual = j.value("fit_residual", 0.0);
  if (out.weights.rows() != columns.rows() || out.weights.cols() != columns.cols())
    throw std::invalid_argument("LandoModel JSON: weights must be state_dim x dictionary size");
  if (j.contains("state_dim") && j.at("state_dim").get<Eigen::Index>() != columns.rows())
    throw std::invalid_argument("LandoModel JSON: state_dim does not match the dictionary");
  m = std::move(out);
}

// ---------------------------------------------------------------------------

void to_json(Json& j, const MlpConfig& c) {
  j = {{"input_dim", c.input_dim},         {"output_dim", c.output_dim},
       {"hidden_layers", c.hidden_layers}, {"activation", to_string(c.activation)},
       {"snake_a", c.snake_a},             {"snake_trainable", c.snake_trainable},
       {"learning_rate", c.learning_rate}, {"beta1", c.beta1},
       {"beta2", c.beta2},                 {"epsilon", c.epsilon},
       {"max_epochs", c.max_epochs},       {"patience", c.patience},
       {"batch_size", c.batch_size},       {"seed", c.seed}};
}

// Missing keys keep their defaults so configs can list only what they change.
void from_json(const Json& j, MlpConfig& c) {
  MlpConfig out = c;
  out.input_dim = j.value("input_dim", out.input_dim);
  out.output_dim = j.value("output_dim", out.output_dim);
  if (j.contains("hidden_layers")) out.hidden_layers = j.at("hidden_layers").get<std::vector<Eigen::Index>>();
  if (j.contains("activation")) out.activation = activation_from_string(j.at("activation").get<std::string>());
  out.snake_a = j.value("snake_a", out.snake_a);
  out.snake_trainable = j.value("snake_trainable", out.snake_trainable);
  out.learning_rate = j.value("learning_rate", out.learning_rate);
  out.beta1 = j.value("beta1", out.beta1);
  out.beta2 = j.value("beta2", out.beta2);
  out.epsilon = j.value("epsilon", out.epsilon);
  out.max_epochs = j.value("max_epochs", out.max_epochs);
  out.patience = j.value("patience", out.patience);
  out.batch_size = j.value("batch_size", out.batch_size);
  out.seed = j.value("seed", out.seed);
  c = std::move(out);
}

void to_json(Json& j, const AffineScaler& s) {
  j = {{"shift", vector_to_json(s.shift)}, {"scale", vector_to_json(s.scale)}};
}

void from_json(const Json& j, AffineScaler& s) {
  s.shift = vector_from_json(j.at("shift"));
  s.scale = vector_from_json(j.at("scale"));
  if (s.shift.size() != s.scale.size()) throw std::invalid_argument("scaler JSON: shift/scale size mismatch");
}

void to_json(Json& j, const NeuralMap& m) {
  Json layers = Json::array();
  for (const auto& l : m.layers)
    layers.push_back({{"weight", matrix_to_json(l.weight)}, {"bias", vector_to_json(l.bias)}, {"snake_a", l.snake_a}});
  Json train_loss = Json::array(), valid_loss = Json::array();
  for (const auto& e : m.history) {
    train_loss.push_back(e.train_loss);
    valid_loss.push_back(e.valid_loss);
  }
  j = {{"format_version", kFormatVersion},
       {"config", m.config},
       {"input_scaler", m.input_scaler},
       {"output_scaler", m.output_scaler},
       {"layers", std::move(layers)},
       {"t_star", m.t_star},
       {"best_epoch", m.best_epoch},
       {"best_valid_loss", m.best_valid_loss},
       {"history", {{"train_loss", std::move(train_loss)}, {"valid_loss", std::move(valid_loss)}}}};
}

void from_json(const Json& j, NeuralMap& m) {
  check_format(j, "NeuralMap");
  NeuralMap out;
  out.config = j.at("config").get<MlpConfig>();
  out.config.validate();
  out.input_scaler = j.at("input_scaler").get<AffineScaler>();
  out.output_scaler = j.at("output_scaler").get<AffineScaler>();
  for (const auto& l : j.at("layers"))
    out.layers.push_back({matrix_from_json(l.at("weight")), vector_from_json(l.at("bias")), l.value("snake_a", 1.0)});
  if (out.layers.size() != out.config.hidden_layers.size() + 1)
    throw std::invalid_argument("NeuralMap JSON: layer count does not match the config");
  Eigen::Index width = out.config.input_dim;
  for (const auto& l : out.layers) {
    if (l.weight.cols() != width || l.bias.size() != l.weight.rows())
      throw std::invalid_argument("NeuralMap JSON: inconsistent layer shapes");
    width = l.weight.rows();
  }
  if (width != out.config.output_dim || out.input_scaler.dim() != out.config.input_dim ||
      out.output_scaler.dim() != out.config.output_dim)
    throw std::invalid_argument("NeuralMap JSON: dimensions do not match the config");
  out.t_star = j.value("t_star", 0.0);
  out.best_epoch = j.value("best_epoch", -1);
  out.best_valid_loss = j.value("best_valid_loss", 0.0);
  if (j.contains("history")) {
    const auto tl = j.at("history").at("train_loss").get<std::vector<double>>();
    const auto vl = j.at("history").at("valid_loss").get<std::vector<double>>();
    for (std::size_t i = 0; i < tl.size() && i < vl.size(); ++i) out.history.push_back({tl[i], vl[i]});
  }
  m = std::move(out);
}

// ---------------------------------------------------------------------------

void to_json(Json& j, const PodBasis& b) {
  j = {{"phi", matrix_to_json(b.phi)},
       {"singular_values", vector_to_json(b.singular_values)},
       {"energy_threshold", b.energy_threshold}};
}

void from_json(const Json& j, PodBasis& b) {
  b.phi = matrix_from_json(j.at("phi"));
  b.singular_values = vector_from_json(j.at("singular_values"));
  b.energy_threshold = j.value("energy_threshold", 0.0);
}

void to_json(Json& j, const OfflineBundle& b) {
  j = {{"format_version", kFormatVersion},
       {"system", b.system},
       {"kernel", b.kernel},
       {"nu", b.nu},
       {"seed", b.seed},
       {"mode", to_string(b.mode)},
       {"dt", b.dt},
       {"train_t_end", b.train_t_end},
       {"initial_state", vector_to_json(b.initial_state)},
       {"bounds", bounds_to_json(b.bounds)},
       {"models", entries_to_json(b.models)},
       {"valid_models", entries_to_json(b.valid_models)}};
}

void from_json(const Json& j, OfflineBundle& b) {
  check_format(j, "OfflineBundle");
  OfflineBundle out;
  out.system = j.value("system", std::string{});
  out.kernel = j.at("kernel").get<KernelSpec>();
  out.nu = j.at("nu").get<double>();
  out.seed = j.value("seed", std::uint64_t{0});
  out.mode = mode_from_string(j.at("mode").get<std::string>());
  out.dt = j.at("dt").get<double>();
  out.train_t_end = j.at("train_t_end").get<double>();
  out.initial_state = vector_from_json(j.at("initial_state"));
  out.bounds = bounds_from_json(j.at("bounds"));
  out.models = entries_from_json(j.at("models"));
  if (j.contains("valid_models")) out.valid_models = entries_from_json(j.at("valid_models"));
  if (out.models.empty()) throw std::invalid_argument("OfflineBundle JSON: no models");
  for (const auto* set : {&out.models, &out.valid_models})
    for (const auto& e : *set)
      if (e.model.mode != out.mode || !(e.model.kernel == out.kernel) || e.mu.size() != out.param_dim() ||
          e.model.state_dim() != out.state_dim())
        throw std::invalid_argument("OfflineBundle JSON: models disagree on kernel, mode or dimensions");
  b = std::move(out);
}

void to_json(Json& j, const OnlineModel& m) {
  j = {{"format_version", kFormatVersion},
       {"t_star", m.t_star},
       {"map", m.map},
       {"step", m.step},
       {"x0", vector_to_json(m.x0)},
       {"extrapolated", m.extrapolated},
       {"bounds", bounds_to_json(m.bounds)},
       {"state_dim", m.state_dim},
       {"mean_fit_residual", m.mean_fit_residual},
       {"max_fit_residual", m.max_fit_residual},
       {"pod_projection_error", m.pod_projection_error}};
  j["pod"] = m.pod ? Json(*m.pod) : Json(nullptr);
}

void from_json(const Json& j, OnlineModel& m) {
  check_format(j, "OnlineModel");
  OnlineModel out;
  out.t_star = j.at("t_star").get<double>();
  out.map = j.at("map").get<NeuralMap>();
  if (j.contains("pod") && !j.at("pod").is_null()) out.pod = j.at("pod").get<PodBasis>();
  out.step = j.value("step", 0.0);
  out.x0 = vector_from_json(j.at("x0"));
  out.extrapolated = j.value("extrapolated", false);
  out.bounds = bounds_from_json(j.at("bounds"));
  out.state_dim = j.at("state_dim").get<Eigen::Index>();
  out.mean_fit_residual = j.value("mean_fit_residual", 0.0);
  out.max_fit_residual = j.value("max_fit_residual", 0.0);
  out.pod_projection_error = j.value("pod_projection_error", 0.0);
  if (out.map.config.output_dim != out.output_dim() || (out.pod && out.pod->state_dim() != out.state_dim))
    throw std::invalid_argument("OnlineModel JSON: network output does not match the POD basis or state");
  m = std::move(out);
}

void to_json(Json& j, const ErrorReport& r) {
  j = {{"t_star", r.t_star},
       {"errors", vector_to_json(r.errors)},
       {"mean", r.mean},
       {"std", r.std_dev},
       {"count", r.count},
       {"extrapolated", r.extrapolated},
       {"mean_fit_residual", r.mean_fit_residual},
       {"pod_projection_error", r.pod_projection_error},
       {"dnn_valid_loss", r.dnn_valid_loss},
       {"pod_rank", r.pod_rank}};
}

void from_json(const Json& j, ErrorReport& r) {
  r.t_star = j.at("t_star").get<double>();
  r.errors = vector_from_json(j.at("errors"));
  r.mean = j.at("mean").get<double>();
  r.std_dev = j.at("std").get<double>();
  r.count = j.value("count", r.errors.size());
  r.extrapolated = j.value("extrapolated", false);
  r.mean_fit_residual = j.value("mean_fit_residual", 0.0);
  r.pod_projection_error = j.value("pod_projection_error", 0.0);
  r.dnn_valid_loss = j.value("dnn_valid_loss", 0.0);
  r.pod_rank = j.value("pod_rank", Eigen::Index{0});
}

// ---------------------------------------------------------------------------

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(1) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace plando
