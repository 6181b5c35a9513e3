#include "plando/dataset_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace plando {
namespace fs = std::filesystem;

namespace {

constexpr const char* kSplitNames[] = {"train", "valid", "test"};

Split& split_of(Dataset& ds, const std::string& name) {
  if (name == "train") return ds.train;
  if (name == "valid") return ds.valid;
  return ds.test;
}

const Split& split_of(const Dataset& ds, const std::string& name) {
  return split_of(const_cast<Dataset&>(ds), name);
}

std::string instance_file(const std::string& split, Eigen::Index i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04ld.csv", static_cast<long>(i));
  return split + "/" + buf;
}

}  // namespace

void to_json(Json& j, const ScenarioConfig& c) {
  Json bounds = Json::array();
  for (const auto& [lo, hi] : c.bounds) bounds.push_back({lo, hi});
  j = {{"system", c.system},
       {"bounds", std::move(bounds)},
       {"n_train", c.n_train},
       {"n_valid", c.n_valid},
       {"n_test", c.n_test},
       {"seed", c.seed},
       {"t_end", c.t_end},
       {"n_snapshots", c.n_snapshots},
       {"test_times", c.test_times}};
  if (c.test_x0) j["test_x0"] = vector_to_json(*c.test_x0);
  if (c.system == "lv" || c.system == "lv2") {
    j["x0"] = vector_to_json(c.x0);
    j["lv"] = {{"alpha", c.lv.alpha}, {"beta", c.lv.beta}, {"gamma", c.lv.gamma}, {"delta", c.lv.delta}};
    j["ode_tolerances"] = {{"abs", c.ode_tolerances.abs}, {"rel", c.ode_tolerances.rel}};
  } else if (c.system == "heat") {
    j["heat"] = {{"alpha_ic", c.heat.alpha_ic}, {"nx", c.heat.nx},         {"ny", c.heat.ny},
                 {"dt", c.heat.dt},             {"length", c.heat.length}, {"diffusivity", c.heat.diffusivity}};
  } else {
    j["allen_cahn"] = {{"nx", c.allen_cahn.nx},
                       {"dt", c.allen_cahn.dt},
                       {"boundary_value", c.allen_cahn.boundary_value},
                       {"lambda", c.allen_cahn.lambda},
                       {"epsilon", c.allen_cahn.epsilon}};
  }
}

void from_json(const Json& j, ScenarioConfig& c) {
  ScenarioConfig out = ScenarioConfig::defaults(j.at("system").get<std::string>());
  if (j.contains("bounds")) {
    out.bounds.clear();
    for (const auto& b : j.at("bounds")) out.bounds.emplace_back(b.at(0).get<double>(), b.at(1).get<double>());
  }
  out.n_train = j.value("n_train", out.n_train);
  out.n_valid = j.value("n_valid", out.n_valid);
  out.n_test = j.value("n_test", out.n_test);
  out.seed = j.value("seed", out.seed);
  out.t_end = j.value("t_end", out.t_end);
  out.n_snapshots = j.value("n_snapshots", out.n_snapshots);
  out.test_times = j.value("test_times", out.test_times);
  if (j.contains("x0")) out.x0 = vector_from_json(j.at("x0"));
  if (j.contains("test_x0") && !j.at("test_x0").is_null()) out.test_x0 = vector_from_json(j.at("test_x0"));
  if (j.contains("lv")) {
    const Json& p = j.at("lv");
    out.lv.alpha = p.value("alpha", out.lv.alpha);
    out.lv.beta = p.value("beta", out.lv.beta);
    out.lv.gamma = p.value("gamma", out.lv.gamma);
    out.lv.delta = p.value("delta", out.lv.delta);
  }
  if (j.contains("ode_tolerances")) {
    out.ode_tolerances.abs = j.at("ode_tolerances").value("abs", out.ode_tolerances.abs);
    out.ode_tolerances.rel = j.at("ode_tolerances").value("rel", out.ode_tolerances.rel);
  }
  if (j.contains("heat")) {
    const Json& p = j.at("heat");
    out.heat.alpha_ic = p.value("alpha_ic", out.heat.alpha_ic);
    out.heat.nx = p.value("nx", out.heat.nx);
    out.heat.ny = p.value("ny", out.heat.ny);
    out.heat.dt = p.value("dt", out.heat.dt);
    out.heat.length = p.value("length", out.heat.length);
    out.heat.diffusivity = p.value("diffusivity", out.heat.diffusivity);
  }
  if (j.contains("allen_cahn")) {
    const Json& p = j.at("allen_cahn");
    out.allen_cahn.nx = p.value("nx", out.allen_cahn.nx);
    out.allen_cahn.dt = p.value("dt", out.allen_cahn.dt);
    out.allen_cahn.boundary_value = p.value("boundary_value", out.allen_cahn.boundary_value);
    out.allen_cahn.lambda = p.value("lambda", out.allen_cahn.lambda);
    out.allen_cahn.epsilon = p.value("epsilon", out.allen_cahn.epsilon);
  }
  out.validate();
  c = std::move(out);
}

ScenarioConfig load_scenario_config(const fs::path& path) { return read_json_file(path).get<ScenarioConfig>(); }

// ---------------------------------------------------------------------------

void write_trajectory_csv(const fs::path& path, const Eigen::VectorXd& times, const Eigen::MatrixXd& states) {
  if (states.cols() != times.size()) throw std::invalid_argument("trajectory CSV: one state column per time expected");
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "t";
  for (Eigen::Index r = 0; r < states.rows(); ++r) out << ",x" << r;
  out << '\n' << std::setprecision(17);
  for (Eigen::Index k = 0; k < times.size(); ++k) {
    out << times(k);
    for (Eigen::Index r = 0; r < states.rows(); ++r) out << ',' << states(r, k);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> read_trajectory_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) {
      std::size_t used = 0;
      try {
        row.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0) throw std::invalid_argument("malformed number '" + cell + "' in " + path.string());
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::invalid_argument("ragged rows in " + path.string());
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().size() < 2) throw std::invalid_argument("no data rows in " + path.string());
  const auto n = static_cast<Eigen::Index>(rows.front().size() - 1);
  Eigen::VectorXd times(static_cast<Eigen::Index>(rows.size()));
  Eigen::MatrixXd states(n, times.size());
  for (Eigen::Index k = 0; k < times.size(); ++k) {
    const auto& row = rows[static_cast<std::size_t>(k)];
    times(k) = row[0];
    for (Eigen::Index r = 0; r < n; ++r) states(r, k) = row[static_cast<std::size_t>(r + 1)];
  }
  return {times, states};
}

// ---------------------------------------------------------------------------

void write_dataset(const fs::path& dir, const Dataset& dataset, const Json& extra) {
  fs::create_directories(dir);
  const ScenarioConfig& c = dataset.config;
  Json manifest = {{"format_version", 1},
                   {"system", c.system},
                   {"mode", to_string(c.mode())},
                   {"state_dim", c.state_dim()},
                   {"config", c},
                   {"seeds", {{"lhs", c.seed}}},
                   {"grid",
                    {{"t0", 0.0},
                     {"t_end", c.t_end},
                     {"count", c.n_snapshots},
                     {"dt", c.t_end / static_cast<double>(c.n_snapshots - 1)},
                     {"test_times", c.test_times}}},
                   {"initial_state", vector_to_json(c.default_initial_state())},
                   {"test_initial_state", vector_to_json(c.test_x0.value_or(c.default_initial_state()))}};
  manifest["bounds"] = manifest["config"]["bounds"];
  for (const char* name : kSplitNames) {
    const Split& split = split_of(dataset, name);
    Json list = Json::array();
    for (Eigen::Index i = 0; i < split.size(); ++i) {
      const std::string file = instance_file(name, i);
      write_trajectory_csv(dir / file, split.times, split.states[static_cast<std::size_t>(i)]);
      list.push_back({{"mu", vector_to_json(split.mus.col(i))}, {"file", file}});
    }
    manifest["instances"][name] = std::move(list);
  }
  for (const auto& [key, value] : extra.items()) manifest[key] = value;
  write_json_file(dir / "manifest.json", manifest);
}

Json read_manifest(const fs::path& dir) {
  const fs::path path = dir / "manifest.json";
  if (!fs::exists(path)) throw std::invalid_argument("no manifest.json in " + dir.string());
  return read_json_file(path);
}

Split read_split(const fs::path& dir, const std::string& name) {
  if (name != "train" && name != "valid" && name != "test") throw std::invalid_argument("unknown split '" + name + "'");
  const Json manifest = read_manifest(dir);
  const ScenarioConfig config = manifest.at("config").get<ScenarioConfig>();
  Split split;
  const Json& list = manifest.at("instances").at(name);
  const auto count = static_cast<Eigen::Index>(list.size());
  split.mus.resize(config.param_dim(), count);
  for (Eigen::Index i = 0; i < count; ++i) {
    const Json& entry = list[static_cast<std::size_t>(i)];
    const std::string file = entry.at("file").get<std::string>();
    const Eigen::VectorXd mu = vector_from_json(entry.at("mu"));
    if (mu.size() != config.param_dim()) throw std::invalid_argument("manifest: parameter has the wrong dimension");
    split.mus.col(i) = mu;
    auto [times, states] = read_trajectory_csv(dir / file);
    if (states.rows() != config.state_dim()) throw std::invalid_argument("dataset: " + file + " has the wrong state size");
    if (i == 0) split.times = times;
    else if (times.size() != split.times.size() || (times - split.times).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, times.cwiseAbs().maxCoeff()))
      throw std::invalid_argument("dataset: instances of split " + name + " use different times");
    split.states.push_back(std::move(states));
  }
  return split;
}

Dataset read_dataset(const fs::path& dir) {
  Dataset ds;
  ds.config = read_manifest(dir).at("config").get<ScenarioConfig>();
  for (const char* name : kSplitNames) split_of(ds, name) = read_split(dir, name);
  return ds;
}

}  // namespace plando
