// plando: generate benchmark data, fit offline bundles, train online models, evaluate.
#include "plando/dataset_io.hpp"
#include "plando/errors.hpp"
#include "plando/pipeline.hpp"
#include "plando/serialization.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace plando;

namespace {

// Comma/whitespace separated numbers, or the name of a file holding them.
std::vector<double> parse_values(const std::string& text) {
  std::string body = text;
  if (fs::is_regular_file(text)) {
    std::ifstream in(text);
    std::stringstream ss;
    ss << in.rdbuf();
    body = ss.str();
  }
  for (char& c : body)
    if (c == ',' || c == ';' || c == '\n' || c == '\r' || c == '\t') c = ' ';
  std::vector<double> out;
  std::stringstream ss(body);
  for (std::string tok; ss >> tok;) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) throw std::invalid_argument("not a number: '" + tok + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("expected at least one value in '" + text + "'");
  return out;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

DerivativeSource derivative_source(const std::string& name) {
  if (name == "fd") return DerivativeSource::FiniteDifference;
  if (name == "exact") return DerivativeSource::Exact;
  throw std::invalid_argument("--targets must be fd or exact");
}

struct OnlineArgs {
  std::string bundle;
  std::string x0;
  std::optional<double> pod_threshold;
  std::optional<Eigen::Index> pod_rank;
  bool no_pod = false;
  std::string mlp_preset = "lv";
  std::string mlp_config;
  std::optional<int> epochs;
  std::optional<std::uint64_t> mlp_seed;
  std::optional<double> step;
};

void add_online_options(CLI::App* cmd, OnlineArgs& a) {
  cmd->add_option("--bundle", a.bundle, "offline bundle JSON")->required()->check(CLI::ExistingFile);
  cmd->add_option("--x0", a.x0, "initial state: comma separated values or a file (default: bundle initial state)");
  cmd->add_option("--pod-threshold", a.pod_threshold, "POD cumulative energy threshold");
  cmd->add_option("--pod-rank", a.pod_rank, "fixed POD rank (overrides the threshold)");
  cmd->add_flag("--no-pod", a.no_pod, "train the network on full states");
  cmd->add_option("--mlp-preset", a.mlp_preset, "network preset")->check(CLI::IsMember({"lv", "pde"}));
  cmd->add_option("--mlp-config", a.mlp_config, "JSON file with MLP settings applied over the preset")
      ->check(CLI::ExistingFile);
  cmd->add_option("--epochs", a.epochs, "maximum training epochs");
  cmd->add_option("--mlp-seed", a.mlp_seed, "network initialisation and shuffling seed");
  cmd->add_option("--step", a.step, "integration step for continuous models (default: snapshot spacing)");
}

// POD is on by default for high-dimensional states and off for small ones.
OnlineOptions online_options(const OnlineArgs& a, const OfflineBundle& bundle) {
  OnlineOptions opts;
  MlpConfig mlp = MlpConfig::preset(a.mlp_preset, bundle.param_dim(), 1);
  if (!a.mlp_config.empty()) {
    // a bare MLP object, or a scenario config carrying one under "mlp"
    const Json j = read_json_file(a.mlp_config);
    from_json(j.contains("mlp") ? j.at("mlp") : j, mlp);
  }
  if (a.epochs) {
    mlp.max_epochs = *a.epochs;
    mlp.patience = std::min(mlp.patience, mlp.max_epochs);
  }
  if (a.mlp_seed) mlp.seed = *a.mlp_seed;
  opts.mlp = mlp;
  opts.step = a.step;
  const bool want_pod = !a.no_pod && (a.pod_threshold || a.pod_rank || bundle.state_dim() > 10);
  if (want_pod) {
    PodConfig pod;
    if (a.pod_threshold) pod.energy_threshold = *a.pod_threshold;
    pod.fixed_rank = a.pod_rank;
    opts.pod = pod;
  }
  return opts;
}

Eigen::VectorXd initial_state(const std::string& text, const OfflineBundle& bundle) {
  if (text.empty()) return bundle.initial_state;
  Eigen::VectorXd x0 = to_vector(parse_values(text));
  if (x0.size() != bundle.state_dim())
    throw std::invalid_argument("--x0 has " + std::to_string(x0.size()) + " entries, the bundle state has " +
                                std::to_string(bundle.state_dim()));
  return x0;
}

// Stored test states when they match t* and x0, the reference solver otherwise.
Eigen::MatrixXd test_references(const fs::path& dir, const Split& test, double t_star, const Eigen::VectorXd& x0) {
  const Json manifest = read_manifest(dir);
  const ScenarioConfig config = manifest.at("config").get<ScenarioConfig>();
  const Eigen::VectorXd stored_x0 = vector_from_json(manifest.at("test_initial_state"));
  const bool same_x0 = stored_x0.size() == x0.size() &&
                       (stored_x0 - x0).norm() <= 1e-12 * std::max(1.0, stored_x0.norm());
  if (same_x0) {
    for (Eigen::Index k = 0; k < test.times.size(); ++k)
      if (std::abs(test.times(k) - t_star) <= 1e-9 * std::max(1.0, t_star)) return test.states_at(test.times(k));
  }
  std::clog << "note: no stored test states for t* = " << t_star
            << (same_x0 ? "" : " with this x0") << "; running the reference solver\n";
  return reference_at(config, test.mus, t_star, x0);
}

void write_error_csv(const fs::path& path, const Eigen::MatrixXd& mus, const ErrorReport& report) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "index";
  for (Eigen::Index d = 0; d < mus.rows(); ++d) out << ",mu" << d;
  out << ",error\n" << std::setprecision(17);
  for (Eigen::Index i = 0; i < mus.cols(); ++i) {
    out << i;
    for (Eigen::Index d = 0; d < mus.rows(); ++d) out << ',' << mus(d, i);
    out << ',' << report.errors(i) << '\n';
  }
}

fs::path sibling_csv(const fs::path& report) {
  fs::path p = report;
  p.replace_extension(".csv");
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parametric kernel-DMD surrogates: offline fitting, online neural maps, evaluation"};
  app.require_subcommand(1);

  // generate-data
  std::string system, config_path, data_out;
  auto* gen = app.add_subcommand("generate-data", "Latin hypercube samples plus reference trajectories");
  gen->add_option("--system", system, "benchmark system")->required()->check(CLI::IsMember({"lv", "lv2", "heat", "allen-cahn"}));
  gen->add_option("--config", config_path, "scenario JSON (missing keys use the system defaults)")->check(CLI::ExistingFile);
  gen->add_option("--out", data_out, "output directory")->required();

  // offline
  std::string data_dir, kernel_text, bundle_out, targets = "fd";
  std::optional<double> nu;
  std::uint64_t seed = 0;
  auto* off = app.add_subcommand("offline", "Fit one surrogate per training instance");
  off->add_option("--data", data_dir, "dataset directory")->required()->check(CLI::ExistingDirectory);
  off->add_option("--kernel", kernel_text, "linear | quadratic[:c] | poly:d[:c] | gaussian[:l]");
  off->add_option("--nu", nu, "sparsity threshold");
  off->add_option("--seed", seed, "dictionary permutation seed");
  off->add_option("--targets", targets, "continuous targets: finite differences or exact right-hand side")
      ->check(CLI::IsMember({"fd", "exact"}));
  off->add_option("--out", bundle_out, "bundle JSON")->required();

  // online
  OnlineArgs online_args;
  double t_star = 0.0;
  std::string model_out;
  auto* onl = app.add_subcommand("online", "Generate states at t*, reduce, train the parameter-to-state map");
  add_online_options(onl, online_args);
  onl->add_option("--t-star", t_star, "target time")->required();
  onl->add_option("--out", model_out, "model JSON")->required();

  // predict
  std::string model_path, mu_text;
  auto* pred = app.add_subcommand("predict", "Print the predicted state for a parameter");
  pred->add_option("--model", model_path, "model JSON")->required()->check(CLI::ExistingFile);
  pred->add_option("--mu", mu_text, "parameter values, comma separated")->required();

  // evaluate
  std::string test_dir, report_path, csv_path;
  auto* eval = app.add_subcommand("evaluate", "Relative errors over the test split");
  eval->add_option("--model", model_path, "model JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("--test", test_dir, "dataset directory holding the test split")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--report", report_path, "report JSON")->required();
  eval->add_option("--csv", csv_path, "per-instance errors (default: report path with .csv)");

  // sweep
  OnlineArgs sweep_args;
  std::string t_star_text, sweep_out;
  auto* swp = app.add_subcommand("sweep", "online + evaluate over several time instants");
  add_online_options(swp, sweep_args);
  swp->add_option("--t-stars", t_star_text, "time instants, comma separated")->required();
  swp->add_option("--test", test_dir, "dataset directory holding the test split")->required()->check(CLI::ExistingDirectory);
  swp->add_option("--out", sweep_out, "error-vs-time CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      ScenarioConfig config = ScenarioConfig::defaults(system);
      Json extra = Json::object();
      if (!config_path.empty()) {
        Json j = read_json_file(config_path);
        if (j.contains("system") && j.at("system") != system)
          throw std::invalid_argument("config system '" + j.at("system").get<std::string>() + "' differs from --system");
        j["system"] = system;
        config = j.get<ScenarioConfig>();
        for (const char* key : {"kernel", "nu", "mlp"})
          if (j.contains(key)) extra[key] = j.at(key);
      }
      const Dataset ds = generate_dataset(config);
      write_dataset(data_out, ds, extra);
      std::cout << "wrote " << ds.train.size() << "/" << ds.valid.size() << "/" << ds.test.size()
                << " train/valid/test instances to " << data_out << '\n';
    } else if (*off) {
      const Json manifest = read_manifest(data_dir);
      const ScenarioConfig config = manifest.at("config").get<ScenarioConfig>();
      KernelSpec kernel;
      if (!kernel_text.empty()) kernel = parse_kernel_spec(kernel_text);
      else if (manifest.contains("kernel")) kernel = manifest.at("kernel").is_string()
                                                        ? parse_kernel_spec(manifest.at("kernel").get<std::string>())
                                                        : manifest.at("kernel").get<KernelSpec>();
      else throw std::invalid_argument("--kernel is required (the dataset manifest names none)");
      if (!nu && manifest.contains("nu")) nu = manifest.at("nu").get<double>();
      if (!nu) throw std::invalid_argument("--nu is required (the dataset manifest names none)");
      const DerivativeSource source = derivative_source(targets);
      const auto train = to_instances(config, read_split(data_dir, "train"), source);
      const auto valid = to_instances(config, read_split(data_dir, "valid"), source);
      OfflineBundle bundle = offline(train, kernel, *nu, seed, valid);
      bundle.system = config.system;
      save(bundle_out, bundle);
      const auto sizes = bundle.dictionary_sizes();
      double mean_m = 0.0;
      for (auto m : sizes) mean_m += static_cast<double>(m) / static_cast<double>(sizes.size());
      std::cout << "fitted " << bundle.models.size() << " models (+" << bundle.valid_models.size()
                << " validation), mean dictionary size " << mean_m << '\n';
    } else if (*onl) {
      const auto bundle = load<OfflineBundle>(online_args.bundle);
      const OnlineModel model =
          online(bundle, t_star, initial_state(online_args.x0, bundle), online_options(online_args, bundle));
      save(model_out, model);
      std::cout << "t* = " << t_star << (model.extrapolated ? " (extrapolated)" : "") << ", output dim "
                << model.output_dim() << ", best validation loss " << model.map.best_valid_loss << '\n';
    } else if (*pred) {
      const auto model = load<OnlineModel>(model_path);
      const Eigen::VectorXd state = predict(model, to_vector(parse_values(mu_text)));
      std::cout << std::setprecision(17);
      for (Eigen::Index i = 0; i < state.size(); ++i) std::cout << (i ? "," : "") << state(i);
      std::cout << '\n';
    } else if (*eval) {
      const auto model = load<OnlineModel>(model_path);
      const Split test = read_split(test_dir, "test");
      const ErrorReport report = evaluate(model, test.mus, test_references(test_dir, test, model.t_star, model.x0));
      save(report_path, report);
      write_error_csv(csv_path.empty() ? sibling_csv(report_path) : fs::path(csv_path), test.mus, report);
      std::cout << "mean relative error " << report.mean << " (std " << report.std_dev << ") over " << report.count
                << " instances\n";
    } else if (*swp) {
      const auto bundle = load<OfflineBundle>(sweep_args.bundle);
      const Eigen::VectorXd x0 = initial_state(sweep_args.x0, bundle);
      const OnlineOptions opts = online_options(sweep_args, bundle);
      const Split test = read_split(test_dir, "test");
      const auto reports = sweep(bundle, parse_values(t_star_text), x0, opts, test.mus,
                                 [&](double t) { return test_references(test_dir, test, t, x0); });
      if (fs::path(sweep_out).has_parent_path()) fs::create_directories(fs::path(sweep_out).parent_path());
      std::ofstream out(sweep_out);
      if (!out) throw std::runtime_error("cannot write " + sweep_out);
      out << "t_star,mean,std,count,extrapolated,pod_rank,mean_fit_residual,pod_projection_error,dnn_valid_loss\n"
          << std::setprecision(10);
      for (const auto& r : reports) {
        out << r.t_star << ',' << r.mean << ',' << r.std_dev << ',' << r.count << ',' << r.extrapolated << ','
            << r.pod_rank << ',' << r.mean_fit_residual << ',' << r.pod_projection_error << ',' << r.dnn_valid_loss
            << '\n';
        std::cout << "t* = " << r.t_star << "  mean " << r.mean << "  std " << r.std_dev << '\n';
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
