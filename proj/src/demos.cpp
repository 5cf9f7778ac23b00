#include "lipvor/demos.hpp"

#include <filesystem>
#include <ostream>
#include <sstream>

#include "lipvor/error.hpp"
#include "lipvor/report.hpp"
#include "lipvor/svg.hpp"
#include "lipvor/tabular.hpp"

namespace lipvor {

using nlohmann::json;

DemoConfig default_heat_demo() {
  DemoConfig c;
  c.demo = "heat";
  c.heat.seed = 7;
  c.split_seed = 7;
  c.hidden = {10};
  c.init_seed = 7;
  c.training.learning_rate = 0.01;
  c.training.weight_decay = 0.0;
  c.training.max_epochs = 5000;
  c.training.patience = 500;
  c.training.lambda = 0.1;
  c.training.epsilon = 0.1;
  c.constraints = {{1, Direction::Increasing, 0.1}};
  c.max_rounds = 3;
  c.lipvor_budget = 2000;
  c.lipvor_seed = 7;
  return c;
}

DemoConfig default_tabular_demo() {
  DemoConfig c;
  c.demo = "tabular";
  c.tabular_rows = 488;
  c.tabular_generator_seed = 11;
  c.split_seed = 11;
  c.hidden = {5, 5};
  c.init_seed = 11;
  c.training.learning_rate = 0.01;
  c.training.weight_decay = 0.005;
  c.training.max_epochs = 3000;
  c.training.patience = 300;
  c.training.lambda = 0.1;
  c.training.epsilon = 0.1;
  for (std::size_t f = 0; f < 4; ++f) c.constraints.push_back({f, Direction::Increasing, 0.1});
  c.max_rounds = 3;
  c.initial_points = 10;
  c.lipvor_budget = 5000;
  c.lipvor_seed = 11;
  return c;
}

namespace {

const std::set<std::string>& demo_keys() {
  static const std::set<std::string> keys = [] {
    std::set<std::string> k = training_config_keys();
    k.insert({"demo", "heat.rod_length", "heat.diffusivity", "heat.time_horizon", "heat.n_samples",
              "heat.noise_sigma", "heat.seed", "heat.series_terms", "tabular.csv", "tabular.rows",
              "tabular.generator_seed", "split_seed", "hidden", "activation", "init_seed", "constraints",
              "max_rounds", "initial_points", "lipvor_budget", "exploration_p", "lipvor_seed", "joint",
              "fraction_samples"});
    return k;
  }();
  return keys;
}

}  // namespace

DemoConfig demo_config_from(const KeyValueConfig& cfg, DemoConfig c) {
  cfg.require_known(demo_keys());
  c.demo = cfg.get_string("demo", c.demo);
  if (c.demo != "heat" && c.demo != "tabular")
    throw Error(ErrorCode::MalformedConfig, "demo must be heat or tabular");
  c.heat.rod_length = cfg.get_double("heat.rod_length", c.heat.rod_length);
  c.heat.diffusivity = cfg.get_double("heat.diffusivity", c.heat.diffusivity);
  c.heat.time_horizon = cfg.get_double("heat.time_horizon", c.heat.time_horizon);
  c.heat.n_samples = cfg.get_uint("heat.n_samples", c.heat.n_samples);
  c.heat.noise_sigma = cfg.get_double("heat.noise_sigma", c.heat.noise_sigma);
  c.heat.seed = cfg.get_uint("heat.seed", c.heat.seed);
  c.heat.series_terms = cfg.get_uint("heat.series_terms", c.heat.series_terms);
  c.tabular_csv = cfg.get_string("tabular.csv", c.tabular_csv);
  c.tabular_rows = cfg.get_uint("tabular.rows", c.tabular_rows);
  c.tabular_generator_seed = cfg.get_uint("tabular.generator_seed", c.tabular_generator_seed);
  c.split_seed = cfg.get_uint("split_seed", c.split_seed);
  if (cfg.has("hidden")) c.hidden = parse_int_list(cfg.get_string("hidden", ""));
  if (cfg.has("activation")) {
    try {
      c.activation = activation_from_string(cfg.get_string("activation", ""));
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedConfig, e.what());
    }
  }
  c.init_seed = cfg.get_uint("init_seed", c.init_seed);
  c.training = training_config_from(cfg, c.training);
  if (cfg.has("constraints")) {
    try {
      c.constraints = parse_constraint_list(cfg.get_string("constraints", ""));
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedConfig, e.what());
    }
  }
  c.max_rounds = cfg.get_uint("max_rounds", c.max_rounds);
  c.initial_points = cfg.get_uint("initial_points", c.initial_points);
  c.lipvor_budget = cfg.get_uint("lipvor_budget", c.lipvor_budget);
  c.exploration_p = cfg.get_double("exploration_p", c.exploration_p);
  c.lipvor_seed = cfg.get_uint("lipvor_seed", c.lipvor_seed);
  c.joint = cfg.get_bool("joint", c.joint);
  c.fraction_samples = cfg.get_uint("fraction_samples", c.fraction_samples);
  if (c.constraints.empty()) throw Error(ErrorCode::MalformedConfig, "at least one constraint is required");
  if (c.max_rounds == 0) throw Error(ErrorCode::MalformedConfig, "max_rounds must be positive");
  if (!(c.exploration_p >= 0 && c.exploration_p <= 1))
    throw Error(ErrorCode::MalformedConfig, "exploration_p must lie in [0, 1]");
  return c;
}

KeyValueConfig to_key_values(const DemoConfig& c) {
  KeyValueConfig k;
  k.set("demo", c.demo);
  if (c.demo == "heat") {
    k.set("heat.rod_length", c.heat.rod_length);
    k.set("heat.diffusivity", c.heat.diffusivity);
    k.set("heat.time_horizon", c.heat.time_horizon);
    k.set("heat.n_samples", static_cast<std::uint64_t>(c.heat.n_samples));
    k.set("heat.noise_sigma", c.heat.noise_sigma);
    k.set("heat.seed", c.heat.seed);
    k.set("heat.series_terms", static_cast<std::uint64_t>(c.heat.series_terms));
  } else {
    k.set("tabular.csv", c.tabular_csv);
    k.set("tabular.rows", static_cast<std::uint64_t>(c.tabular_rows));
    k.set("tabular.generator_seed", c.tabular_generator_seed);
  }
  k.set("split_seed", c.split_seed);
  k.set("hidden", format_int_list(c.hidden));
  k.set("activation", std::string(to_string(c.activation)));
  k.set("init_seed", c.init_seed);
  write_training_config(k, c.training);
  k.set("constraints", format_constraint_list(c.constraints));
  k.set("max_rounds", static_cast<std::uint64_t>(c.max_rounds));
  k.set("initial_points", static_cast<std::uint64_t>(c.initial_points));
  k.set("lipvor_budget", static_cast<std::uint64_t>(c.lipvor_budget));
  k.set("exploration_p", c.exploration_p);
  k.set("lipvor_seed", c.lipvor_seed);
  k.set("joint", std::string(c.joint ? "true" : "false"));
  k.set("fraction_samples", static_cast<std::uint64_t>(c.fraction_samples));
  return k;
}

std::pair<Dataset, BoxDomain> demo_dataset(const DemoConfig& c) {
  if (c.demo == "heat") {
    HeatScenario s = c.heat;
    Dataset d = generate_heat_dataset(s);
    return {std::move(d), heat_domain(s)};
  }
  std::vector<std::size_t> features;
  for (const auto& con : c.constraints) features.push_back(con.feature);
  TabularData t;
  if (c.tabular_csv.empty()) {
    std::stringstream csv;
    write_esl_like_csv(csv, c.tabular_rows, c.tabular_generator_seed);
    t = parse_tabular(csv, features, c.split_seed);
  } else {
    t = load_tabular(c.tabular_csv, features, c.split_seed);
  }
  const int n = static_cast<int>(t.data.inputs.cols());
  return {std::move(t.data), BoxDomain::unit(n)};
}

Network demo_initial_network(const DemoConfig& c, int input_dim) {
  std::vector<int> dims{input_dim};
  dims.insert(dims.end(), c.hidden.begin(), c.hidden.end());
  dims.push_back(1);
  std::vector<Activation> acts(c.hidden.size(), c.activation);
  acts.push_back(Activation::Identity);
  std::mt19937_64 rng(c.init_seed);
  return random_network(dims, acts, rng);
}

DemoOutcome run_demo(const DemoConfig& config, const std::string& out_dir, std::ostream* log) {
  auto [data, domain] = demo_dataset(config);
  const Network initial = demo_initial_network(config, static_cast<int>(data.inputs.cols()));

  LoopOptions lo;
  lo.max_rounds = config.max_rounds;
  lo.initial_training = true;
  lo.initial_points_limit = config.initial_points;
  lo.certify.budget = config.lipvor_budget;
  lo.certify.exploration_p = config.exploration_p;
  lo.certify.seed = config.lipvor_seed;
  lo.certify.joint = config.joint;
  lo.certify.fraction_samples = config.fraction_samples;
  LoopResult loop = certify_train_loop(initial, data, config.constraints, domain, config.training, lo);
  const SplitMetrics test = evaluate_split(loop.net, data, data.test);
  DemoOutcome o{config, std::move(data), domain, initial, std::move(loop), test, {}, {}};

  if (log) {
    for (const auto& r : o.loop.rounds)
      *log << "round " << r.round << ": " << to_string(r.status) << " after " << r.lipvor_iterations
           << " LipVor iterations, " << r.new_counterexamples << " new counter-examples\n";
    *log << "test MAE " << o.test.mae << '\n';
  }

  const std::string canonical = to_key_values(config).canonical_text();
  json rounds = json::array();
  for (const auto& r : o.loop.rounds) rounds.push_back(to_json(r));
  o.report = report_envelope("demo", {{"demo", config.demo},
                                      {"config_hash", hex64(fnv1a64(canonical))},
                                      {"status", to_string(o.loop.report.overall_status)},
                                      {"rounds", rounds},
                                      {"certification", to_json(o.loop.report)},
                                      {"test_metrics", {{"mse", o.test.mse}, {"mae", o.test.mae}, {"r2", o.test.r2}}}});
  if (out_dir.empty()) return o;

  const std::filesystem::path dir(out_dir);
  std::vector<std::pair<std::string, std::string>> artifacts;
  artifacts.emplace_back("report.json", dump_json(o.report));
  for (const auto& r : o.loop.rounds) {
    if (!r.trained && !r.finetuned) continue;
    std::ostringstream csv;
    write_training_csv(csv, r.training);
    artifacts.emplace_back("training_round" + std::to_string(r.round) + ".csv", csv.str());
  }
  if (!o.loop.report.per_feature.empty()) {
    const CertificationState& st = o.loop.report.per_feature.begin()->second.points_final;
    std::ostringstream pts, cells;
    write_points_csv(pts, st);
    write_cells_csv(cells, st);
    artifacts.emplace_back("points.csv", pts.str());
    artifacts.emplace_back("cells.csv", cells.str());
    if (o.domain.dim() == 2) {
      std::istringstream pin(pts.str()), cin(cells.str());
      std::ostringstream svg;
      write_svg(svg, read_plot_state(pin, cin), o.domain);
      artifacts.emplace_back("state.svg", svg.str());
    }
  }
  artifacts.emplace_back("model.json", dump_json(to_json(o.loop.net)));

  json files = json::object();
  for (const auto& [name, body] : artifacts) {
    write_text_file((dir / name).string(), body);
    files[name] = hex64(fnv1a64(body));
    o.files.push_back((dir / name).string());
  }
  const json manifest = report_envelope("manifest", {{"demo", config.demo},
                                                     {"config", canonical},
                                                     {"config_hash", hex64(fnv1a64(canonical))},
                                                     {"version", std::string(kVersion)},
                                                     {"compiler", std::string(__VERSION__)},
                                                     {"eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                                                           std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                                                           std::to_string(EIGEN_MINOR_VERSION)},
                                                     {"files", files}});
  write_text_file((dir / "manifest.json").string(), dump_json(manifest));
  o.files.push_back((dir / "manifest.json").string());
  return o;
}

DemoOutcome replay_manifest(const std::string& manifest_path, const std::string& out_dir, std::ostream* log) {
  json m;
  try {
    m = json::parse(read_text_file(manifest_path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedConfig, std::string("manifest is not JSON: ") + e.what());
  }
  if (!m.contains("config") || !m["config"].is_string() || !m.contains("demo"))
    throw Error(ErrorCode::MalformedConfig, "manifest lacks demo or config");
  const std::string canonical = m["config"].get<std::string>();
  if (m.contains("config_hash") && m["config_hash"] != hex64(fnv1a64(canonical)))
    throw Error(ErrorCode::MalformedConfig, "manifest config does not match its hash");
  std::istringstream in(canonical);
  const std::string demo = m["demo"].get<std::string>();
  const DemoConfig base = demo == "tabular" ? default_tabular_demo() : default_heat_demo();
  return run_demo(demo_config_from(KeyValueConfig::parse(in), base), out_dir, log);
}

}  // namespace lipvor
