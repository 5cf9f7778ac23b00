// Command-line front end. Exit codes: 0 success, 2 usage or configuration
// error, 3 violations found, 4 internal error. Errors go to stderr as one
// JSON object per line.

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lipvor/certify.hpp"
#include "lipvor/config.hpp"
#include "lipvor/demos.hpp"
#include "lipvor/error.hpp"
#include "lipvor/monotonicity.hpp"
#include "lipvor/report.hpp"
#include "lipvor/svg.hpp"
#include "lipvor/tabular.hpp"

namespace {

using namespace lipvor;
using nlohmann::json;

constexpr int kExitOk = 0, kExitUsage = 2, kExitViolations = 3, kExitInternal = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void emit_error(std::string_view code, std::string_view message) {
  std::cerr << json{{"error", code}, {"message", message}}.dump() << '\n';
}

BoxDomain parse_domain(const std::vector<double>& lower, const std::vector<double>& upper, int dim) {
  if (lower.empty() && upper.empty()) return BoxDomain::unit(dim);
  if (lower.size() != static_cast<std::size_t>(dim) || upper.size() != static_cast<std::size_t>(dim))
    throw UsageError("--lower and --upper need one value per input dimension");
  return BoxDomain(Eigen::Map<const Eigen::VectorXd>(lower.data(), dim),
                   Eigen::Map<const Eigen::VectorXd>(upper.data(), dim));
}

void write_or_print(const std::string& path, const std::string& body) {
  if (path.empty() || path == "-") {
    std::cout << body;
  } else {
    write_text_file(path, body);
  }
}

// Built-in test functions with known Lipschitz constants.
PositivityProblem builtin_problem(const std::string& fn, int dim, double offset, double epsilon) {
  PositivityProblem p;
  p.epsilon = epsilon;
  p.domain = BoxDomain::unit(dim);
  p.evaluator_thread_safe = true;
  if (fn == "const1") {
    p.evaluator = [](const Point&) { return 1.0; };
    p.lipschitz_constant = 1.0;
  } else if (fn == "affine") {
    // 1 - x_0 / 2 + offset; gradient norm 1/2.
    p.evaluator = [offset](const Point& x) { return 1.0 - 0.5 * x[0] + offset; };
    p.lipschitz_constant = 0.5;
  } else if (fn == "sinusoid") {
    // sin(2 pi x_0) + 1.2 + offset; Lipschitz constant 2 pi.
    p.evaluator = [offset](const Point& x) { return std::sin(2 * std::numbers::pi * x[0]) + 1.2 + offset; };
    p.lipschitz_constant = 2 * std::numbers::pi;
  } else {
    throw UsageError("unknown function '" + fn + "' (const1, affine, sinusoid)");
  }
  return p;
}

DemoConfig demo_from_args(DemoConfig base, const std::string& config_path, const std::string& data_path) {
  if (!config_path.empty()) base = demo_config_from(KeyValueConfig::load(config_path), base);
  if (!data_path.empty()) {
    base.demo = "tabular";
    base.tabular_csv = data_path;
  }
  return base;
}

void set_all_seeds(DemoConfig& c, std::uint64_t seed) {
  c.heat.seed = c.tabular_generator_seed = c.split_seed = c.init_seed = c.lipvor_seed = seed;
}

int demo_exit(const DemoOutcome& o) {
  std::cout << "status " << to_string(o.loop.report.overall_status) << '\n';
  return o.loop.report.overall_status == MonotonicityStatus::ViolationsFound ? kExitViolations : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LipVor positivity and monotonicity certification"};
  app.require_subcommand(1);

  // certify-function
  auto* cf = app.add_subcommand("certify-function", "Certify a built-in analytic function on the unit box");
  std::string fn = "const1";
  int fn_dim = 1;
  double fn_offset = 0.0, epsilon = 0.1, exploration_p = 0.1;
  std::size_t max_iter = 1000;
  std::uint64_t seed = 0;
  std::string trace_path, report_path;
  bool serial = false;
  cf->add_option("--fn", fn, "const1 (L=1), affine: 1 - x0/2 (L=0.5), sinusoid: sin(2 pi x0) + 1.2 (L=2 pi)");
  cf->add_option("--dim", fn_dim, "Input dimension")->check(CLI::Range(1, 6));
  cf->add_option("--offset", fn_offset, "Constant added to affine and sinusoid");
  cf->add_option("--epsilon", epsilon)->check(CLI::PositiveNumber);
  cf->add_option("--max-iter", max_iter);
  cf->add_option("--exploration-p", exploration_p)->check(CLI::Range(0.0, 1.0));
  cf->add_option("--seed", seed);
  cf->add_option("--trace", trace_path, "JSON-lines trace file");
  cf->add_option("--report", report_path, "Report JSON file (stdout when absent)");
  cf->add_flag("--serial", serial, "Disable OpenMP kernels");

  // certify-ann
  auto* ca = app.add_subcommand("certify-ann", "Certify partial monotonicity of a model");
  std::string model_path;
  std::vector<std::string> constraint_texts;
  std::vector<double> lower, upper;
  std::size_t budget = 1000;
  bool independent = false;
  std::string points_path, cells_path;
  ca->add_option("--model", model_path, "Model JSON")->required();
  ca->add_option("--constraint", constraint_texts, "r:inc|dec:eps, repeatable")->required();
  ca->add_option("--lower", lower, "Domain lower bounds (default 0)")->delimiter(',');
  ca->add_option("--upper", upper, "Domain upper bounds (default 1)")->delimiter(',');
  ca->add_option("--budget", budget, "LipVor iterations");
  ca->add_option("--exploration-p", exploration_p)->check(CLI::Range(0.0, 1.0));
  ca->add_option("--seed", seed);
  ca->add_flag("--independent", independent, "One LipVor run per constraint");
  ca->add_option("--trace", trace_path);
  ca->add_option("--report", report_path);
  ca->add_option("--points", points_path, "Write the final points CSV");
  ca->add_option("--cells", cells_path, "Write the final cells CSV");
  ca->add_flag("--serial", serial);

  // train / finetune-loop
  auto* tr = app.add_subcommand("train", "Train a network on a CSV dataset");
  auto* fl = app.add_subcommand("finetune-loop", "Train, certify and fine-tune until certified");
  std::string config_path, data_path, out_dir = "out";
  for (auto* sub : {tr, fl}) {
    sub->add_option("--config", config_path, "key = value config file");
    sub->add_option("--data", data_path, "CSV with header, last column the target");
    sub->add_option("--out", out_dir, "Output directory");
  }

  // demos
  auto* hd = app.add_subcommand("heat-demo", "Heated rod end-to-end run");
  auto* td = app.add_subcommand("tabular-demo", "Four-score tabular end-to-end run");
  std::optional<std::uint64_t> demo_seed;
  for (auto* sub : {hd, td}) {
    sub->add_option("--seed", demo_seed, "Overrides every seed of the recorded config");
    sub->add_option("--config", config_path);
    sub->add_option("--out", out_dir);
  }

  auto* ps = app.add_subcommand("plot-state", "Render a 2-D points/cells snapshot as SVG");
  std::string svg_path = "state.svg";
  ps->add_option("--points", points_path)->required();
  ps->add_option("--cells", cells_path)->required();
  ps->add_option("--lower", lower)->delimiter(',');
  ps->add_option("--upper", upper)->delimiter(',');
  ps->add_option("--out", svg_path);

  auto* rp = app.add_subcommand("replay", "Rerun a demo from its manifest");
  std::string manifest_path;
  rp->add_option("--manifest", manifest_path)->required();
  rp->add_option("--out", out_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error("Usage", e.what());
    return kExitUsage;
  }

  const Execution exec = serial ? Execution::Serial : Execution::Parallel;
  try {
    if (*cf) {
      const PositivityProblem p = builtin_problem(fn, fn_dim, fn_offset, epsilon);
      std::ofstream trace;
      CertifyOptions opt;
      opt.max_iter = max_iter;
      opt.exploration_p = exploration_p;
      opt.seed = seed;
      opt.exec = exec;
      if (!trace_path.empty()) {
        trace.open(trace_path);
        if (!trace) throw Error(ErrorCode::IoFailure, "cannot write " + trace_path);
        opt.trace = &trace;
      }
      const Point start = p.domain.center();
      const CertificationResult r = certify(p, std::span<const Point>(&start, 1), opt);
      json body = to_json(r);
      body["function"] = fn;
      body["lipschitz_constant"] = p.lipschitz_constant;
      body["epsilon"] = epsilon;
      body["added_points"] = r.iterations_used;
      write_or_print(report_path, dump_json(report_envelope("certification", body)));
      if (!report_path.empty()) std::cout << "status " << to_string(r.status) << '\n';
      return r.status == CertificationStatus::CounterexamplesFound ? kExitViolations : kExitOk;
    }
    if (*ca) {
      const Network net = load_network(model_path);
      std::vector<MonotonicityConstraint> cons;
      for (const auto& t : constraint_texts) cons.push_back(parse_constraint(t));
      const BoxDomain domain = parse_domain(lower, upper, net.input_dim());
      std::ofstream trace;
      MonotonicityOptions mo;
      mo.budget = budget;
      mo.exploration_p = exploration_p;
      mo.seed = seed;
      mo.joint = !independent;
      mo.exec = exec;
      if (!trace_path.empty()) {
        trace.open(trace_path);
        if (!trace) throw Error(ErrorCode::IoFailure, "cannot write " + trace_path);
        mo.trace = &trace;
      }
      const MonotonicityReport rep = certify_monotonic(net, cons, domain, {}, mo);
      write_or_print(report_path, dump_json(report_envelope("monotonicity", to_json(rep))));
      if (!rep.per_feature.empty()) {
        const auto& st = rep.per_feature.begin()->second.points_final;
        if (!points_path.empty()) {
          std::ostringstream s;
          write_points_csv(s, st);
          write_text_file(points_path, s.str());
        }
        if (!cells_path.empty()) {
          std::ostringstream s;
          write_cells_csv(s, st);
          write_text_file(cells_path, s.str());
        }
      }
      if (!report_path.empty()) std::cout << "status " << to_string(rep.overall_status) << '\n';
      return rep.overall_status == MonotonicityStatus::ViolationsFound ? kExitViolations : kExitOk;
    }
    if (*tr) {
      const DemoConfig c = demo_from_args(default_tabular_demo(), config_path, data_path);
      auto [data, domain] = demo_dataset(c);
      const Network init = demo_initial_network(c, static_cast<int>(data.inputs.cols()));
      const TrainResult res = train(init, data, c.constraints, c.training);
      const std::filesystem::path dir(out_dir);
      std::ostringstream csv;
      write_training_csv(csv, res.report);
      write_text_file((dir / "training.csv").string(), csv.str());
      write_text_file((dir / "model.json").string(), dump_json(to_json(res.net)));
      write_text_file((dir / "report.json").string(), dump_json(report_envelope("training", to_json(res.report))));
      std::cout << "epochs " << res.report.epochs_run << ", best epoch " << res.report.best_epoch << ", "
                << res.report.early_stop_reason << ", test MAE " << res.report.test.mae << '\n';
      return kExitOk;
    }
    if (*fl) {
      const DemoConfig c = demo_from_args(default_tabular_demo(), config_path, data_path);
      return demo_exit(run_demo(c, out_dir, &std::cout));
    }
    if (*hd || *td) {
      DemoConfig c = *hd ? default_heat_demo() : default_tabular_demo();
      if (!config_path.empty()) c = demo_config_from(KeyValueConfig::load(config_path), c);
      if (demo_seed) set_all_seeds(c, *demo_seed);
      return demo_exit(run_demo(c, out_dir, &std::cout));
    }
    if (*ps) {
      std::ifstream pin(points_path), cin(cells_path);
      if (!pin) throw Error(ErrorCode::IoFailure, "cannot open " + points_path);
      if (!cin) throw Error(ErrorCode::IoFailure, "cannot open " + cells_path);
      const PlotState st = read_plot_state(pin, cin);
      std::ostringstream svg;
      write_svg(svg, st, parse_domain(lower, upper, 2));
      write_text_file(svg_path, svg.str());
      return kExitOk;
    }
    if (*rp) return demo_exit(replay_manifest(manifest_path, out_dir, &std::cout));
  } catch (const UsageError& e) {
    emit_error("Usage", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    const ErrorCode c = e.code();
    emit_error(to_string(c), e.what());
    const bool usage = c == ErrorCode::InvalidArgument || c == ErrorCode::MalformedConfig ||
                       c == ErrorCode::MalformedCSV || c == ErrorCode::MalformedModel || c == ErrorCode::IoFailure ||
                       c == ErrorCode::NonNumeric || c == ErrorCode::ConstantColumn ||
                       c == ErrorCode::DimensionMismatch || c == ErrorCode::IndexOutOfRange;
    return usage ? kExitUsage : kExitInternal;
  } catch (const std::exception& e) {
    emit_error("Internal", e.what());
    return kExitInternal;
  }
  return kExitInternal;
}
