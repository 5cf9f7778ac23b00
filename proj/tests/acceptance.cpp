// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "lipvor/certify.hpp"
#include "lipvor/demos.hpp"
#include "lipvor/kernels.hpp"
#include "lipvor/lipschitz.hpp"
#include "lipvor/monotonicity.hpp"
#include "lipvor/report.hpp"
#include "oracles.hpp"

using namespace lipvor;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail << "first failure: " << what << "; ";
    pass = pass && ok;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void run(int id, const std::string& name, double limit_seconds, const std::function<void(Outcome&)>& body) {
  Outcome out;
  const auto start = Clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.require(false, std::string("exception: ") + e.what());
  }
  const double elapsed = seconds_since(start);
  if (limit_seconds > 0) out.require(elapsed < limit_seconds, "runtime limit");
  if (!out.pass) ++failures;
  std::cout << (out.pass ? "PASS" : "FAIL") << " [" << id << "] " << name << ": " << out.detail.str()
            << "time " << elapsed << " s" << std::endl;
}

struct Analytic {
  std::string kind;
  PositivityProblem problem;
};

// f = c + a.x, f = c + A sin(w.x + phase) or f = c + A |x - centre|, with the
// exact Lipschitz constant of each.
Analytic random_analytic(int kind, int dim, double offset, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd a(dim);
  for (int i = 0; i < dim; ++i) a[i] = u(rng);
  Analytic out;
  out.problem.domain = BoxDomain::unit(dim);
  out.problem.evaluator_thread_safe = true;
  switch (kind) {
    case 0: {
      out.kind = "affine";
      out.problem.lipschitz_constant = a.norm();
      out.problem.evaluator = [a, offset](const Point& x) { return offset + a.dot(x); };
      break;
    }
    case 1: {
      out.kind = "sinusoid";
      const Eigen::VectorXd w = 4.0 * a;
      const double amp = 0.5 + 0.5 * std::abs(u(rng)), phase = 3.0 * u(rng);
      out.problem.lipschitz_constant = amp * w.norm();
      out.problem.evaluator = [w, amp, phase, offset](const Point& x) { return offset + amp * std::sin(w.dot(x) + phase); };
      break;
    }
    default: {
      out.kind = "radial";
      const Eigen::VectorXd centre = (a.array() + 1.0) / 2.0;
      const double amp = u(rng);
      out.problem.lipschitz_constant = std::abs(amp);
      out.problem.evaluator = [centre, amp, offset](const Point& x) { return offset + amp * (x - centre).norm(); };
      break;
    }
  }
  return out;
}

void soundness(Outcome& out) {
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int certified = 0, refuted = 0, exhausted = 0;
  const int problems = 60;
  for (int k = 0; k < problems; ++k) {
    const int dim = 1 + k % 3;
    const double offset = -0.3 + 1.8 * u(rng);
    Analytic a = random_analytic((k / 3) % 3, dim, offset, rng);
    if (!(a.problem.lipschitz_constant > 0)) continue;
    a.problem.epsilon = 0.05 + 0.15 * u(rng);
    CertifyOptions opt;
    opt.seed = static_cast<std::uint64_t>(k);
    opt.max_iter = 3000;
    opt.fraction_samples = 0;
    const Point start = a.problem.domain.center();
    const auto r = certify(a.problem, std::span<const Point>(&start, 1), opt);
    if (r.status == CertificationStatus::CertifiedPositive) {
      ++certified;
      const auto [lo, at] = grid_minimum(a.problem.evaluator, a.problem.domain, 201);
      out.require(lo > 0.0, a.kind + " certified but grid minimum " + std::to_string(lo));
    } else if (r.status == CertificationStatus::CounterexamplesFound) {
      ++refuted;
      out.require(!r.counterexamples.empty(), "refutation without counter-examples");
      for (const auto& c : r.counterexamples)
        out.require(a.problem.evaluator(c.point) < a.problem.epsilon, "counter-example re-evaluates above epsilon");
    } else {
      ++exhausted;
    }
  }
  out.require(certified >= 10 && refuted >= 10, "both verdicts exercised");
  out.detail << problems << " problems, " << certified << " certified, " << refuted << " refuted, " << exhausted
             << " budget-exhausted; ";
}

void budget(Outcome& out) {
  std::mt19937_64 rng(1002);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uint64_t worst_used = 0, worst_bound = 0, most_used = 0, largest_bound = 0;
  for (int k = 0; k < 20; ++k) {
    const int dim = 1 + k % 2;
    Analytic a = random_analytic(k % 3, dim, 0.0, rng);
    // Shift so the minimum over the box is at least epsilon.
    const auto [lo, at] = grid_minimum(a.problem.evaluator, a.problem.domain, dim == 1 ? 100001 : 1001);
    const double resolution = a.problem.lipschitz_constant * std::sqrt(dim) / (dim == 1 ? 100000.0 : 1000.0);
    const double gain = 1.0 + 4.0 * u(rng);
    a.problem.lipschitz_constant *= gain;
    a.problem.epsilon = 0.02 + 0.08 * u(rng);
    const double shift = a.problem.epsilon - gain * (lo - resolution);
    const auto base = a.problem.evaluator;
    a.problem.evaluator = [base, gain, shift](const Point& x) { return gain * base(x) + shift; };
    const double L = a.problem.lipschitz_constant;
    const std::uint64_t bound = iteration_bound(a.problem.domain, a.problem.epsilon, L);
    CertifyOptions opt;
    opt.seed = static_cast<std::uint64_t>(100 + k);
    opt.max_iter = bound;
    opt.fraction_samples = 0;
    bool packed = true;
    opt.on_iteration = [&](const CertificationState& s, std::size_t) {
      const Point& q = s.points.back();
      for (std::size_t j = 0; j + 1 < s.size(); ++j)
        if ((s.points[j] - q).norm() < a.problem.epsilon / L) packed = false;
    };
    std::mt19937_64 start_rng(static_cast<std::uint64_t>(k));
    const auto start = oracle::random_points(1, a.problem.domain, start_rng);
    const auto r = certify(a.problem, start, opt);
    out.require(r.status == CertificationStatus::CertifiedPositive, a.kind + " run " + std::to_string(k) + " not certified");
    out.require(r.iterations_used <= bound, "iteration bound exceeded");
    out.require(packed, "packing invariant");
    most_used = std::max<std::uint64_t>(most_used, r.iterations_used);
    largest_bound = std::max(largest_bound, bound);
    if (r.iterations_used * std::max<std::uint64_t>(worst_bound, 1) >= worst_used * std::max<std::uint64_t>(bound, 1)) {
      worst_used = r.iterations_used;
      worst_bound = bound;
    }
  }
  out.detail << "20 runs, highest usage " << worst_used << " of " << worst_bound << " iterations, most iterations "
             << most_used << ", largest bound " << largest_bound << "; ";
}

Network random_small_net(std::mt19937_64& rng, int dim) {
  std::uniform_int_distribution<int> depth(1, 2), width(1, 16), act(0, 2), pick_dim(1, 3);
  std::uniform_real_distribution<double> scale(0.5, 3.0);
  const Activation table[] = {Activation::Tanh, Activation::Sigmoid, Activation::Identity};
  std::vector<int> dims{dim};
  std::vector<Activation> acts;
  const int hidden = depth(rng);
  for (int l = 0; l < hidden; ++l) {
    dims.push_back(width(rng));
    acts.push_back(table[act(rng)]);
  }
  dims.push_back(1);
  acts.push_back(Activation::Identity);
  return random_network(dims, acts, rng, scale(rng));
}

void lipschitz_soundness(Outcome& out) {
  std::mt19937_64 rng(1003);
  double tightest = 0.0;
  for (int k = 0; k < 100; ++k) {
    const int dim = 1 + k % 3;
    const Network net = random_small_net(rng, dim);
    const std::size_t r = static_cast<std::size_t>(k) % static_cast<std::size_t>(dim);
    const double bound = lipschitz_bound(net, r).bound;
    const double sup = empirical_gradient_sup(net, r, BoxDomain::unit(dim), 101);
    out.require(sup <= bound, "net " + std::to_string(k) + ": sup " + std::to_string(sup) + " > bound " + std::to_string(bound));
    if (bound > 0) tightest = std::max(tightest, sup / bound);
  }
  const Network neuron(1, {{Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::VectorXd::Zero(1), Activation::Tanh}});
  const double single = lipschitz_bound(neuron, 0).bound;
  out.require(std::abs(single - 3.079201) < 1e-6, "single tanh neuron value");
  out.detail << "100 nets, max sup/bound " << tightest << ", single neuron " << single << "; ";
}

void derivatives(Outcome& out) {
  std::mt19937_64 rng(1004);
  std::uniform_int_distribution<int> pick_dim(1, 4);
  double worst_j = 0.0, worst_h = 0.0, worst_sym = 0.0;
  for (int k = 0; k < 100; ++k) {
    const int dim = pick_dim(rng);
    std::vector<int> dims{dim, 8, 6, 1};
    const std::vector<Activation> acts{k % 2 ? Activation::Tanh : Activation::Sigmoid,
                                       k % 3 ? Activation::Tanh : Activation::Sigmoid, Activation::Identity};
    const Network net = random_network(dims, acts, rng, 1.5);
    const Point x = oracle::random_points(1, BoxDomain::unit(dim), rng)[0];
    const Eigen::VectorXd jac = jacobian(net, x);
    const Eigen::VectorXd fd_j = oracle::fd_gradient([&](const Point& p) { return forward(net, p); }, x, 1e-6);
    worst_j = std::max(worst_j, (jac - fd_j).norm() / fd_j.norm());
    const Eigen::MatrixXd hes = hessian(net, x);
    Eigen::MatrixXd fd_h(dim, dim);
    for (int i = 0; i < dim; ++i) {
      Point a = x, b = x;
      a[i] += 1e-5;
      b[i] -= 1e-5;
      fd_h.col(i) = (jacobian(net, a) - jacobian(net, b)) / 2e-5;
    }
    worst_h = std::max(worst_h, (hes - fd_h).norm() / fd_h.norm());
    worst_sym = std::max(worst_sym, (hes - hes.transpose()).cwiseAbs().maxCoeff());
  }
  out.require(worst_j < 1e-6, "Jacobian relative error");
  out.require(worst_h < 1e-5, "Hessian relative error");
  out.require(worst_sym < 1e-10, "Hessian symmetry");
  out.detail << "worst Jacobian rel " << worst_j << ", Hessian rel " << worst_h << ", asymmetry " << worst_sym << "; ";
}

bool in_cell(const VoronoiCell& c, const Point& x, double tol) {
  for (const auto& h : c.halfspaces)
    if (h.slack(x) > tol) return false;
  return true;
}

void voronoi(Outcome& out) {
  std::mt19937_64 rng(1005);
  std::uniform_int_distribution<std::size_t> count(2, 50);
  const auto box = BoxDomain::unit(2);
  const int per_dim = 201;
  const double spacing = 1.0 / (per_dim - 1);
  std::size_t total_points = 0;
  for (int k = 0; k < 20; ++k) {
    const auto pts = oracle::random_points(count(rng), box, rng);
    total_points += pts.size();
    const auto cells = compute_cells(pts, box);
    for (std::size_t g = 0; g < grid_size(2, per_dim); ++g) {
      const Point x = grid_node(box, per_dim, g);
      const std::size_t owner = oracle::nearest(x, pts);
      out.require(in_cell(cells[owner], x, kFeasibilityTolerance), "grid node missing from its nearest generator's cell");
      for (std::size_t j = 0; j < pts.size(); ++j)
        if (j != owner && (x - pts[j]).norm() - (x - pts[owner]).norm() > spacing)
          out.require(!in_cell(cells[j], x, 0.0), "grid node inside a farther generator's cell");
    }
    for (const auto& c : cells) {
      const auto ring = oracle::polygon_ring(c.vertices);
      double sampled = 0.0, gap = 0.0;
      const int per_edge = 200;
      for (std::size_t e = 0; e < ring.size(); ++e) {
        const Point& a = ring[e];
        const Point& b = ring[(e + 1) % ring.size()];
        gap = std::max(gap, (b - a).norm() / per_edge);
        for (int s = 0; s <= per_edge; ++s)
          sampled = std::max(sampled, (a + (b - a) * (static_cast<double>(s) / per_edge) - pts[c.generator_index]).norm());
      }
      out.require(c.furthest_distance >= sampled - 1e-12 && c.furthest_distance <= sampled + gap,
                  "furthest distance outside the sampling resolution");
    }
  }
  out.detail << "20 sets, " << total_points << " generators; ";
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lipvor_acceptance_" + name);
  fs::remove_all(p);
  return p;
}

void heat(Outcome& out) {
  const DemoConfig cfg = default_heat_demo();
  out.require(cfg.heat.n_samples == 30 && cfg.hidden == std::vector<int>{10} && cfg.activation == Activation::Tanh &&
                  cfg.training.lambda == 0.1 && cfg.training.epsilon == 0.1,
              "recorded configuration differs from the protocol");
  const DemoOutcome run = run_demo(cfg, "");
  const auto& rounds = run.loop.rounds;
  out.require(run.loop.report.overall_status == MonotonicityStatus::CertifiedMonotonic, "not certified");
  out.require(rounds.size() <= 3, "more than three rounds");
  for (const auto& r : rounds) out.require(r.lipvor_iterations <= 2000, "round over 2000 iterations");
  const auto [lo, at] = grid_minimum([&](const Point& x) { return partial_derivative(run.loop.net, x, 1); },
                                     run.domain, 201);
  out.require(lo > 0.0, "dg/dt not positive on the grid");
  out.require(run.test.mae < 0.05, "test MAE");
  out.detail << rounds.size() << " round(s), iterations";
  for (const auto& r : rounds) out.detail << ' ' << r.lipvor_iterations;
  out.detail << ", min dg/dt " << lo << ", test MAE " << run.test.mae << "; ";
}

void tabular(Outcome& out) {
  const DemoConfig cfg = default_tabular_demo();
  out.require(cfg.hidden == std::vector<int>{5, 5} && cfg.activation == Activation::Tanh && cfg.training.lambda == 0.1 &&
                  cfg.training.epsilon == 0.1 && cfg.training.weight_decay == 0.005 && cfg.initial_points == 10 &&
                  cfg.constraints.size() == 4,
              "recorded configuration differs from the protocol");
  const DemoOutcome run = run_demo(cfg, "");
  const auto& rounds = run.loop.rounds;
  out.require(!rounds.empty() && rounds.front().training.final_train_penalty == 0.0, "training penalty not zero");
  out.require(run.loop.report.overall_status == MonotonicityStatus::CertifiedMonotonic, "not certified");
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < 4; ++r)
    lo = std::min(lo, grid_minimum([&](const Point& x) { return partial_derivative(run.loop.net, x, r); },
                                   run.domain, 21).first);
  out.require(lo > 0.0, "a directed derivative is not positive on the 21^4 grid");
  out.detail << rounds.size() << " round(s), iterations";
  for (const auto& r : rounds) out.detail << ' ' << r.lipvor_iterations;
  out.detail << ", min partial " << lo << ", test MAE " << run.test.mae << "; ";
}

// Sum of a bump tanh(s(x_r - c1)) - tanh(s(x_r - c2)), whose derivative turns
// negative past (c1 + c2) / 2, and weak terms in the other inputs.
Network sign_flip_net(int dim, std::size_t r, double c1, double c2, double steep, double sign, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  const int width = 2 + (dim - 1);
  Eigen::MatrixXd w1 = Eigen::MatrixXd::Zero(dim, width), w2(width, 1);
  Eigen::VectorXd b1(width);
  w1(static_cast<Eigen::Index>(r), 0) = steep;
  w1(static_cast<Eigen::Index>(r), 1) = steep;
  b1[0] = -steep * c1;
  b1[1] = -steep * c2;
  w2(0, 0) = sign;
  w2(1, 0) = -sign;
  int col = 2;
  for (int i = 0; i < dim; ++i) {
    if (static_cast<std::size_t>(i) == r) continue;
    w1(i, col) = u(rng);
    b1[col] = u(rng);
    w2(col, 0) = u(rng);
    ++col;
  }
  return Network(dim, {{w1, b1, Activation::Tanh}, {w2, Eigen::VectorXd::Zero(1), Activation::Identity}});
}

void adversarial(Outcome& out) {
  std::mt19937_64 rng(1008);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int refuted = 0, exhausted = 0;
  for (int k = 0; k < 10; ++k) {
    const int dim = 1 + k % 3;
    const std::size_t r = static_cast<std::size_t>(k) % static_cast<std::size_t>(dim);
    const double c1 = 0.05 + 0.4 * u(rng), c2 = c1 + 0.2 + 0.3 * u(rng), steep = 3.0 + 5.0 * u(rng);
    const bool decreasing = k % 2 == 1;
    const Network net = sign_flip_net(dim, r, c1, c2, steep, decreasing ? -1.0 : 1.0, rng);
    const MonotonicityConstraint c{r, decreasing ? Direction::Decreasing : Direction::Increasing, 0.05};
    const auto [lo, at] = grid_minimum([&](const Point& x) { return c.sign() * partial_derivative(net, x, r); },
                                       BoxDomain::unit(dim), dim == 1 ? 1001 : 101);
    out.require(lo < 0.0, "constructed net has no sign flip");
    MonotonicityOptions mo;
    mo.budget = 2000;
    mo.seed = static_cast<std::uint64_t>(k);
    mo.fraction_samples = 0;
    const auto rep = certify_monotonic(net, {c}, BoxDomain::unit(dim), {}, mo);
    out.require(rep.overall_status != MonotonicityStatus::CertifiedMonotonic, "sign-flip net certified");
    if (rep.overall_status == MonotonicityStatus::ViolationsFound) ++refuted; else ++exhausted;
  }
  out.detail << "10 nets, " << refuted << " with violations, " << exhausted << " exhausted; ";
}

void reproducibility(Outcome& out) {
  for (const DemoConfig& cfg : {default_heat_demo(), default_tabular_demo()}) {
    const fs::path first = scratch(cfg.demo + "_run"), second = scratch(cfg.demo + "_replay");
    run_demo(cfg, first.string());
    replay_manifest((first / "manifest.json").string(), second.string());
    const auto manifest = nlohmann::json::parse(read_text_file((first / "manifest.json").string()));
    std::size_t compared = 0;
    for (const auto& [name, hash] : manifest["files"].items()) {
      out.require(read_text_file((second / name).string()) == read_text_file((first / name).string()),
                  cfg.demo + " " + name + " differs on replay");
      ++compared;
    }
    out.require(read_text_file((second / "manifest.json").string()) == read_text_file((first / "manifest.json").string()),
                cfg.demo + " manifest differs on replay");
    out.detail << cfg.demo << ": " << compared + 1 << " files identical; ";
    fs::remove_all(first);
    fs::remove_all(second);
  }
}

}  // namespace

int main() {
  run(1, "certification soundness", 300, soundness);
  run(2, "iteration budget and packing", 0, budget);
  run(3, "Lipschitz bound soundness", 180, lipschitz_soundness);
  run(4, "derivative exactness", 0, derivatives);
  run(5, "Voronoi correctness", 0, voronoi);
  run(6, "heat end-to-end", 600, heat);
  run(7, "tabular end-to-end", 900, tabular);
  run(8, "no false certification", 0, adversarial);
  run(9, "manifest reproducibility", 0, reproducibility);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
