#include "lipvor/report.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "lipvor/config.hpp"
#include "lipvor/error.hpp"

namespace lipvor {

using nlohmann::json;

json point_json(const Point& p) { return std::vector<double>(p.data(), p.data() + p.size()); }

json to_json(const CertificationResult& r) {
  json ces = json::array();
  for (const auto& c : r.counterexamples) ces.push_back({{"point", point_json(c.point)}, {"value", c.value}});
  const auto& st = r.points_final;
  std::size_t covered = 0;
  for (std::size_t j = 0; j < st.size(); ++j)
    if (!st.violation_flags[j] && st.covered(j)) ++covered;
  return {{"status", to_string(r.status)},
          {"iterations_used", r.iterations_used},
          {"points_final", st.size()},
          {"covered_cells", covered},
          {"counterexamples", ces},
          {"certified_fraction", r.certified_fraction},
          {"rng_seed", r.rng_seed}};
}

json to_json(const LipschitzEstimate& e) {
  return {{"feature", e.feature},
          {"bound", e.bound},
          {"per_layer_partials", e.per_layer_partials},
          {"layer_norms", e.layer_norms},
          {"row_norm", e.row_norm},
          {"activation_bounds", e.activation_bounds}};
}

json to_json(const MonotonicityReport& r) {
  json per = json::object();
  for (const auto& [f, res] : r.per_feature) per[std::to_string(f)] = to_json(res);
  json cons = json::array();
  for (const auto& c : r.constraints)
    cons.push_back({{"feature", c.feature}, {"direction", to_string(c.direction)}, {"epsilon", c.epsilon}});
  json lips = json::array();
  for (const auto& e : r.lipschitz_estimates) lips.push_back(to_json(e));
  return {{"overall_status", to_string(r.overall_status)},
          {"joint", r.joint},
          {"iterations_used", r.iterations_used},
          {"constraints", cons},
          {"lipschitz_estimates", lips},
          {"per_feature", per}};
}

namespace {
json metrics_json(const SplitMetrics& m) { return {{"mse", m.mse}, {"mae", m.mae}, {"r2", m.r2}}; }
}  // namespace

json to_json(const TrainingReport& r) {
  return {{"epochs_run", r.epochs_run},
          {"best_epoch", r.best_epoch},
          {"eligible_checkpoint", r.eligible_checkpoint},
          {"early_stop_reason", r.early_stop_reason},
          {"final_train_penalty", r.final_train_penalty},
          {"metrics",
           {{"train", metrics_json(r.train)}, {"validation", metrics_json(r.validation)}, {"test", metrics_json(r.test)}}}};
}

json to_json(const RoundLog& r) {
  json j = {{"round", r.round},
            {"trained", r.trained},
            {"finetuned", r.finetuned},
            {"counterexamples_used", r.counterexamples_used},
            {"status", to_string(r.status)},
            {"lipvor_iterations", r.lipvor_iterations},
            {"new_counterexamples", r.new_counterexamples},
            {"lipschitz_bounds", r.lipschitz_bounds},
            {"certified_fraction", r.certified_fraction}};
  if (r.trained || r.finetuned) j["training"] = to_json(r.training);
  return j;
}

json report_envelope(std::string_view kind, json body) {
  json j = {{"schema_version", kSchemaVersion}, {"kind", std::string(kind)}};
  for (auto& [k, v] : body.items()) j[k] = v;
  return j;
}

void write_training_csv(std::ostream& out, const TrainingReport& r) {
  out << "epoch,base_loss,penalty,total,val_base,val_penalty,val_total\n";
  for (const auto& e : r.history)
    out << e.epoch << ',' << format_double(e.base_loss) << ',' << format_double(e.penalty) << ','
        << format_double(e.total) << ',' << format_double(e.val_base) << ',' << format_double(e.val_penalty) << ','
        << format_double(e.val_total) << '\n';
}

void write_points_csv(std::ostream& out, const CertificationState& st) {
  const Eigen::Index n = st.points.empty() ? 0 : st.points[0].size();
  out << "index";
  for (Eigen::Index i = 0; i < n; ++i) out << ",x" << i;
  out << ",value,radius,violating,covered\n";
  for (std::size_t j = 0; j < st.size(); ++j) {
    out << j;
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << format_double(st.points[j][i]);
    out << ',' << format_double(st.values[j]) << ',' << format_double(st.radii[j]) << ','
        << (st.violation_flags[j] ? 1 : 0) << ',' << (st.covered(j) ? 1 : 0) << '\n';
  }
}

void write_cells_csv(std::ostream& out, const CertificationState& st) {
  const Eigen::Index n = st.points.empty() ? 0 : st.points[0].size();
  out << "generator_index,vertex_index";
  for (Eigen::Index i = 0; i < n; ++i) out << ",x" << i;
  out << '\n';
  for (const auto& cell : st.cells)
    for (std::size_t v = 0; v < cell.vertices.size(); ++v) {
      out << cell.generator_index << ',' << v;
      for (Eigen::Index i = 0; i < n; ++i) out << ',' << format_double(cell.vertices[v][i]);
      out << '\n';
    }
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << v;
  return out.str();
}

void write_text_file(const std::string& path, const std::string& contents) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path);
  out << contents;
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

}  // namespace lipvor
