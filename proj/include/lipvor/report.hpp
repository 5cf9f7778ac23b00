#pragma once

// JSON and CSV artifacts. Nothing time- or host-dependent is written so that
// reruns are byte-identical.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "lipvor/certify.hpp"
#include "lipvor/monotonicity.hpp"
#include "lipvor/training.hpp"

namespace lipvor {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::string_view kVersion = "0.1.0";

nlohmann::json point_json(const Point& p);

/// Verdict, counter-examples and summary counts (no per-point state).
nlohmann::json to_json(const CertificationResult& result);
nlohmann::json to_json(const LipschitzEstimate& estimate);
nlohmann::json to_json(const MonotonicityReport& report);
/// Summary and final metrics; the epoch history goes to CSV.
nlohmann::json to_json(const TrainingReport& report);
nlohmann::json to_json(const RoundLog& round);

/// Top-level report object: {schema_version, kind, ...body}.
nlohmann::json report_envelope(std::string_view kind, nlohmann::json body);

/// epoch,base_loss,penalty,total,val_base,val_penalty,val_total
void write_training_csv(std::ostream& out, const TrainingReport& report);
/// index,x0..,value,radius,violating,covered
void write_points_csv(std::ostream& out, const CertificationState& state);
/// generator_index,vertex_index,x0..
void write_cells_csv(std::ostream& out, const CertificationState& state);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

/// Writes `contents` to `path`, creating parent directories.
void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);
std::string dump_json(const nlohmann::json& j);

}  // namespace lipvor
