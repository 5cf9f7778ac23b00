#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lipvor/training.hpp"

namespace lipvor {

/// Per-column affine map onto [0, 1].
struct MinMaxScaler {
  Eigen::VectorXd min, max;

  static MinMaxScaler fit(const Eigen::MatrixXd& columns);
  Eigen::MatrixXd scale(const Eigen::MatrixXd& rows) const;
  Eigen::MatrixXd unscale(const Eigen::MatrixXd& rows) const;
};

struct TabularData {
  Dataset data;
  std::vector<std::string> feature_names;
  std::string target_name;
  MinMaxScaler input_scaler;
  /// Targets are scaled with the last column's range.
  double target_min = 0.0, target_max = 1.0;

  double unscale_target(double y) const { return target_min + y * (target_max - target_min); }
};

/// Header row, comma separated, double quotes allowed; returns header and rows.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvTable read_csv(std::istream& in);

/// Scales every column to [0, 1] and splits 25% test, then 25% of the rest
/// for validation. `monotone_features` is only range-checked.
TabularData parse_tabular(std::istream& in, std::span<const std::size_t> monotone_features, std::uint64_t split_seed);
TabularData load_tabular(const std::string& path, std::span<const std::size_t> monotone_features,
                         std::uint64_t split_seed);

/// Four integer scores in 1..9 drawn uniformly, target round(mean score).
void write_esl_like_csv(std::ostream& out, std::size_t rows, std::uint64_t seed);

}  // namespace lipvor
