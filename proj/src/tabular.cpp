#include "lipvor/tabular.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>

#include "lipvor/error.hpp"

namespace lipvor {

MinMaxScaler MinMaxScaler::fit(const Eigen::MatrixXd& columns) {
  MinMaxScaler s;
  s.min = columns.colwise().minCoeff().transpose();
  s.max = columns.colwise().maxCoeff().transpose();
  for (Eigen::Index j = 0; j < s.min.size(); ++j)
    if (!(s.max[j] > s.min[j]))
      throw Error(ErrorCode::ConstantColumn, "column " + std::to_string(j) + " is constant");
  return s;
}

Eigen::MatrixXd MinMaxScaler::scale(const Eigen::MatrixXd& rows) const {
  if (rows.cols() != min.size()) throw Error(ErrorCode::DimensionMismatch, "column count differs from the scaler");
  const Eigen::RowVectorXd lo = min.transpose(), span = (max - min).transpose();
  return (rows.rowwise() - lo).array().rowwise() / span.array();
}

Eigen::MatrixXd MinMaxScaler::unscale(const Eigen::MatrixXd& rows) const {
  if (rows.cols() != min.size()) throw Error(ErrorCode::DimensionMismatch, "column count differs from the scaler");
  const Eigen::RowVectorXd lo = min.transpose(), span = (max - min).transpose();
  return (rows.array().rowwise() * span.array()).matrix().rowwise() + lo;
}

namespace {

std::vector<std::string> split_record(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false, was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      if (!cur.empty() || was_quoted)
        throw Error(ErrorCode::MalformedCSV, "stray quote on line " + std::to_string(line_no));
      quoted = was_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
      was_quoted = false;
    } else {
      if (was_quoted) throw Error(ErrorCode::MalformedCSV, "text after closing quote on line " + std::to_string(line_no));
      cur += c;
    }
  }
  if (quoted) throw Error(ErrorCode::MalformedCSV, "unterminated quote on line " + std::to_string(line_no));
  fields.push_back(std::move(cur));
  return fields;
}

double parse_number(std::string_view text, std::size_t line_no) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
    throw Error(ErrorCode::NonNumeric, "non-numeric field '" + std::string(text) + "' on line " + std::to_string(line_no));
  return v;
}

}  // namespace

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_record(line, line_no);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size())
      throw Error(ErrorCode::MalformedCSV, "line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                                               " fields, header has " + std::to_string(t.header.size()));
    t.rows.push_back(std::move(fields));
  }
  if (t.header.empty()) throw Error(ErrorCode::MalformedCSV, "missing header row");
  return t;
}

TabularData parse_tabular(std::istream& in, std::span<const std::size_t> monotone_features, std::uint64_t split_seed) {
  const CsvTable t = read_csv(in);
  if (t.header.size() < 2) throw Error(ErrorCode::MalformedCSV, "need at least one feature and a target column");
  if (t.rows.size() < 2) throw Error(ErrorCode::MalformedCSV, "need at least two data rows");
  const std::size_t n_feat = t.header.size() - 1;
  for (std::size_t f : monotone_features)
    if (f >= n_feat) throw Error(ErrorCode::IndexOutOfRange, "monotone feature " + std::to_string(f) + " out of range");

  Eigen::MatrixXd raw(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(t.header.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    for (std::size_t j = 0; j < t.header.size(); ++j)
      raw(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = parse_number(t.rows[i][j], i + 2);

  const MinMaxScaler all = MinMaxScaler::fit(raw);
  TabularData out;
  out.feature_names.assign(t.header.begin(), t.header.end() - 1);
  out.target_name = t.header.back();
  out.input_scaler.min = all.min.head(static_cast<Eigen::Index>(n_feat));
  out.input_scaler.max = all.max.head(static_cast<Eigen::Index>(n_feat));
  out.target_min = all.min[static_cast<Eigen::Index>(n_feat)];
  out.target_max = all.max[static_cast<Eigen::Index>(n_feat)];
  const Eigen::MatrixXd scaled = all.scale(raw);
  out.data.inputs = scaled.leftCols(static_cast<Eigen::Index>(n_feat));
  out.data.targets = scaled.col(static_cast<Eigen::Index>(n_feat));
  std::mt19937_64 rng(split_seed);
  assign_splits(out.data, 0.25, 0.25, rng);
  return out;
}

TabularData load_tabular(const std::string& path, std::span<const std::size_t> monotone_features,
                         std::uint64_t split_seed) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  return parse_tabular(in, monotone_features, split_seed);
}

void write_esl_like_csv(std::ostream& out, std::size_t rows, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> score(1, 9);
  out << "in1,in2,in3,in4,out\n";
  for (std::size_t i = 0; i < rows; ++i) {
    int s[4];
    for (int& v : s) v = score(rng);
    const double mean = (s[0] + s[1] + s[2] + s[3]) / 4.0;
    out << s[0] << ',' << s[1] << ',' << s[2] << ',' << s[3] << ',' << static_cast<int>(std::lround(mean)) << '\n';
  }
}

}  // namespace lipvor
