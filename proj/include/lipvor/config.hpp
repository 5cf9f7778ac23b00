#pragma once

// Flat `key = value` files. Lines starting with '#' are comments; keys are
// unique; whitespace around keys and values is ignored.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "lipvor/training.hpp"

namespace lipvor {

class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in);
  static KeyValueConfig load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  void set(const std::string& key, double value);
  void set(const std::string& key, std::uint64_t value);

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  /// Throws MalformedConfig naming the first key not in `known`.
  void require_known(const std::set<std::string>& known) const;
  /// Sorted `key = value` lines.
  std::string canonical_text() const;

 private:
  std::map<std::string, std::string> values_;
};

/// Reads optimizer, learning_rate, weight_decay, max_epochs, patience,
/// lambda, epsilon, seed and penalty_gradient, keeping `base` for absent keys.
TrainingConfig training_config_from(const KeyValueConfig& cfg, TrainingConfig base = {});
void write_training_config(KeyValueConfig& cfg, const TrainingConfig& config);
const std::set<std::string>& training_config_keys();

std::string to_string(Optimizer o);
std::string to_string(PenaltyGradientMode m);

/// Semicolon-separated `r:inc:eps` entries.
std::vector<MonotonicityConstraint> parse_constraint_list(const std::string& text);
std::string format_constraint_list(const std::vector<MonotonicityConstraint>& constraints);

/// Comma-separated positive integers, e.g. "5,5".
std::vector<int> parse_int_list(const std::string& text);
std::string format_int_list(const std::vector<int>& values);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

}  // namespace lipvor
