#include "lipvor/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "lipvor/error.hpp"

namespace lipvor {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* what) {
  throw Error(ErrorCode::MalformedConfig, "key '" + key + "': '" + value + "' is not " + what);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
  KeyValueConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::MalformedConfig, "line " + std::to_string(line_no) + " has no '='");
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw Error(ErrorCode::MalformedConfig, "line " + std::to_string(line_no) + " has an empty key");
    if (cfg.has(key)) throw Error(ErrorCode::MalformedConfig, "duplicate key '" + key + "'");
    cfg.values_[key] = trim(t.substr(eq + 1));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  return parse(in);
}

void KeyValueConfig::set(const std::string& key, double value) { values_[key] = format_double(value); }
void KeyValueConfig::set(const std::string& key, std::uint64_t value) { values_[key] = std::to_string(value); }

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& s = it->second;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    bad_value(key, s, "a finite number");
  return v;
}

std::uint64_t KeyValueConfig::get_uint(const std::string& key, std::uint64_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& s = it->second;
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) bad_value(key, s, "a non-negative integer");
  return v;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  bad_value(key, it->second, "true or false");
}

void KeyValueConfig::require_known(const std::set<std::string>& known) const {
  for (const auto& [k, v] : values_)
    if (!known.count(k)) throw Error(ErrorCode::MalformedConfig, "unknown key '" + k + "'");
}

std::string KeyValueConfig::canonical_text() const {
  std::ostringstream out;
  for (const auto& [k, v] : values_) out << k << " = " << v << '\n';
  return out.str();
}

std::string to_string(Optimizer o) { return o == Optimizer::Adam ? "adam" : "sgd"; }
std::string to_string(PenaltyGradientMode m) {
  return m == PenaltyGradientMode::Analytic ? "analytic" : "finite-difference";
}

const std::set<std::string>& training_config_keys() {
  static const std::set<std::string> keys{"optimizer", "learning_rate", "weight_decay", "max_epochs", "patience",
                                          "lambda",    "epsilon",       "seed",         "penalty_gradient"};
  return keys;
}

TrainingConfig training_config_from(const KeyValueConfig& cfg, TrainingConfig c) {
  const std::string opt = cfg.get_string("optimizer", to_string(c.optimizer));
  if (opt == "adam") {
    c.optimizer = Optimizer::Adam;
  } else if (opt == "sgd") {
    c.optimizer = Optimizer::Sgd;
  } else {
    bad_value("optimizer", opt, "adam or sgd");
  }
  c.learning_rate = cfg.get_double("learning_rate", c.learning_rate);
  c.weight_decay = cfg.get_double("weight_decay", c.weight_decay);
  c.max_epochs = cfg.get_uint("max_epochs", c.max_epochs);
  c.patience = cfg.get_uint("patience", c.patience);
  c.lambda = cfg.get_double("lambda", c.lambda);
  c.epsilon = cfg.get_double("epsilon", c.epsilon);
  c.seed = cfg.get_uint("seed", c.seed);
  const std::string mode = cfg.get_string("penalty_gradient", to_string(c.penalty_gradient_mode));
  if (mode == "analytic") {
    c.penalty_gradient_mode = PenaltyGradientMode::Analytic;
  } else if (mode == "finite-difference") {
    c.penalty_gradient_mode = PenaltyGradientMode::FiniteDifference;
  } else {
    bad_value("penalty_gradient", mode, "analytic or finite-difference");
  }
  try {
    validate_config(c);
  } catch (const Error& e) {
    throw Error(ErrorCode::MalformedConfig, e.what());
  }
  return c;
}

void write_training_config(KeyValueConfig& cfg, const TrainingConfig& c) {
  cfg.set("optimizer", to_string(c.optimizer));
  cfg.set("learning_rate", c.learning_rate);
  cfg.set("weight_decay", c.weight_decay);
  cfg.set("max_epochs", static_cast<std::uint64_t>(c.max_epochs));
  cfg.set("patience", static_cast<std::uint64_t>(c.patience));
  cfg.set("lambda", c.lambda);
  cfg.set("epsilon", c.epsilon);
  cfg.set("seed", c.seed);
  cfg.set("penalty_gradient", to_string(c.penalty_gradient_mode));
}

std::vector<MonotonicityConstraint> parse_constraint_list(const std::string& text) {
  std::vector<MonotonicityConstraint> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_constraint(item));
  }
  return out;
}

std::string format_constraint_list(const std::vector<MonotonicityConstraint>& constraints) {
  std::string out;
  for (const auto& c : constraints) {
    if (!out.empty()) out += ';';
    out += std::to_string(c.feature) + ':' + (c.direction == Direction::Increasing ? "inc" : "dec") + ':' +
           format_double(c.epsilon);
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size() || v <= 0)
      throw Error(ErrorCode::MalformedConfig, "'" + text + "' is not a list of positive integers");
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorCode::MalformedConfig, "empty integer list");
  return out;
}

std::string format_int_list(const std::vector<int>& values) {
  std::string out;
  for (int v : values) {
    if (!out.empty()) out += ',';
    out += std::to_string(v);
  }
  return out;
}

}  // namespace lipvor
