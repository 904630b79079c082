#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sstlab/graph_model.hpp"
#include "sstlab/rates.hpp"

namespace sstlab {

// Values of the TOML subset accepted in model files: integers, floats,
// booleans, basic strings and (nested, possibly multi-line) arrays.
struct ConfigValue {
  enum class Kind { kInt, kFloat, kBool, kString, kArray };
  Kind kind = Kind::kInt;
  std::int64_t i = 0;
  double f = 0;
  bool b = false;
  std::string s;
  std::vector<ConfigValue> items;
  int line = 0;

  bool is_number() const { return kind == Kind::kInt || kind == Kind::kFloat; }
  double number() const;                 // throws ConfigError
  std::int64_t integer() const;          // throws ConfigError
  const std::string& string() const;     // throws ConfigError
  bool boolean() const;                  // throws ConfigError
  const std::vector<ConfigValue>& array() const;
};

class ConfigTable {
 public:
  std::string name;
  int line = 0;

  bool has(const std::string& key) const { return entries_.count(key) > 0; }
  const ConfigValue& at(const std::string& key) const;  // throws on missing
  const ConfigValue* find(const std::string& key) const;
  double number(const std::string& key) const { return at(key).number(); }
  double number_or(const std::string& key, double dflt) const;
  std::int64_t integer_or(const std::string& key, std::int64_t dflt) const;
  std::string string_or(const std::string& key, const std::string& dflt) const;
  bool boolean_or(const std::string& key, bool dflt) const;
  // Throws ConfigError for keys not in `allowed`, citing their line.
  void reject_unknown(const std::set<std::string>& allowed) const;

  void set(const std::string& key, ConfigValue v, int line);
  const std::map<std::string, ConfigValue>& entries() const { return entries_; }

 private:
  std::map<std::string, ConfigValue> entries_;
};

struct ConfigDocument {
  std::map<std::string, ConfigTable> tables;               // "" is the root
  std::map<std::string, std::vector<ConfigTable>> arrays;  // [[name]] tables

  const ConfigTable* table(const std::string& name) const;
};

ConfigDocument parse_config(std::string_view text);

struct ExperimentSettings {
  std::optional<std::int64_t> trials;
  std::optional<double> horizon;
  std::optional<std::int64_t> window;
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<double>> t_grid;
  std::optional<std::int64_t> bound_threshold;
  std::optional<double> tail_time_budget;
  std::optional<std::int64_t> jump_budget;
};

struct ModelSpec {
  enum class Kind { kLine, kGraph };
  Kind kind = Kind::kLine;
  std::optional<BDRates> rates;
  std::optional<GraphModel> graph;
  ExperimentSettings experiment;
};

ModelSpec parse_model(std::string_view text);
ModelSpec load_model(const std::string& path);  // throws ConfigError

}  // namespace sstlab
