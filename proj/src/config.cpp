#include "sstlab/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sstlab/error.hpp"

namespace sstlab {

namespace {

const char* kind_name(ConfigValue::Kind k) {
  switch (k) {
    case ConfigValue::Kind::kInt: return "integer";
    case ConfigValue::Kind::kFloat: return "float";
    case ConfigValue::Kind::kBool: return "boolean";
    case ConfigValue::Kind::kString: return "string";
    case ConfigValue::Kind::kArray: return "array";
  }
  return "?";
}

[[noreturn]] void type_error(const ConfigValue& v, const char* want) {
  throw ConfigError(v.line, std::string("expected ") + want + ", found " +
                                kind_name(v.kind));
}

class Parser {
 public:
  explicit Parser(std::string_view text) : t_(text) {}

  ConfigDocument run() {
    ConfigDocument doc;
    doc.tables[""].line = 1;
    ConfigTable* cur = &doc.tables[""];
    while (true) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        const int hdr_line = line_;
        bool array = false;
        ++pos_;
        if (peek() == '[') {
          array = true;
          ++pos_;
        }
        skip_ws();
        std::string name = parse_dotted_key();
        skip_ws();
        expect(']');
        if (array) expect(']');
        end_of_line();
        if (array) {
          auto& vec = doc.arrays[name];
          vec.emplace_back();
          cur = &vec.back();
        } else {
          if (doc.tables.count(name) || doc.arrays.count(name)) {
            throw ConfigError(hdr_line, "table [" + name + "] defined twice");
          }
          cur = &doc.tables[name];
        }
        cur->name = name;
        cur->line = hdr_line;
        continue;
      }
      const int key_line = line_;
      std::string key = parse_key();
      skip_ws();
      expect('=');
      skip_ws();
      ConfigValue v = parse_value();
      end_of_line();
      if (cur->has(key)) throw ConfigError(key_line, "duplicate key '" + key + "'");
      cur->set(key, std::move(v), key_line);
    }
    for (const auto& [name, vec] : doc.arrays) {
      if (doc.tables.count(name)) {
        throw ConfigError(vec.front().line, "[[" + name + "]] clashes with a table");
      }
    }
    return doc;
  }

 private:
  std::string_view t_;
  size_t pos_ = 0;
  int line_ = 1;

  bool eof() const { return pos_ >= t_.size(); }
  char peek() const { return eof() ? '\0' : t_[pos_]; }

  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(line_, msg); }

  void expect(char c) {
    if (peek() != c) {
      fail(std::string("expected '") + c + "'" +
           (eof() ? " before end of input" : std::string(", found '") + peek() + "'"));
    }
    ++pos_;
  }

  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) ++pos_;
  }

  void skip_comment() {
    if (peek() == '#') {
      while (!eof() && peek() != '\n') ++pos_;
    }
  }

  void skip_blank_lines() {
    while (true) {
      skip_ws();
      skip_comment();
      if (peek() == '\n') {
        ++pos_;
        ++line_;
        continue;
      }
      return;
    }
  }

  // Whitespace, comments and newlines inside arrays.
  void skip_array_space() { skip_blank_lines(); }

  void end_of_line() {
    skip_ws();
    skip_comment();
    if (eof()) return;
    if (peek() != '\n') fail(std::string("unexpected '") + peek() + "' after value");
    ++pos_;
    ++line_;
  }

  static bool key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  std::string parse_key() {
    if (peek() == '"') return parse_string();
    std::string k;
    while (key_char(peek())) k += t_[pos_++];
    if (k.empty()) {
      fail(eof() ? "expected a key" : std::string("unexpected '") + peek() + "'");
    }
    return k;
  }

  std::string parse_dotted_key() {
    std::string name = parse_key();
    skip_ws();
    while (peek() == '.') {
      ++pos_;
      skip_ws();
      name += "." + parse_key();
      skip_ws();
    }
    return name;
  }

  std::string parse_string() {
    expect('"');
    std::string s;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      char c = t_[pos_++];
      if (c == '"') break;
      if (c == '\\') {
        if (eof()) fail("unterminated string");
        char e = t_[pos_++];
        switch (e) {
          case 'n': s += '\n'; break;
          case 't': s += '\t'; break;
          case '"': s += '"'; break;
          case '\\': s += '\\'; break;
          default: fail(std::string("unknown escape \\") + e);
        }
        continue;
      }
      s += c;
    }
    return s;
  }

  ConfigValue parse_value() {
    ConfigValue v;
    v.line = line_;
    const char c = peek();
    if (c == '"') {
      v.kind = ConfigValue::Kind::kString;
      v.s = parse_string();
      return v;
    }
    if (c == '[') {
      ++pos_;
      v.kind = ConfigValue::Kind::kArray;
      skip_array_space();
      while (peek() != ']') {
        if (eof()) fail("unterminated array");
        v.items.push_back(parse_value());
        skip_array_space();
        if (peek() == ',') {
          ++pos_;
          skip_array_space();
        } else if (peek() != ']') {
          fail("expected ',' or ']' in array");
        }
      }
      ++pos_;
      return v;
    }
    std::string tok;
    while (!eof() && (key_char(peek()) || peek() == '.' || peek() == '+')) {
      tok += t_[pos_++];
    }
    if (tok.empty()) {
      fail(eof() || peek() == '\n' ? "expected a value" : std::string("unexpected '") + peek() + "'");
    }
    if (tok == "true" || tok == "false") {
      v.kind = ConfigValue::Kind::kBool;
      v.b = tok == "true";
      return v;
    }
    std::string clean;
    for (char ch : tok) {
      if (ch != '_') clean += ch;
    }
    if (clean == "inf" || clean == "+inf") {
      v.kind = ConfigValue::Kind::kFloat;
      v.f = kInf;
      return v;
    }
    const bool is_float = clean.find_first_of(".eE") != std::string::npos;
    const char* b = clean.data();
    const char* e = clean.data() + clean.size();
    if (*b == '+') ++b;
    if (is_float) {
      v.kind = ConfigValue::Kind::kFloat;
      auto r = std::from_chars(b, e, v.f);
      if (r.ec != std::errc() || r.ptr != e) fail("invalid number '" + tok + "'");
    } else {
      v.kind = ConfigValue::Kind::kInt;
      auto r = std::from_chars(b, e, v.i);
      if (r.ec != std::errc() || r.ptr != e) fail("invalid value '" + tok + "'");
    }
    return v;
  }
};

}  // namespace

double ConfigValue::number() const {
  if (kind == Kind::kInt) return static_cast<double>(i);
  if (kind == Kind::kFloat) return f;
  type_error(*this, "a number");
}

std::int64_t ConfigValue::integer() const {
  if (kind != Kind::kInt) type_error(*this, "an integer");
  return i;
}

const std::string& ConfigValue::string() const {
  if (kind != Kind::kString) type_error(*this, "a string");
  return s;
}

bool ConfigValue::boolean() const {
  if (kind != Kind::kBool) type_error(*this, "a boolean");
  return b;
}

const std::vector<ConfigValue>& ConfigValue::array() const {
  if (kind != Kind::kArray) type_error(*this, "an array");
  return items;
}

const ConfigValue& ConfigTable::at(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    throw ConfigError(line, "missing key '" + key + "'" +
                                (name.empty() ? "" : " in [" + name + "]"));
  }
  return it->second;
}

const ConfigValue* ConfigTable::find(const std::string& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

double ConfigTable::number_or(const std::string& key, double dflt) const {
  const ConfigValue* v = find(key);
  return v ? v->number() : dflt;
}

std::int64_t ConfigTable::integer_or(const std::string& key, std::int64_t dflt) const {
  const ConfigValue* v = find(key);
  return v ? v->integer() : dflt;
}

std::string ConfigTable::string_or(const std::string& key, const std::string& dflt) const {
  const ConfigValue* v = find(key);
  return v ? v->string() : dflt;
}

bool ConfigTable::boolean_or(const std::string& key, bool dflt) const {
  const ConfigValue* v = find(key);
  return v ? v->boolean() : dflt;
}

void ConfigTable::reject_unknown(const std::set<std::string>& allowed) const {
  for (const auto& [k, v] : entries_) {
    if (!allowed.count(k)) {
      throw ConfigError(v.line, "unknown key '" + k + "'" +
                                    (name.empty() ? "" : " in [" + name + "]"));
    }
  }
}

void ConfigTable::set(const std::string& key, ConfigValue v, int line_no) {
  v.line = line_no;
  entries_[key] = std::move(v);
}

const ConfigTable* ConfigDocument::table(const std::string& name) const {
  auto it = tables.find(name);
  return it == tables.end() ? nullptr : &it->second;
}

ConfigDocument parse_config(std::string_view text) { return Parser(text).run(); }

namespace {

double positive(const ConfigTable& t, const std::string& key) {
  const ConfigValue& v = t.at(key);
  const double x = v.number();
  if (!(x > 0) || !std::isfinite(x)) throw ConfigError(v.line, "'" + key + "' must be positive");
  return x;
}

const std::set<std::string> kHalfLineKeys = {"family", "base", "ratio", "out_scale",
                                             "out_growth", "in_scale", "in_growth"};

// Parametric half-line families shared by [rates], [rates.left] and rays.
std::pair<HalfLineRates, BDRates::Family> parse_half_line(const ConfigTable& t) {
  const ConfigValue& fam = t.at("family");
  const std::string& f = fam.string();
  if (f == "exponential") {
    return {HalfLineRates::exponential(positive(t, "base")), BDRates::Family::kExponential};
  }
  if (f == "geometric") {
    return {HalfLineRates::geometric(positive(t, "base"), positive(t, "ratio")),
            BDRates::Family::kGeometric};
  }
  if (f == "power") {
    return {HalfLineRates::power(positive(t, "out_scale"), positive(t, "out_growth"),
                                 positive(t, "in_scale"), positive(t, "in_growth")),
            BDRates::Family::kPower};
  }
  throw ConfigError(fam.line, "unknown family '" + f + "'");
}

void check_family_keys(const ConfigTable& t, std::set<std::string> extra) {
  const std::string f = t.string_or("family", "");
  std::set<std::string> allowed = std::move(extra);
  allowed.insert("family");
  if (f == "exponential") allowed.insert("base");
  if (f == "geometric") allowed.insert({"base", "ratio"});
  if (f == "power") allowed.insert({"out_scale", "out_growth", "in_scale", "in_growth"});
  if (f == "table") allowed.insert({"lo", "births", "deaths"});
  t.reject_unknown(allowed);
}

std::vector<double> positive_array(const ConfigTable& t, const std::string& key) {
  std::vector<double> out;
  for (const ConfigValue& v : t.at(key).array()) {
    const double x = v.number();
    if (!(x > 0) || !std::isfinite(x)) throw ConfigError(v.line, "rates must be positive");
    out.push_back(x);
  }
  return out;
}

BDRates parse_rates(const ConfigDocument& doc, const ConfigTable& t) {
  check_family_keys(t, {"support", "mirror"});
  const std::string support = t.string_or("support", "line");
  if (support != "line" && support != "half-line") {
    throw ConfigError(t.at("support").line, "support must be \"line\" or \"half-line\"");
  }
  if (t.string_or("family", "") == "table") {
    if (t.has("support") || t.has("mirror") || doc.table("rates.left")) {
      throw ConfigError(t.line, "table family takes only lo, births and deaths");
    }
    std::vector<double> births = positive_array(t, "births");
    std::vector<double> deaths = positive_array(t, "deaths");
    if (births.size() != deaths.size()) {
      throw ConfigError(t.at("deaths").line, "births and deaths must have equal length");
    }
    return BDRates::table(t.at("lo").integer(), std::move(births), std::move(deaths));
  }
  auto [right, family] = parse_half_line(t);
  if (support == "half-line") {
    if (doc.table("rates.left")) {
      throw ConfigError(doc.table("rates.left")->line, "half-line support has no left side");
    }
    return BDRates::half_line(right, family);
  }
  if (const ConfigTable* lt = doc.table("rates.left")) {
    if (t.boolean_or("mirror", false)) {
      throw ConfigError(t.at("mirror").line, "mirror = true conflicts with [rates.left]");
    }
    check_family_keys(*lt, {});
    auto [left, lf] = parse_half_line(*lt);
    return BDRates::line(right, left, lf == family ? family : BDRates::Family::kPower);
  }
  if (!t.boolean_or("mirror", true)) {
    throw ConfigError(t.line, "mirror = false needs a [rates.left] table");
  }
  return BDRates::symmetric(right, family);
}

int vertex_index(const std::map<std::string, int>& ids, const ConfigValue& v) {
  auto it = ids.find(v.string());
  if (it == ids.end()) throw ConfigError(v.line, "unknown vertex '" + v.s + "'");
  return it->second;
}

GraphModel parse_graph(const ConfigDocument& doc, const ConfigTable& t) {
  t.reject_unknown({"vertices", "edges"});
  RawGraph raw;
  std::map<std::string, int> ids;
  for (const ConfigValue& v : t.at("vertices").array()) {
    if (!ids.emplace(v.string(), static_cast<int>(raw.names.size())).second) {
      throw ConfigError(v.line, "duplicate vertex '" + v.s + "'");
    }
    raw.names.push_back(v.s);
  }
  if (const ConfigValue* edges = t.find("edges")) {
    for (const ConfigValue& e : edges->array()) {
      const auto& f = e.array();
      if (f.size() != 4) {
        throw ConfigError(e.line, "edge must be [u, v, rate_uv, rate_vu]");
      }
      RawEdge re{vertex_index(ids, f[0]), vertex_index(ids, f[1]), f[2].number(),
                 f[3].number()};
      if (!(re.rate_uv > 0) || !(re.rate_vu > 0)) {
        throw ConfigError(e.line, "edge rates must be positive");
      }
      raw.edges.push_back(re);
    }
  }
  auto it = doc.arrays.find("graph.ray");
  if (it == doc.arrays.end()) throw ConfigError(t.line, "graph needs [[graph.ray]] entries");
  for (const ConfigTable& r : it->second) {
    check_family_keys(r, {"attach", "attach_out", "attach_in"});
    RawRay ray;
    ray.attach = vertex_index(ids, r.at("attach"));
    ray.attach_out = positive(r, "attach_out");
    ray.attach_in = positive(r, "attach_in");
    ray.rates = parse_half_line(r).first;
    raw.rays.push_back(std::move(ray));
  }
  try {
    return compute_center(raw);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kEmptyCenter) throw;
    throw ConfigError(t.line, e.what());
  }
}

ExperimentSettings parse_experiment(const ConfigTable& t) {
  t.reject_unknown({"trials", "horizon", "window", "seed", "t_grid", "bound_threshold",
                    "tail_time_budget", "jump_budget"});
  ExperimentSettings e;
  auto pos_int = [&](const char* key) -> std::optional<std::int64_t> {
    const ConfigValue* v = t.find(key);
    if (!v) return std::nullopt;
    if (v->integer() <= 0) throw ConfigError(v->line, std::string("'") + key + "' must be positive");
    return v->integer();
  };
  auto pos_num = [&](const char* key) -> std::optional<double> {
    if (!t.has(key)) return std::nullopt;
    return positive(t, key);
  };
  e.trials = pos_int("trials");
  e.window = pos_int("window");
  e.bound_threshold = pos_int("bound_threshold");
  e.jump_budget = pos_int("jump_budget");
  e.horizon = pos_num("horizon");
  e.tail_time_budget = pos_num("tail_time_budget");
  if (const ConfigValue* v = t.find("seed")) {
    if (v->integer() < 0) throw ConfigError(v->line, "'seed' must be nonnegative");
    e.seed = static_cast<std::uint64_t>(v->integer());
  }
  if (const ConfigValue* v = t.find("t_grid")) {
    std::vector<double> g;
    for (const ConfigValue& x : v->array()) {
      if (!(x.number() > 0)) throw ConfigError(x.line, "t_grid entries must be positive");
      g.push_back(x.number());
    }
    e.t_grid = g;
  }
  return e;
}

}  // namespace

ModelSpec parse_model(std::string_view text) {
  ConfigDocument doc = parse_config(text);
  const std::set<std::string> known = {"", "rates", "rates.left", "graph", "experiment"};
  for (const auto& [name, t] : doc.tables) {
    if (!known.count(name)) throw ConfigError(t.line, "unknown table [" + name + "]");
  }
  for (const auto& [name, v] : doc.arrays) {
    if (name != "graph.ray") throw ConfigError(v.front().line, "unknown table [[" + name + "]]");
  }
  doc.tables.at("").reject_unknown({});
  const ConfigTable* rates = doc.table("rates");
  const ConfigTable* graph = doc.table("graph");
  if ((rates != nullptr) == (graph != nullptr)) {
    throw ConfigError(rates ? graph->line : 1, "exactly one of [rates] or [graph] is required");
  }
  if (!graph && doc.arrays.count("graph.ray")) {
    throw ConfigError(doc.arrays.at("graph.ray").front().line, "[[graph.ray]] without [graph]");
  }
  if (!rates && doc.table("rates.left")) {
    throw ConfigError(doc.table("rates.left")->line, "[rates.left] without [rates]");
  }
  ModelSpec spec;
  if (rates) {
    spec.kind = ModelSpec::Kind::kLine;
    spec.rates = parse_rates(doc, *rates);
  } else {
    spec.kind = ModelSpec::Kind::kGraph;
    spec.graph = parse_graph(doc, *graph);
  }
  if (const ConfigTable* e = doc.table("experiment")) spec.experiment = parse_experiment(*e);
  return spec;
}

ModelSpec load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "cannot open model file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

}  // namespace sstlab
