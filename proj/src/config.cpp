#include "fbmlab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include "fbmlab/construct_fbm.hpp"
#include "fbmlab/errors.hpp"
#include "fbmlab/io.hpp"

namespace fbmlab::config {

using nlohmann::json;

namespace {

class TomlParser {
 public:
  explicit TomlParser(std::string_view s) : s_(s) {}

  json parse() {
    json root = json::object();
    json* table = &root;
    while (true) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        ++pos_;
        if (peek() == '[') fail("arrays of tables are not supported");
        skip_ws();
        auto keys = key_path();
        skip_ws();
        expect(']');
        end_of_line();
        table = &root;
        for (const auto& k : keys) {
          json& next = (*table)[k];
          if (next.is_null()) next = json::object();
          if (!next.is_object()) fail("'" + k + "' is not a table");
          table = &next;
        }
        if (!defined_tables_.insert(join(keys)).second) fail("table [" + join(keys) + "] defined twice");
        continue;
      }
      assign(*table);
      end_of_line();
    }
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("config line " + std::to_string(line_) + ": " + msg);
  }
  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return eof() ? '\0' : s_[pos_]; }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) ++pos_;
  }
  void skip_comment() {
    if (peek() == '#')
      while (!eof() && peek() != '\n') ++pos_;
  }
  // whitespace, comments and newlines (inside arrays and between statements)
  void skip_blank_lines() {
    while (true) {
      skip_ws();
      skip_comment();
      if (peek() == '\n') {
        ++pos_;
        ++line_;
        continue;
      }
      break;
    }
  }
  void end_of_line() {
    skip_ws();
    skip_comment();
    if (eof()) return;
    if (peek() != '\n') fail("unexpected text after value");
    ++pos_;
    ++line_;
  }
  static std::string join(const std::vector<std::string>& keys) {
    std::string out;
    for (const auto& k : keys) out += (out.empty() ? "" : ".") + k;
    return out;
  }

  std::string bare_or_quoted_key() {
    if (peek() == '"') return basic_string();
    if (peek() == '\'') return literal_string();
    std::string k;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-'))
      k.push_back(s_[pos_++]);
    if (k.empty()) fail("expected a key");
    return k;
  }
  std::vector<std::string> key_path() {
    std::vector<std::string> keys{bare_or_quoted_key()};
    skip_ws();
    while (peek() == '.') {
      ++pos_;
      skip_ws();
      keys.push_back(bare_or_quoted_key());
      skip_ws();
    }
    return keys;
  }

  void assign(json& table) {
    auto keys = key_path();
    skip_ws();
    expect('=');
    skip_ws();
    json* t = &table;
    for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
      json& next = (*t)[keys[i]];
      if (next.is_null()) next = json::object();
      if (!next.is_object()) fail("'" + keys[i] + "' is not a table");
      t = &next;
    }
    if (t->contains(keys.back())) fail("duplicate key '" + keys.back() + "'");
    (*t)[keys.back()] = value();
  }

  json value() {
    const char c = peek();
    if (c == '"') return basic_string();
    if (c == '\'') return literal_string();
    if (c == '[') return array();
    if (c == '{') return inline_table();
    if (s_.substr(pos_, 4) == "true") {
      pos_ += 4;
      return true;
    }
    if (s_.substr(pos_, 5) == "false") {
      pos_ += 5;
      return false;
    }
    return number();
  }

  std::string basic_string() {
    expect('"');
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      char c = s_[pos_++];
      if (c == '"') break;
      if (c == '\\') {
        if (eof()) fail("unterminated string");
        char e = s_[pos_++];
        switch (e) {
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          case 'r': out.push_back('\r'); break;
          case '"': out.push_back('"'); break;
          case '\\': out.push_back('\\'); break;
          default: fail(std::string("unsupported escape \\") + e);
        }
        continue;
      }
      out.push_back(c);
    }
    return out;
  }

  std::string literal_string() {
    expect('\'');
    std::string out;
    while (peek() != '\'') {
      if (eof() || peek() == '\n') fail("unterminated string");
      out.push_back(s_[pos_++]);
    }
    ++pos_;
    return out;
  }

  json array() {
    expect('[');
    json a = json::array();
    while (true) {
      skip_blank_lines();
      if (peek() == ']') {
        ++pos_;
        return a;
      }
      a.push_back(value());
      skip_blank_lines();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      skip_blank_lines();
      expect(']');
      return a;
    }
  }

  json inline_table() {
    expect('{');
    json t = json::object();
    skip_ws();
    if (peek() == '}') {
      ++pos_;
      return t;
    }
    while (true) {
      skip_ws();
      assign(t);
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      expect('}');
      return t;
    }
  }

  json number() {
    std::string tok;
    while (!eof() && std::string_view("+-0123456789._eEinfa").find(peek()) != std::string_view::npos)
      tok.push_back(s_[pos_++]);
    if (tok.empty()) fail("expected a value");
    std::string clean;
    for (std::size_t i = 0; i < tok.size(); ++i) {
      if (tok[i] == '_') {
        if (i == 0 || i + 1 == tok.size() || !std::isdigit(static_cast<unsigned char>(tok[i - 1])) ||
            !std::isdigit(static_cast<unsigned char>(tok[i + 1])))
          fail("misplaced underscore in '" + tok + "'");
        continue;
      }
      clean.push_back(tok[i]);
    }
    std::string body = clean;
    const bool neg = !body.empty() && body[0] == '-';
    if (!body.empty() && (body[0] == '+' || body[0] == '-')) body.erase(0, 1);
    if (body == "inf") return neg ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    if (body == "nan") return std::numeric_limits<double>::quiet_NaN();
    const bool is_float = body.find_first_of(".eE") != std::string::npos;
    const char* b = clean.data() + (clean[0] == '+' ? 1 : 0);
    const char* e = clean.data() + clean.size();
    if (!is_float) {
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(b, e, v);
      if (ec != std::errc() || p != e) fail("bad integer '" + tok + "'");
      return v;
    }
    double v = 0;
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) fail("bad number '" + tok + "'");
    return v;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::set<std::string> defined_tables_;
};

const char* type_of(const json& v) {
  if (v.is_boolean()) return "boolean";
  if (v.is_number_integer()) return "integer";
  if (v.is_number()) return "number";
  if (v.is_string()) return "string";
  if (v.is_array()) return "array";
  if (v.is_object()) return "object";
  return "null";
}

bool type_ok(const json& v, const std::string& t) {
  if (t == "number") return v.is_number();
  if (t == "integer") return v.is_number_integer();
  return t == type_of(v);
}

}  // namespace

json parse_toml(std::string_view text) { return TomlParser(text).parse(); }

json load_file(const std::filesystem::path& file) { return parse_toml(io::read_text(file)); }

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string config_hash(const json& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(cfg.dump())));
  return buf;
}

const json& schema() {
  static const json s = [] {
    json suite = {{"type", "object"}};
    json pos_int = {{"type", "integer"}, {"minimum", 0}};
    return json{
        {"type", "object"},
        {"required", {"seed"}},
        {"additionalProperties", false},
        {"properties",
         {{"name", {{"type", "string"}}},
          {"seed", pos_int},
          {"sampler", {{"type", "string"}, {"enum", sampler_ids()}}},
          {"params", {{"type", "object"}}},
          {"dt", {{"type", "number"}, {"exclusiveMinimum", 0}}},
          {"n_paths", pos_int},
          {"neg_pieces", pos_int},
          {"pos_pieces", pos_int},
          {"format", {{"type", "string"}, {"enum", {"csv", "binary"}}}},
          {"output_dir", {{"type", "string"}}},
          {"eigen",
           {{"type", "object"},
            {"additionalProperties", false},
            {"properties",
             {{"c1", {{"type", "number"}}},
              {"c2", {{"type", "number"}}},
              {"grid", {{"type", "array"}, {"items", {{"type", "number"}}}}},
              {"cprime2", {{"type", "boolean"}}},
              {"ode_step", {{"type", "number"}}}}}}},
          {"verify",
           {{"type", "object"},
            {"properties",
             {{"suites",
               {{"type", "array"},
                {"items",
                 {{"type", "string"},
                  {"enum", {"forwardness", "bessel_marginal", "drift_curve", "lil_envelope"}}}}}},
              {"alpha", {{"type", "number"}, {"exclusiveMinimum", 0}}},
              {"forwardness", suite},
              {"bessel_marginal", suite},
              {"drift_curve", suite},
              {"lil_envelope", suite}}}}}}}};
  }();
  return s;
}

void check_schema(const json& v, const json& node, const std::string& where) {
  if (node.contains("type") && !type_ok(v, node["type"].get<std::string>()))
    throw ConfigError(where + ": expected " + node["type"].get<std::string>() + ", got " + type_of(v));
  if (node.contains("enum")) {
    const auto& e = node["enum"];
    if (std::find(e.begin(), e.end(), v) == e.end()) {
      std::string names;
      for (const auto& x : e) names += (names.empty() ? "" : ", ") + x.get<std::string>();
      throw ConfigError(where + ": unknown value " + v.dump() + " (allowed: " + names + ")");
    }
  }
  if (node.contains("minimum") && v.get<double>() < node["minimum"].get<double>())
    throw ConfigError(where + ": must be >= " + node["minimum"].dump());
  if (node.contains("exclusiveMinimum") && !(v.get<double>() > node["exclusiveMinimum"].get<double>()))
    throw ConfigError(where + ": must be > " + node["exclusiveMinimum"].dump());
  if (v.is_object()) {
    for (const auto& r : node.value("required", json::array()))
      if (!v.contains(r.get<std::string>())) throw ConfigError(where + ": missing required field '" + r.get<std::string>() + "'");
    const json props = node.value("properties", json::object());
    for (const auto& [k, x] : v.items()) {
      if (props.contains(k))
        check_schema(x, props[k], where + "." + k);
      else if (!node.value("additionalProperties", true))
        throw ConfigError(where + ": unknown field '" + k + "'");
    }
  }
  if (v.is_array() && node.contains("items"))
    for (std::size_t i = 0; i < v.size(); ++i) check_schema(v[i], node["items"], where + "[" + std::to_string(i) + "]");
}

json ExperimentConfig::to_json() const {
  json j = {{"name", name},   {"seed", seed},           {"params", params},
            {"dt", dt},       {"n_paths", n_paths},     {"neg_pieces", neg_pieces},
            {"pos_pieces", pos_pieces}, {"format", format}, {"eigen", eigen}};
  if (!sampler.empty()) j["sampler"] = sampler;
  json v = suite_params;
  v["suites"] = suites;
  v["alpha"] = alpha;
  j["verify"] = v;
  return j;
}

ExperimentConfig from_json(const json& j) {
  if (j.contains("sampler") && j["sampler"].is_string()) {
    const auto id = j["sampler"].get<std::string>();
    const auto& ids = sampler_ids();
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) throw ConfigError("unknown sampler id '" + id + "'");
  }
  check_schema(j, schema());
  ExperimentConfig c;
  c.name = j.value("name", c.name);
  c.seed = j["seed"].get<std::uint64_t>();
  c.sampler = j.value("sampler", std::string{});
  c.params = j.value("params", json::object());
  c.dt = j.value("dt", c.dt);
  c.n_paths = j.value("n_paths", c.n_paths);
  c.neg_pieces = j.value("neg_pieces", c.neg_pieces);
  c.pos_pieces = j.value("pos_pieces", c.pos_pieces);
  c.format = j.value("format", c.format);
  if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
  c.eigen = j.value("eigen", json::object());
  if (j.contains("verify")) {
    json v = j["verify"];
    c.suites = v.value("suites", std::vector<std::string>{});
    c.alpha = v.value("alpha", c.alpha);
    v.erase("suites");
    v.erase("alpha");
    c.suite_params = v;
  }
  if (!c.sampler.empty()) sampler_spec(c.sampler, c.params, c.dt);  // surfaces bad params as ConfigError
  return c;
}

}  // namespace fbmlab::config
