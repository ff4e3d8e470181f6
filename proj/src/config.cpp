#include "logz/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "logz/errors.hpp"
#include "logz/potential.hpp"

namespace logz {

namespace {

class Cursor {
 public:
  Cursor(std::string_view s, std::size_t line, const std::string& source)
      : s_(s), line_(line), source_(source) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(source_ + ":" + std::to_string(line_) + ": " + what);
  }
  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  bool done() {
    skip_ws();
    return pos_ >= s_.size() || s_[pos_] == '#';
  }
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  bool eat(char c) {
    skip_ws();
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::string key() {
    skip_ws();
    if (peek() == '"') return string();
    const std::size_t start = pos_;
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.') {
        ++pos_;
      } else {
        break;
      }
    }
    if (pos_ == start) fail("expected a key");
    return std::string(s_.substr(start, pos_ - start));
  }

  std::string string() {
    if (!eat('"')) fail("expected '\"'");
    std::string out;
    while (true) {
      if (pos_ >= s_.size()) fail("unterminated string");
      const char c = s_[pos_++];
      if (c == '"') return out;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (pos_ >= s_.size()) fail("unterminated escape");
      const char e = s_[pos_++];
      switch (e) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        default: fail(std::string("unsupported escape '\\") + e + "'");
      }
    }
  }

  TomlScalar scalar() {
    skip_ws();
    if (peek() == '"') return string();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != '#' && s_[pos_] != ' ' &&
           s_[pos_] != '\t')
      ++pos_;
    std::string tok(s_.substr(start, pos_ - start));
    if (tok.empty()) fail("expected a value");
    if (tok == "true") return true;
    if (tok == "false") return false;
    if (tok == "inf" || tok == "+inf") return HUGE_VAL;
    if (tok == "-inf") return -HUGE_VAL;
    std::string digits;
    for (char c : tok)
      if (c != '_') digits.push_back(c);
    const bool floaty = digits.find_first_of(".eE") != std::string::npos;
    const char* b = digits.data();
    const char* e = b + digits.size();
    if (*b == '+') ++b;
    if (!floaty) {
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(b, e, v);
      if (ec == std::errc() && p == e) return v;
    } else {
      double v = 0.0;
      auto [p, ec] = std::from_chars(b, e, v);
      if (ec == std::errc() && p == e) return v;
    }
    fail("cannot parse value '" + tok + "'");
  }

  TomlValue value() {
    skip_ws();
    if (peek() != '[') {
      TomlScalar s = scalar();
      return std::visit([](auto&& v) -> TomlValue { return v; }, s);
    }
    ++pos_;
    std::vector<TomlScalar> items;
    if (eat(']')) return items;
    while (true) {
      items.push_back(scalar());
      if (eat(']')) break;
      if (!eat(',')) fail("expected ',' or ']' in array");
      if (eat(']')) break;  // trailing comma
    }
    return items;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
  std::size_t line_;
  const std::string& source_;
};

std::string describe(const TomlValue& v) {
  return std::visit(
      [](auto&& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::string>) return "\"" + x + "\"";
        else if constexpr (std::is_same_v<T, bool>) return x ? "true" : "false";
        else if constexpr (std::is_same_v<T, std::vector<TomlScalar>>) return "[array]";
        else return std::to_string(x);
      },
      v);
}

double as_double(const std::string& key, const TomlValue& v) {
  if (auto* d = std::get_if<double>(&v)) return *d;
  if (auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  if (auto* s = std::get_if<std::string>(&v)) {
    double out = 0.0;
    const char* b = s->data();
    const char* e = b + s->size();
    auto [p, ec] = std::from_chars(b, e, out);
    if (ec == std::errc() && p == e && !s->empty()) return out;
  }
  throw ConfigError(key + ": expected a number, got " + describe(v));
}

std::int64_t as_int(const std::string& key, const TomlValue& v) {
  if (auto* i = std::get_if<std::int64_t>(&v)) return *i;
  if (auto* d = std::get_if<double>(&v)) {
    if (*d == std::floor(*d) && std::abs(*d) < 9e15) return static_cast<std::int64_t>(*d);
  }
  if (auto* s = std::get_if<std::string>(&v)) {
    std::int64_t out = 0;
    auto [p, ec] = std::from_chars(s->data(), s->data() + s->size(), out);
    if (ec == std::errc() && p == s->data() + s->size() && !s->empty()) return out;
  }
  throw ConfigError(key + ": expected an integer, got " + describe(v));
}

std::uint64_t as_seed(const std::string& key, const TomlValue& v) {
  if (auto* i = std::get_if<std::int64_t>(&v)) {
    if (*i < 0) throw ConfigError(key + ": seed must be nonnegative");
    return static_cast<std::uint64_t>(*i);
  }
  if (auto* s = std::get_if<std::string>(&v)) {
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(s->data(), s->data() + s->size(), out);
    if (ec == std::errc() && p == s->data() + s->size() && !s->empty()) return out;
  }
  throw ConfigError(key + ": expected a nonnegative 64-bit integer, got " + describe(v));
}

bool as_bool(const std::string& key, const TomlValue& v) {
  if (auto* b = std::get_if<bool>(&v)) return *b;
  if (auto* s = std::get_if<std::string>(&v)) {
    if (*s == "true" || *s == "1" || *s == "on") return true;
    if (*s == "false" || *s == "0" || *s == "off") return false;
  }
  throw ConfigError(key + ": expected a boolean, got " + describe(v));
}

std::string as_string(const std::string& key, const TomlValue& v) {
  if (auto* s = std::get_if<std::string>(&v)) return *s;
  throw ConfigError(key + ": expected a string, got " + describe(v));
}

std::vector<double> as_double_array(const std::string& key, const TomlValue& v) {
  std::vector<double> out;
  if (auto* a = std::get_if<std::vector<TomlScalar>>(&v)) {
    for (const auto& item : *a) {
      out.push_back(as_double(key, std::visit([](auto&& x) -> TomlValue { return x; }, item)));
    }
    return out;
  }
  if (auto* s = std::get_if<std::string>(&v)) {
    std::stringstream ss(*s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(as_double(key, TomlValue(tok)));
    return out;
  }
  throw ConfigError(key + ": expected an array of numbers, got " + describe(v));
}

int checked_int(const std::string& key, const TomlValue& v, std::int64_t lo) {
  const std::int64_t i = as_int(key, v);
  if (i < lo || i > 1'000'000'000) throw ConfigError(key + ": value " + std::to_string(i) + " out of range");
  return static_cast<int>(i);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace

TomlTable parse_toml(const std::string& text, const std::string& source) {
  TomlTable table;
  std::string section;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    Cursor c(line, lineno, source);
    if (c.done()) continue;
    if (c.eat('[')) {
      if (c.eat('[')) c.fail("arrays of tables are not supported");
      section = c.key();
      if (!c.eat(']')) c.fail("expected ']' after table name");
      if (!c.done()) c.fail("trailing characters after table header");
      continue;
    }
    const std::string key = c.key();
    if (!c.eat('=')) c.fail("expected '=' after key '" + key + "'");
    TomlValue v = c.value();
    if (!c.done()) c.fail("trailing characters after value of '" + key + "'");
    const std::string full = section.empty() ? key : section + "." + key;
    if (!table.emplace(full, std::move(v)).second) c.fail("duplicate key '" + full + "'");
  }
  return table;
}

OutputFormat parse_format(const std::string& name) {
  if (name == "json") return OutputFormat::kJson;
  if (name == "csv") return OutputFormat::kCsv;
  throw ConfigError("output.format: unknown format '" + name + "' (expected json or csv)");
}

void apply_setting(FileConfig& cfg, const std::string& key, const TomlValue& v,
                   const std::filesystem::path& base_dir) {
  auto path_of = [&](const std::string& s) {
    std::filesystem::path p(s);
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    return p.lexically_normal();
  };
  if (key == "model.kind") cfg.model.kind = as_string(key, v);
  else if (key == "model.dim") cfg.model.dim = checked_int(key, v, 1);
  else if (key == "model.precision_diag") cfg.model.precision_diag = as_double_array(key, v);
  else if (key == "model.variant") cfg.model.variant = checked_int(key, v, 1);
  else if (key == "model.data") cfg.model.data = path_of(as_string(key, v));
  else if (key == "model.noise_precision") cfg.model.noise_precision = as_double(key, v);
  else if (key == "model.prior_precision") cfg.model.prior_precision = as_double(key, v);
  else if (key == "run.eps") cfg.run.eps = as_double(key, v);
  else if (key == "run.mu") cfg.run.mu = as_double(key, v);
  else if (key == "run.mu_tilde") cfg.run.mu_tilde = as_double(key, v);
  else if (key == "run.regime") {
    const std::string r = as_string(key, v);
    if (r == "auto") cfg.regime.reset();
    else cfg.regime = parse_regime(r);
  } else if (key == "run.a3") cfg.run.use_hessian_lipschitz = as_bool(key, v);
  else if (key == "run.preset") cfg.run.preset = parse_preset(as_string(key, v));
  else if (key == "run.stride") cfg.run.stride = checked_int(key, v, 1);
  else if (key == "run.seed") cfg.run.seed = as_seed(key, v);
  else if (key == "run.workers") cfg.run.workers = checked_int(key, v, 1);
  else if (key == "run.correct_reference_bias") cfg.run.correct_reference_bias = as_bool(key, v);
  else if (key == "run.replicates") cfg.replicates = checked_int(key, v, 2);
  else if (key == "output.path") cfg.output_path = path_of(as_string(key, v));
  else if (key == "output.format") cfg.format = parse_format(as_string(key, v));
  else if (key == "output.trace") cfg.trace_path = path_of(as_string(key, v));
  else if (key == "output.trace_phase") cfg.trace_phase = checked_int(key, v, 0);
  else throw ConfigError("unknown config key '" + key + "'");
}

FileConfig parse_config(const std::string& text, const std::filesystem::path& base_dir, const std::string& source) {
  FileConfig cfg;
  for (const auto& [key, value] : parse_toml(text, source)) apply_setting(cfg, key, value, base_dir);
  cfg.run.validate();
  return cfg;
}

FileConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path(), path.string());
}

RunConfig effective_run_config(const FileConfig& cfg, const Potential& p) {
  RunConfig run = cfg.run;
  run.regime = cfg.regime.value_or(auto_regime(p));
  run.validate();
  return run;
}

std::uint64_t config_digest(const FileConfig& cfg) {
  nlohmann::json j;
  j["model"]["kind"] = cfg.model.kind;
  j["model"]["dim"] = cfg.model.dim;
  j["model"]["precision_diag"] = cfg.model.precision_diag;
  j["model"]["variant"] = cfg.model.variant;
  if (!cfg.model.data.empty()) {
    j["model"]["data"] = cfg.model.data.filename().string();
    std::ifstream in(cfg.model.data, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(ss.str())));
    j["model"]["data_fnv1a"] = buf;
  }
  if (cfg.model.noise_precision) j["model"]["noise_precision"] = *cfg.model.noise_precision;
  if (cfg.model.prior_precision) j["model"]["prior_precision"] = *cfg.model.prior_precision;
  j["run"]["eps"] = cfg.run.eps;
  j["run"]["mu"] = cfg.run.mu;
  if (cfg.run.mu_tilde) j["run"]["mu_tilde"] = *cfg.run.mu_tilde;
  j["run"]["regime"] = cfg.regime ? std::string(to_string(*cfg.regime)) : "auto";
  j["run"]["a3"] = cfg.run.use_hessian_lipschitz;
  j["run"]["preset"] = std::string(to_string(cfg.run.preset));
  j["run"]["stride"] = cfg.run.stride;
  j["run"]["seed"] = cfg.run.seed;
  j["run"]["correct_reference_bias"] = cfg.run.correct_reference_bias;
  j["run"]["replicates"] = cfg.replicates;
  return fnv1a(j.dump());
}

std::string config_digest_hex(const FileConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(config_digest(cfg)));
  return buf;
}

}  // namespace logz
