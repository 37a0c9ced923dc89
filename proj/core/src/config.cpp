#include "semiflow/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace semiflow {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '.' || c == '-';
    if (!ok) return false;
  }
  return true;
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected `key = value`", line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!valid_key(key)) throw ConfigError("malformed key `" + key + "`", line_no);
    if (value.empty()) throw ConfigError("empty value for `" + key + "`", line_no);
    if (cfg.values_.count(key)) throw ConfigError("duplicate key `" + key + "`", line_no);
    cfg.values_[key] = value;
    cfg.lines_[key] = line_no;
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

bool Config::has(const std::string& key) const { return values_.count(key) != 0; }

std::string Config::get_string(const std::string& key, const std::string& def) const {
  auto it = values_.find(key);
  return it == values_.end() ? def : it->second;
}

std::string Config::require_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing required key `" + key + "`");
  return it->second;
}

double Config::parse_double(const std::string& key, const std::string& raw) const {
  char* end = nullptr;
  const double v = std::strtod(raw.c_str(), &end);
  if (end == raw.c_str() || *end != '\0') {
    auto it = lines_.find(key);
    throw ConfigError("`" + key + "` is not a number: " + raw,
                      it == lines_.end() ? 0 : it->second);
  }
  return v;
}

double Config::get_double(const std::string& key, double def) const {
  auto it = values_.find(key);
  if (it == values_.end()) return def;
  return parse_double(key, it->second);
}

long long Config::get_int(const std::string& key, long long def) const {
  auto it = values_.find(key);
  if (it == values_.end()) return def;
  const double v = parse_double(key, it->second);
  const long long n = static_cast<long long>(v);
  if (static_cast<double>(n) != v) {
    auto lt = lines_.find(key);
    throw ConfigError("`" + key + "` is not an integer: " + it->second,
                      lt == lines_.end() ? 0 : lt->second);
  }
  return n;
}

bool Config::get_bool(const std::string& key, bool def) const {
  auto it = values_.find(key);
  if (it == values_.end()) return def;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  auto lt = lines_.find(key);
  throw ConfigError("`" + key + "` is not a boolean: " + v,
                    lt == lines_.end() ? 0 : lt->second);
}

std::vector<double> Config::get_list(const std::string& key, std::vector<double> def) const {
  auto it = values_.find(key);
  if (it == values_.end()) return def;
  std::vector<double> out;
  std::string item;
  std::istringstream ss(it->second);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(parse_double(key, item));
  }
  if (out.empty()) {
    auto lt = lines_.find(key);
    throw ConfigError("`" + key + "` is an empty list", lt == lines_.end() ? 0 : lt->second);
  }
  return out;
}

void Config::set(const std::string& key, const std::string& value) {
  values_[key] = value;
  lines_[key] = 0;
}

void Config::require_known(const std::set<std::string>& allowed) const {
  for (const auto& [key, value] : values_) {
    (void)value;
    if (!allowed.count(key)) {
      auto lt = lines_.find(key);
      throw ConfigError("unknown key `" + key + "`", lt == lines_.end() ? 0 : lt->second);
    }
  }
}

}  // namespace semiflow
