#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace semiflow {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_no(line) {}
  int line_no;
};

/// Flat `key = value` configuration with `#` comments and dotted key names
/// (e.g. `resonant.mu = 4`). Parsing is fail-closed: experiments declare the
/// keys they understand and anything else raises ConfigError.
class Config {
 public:
  static Config parse(const std::string& text);
  static Config parse_file(const std::string& path);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& def) const;
  std::string require_string(const std::string& key) const;
  double get_double(const std::string& key, double def) const;
  long long get_int(const std::string& key, long long def) const;
  bool get_bool(const std::string& key, bool def) const;
  std::vector<double> get_list(const std::string& key, std::vector<double> def) const;

  /// Override or add an entry (used for CLI flags; line number 0).
  void set(const std::string& key, const std::string& value);

  /// Throws ConfigError naming the offending key/line when an entry is not
  /// in `allowed`.
  void require_known(const std::set<std::string>& allowed) const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;
  double parse_double(const std::string& key, const std::string& raw) const;
};

}  // namespace semiflow
