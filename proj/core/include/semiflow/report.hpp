#pragma once

#include <string>
#include <vector>

namespace semiflow {

/// Shortest round-trip decimal form of v ("%.17g"), used for every number
/// written to reports and CSV artifacts so repeated runs are byte-identical.
std::string fmt_double(double v);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// Structured text report: `key: value` lines, one explicit PASS/FAIL line
/// per check, and `artifact:` lines naming the CSV attachments.
class Report {
 public:
  void kv(const std::string& key, const std::string& value);
  void kv(const std::string& key, double value);
  void kv(const std::string& key, long long value);
  void check(const std::string& name, bool pass, const std::string& detail = "");
  void attach(const std::string& filename);
  void line(const std::string& raw);
  void append(const Report& other);

  bool all_passed() const { return failed_ == 0; }
  int checks_failed() const { return failed_; }
  int checks_total() const { return total_; }

  std::string str() const;
  void write_file(const std::string& path) const;

 private:
  std::vector<std::string> lines_;
  int failed_ = 0;
  int total_ = 0;
};

}  // namespace semiflow
