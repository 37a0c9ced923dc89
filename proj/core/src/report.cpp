#include "semiflow/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace semiflow {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void Report::kv(const std::string& key, const std::string& value) {
  lines_.push_back(key + ": " + value);
}

void Report::kv(const std::string& key, double value) { kv(key, fmt_double(value)); }

void Report::kv(const std::string& key, long long value) {
  kv(key, std::to_string(value));
}

void Report::check(const std::string& name, bool pass, const std::string& detail) {
  ++total_;
  if (!pass) ++failed_;
  std::string l = "check[" + name + "]: " + (pass ? "PASS" : "FAIL");
  if (!detail.empty()) l += " (" + detail + ")";
  lines_.push_back(std::move(l));
}

void Report::attach(const std::string& filename) { lines_.push_back("artifact: " + filename); }

void Report::line(const std::string& raw) { lines_.push_back(raw); }

void Report::append(const Report& other) {
  lines_.insert(lines_.end(), other.lines_.begin(), other.lines_.end());
  failed_ += other.failed_;
  total_ += other.total_;
}

std::string Report::str() const {
  std::string out;
  for (const auto& l : lines_) {
    out += l;
    out += '\n';
  }
  return out;
}

void Report::write_file(const std::string& path) const { write_text_file(path, str()); }

}  // namespace semiflow
