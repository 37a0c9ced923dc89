#include <doctest.h>

#include "semiflow/config.hpp"
#include "semiflow/report.hpp"

using namespace semiflow;

TEST_CASE("config: parses dotted keys, comments and lists") {
  const Config c = Config::parse(
      "# a comment\n"
      "resonant.mu = 4\n"
      "g.frequencies = 1, 1.4142135623730951\n"
      "name = canonical   # trailing comment\n"
      "\n"
      "flag = true\n");
  CHECK(c.get_double("resonant.mu", 0) == 4.0);
  CHECK(c.get_string("name", "") == "canonical");
  CHECK(c.get_bool("flag", false));
  const auto freqs = c.get_list("g.frequencies", {});
  REQUIRE(freqs.size() == 2);
  CHECK(freqs[1] == 1.4142135623730951);
  CHECK(c.get_double("missing", 7.5) == 7.5);
}

TEST_CASE("config: malformed lines carry the line number") {
  try {
    Config::parse("a = 1\nnonsense line\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line_no == 2);
  }
}

TEST_CASE("config: unknown keys are rejected fail-closed") {
  const Config c = Config::parse("mode = 7\n");
  CHECK_THROWS_AS(c.require_known({"seed", "verify.trials"}), ConfigError);
  const Config ok = Config::parse("seed = 3\n");
  CHECK_NOTHROW(ok.require_known({"seed"}));
}

TEST_CASE("config: duplicate keys and non-numeric values are errors") {
  CHECK_THROWS_AS(Config::parse("a = 1\na = 2\n"), ConfigError);
  const Config c = Config::parse("x = fish\n");
  CHECK_THROWS_AS(c.get_double("x", 0), ConfigError);
  CHECK_THROWS_AS(c.get_int("x", 0), ConfigError);
  const Config f = Config::parse("x = 1.5\n");
  CHECK_THROWS_AS(f.get_int("x", 0), ConfigError);
}

TEST_CASE("report: check lines carry PASS/FAIL and the failure count") {
  Report r;
  r.kv("alpha", 1.5);
  r.check("good", true, "margin 0.1");
  r.check("bad", false);
  CHECK(r.checks_total() == 2);
  CHECK(r.checks_failed() == 1);
  CHECK(!r.all_passed());
  const std::string s = r.str();
  CHECK(s.find("alpha: 1.5") != std::string::npos);
  CHECK(s.find("check[good]: PASS (margin 0.1)") != std::string::npos);
  CHECK(s.find("check[bad]: FAIL") != std::string::npos);
}

TEST_CASE("fmt_double round-trips and is locale-stable") {
  CHECK(fmt_double(0.5) == "0.5");
  CHECK(fmt_double(1e6) == "1000000");
  const double v = 0.1234567890123456789;
  CHECK(std::stod(fmt_double(v)) == v);
}
