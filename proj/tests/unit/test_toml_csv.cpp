#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "picl/common.hpp"
#include "picl/csv.hpp"
#include "picl/toml.hpp"

using namespace picl;

TEST_CASE("toml parses the flat value kinds") {
    const std::string text = R"(# experiment config
name = "sst2"            # trailing comment
k = 4
lambda = 0.014
enabled = true
labels = ["negative", "positive"]
empty = ""
negative = -3
big_float = 1e-3
)";
    const toml_table t = toml_table::parse(text, "test.toml");
    CHECK(t.require_string("name") == "sst2");
    CHECK(t.require_int("k") == 4);
    CHECK(t.require_double("lambda") == doctest::Approx(0.014));
    CHECK(t.require_bool("enabled"));
    CHECK(t.require_string_array("labels") ==
          std::vector<std::string>{"negative", "positive"});
    CHECK(t.require_string("empty").empty());
    CHECK(t.require_int("negative") == -3);
    CHECK(t.require_double("big_float") == doctest::Approx(1e-3));
    CHECK(t.require_double("k") == 4.0);  // integers widen
    CHECK(t.contains("name"));
    CHECK_FALSE(t.contains("missing"));
    CHECK_FALSE(t.get_string("missing").has_value());
}

TEST_CASE("toml errors carry the origin and line") {
    CHECK_THROWS_WITH_AS(toml_table::parse("k = \n", "bad.toml"),
                         doctest::Contains("bad.toml"), config_error);
    CHECK_THROWS_AS(toml_table::parse("k = 1\nk = 2\n", "dup.toml"), config_error);
    CHECK_THROWS_WITH_AS(toml_table::parse("[table]\n", "hdr.toml"),
                         doctest::Contains("table headers"), config_error);
    CHECK_THROWS_AS(toml_table::parse("novalue\n", "x.toml"), config_error);

    const toml_table t = toml_table::parse("k = 1\n", "t.toml");
    CHECK_THROWS_WITH_AS(t.require_string("k"), doctest::Contains("k"), config_error);
    CHECK_THROWS_WITH_AS(t.require_int("absent"), doctest::Contains("absent"), config_error);
}

TEST_CASE("csv escaping round-trips tricky fields") {
    const std::vector<std::vector<std::string>> rows = {
        {"plain", "with,comma", "with \"quotes\""},
        {"multi\nline", "", "trailing space "},
        {"ünïcode", "tab\there", "end"},
    };
    std::ostringstream out;
    for (const auto& row : rows) write_csv_row(out, row);
    const auto parsed = parse_csv(out.str());
    REQUIRE(parsed.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) CHECK(parsed[i] == rows[i]);
}

TEST_CASE("csv parses both line endings and quoted separators") {
    const auto rows = parse_csv("a,b\r\n\"1,5\",\"x\"\"y\"\n");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == std::vector<std::string>{"a", "b"});
    CHECK(rows[1] == std::vector<std::string>{"1,5", "x\"y"});
}
