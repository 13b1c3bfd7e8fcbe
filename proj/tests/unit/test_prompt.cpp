#include <string>
#include <vector>

#include "doctest.h"

#include "picl/common.hpp"
#include "picl/prompt.hpp"

using namespace picl;

namespace {

task_record rec(std::string text, std::int32_t label) {
    task_record r;
    r.text = std::move(text);
    r.label = label;
    return r;
}

const std::vector<std::string> sentiment = {"negative", "positive"};
const std::vector<std::string> boolean = {"false", "true"};

}  // namespace

TEST_CASE("single-sentence template renders byte-exactly") {
    const std::vector<task_record> demos = {rec("good movie", 1)};
    const prompt_string p =
        build_prompt(demos, rec("bad film", 0), sentiment, task_category::single);
    CHECK(p.text == "Input: good movie, Label: positive\nInput: bad film, Label: ");
}

TEST_CASE("aspect template renders byte-exactly") {
    task_record demo = rec("battery lasts forever", 1);
    demo.aspect = "battery";
    task_record query = rec("screen is dim", 0);
    query.aspect = "screen";
    const prompt_string p = build_prompt(std::vector<task_record>{demo}, query,
                                         sentiment, task_category::aspect);
    CHECK(p.text ==
          "Input: battery lasts forever, Aspect: battery, Label: positive\n"
          "Input: screen is dim, Aspect: screen, Label: ");
}

TEST_CASE("pair template renders byte-exactly with zero demos") {
    task_record query = rec("it rained", 0);
    query.text2 = "the ground is wet";
    const prompt_string p = build_prompt(std::vector<task_record>{}, query,
                                         boolean, task_category::pair);
    CHECK(p.text == "Input: it rained, Text 2: the ground is wet, Label: ");
}

TEST_CASE("zero-demo single template is the bare query stub") {
    const prompt_string p = build_prompt(std::vector<task_record>{}, rec("fine", 1),
                                         sentiment, task_category::single);
    CHECK(p.text == "Input: fine, Label: ");
}

TEST_CASE("query-less prompts blank every query field") {
    const std::vector<task_record> demos = {rec("good", 1)};
    const prompt_string single =
        build_queryless_prompt(demos, sentiment, task_category::single);
    CHECK(single.text == "Input: good, Label: positive\nInput: , Label: ");

    task_record pd = rec("a", 1);
    pd.text2 = "b";
    const prompt_string pair = build_queryless_prompt(std::vector<task_record>{pd},
                                                      boolean, task_category::pair);
    CHECK(pair.text == "Input: a, Text 2: b, Label: true\nInput: , Text 2: , Label: ");
}

TEST_CASE("demo count fixes the line count") {
    std::vector<task_record> demos;
    for (int i = 0; i < 4; ++i) demos.push_back(rec("d" + std::to_string(i), i % 2));
    const prompt_string p = build_prompt(demos, rec("q", 0), sentiment, task_category::single);
    std::size_t newlines = 0;
    for (char c : p.text)
        if (c == '\n') ++newlines;
    CHECK(newlines == 4);
    CHECK(p.text.back() == ' ');
    CHECK(p.text.find("Input: d0, Label: negative\n") == 0);
}

TEST_CASE("zero-demo output is a suffix of the demo-bearing output") {
    const std::vector<task_record> demos = {rec("good movie", 1), rec("noisy mess", 0)};
    const task_record query = rec("bad film", 0);
    const std::string with = build_prompt(demos, query, sentiment, task_category::single).text;
    const std::string without =
        build_prompt(std::vector<task_record>{}, query, sentiment, task_category::single).text;
    REQUIRE(with.size() >= without.size());
    CHECK(with.substr(with.size() - without.size()) == without);
}

TEST_CASE("trailing space is flag-controlled") {
    prompt_options opts;
    opts.trailing_space = false;
    const prompt_string p = build_prompt(std::vector<task_record>{}, rec("x", 0),
                                         sentiment, task_category::single, opts);
    CHECK(p.text == "Input: x, Label:");
    // Demo lines keep their labels regardless of the flag.
    const std::vector<task_record> demos = {rec("good", 1)};
    const prompt_string q =
        build_prompt(demos, rec("x", 0), sentiment, task_category::single, opts);
    CHECK(q.text == "Input: good, Label: positive\nInput: x, Label:");
}

TEST_CASE("demo labels must be inside the label space") {
    const std::vector<task_record> demos = {rec("good", 7)};
    CHECK_THROWS_AS(
        build_prompt(demos, rec("x", 0), sentiment, task_category::single), data_error);
}

TEST_CASE("query-less prompts need at least one demo") {
    CHECK_THROWS_AS(
        build_queryless_prompt(std::vector<task_record>{}, sentiment, task_category::single),
        config_error);
}
