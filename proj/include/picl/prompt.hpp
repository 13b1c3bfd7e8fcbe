#pragma once

#include <span>
#include <string>

#include "picl/dataset.hpp"

namespace picl {

struct prompt_options {
    // The query line ends "Label: " when true, "Label:" when false.
    bool trailing_space = true;
};

struct prompt_string {
    std::string text;
    task_category category = task_category::single;
};

// Renders demonstrations followed by a query line with the label left blank:
//   single:  Input: {text}, Label: {verbalizer}
//   aspect:  Input: {text}, Aspect: {aspect}, Label: {verbalizer}
//   pair:    Input: {text}, Text 2: {text2}, Label: {verbalizer}
// Lines join with newlines; only the query line omits its verbalizer.
prompt_string build_prompt(std::span<const task_record> demos, const task_record& query,
                           std::span<const std::string> verbalizers, task_category category,
                           const prompt_options& opts = {});

// Same rendering with an entirely blank query: every query field is empty.
prompt_string build_queryless_prompt(std::span<const task_record> demos,
                                     std::span<const std::string> verbalizers,
                                     task_category category, const prompt_options& opts = {});

}  // namespace picl
