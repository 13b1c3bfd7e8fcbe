#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "picl/rng.hpp"

namespace picl {

// Task shapes: plain single-text classification, aspect-conditioned
// classification, and text-pair classification.
enum class task_category { single, aspect, pair };

task_category parse_category(std::string_view name);  // throws config_error
std::string_view category_name(task_category cat);

struct task_record {
    std::string text;
    std::string text2;   // pair tasks only
    std::string aspect;  // aspect tasks only
    std::int32_t label = 0;
};

struct task_dataset {
    std::string name;
    task_category category = task_category::single;
    std::vector<std::string> label_space;  // index = label id
    bool has_neutral = false;
    std::vector<task_record> records;

    void validate() const;  // throws data_error
};

// Declarative description of where a dataset lives and how to read it.
struct dataset_config {
    std::string name;
    std::filesystem::path path;
    std::string format;  // "jsonl" or "csv"
    task_category category = task_category::single;
    std::string text_field;
    std::string text2_field;
    std::string aspect_field;
    std::string label_field;
    std::vector<std::string> labels;
    bool has_neutral = false;
    std::optional<std::int64_t> max_len;  // drop records with longer text

    // Relative data paths resolve against the config file's directory.
    static dataset_config from_toml_file(const std::filesystem::path& path);
    void validate() const;  // throws config_error
};

// Loads records in file order. Labels map through config.labels (exact
// string match); unknown labels, missing fields, and malformed rows are
// data errors naming the offending line.
task_dataset load_dataset(const dataset_config& cfg);

struct split_pair {
    task_dataset validation;
    task_dataset test;
};

// Shuffles record indices with the given seed, takes the last 512 records
// as the test split, and fills validation from the front: the first 512 if
// at least 1024 records exist, otherwise everything before the test split.
// Fewer than 513 records is an error.
split_pair split_dataset(const task_dataset& ds, std::uint64_t seed = 42);

// Draws k distinct demonstration records, optionally excluding one index
// (the query itself). Order of draws follows the stream.
std::vector<task_record> sample_demos(const task_dataset& ds, std::int64_t k,
                                      rng_stream& stream, std::int64_t exclude_index = -1);

}  // namespace picl
