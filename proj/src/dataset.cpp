#include "picl/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"

#include "picl/common.hpp"
#include "picl/csv.hpp"
#include "picl/toml.hpp"
#include "picl/unicode.hpp"

namespace picl {

task_category parse_category(std::string_view name) {
    if (name == "single") return task_category::single;
    if (name == "aspect") return task_category::aspect;
    if (name == "pair") return task_category::pair;
    throw config_error("unknown task category: " + std::string(name) +
                       " (expected single, aspect, or pair)");
}

std::string_view category_name(task_category cat) {
    switch (cat) {
        case task_category::single: return "single";
        case task_category::aspect: return "aspect";
        case task_category::pair: return "pair";
    }
    return "?";
}

void task_dataset::validate() const {
    if (label_space.size() < 2) throw data_error("dataset needs at least two labels: " + name);
    std::set<std::string> unique(label_space.begin(), label_space.end());
    if (unique.size() != label_space.size())
        throw data_error("duplicate verbalizers in label space: " + name);
    for (const std::string& v : label_space)
        if (v.empty()) throw data_error("empty verbalizer in label space: " + name);
    if (records.empty()) throw data_error("dataset has no records: " + name);
    for (const task_record& r : records)
        if (r.label < 0 || static_cast<std::size_t>(r.label) >= label_space.size())
            throw data_error("record label out of range in dataset: " + name);
}

void dataset_config::validate() const {
    if (name.empty()) throw config_error("dataset config needs a name");
    if (format != "jsonl" && format != "csv")
        throw config_error("unknown dataset format: " + format + " (expected jsonl or csv)");
    if (text_field.empty()) throw config_error("dataset config needs text_field");
    if (label_field.empty()) throw config_error("dataset config needs label_field");
    if (labels.size() < 2) throw config_error("dataset config needs at least two labels");
    if (category == task_category::pair && text2_field.empty())
        throw config_error("pair datasets need text2_field");
    if (category == task_category::aspect && aspect_field.empty())
        throw config_error("aspect datasets need aspect_field");
    if (max_len && *max_len <= 0) throw config_error("max_len must be positive");
}

dataset_config dataset_config::from_toml_file(const std::filesystem::path& path) {
    const toml_table t = toml_table::parse_file(path);
    dataset_config cfg;
    cfg.name = t.require_string("name");
    cfg.format = t.require_string("format");
    cfg.category = parse_category(t.require_string("category"));
    cfg.text_field = t.require_string("text_field");
    cfg.label_field = t.require_string("label_field");
    cfg.labels = t.require_string_array("labels");
    cfg.text2_field = t.get_string("text2_field").value_or("");
    cfg.aspect_field = t.get_string("aspect_field").value_or("");
    cfg.has_neutral = t.get_bool("has_neutral").value_or(false);
    if (auto ml = t.get_int("max_len")) cfg.max_len = *ml;

    std::filesystem::path data_path = t.require_string("path");
    if (data_path.is_relative()) data_path = path.parent_path() / data_path;
    cfg.path = data_path;
    cfg.validate();
    return cfg;
}

namespace {

std::int32_t label_index(const dataset_config& cfg, const std::string& value,
                         const std::string& where) {
    auto it = std::find(cfg.labels.begin(), cfg.labels.end(), value);
    if (it != cfg.labels.end())
        return static_cast<std::int32_t>(it - cfg.labels.begin());
    // Integer labels index the label list directly.
    std::int64_t idx = 0;
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), idx);
    if (ec == std::errc() && p == value.data() + value.size() && idx >= 0 &&
        idx < static_cast<std::int64_t>(cfg.labels.size()))
        return static_cast<std::int32_t>(idx);
    throw data_error(where + ": unknown label value: " + value);
}

// Length filter counts Unicode codepoints of the primary text.
bool too_long(const dataset_config& cfg, const task_record& r) {
    if (!cfg.max_len) return false;
    return static_cast<std::int64_t>(decode_utf8(r.text).size()) > *cfg.max_len;
}

task_dataset load_jsonl(const dataset_config& cfg) {
    std::ifstream in(cfg.path);
    if (!in) throw data_error("cannot open dataset file: " + cfg.path.string());

    task_dataset ds;
    std::string line;
    std::int64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::string where = cfg.path.string() + ":" + std::to_string(lineno);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw data_error(where + ": malformed JSON: " + e.what());
        }
        if (!j.is_object()) throw data_error(where + ": record is not a JSON object");

        auto fetch_text = [&](const std::string& field) -> std::string {
            if (!j.contains(field)) throw data_error(where + ": missing field: " + field);
            const auto& v = j[field];
            if (!v.is_string()) throw data_error(where + ": field is not a string: " + field);
            return v.get<std::string>();
        };

        task_record r;
        r.text = fetch_text(cfg.text_field);
        if (cfg.category == task_category::pair) r.text2 = fetch_text(cfg.text2_field);
        if (cfg.category == task_category::aspect) r.aspect = fetch_text(cfg.aspect_field);

        if (!j.contains(cfg.label_field))
            throw data_error(where + ": missing field: " + cfg.label_field);
        const auto& lv = j[cfg.label_field];
        std::string label_str;
        if (lv.is_string()) label_str = lv.get<std::string>();
        else if (lv.is_number_integer()) label_str = std::to_string(lv.get<std::int64_t>());
        else throw data_error(where + ": label must be a string or integer");
        r.label = label_index(cfg, label_str, where);

        if (!too_long(cfg, r)) ds.records.push_back(std::move(r));
    }
    return ds;
}

task_dataset load_csv(const dataset_config& cfg) {
    const auto rows = read_csv_file(cfg.path);
    if (rows.empty()) throw data_error("empty CSV dataset: " + cfg.path.string());

    const std::vector<std::string>& header = rows.front();
    auto column = [&](const std::string& field) -> std::size_t {
        auto it = std::find(header.begin(), header.end(), field);
        if (it == header.end())
            throw data_error(cfg.path.string() + ": missing column: " + field);
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t text_col = column(cfg.text_field);
    const std::size_t label_col = column(cfg.label_field);
    const std::size_t text2_col =
        cfg.category == task_category::pair ? column(cfg.text2_field) : 0;
    const std::size_t aspect_col =
        cfg.category == task_category::aspect ? column(cfg.aspect_field) : 0;

    task_dataset ds;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const std::string where = cfg.path.string() + ": row " + std::to_string(i + 1);
        const auto& row = rows[i];
        if (row.size() != header.size())
            throw data_error(where + ": has " + std::to_string(row.size()) +
                             " fields, header has " + std::to_string(header.size()));
        task_record r;
        r.text = row[text_col];
        if (cfg.category == task_category::pair) r.text2 = row[text2_col];
        if (cfg.category == task_category::aspect) r.aspect = row[aspect_col];
        r.label = label_index(cfg, row[label_col], where);
        if (!too_long(cfg, r)) ds.records.push_back(std::move(r));
    }
    return ds;
}

}  // namespace

task_dataset load_dataset(const dataset_config& cfg) {
    cfg.validate();
    task_dataset ds = cfg.format == "jsonl" ? load_jsonl(cfg) : load_csv(cfg);
    ds.name = cfg.name;
    ds.category = cfg.category;
    ds.label_space = cfg.labels;
    ds.has_neutral = cfg.has_neutral;
    ds.validate();
    return ds;
}

split_pair split_dataset(const task_dataset& ds, std::uint64_t seed) {
    const std::int64_t n = static_cast<std::int64_t>(ds.records.size());
    if (n < 513)
        throw data_error("dataset too small to split (need at least 513 records, have " +
                         std::to_string(n) + "): " + ds.name);

    std::vector<std::int64_t> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    fisher_yates(order, seed);

    const std::int64_t test_size = 512;
    const std::int64_t val_size = n >= 1024 ? 512 : n - test_size;

    auto subset = [&](std::int64_t from, std::int64_t count, const char* tag) {
        task_dataset out;
        out.name = ds.name + "/" + tag;
        out.category = ds.category;
        out.label_space = ds.label_space;
        out.has_neutral = ds.has_neutral;
        out.records.reserve(static_cast<std::size_t>(count));
        for (std::int64_t i = from; i < from + count; ++i)
            out.records.push_back(ds.records[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]);
        return out;
    };

    split_pair pair;
    pair.validation = subset(0, val_size, "validation");
    pair.test = subset(n - test_size, test_size, "test");
    return pair;
}

std::vector<task_record> sample_demos(const task_dataset& ds, std::int64_t k,
                                      rng_stream& stream, std::int64_t exclude_index) {
    if (k < 0) throw config_error("demo count must be non-negative");
    std::vector<std::int64_t> pool;
    pool.reserve(ds.records.size());
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(ds.records.size()); ++i)
        if (i != exclude_index) pool.push_back(i);
    if (k > static_cast<std::int64_t>(pool.size()))
        throw data_error("not enough records to sample " + std::to_string(k) +
                         " demonstrations from dataset: " + ds.name);

    // Partial Fisher-Yates: position i takes a uniform draw from [i, n).
    std::vector<task_record> out;
    out.reserve(static_cast<std::size_t>(k));
    for (std::int64_t i = 0; i < k; ++i) {
        const std::int64_t j =
            i + static_cast<std::int64_t>(stream.next_below(static_cast<std::uint64_t>(
                    static_cast<std::int64_t>(pool.size()) - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
        out.push_back(ds.records[static_cast<std::size_t>(pool[static_cast<std::size_t>(i)])]);
    }
    return out;
}

}  // namespace picl
