#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace picl {

// Minimal flat TOML: `key = value` lines with string, integer, float,
// boolean, and single-line array values, plus comments. Table headers and
// nesting are rejected; config schemas here are intentionally flat.
class toml_table {
public:
    struct value {
        enum class kind { string, integer, floating, boolean, array };
        kind type = kind::string;
        std::string str;
        std::int64_t integer = 0;
        double floating = 0.0;
        bool boolean = false;
        std::vector<value> items;
    };

    static toml_table parse(std::string_view text, const std::string& origin);
    static toml_table parse_file(const std::filesystem::path& path);

    bool contains(const std::string& key) const;

    // Typed accessors throw config_error naming the key on absence or
    // type mismatch. Integer values widen to double where a float is asked.
    std::string require_string(const std::string& key) const;
    std::int64_t require_int(const std::string& key) const;
    double require_double(const std::string& key) const;
    bool require_bool(const std::string& key) const;
    std::vector<std::string> require_string_array(const std::string& key) const;

    std::optional<std::string> get_string(const std::string& key) const;
    std::optional<std::int64_t> get_int(const std::string& key) const;
    std::optional<double> get_double(const std::string& key) const;
    std::optional<bool> get_bool(const std::string& key) const;

    std::vector<std::string> keys() const;

private:
    const value& at(const std::string& key) const;
    std::map<std::string, value> values_;
    std::string origin_;
};

}  // namespace picl
