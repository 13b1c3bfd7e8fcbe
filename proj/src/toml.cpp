#include "picl/toml.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "picl/common.hpp"
#include "picl/unicode.hpp"

namespace picl {

namespace {

struct cursor {
    std::string_view text;
    std::size_t pos = 0;
    int line = 1;
    const std::string* origin;

    [[noreturn]] void fail(const std::string& what) const {
        throw config_error(*origin + ":" + std::to_string(line) + ": " + what);
    }
    bool done() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }
    void skip_inline_ws() {
        while (!done() && (peek() == ' ' || peek() == '\t')) ++pos;
    }
};

std::string parse_basic_string(cursor& c) {
    ++c.pos;  // opening quote
    std::string out;
    while (true) {
        if (c.done() || c.peek() == '\n') c.fail("unterminated string");
        const char ch = c.text[c.pos++];
        if (ch == '"') return out;
        if (ch != '\\') {
            out.push_back(ch);
            continue;
        }
        if (c.done()) c.fail("unterminated escape");
        const char esc = c.text[c.pos++];
        switch (esc) {
            case '"': out.push_back('"'); break;
            case '\\': out.push_back('\\'); break;
            case 'n': out.push_back('\n'); break;
            case 't': out.push_back('\t'); break;
            case 'r': out.push_back('\r'); break;
            case 'u': {
                if (c.pos + 4 > c.text.size()) c.fail("truncated \\u escape");
                std::uint32_t cp = 0;
                for (int i = 0; i < 4; ++i) {
                    const char h = c.text[c.pos++];
                    cp <<= 4;
                    if (h >= '0' && h <= '9') cp |= static_cast<std::uint32_t>(h - '0');
                    else if (h >= 'a' && h <= 'f') cp |= static_cast<std::uint32_t>(h - 'a' + 10);
                    else if (h >= 'A' && h <= 'F') cp |= static_cast<std::uint32_t>(h - 'A' + 10);
                    else c.fail("bad hex digit in \\u escape");
                }
                out += encode_utf8(cp);
                break;
            }
            default: c.fail(std::string("unsupported escape: \\") + esc);
        }
    }
}

toml_table::value parse_value(cursor& c);

toml_table::value parse_array(cursor& c) {
    ++c.pos;  // opening bracket
    toml_table::value v;
    v.type = toml_table::value::kind::array;
    c.skip_inline_ws();
    if (!c.done() && c.peek() == ']') {
        ++c.pos;
        return v;
    }
    while (true) {
        c.skip_inline_ws();
        if (c.done() || c.peek() == '\n') c.fail("arrays must close on one line");
        v.items.push_back(parse_value(c));
        c.skip_inline_ws();
        if (c.done() || c.peek() == '\n') c.fail("unterminated array");
        const char ch = c.text[c.pos++];
        if (ch == ']') return v;
        if (ch != ',') c.fail("expected ',' or ']' in array");
    }
}

toml_table::value parse_value(cursor& c) {
    if (c.done()) c.fail("missing value");
    const char ch = c.peek();
    toml_table::value v;
    if (ch == '"') {
        v.type = toml_table::value::kind::string;
        v.str = parse_basic_string(c);
        return v;
    }
    if (ch == '[') return parse_array(c);
    if (c.text.compare(c.pos, 4, "true") == 0) {
        c.pos += 4;
        v.type = toml_table::value::kind::boolean;
        v.boolean = true;
        return v;
    }
    if (c.text.compare(c.pos, 5, "false") == 0) {
        c.pos += 5;
        v.type = toml_table::value::kind::boolean;
        v.boolean = false;
        return v;
    }

    std::size_t end = c.pos;
    while (end < c.text.size()) {
        const char e = c.text[end];
        if (e == ',' || e == ']' || e == '#' || e == '\n' || e == ' ' || e == '\t') break;
        ++end;
    }
    const std::string_view tok = c.text.substr(c.pos, end - c.pos);
    if (tok.empty()) c.fail("missing value");

    const bool looks_float = tok.find('.') != std::string_view::npos ||
                             tok.find('e') != std::string_view::npos ||
                             tok.find('E') != std::string_view::npos;
    if (!looks_float) {
        std::int64_t iv = 0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), iv);
        if (ec == std::errc() && p == tok.data() + tok.size()) {
            c.pos = end;
            v.type = toml_table::value::kind::integer;
            v.integer = iv;
            return v;
        }
    }
    double dv = 0.0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), dv);
    if (ec == std::errc() && p == tok.data() + tok.size()) {
        c.pos = end;
        v.type = toml_table::value::kind::floating;
        v.floating = dv;
        return v;
    }
    c.fail("cannot parse value: " + std::string(tok));
}

const char* kind_name(toml_table::value::kind k) {
    switch (k) {
        case toml_table::value::kind::string: return "string";
        case toml_table::value::kind::integer: return "integer";
        case toml_table::value::kind::floating: return "float";
        case toml_table::value::kind::boolean: return "boolean";
        case toml_table::value::kind::array: return "array";
    }
    return "?";
}

}  // namespace

toml_table toml_table::parse(std::string_view text, const std::string& origin) {
    toml_table table;
    table.origin_ = origin;
    cursor c{text, 0, 1, &table.origin_};

    while (!c.done()) {
        c.skip_inline_ws();
        if (c.done()) break;
        const char ch = c.peek();
        if (ch == '\n') {
            ++c.pos;
            ++c.line;
            continue;
        }
        if (ch == '\r') {
            ++c.pos;
            continue;
        }
        if (ch == '#') {
            while (!c.done() && c.peek() != '\n') ++c.pos;
            continue;
        }
        if (ch == '[') c.fail("table headers are not supported; configs are flat");

        std::size_t key_end = c.pos;
        while (key_end < c.text.size()) {
            const char k = c.text[key_end];
            const bool ok = std::isalnum(static_cast<unsigned char>(k)) || k == '_' || k == '-';
            if (!ok) break;
            ++key_end;
        }
        if (key_end == c.pos) c.fail("expected a key");
        std::string key(c.text.substr(c.pos, key_end - c.pos));
        c.pos = key_end;
        c.skip_inline_ws();
        if (c.done() || c.peek() != '=') c.fail("expected '=' after key: " + key);
        ++c.pos;
        c.skip_inline_ws();
        value v = parse_value(c);
        c.skip_inline_ws();
        if (!c.done() && c.peek() == '#')
            while (!c.done() && c.peek() != '\n') ++c.pos;
        if (!c.done() && c.peek() == '\r') ++c.pos;
        if (!c.done() && c.peek() != '\n') c.fail("trailing characters after value for key: " + key);
        if (!table.values_.emplace(key, std::move(v)).second)
            c.fail("duplicate key: " + key);
    }
    return table;
}

toml_table toml_table::parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

bool toml_table::contains(const std::string& key) const {
    return values_.find(key) != values_.end();
}

const toml_table::value& toml_table::at(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end())
        throw config_error(origin_ + ": missing required key: " + key);
    return it->second;
}

std::string toml_table::require_string(const std::string& key) const {
    const value& v = at(key);
    if (v.type != value::kind::string)
        throw config_error(origin_ + ": key '" + key + "' must be a string, got " +
                           kind_name(v.type));
    return v.str;
}

std::int64_t toml_table::require_int(const std::string& key) const {
    const value& v = at(key);
    if (v.type != value::kind::integer)
        throw config_error(origin_ + ": key '" + key + "' must be an integer, got " +
                           kind_name(v.type));
    return v.integer;
}

double toml_table::require_double(const std::string& key) const {
    const value& v = at(key);
    if (v.type == value::kind::integer) return static_cast<double>(v.integer);
    if (v.type != value::kind::floating)
        throw config_error(origin_ + ": key '" + key + "' must be a number, got " +
                           kind_name(v.type));
    return v.floating;
}

bool toml_table::require_bool(const std::string& key) const {
    const value& v = at(key);
    if (v.type != value::kind::boolean)
        throw config_error(origin_ + ": key '" + key + "' must be a boolean, got " +
                           kind_name(v.type));
    return v.boolean;
}

std::vector<std::string> toml_table::require_string_array(const std::string& key) const {
    const value& v = at(key);
    if (v.type != value::kind::array)
        throw config_error(origin_ + ": key '" + key + "' must be an array, got " +
                           kind_name(v.type));
    std::vector<std::string> out;
    for (const value& item : v.items) {
        if (item.type != value::kind::string)
            throw config_error(origin_ + ": array '" + key + "' must contain only strings");
        out.push_back(item.str);
    }
    return out;
}

std::optional<std::string> toml_table::get_string(const std::string& key) const {
    if (!contains(key)) return std::nullopt;
    return require_string(key);
}

std::optional<std::int64_t> toml_table::get_int(const std::string& key) const {
    if (!contains(key)) return std::nullopt;
    return require_int(key);
}

std::optional<double> toml_table::get_double(const std::string& key) const {
    if (!contains(key)) return std::nullopt;
    return require_double(key);
}

std::optional<bool> toml_table::get_bool(const std::string& key) const {
    if (!contains(key)) return std::nullopt;
    return require_bool(key);
}

std::vector<std::string> toml_table::keys() const {
    std::vector<std::string> out;
    out.reserve(values_.size());
    for (const auto& [k, v] : values_) out.push_back(k);
    return out;
}

}  // namespace picl
