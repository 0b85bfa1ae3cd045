#pragma once

// Minimal TOML subset used for config files: bare-key tables with dotted
// headers, arrays of tables, strings, booleans, integers, floats and
// single-type arrays. Floats are emitted in shortest round-trip form so a
// write/parse cycle is bit-exact.

#include <charconv>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bss/common.hpp"

namespace bss::toml {

class Value;
using Table = std::map<std::string, Value>;
using Array = std::vector<Value>;

class Value {
public:
    using Storage = std::variant<bool, std::int64_t, double, std::string, Array, Table>;

    Value() : v_(Table{}) {}
    Value(bool b) : v_(b) {}
    Value(std::int64_t i) : v_(i) {}
    Value(int i) : v_(static_cast<std::int64_t>(i)) {}
    Value(double d) : v_(d) {}
    Value(const char* s) : v_(std::string(s)) {}
    Value(std::string s) : v_(std::move(s)) {}
    Value(Array a) : v_(std::move(a)) {}
    Value(Table t) : v_(std::move(t)) {}

    bool is_table() const { return std::holds_alternative<Table>(v_); }
    bool is_array() const { return std::holds_alternative<Array>(v_); }

    Table& table() { return std::get<Table>(v_); }
    const Table& table() const { return std::get<Table>(v_); }
    Array& array() { return std::get<Array>(v_); }
    const Array& array() const { return std::get<Array>(v_); }

    bool as_bool() const { return std::get<bool>(v_); }
    std::int64_t as_int() const {
        if (auto p = std::get_if<std::int64_t>(&v_)) return *p;
        throw ValidationError("TOML: expected an integer");
    }
    double as_double() const {
        if (auto p = std::get_if<double>(&v_)) return *p;
        if (auto p = std::get_if<std::int64_t>(&v_)) return static_cast<double>(*p);
        throw ValidationError("TOML: expected a number");
    }
    const std::string& as_string() const {
        if (auto p = std::get_if<std::string>(&v_)) return *p;
        throw ValidationError("TOML: expected a string");
    }

    const Storage& storage() const { return v_; }

private:
    Storage v_;
};

namespace detail {

inline void skip_ws(std::string_view& s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
}

inline std::string_view strip(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// removes a trailing comment that is not inside a string
inline std::string_view strip_comment(std::string_view s) {
    bool in_str = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') in_str = !in_str;
        if (s[i] == '#' && !in_str) return s.substr(0, i);
    }
    return s;
}

inline Value parse_scalar(std::string_view tok, int line);

inline Value parse_value(std::string_view tok, int line) {
    tok = strip(tok);
    if (tok.empty()) throw ValidationError("TOML line " + std::to_string(line) + ": empty value");
    if (tok.front() == '[') {
        if (tok.back() != ']')
            throw ValidationError("TOML line " + std::to_string(line) + ": unterminated array");
        Array arr;
        std::string_view body = tok.substr(1, tok.size() - 2);
        std::size_t depth = 0, start = 0;
        bool in_str = false;
        for (std::size_t i = 0; i <= body.size(); ++i) {
            const bool at_end = (i == body.size());
            const char c = at_end ? ',' : body[i];
            if (!at_end && c == '"') in_str = !in_str;
            if (in_str) continue;
            if (c == '[') ++depth;
            if (c == ']') --depth;
            if (c == ',' && depth == 0) {
                auto piece = strip(body.substr(start, i - start));
                if (!piece.empty()) arr.push_back(parse_value(piece, line));
                start = i + 1;
            }
        }
        return Value(std::move(arr));
    }
    return parse_scalar(tok, line);
}

inline Value parse_scalar(std::string_view tok, int line) {
    if (tok.front() == '"') {
        if (tok.size() < 2 || tok.back() != '"')
            throw ValidationError("TOML line " + std::to_string(line) + ": unterminated string");
        std::string out;
        for (std::size_t i = 1; i + 1 < tok.size(); ++i) {
            if (tok[i] == '\\' && i + 2 < tok.size()) {
                ++i;
                switch (tok[i]) {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    default: out += tok[i];
                }
            } else {
                out += tok[i];
            }
        }
        return Value(std::move(out));
    }
    if (tok == "true") return Value(true);
    if (tok == "false") return Value(false);
    const bool looks_float = tok.find_first_of(".eE") != std::string_view::npos ||
                             tok == "inf" || tok == "-inf" || tok == "nan";
    if (!looks_float) {
        std::int64_t i = 0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), i);
        if (ec == std::errc{} && p == tok.data() + tok.size()) return Value(i);
    }
    double d = 0.0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), d);
    if (ec == std::errc{} && p == tok.data() + tok.size()) return Value(d);
    throw ValidationError("TOML line " + std::to_string(line) + ": cannot parse value '" +
                          std::string(tok) + "'");
}

inline std::vector<std::string> split_key_path(std::string_view s, int line) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == '.') {
            if (cur.empty())
                throw ValidationError("TOML line " + std::to_string(line) + ": empty key segment");
            parts.push_back(cur);
            cur.clear();
        } else if (c != ' ' && c != '\t') {
            cur += c;
        }
    }
    if (cur.empty()) throw ValidationError("TOML line " + std::to_string(line) + ": empty key");
    parts.push_back(cur);
    return parts;
}

inline Table* descend(Table& root, const std::vector<std::string>& path, std::size_t n, int line) {
    Table* t = &root;
    for (std::size_t i = 0; i < n; ++i) {
        auto it = t->find(path[i]);
        if (it == t->end()) it = t->emplace(path[i], Value(Table{})).first;
        Value& v = it->second;
        if (v.is_array()) {
            if (v.array().empty() || !v.array().back().is_table())
                throw ValidationError("TOML line " + std::to_string(line) + ": key '" + path[i] +
                                      "' is not a table");
            t = &v.array().back().table();
        } else if (v.is_table()) {
            t = &v.table();
        } else {
            throw ValidationError("TOML line " + std::to_string(line) + ": key '" + path[i] +
                                  "' is not a table");
        }
    }
    return t;
}

} // namespace detail

inline Table parse(std::string_view text) {
    Table root;
    std::vector<std::string> prefix; // current [table] path
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        line = detail::strip(detail::strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            const bool is_array = line.size() > 1 && line[1] == '[';
            const std::size_t close = line.find(is_array ? "]]" : "]");
            if (close == std::string_view::npos)
                throw ValidationError("TOML line " + std::to_string(line_no) + ": bad table header");
            auto path = detail::split_key_path(
                line.substr(is_array ? 2 : 1, close - (is_array ? 2 : 1)), line_no);
            Table* parent = detail::descend(root, path, path.size() - 1, line_no);
            const std::string& leaf = path.back();
            if (is_array) {
                auto it = parent->find(leaf);
                if (it == parent->end()) it = parent->emplace(leaf, Value(Array{})).first;
                if (!it->second.is_array())
                    throw ValidationError("TOML line " + std::to_string(line_no) + ": '" + leaf +
                                          "' is not an array of tables");
                it->second.array().push_back(Value(Table{}));
            } else {
                parent->emplace(leaf, Value(Table{}));
            }
            prefix = std::move(path);
            continue;
        }
        const std::size_t eq = [&] {
            bool in_str = false;
            for (std::size_t i = 0; i < line.size(); ++i) {
                if (line[i] == '"') in_str = !in_str;
                if (line[i] == '=' && !in_str) return i;
            }
            return std::string_view::npos;
        }();
        if (eq == std::string_view::npos)
            throw ValidationError("TOML line " + std::to_string(line_no) + ": expected key = value");
        auto key = detail::strip(line.substr(0, eq));
        auto valtext = line.substr(eq + 1);
        // multi-line array: keep consuming lines until brackets balance
        std::string joined(valtext);
        auto balance = [](std::string_view s) {
            int d = 0;
            bool in_str = false;
            for (char c : s) {
                if (c == '"') in_str = !in_str;
                if (in_str) continue;
                if (c == '[') ++d;
                if (c == ']') --d;
            }
            return d;
        };
        while (balance(joined) > 0 && pos <= text.size()) {
            std::size_t nl2 = text.find('\n', pos);
            if (nl2 == std::string_view::npos) nl2 = text.size();
            joined += std::string(detail::strip_comment(text.substr(pos, nl2 - pos)));
            pos = nl2 + 1;
            ++line_no;
        }
        Table* t = detail::descend(root, prefix, prefix.size(), line_no);
        auto kp = detail::split_key_path(key, line_no);
        Table* kt = detail::descend(*t, kp, kp.size() - 1, line_no);
        (*kt)[kp.back()] = detail::parse_value(joined, line_no);
    }
    return root;
}

// --- emission ---------------------------------------------------------

inline std::string format_double(double d) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), d);
    std::string s(buf, p);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0"; // TOML floats need a marker
    return s;
}

namespace detail {

inline void emit_scalar(std::string& out, const Value& v) {
    std::visit(
        [&out](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, bool>) {
                out += x ? "true" : "false";
            } else if constexpr (std::is_same_v<T, std::int64_t>) {
                out += std::to_string(x);
            } else if constexpr (std::is_same_v<T, double>) {
                out += format_double(x);
            } else if constexpr (std::is_same_v<T, std::string>) {
                out += '"';
                for (char c : x) {
                    if (c == '"' || c == '\\') out += '\\';
                    out += c;
                }
                out += '"';
            } else if constexpr (std::is_same_v<T, Array>) {
                out += '[';
                for (std::size_t i = 0; i < x.size(); ++i) {
                    if (i) out += ", ";
                    emit_scalar(out, x[i]);
                }
                out += ']';
            } else {
                throw ValidationError("TOML: nested inline tables are not supported");
            }
        },
        v.storage());
}

inline void emit_table(std::string& out, const Table& t, const std::string& path) {
    for (const auto& [k, v] : t) {
        if (v.is_table() || (v.is_array() && !v.array().empty() && v.array().front().is_table()))
            continue;
        out += k;
        out += " = ";
        emit_scalar(out, v);
        out += '\n';
    }
    for (const auto& [k, v] : t) {
        const std::string child = path.empty() ? k : path + "." + k;
        if (v.is_table()) {
            out += "\n[" + child + "]\n";
            emit_table(out, v.table(), child);
        } else if (v.is_array() && !v.array().empty() && v.array().front().is_table()) {
            for (const auto& el : v.array()) {
                out += "\n[[" + child + "]]\n";
                emit_table(out, el.table(), child);
            }
        }
    }
}

} // namespace detail

inline std::string emit(const Table& t) {
    std::string out;
    detail::emit_table(out, t, "");
    return out;
}

inline const Value& require(const Table& t, const std::string& key) {
    auto it = t.find(key);
    if (it == t.end()) throw ValidationError("TOML: missing key '" + key + "'");
    return it->second;
}

template <class T>
T get_or(const Table& t, const std::string& key, T fallback) {
    auto it = t.find(key);
    if (it == t.end()) return fallback;
    if constexpr (std::is_same_v<T, double>) return it->second.as_double();
    else if constexpr (std::is_same_v<T, std::int64_t>) return it->second.as_int();
    else if constexpr (std::is_same_v<T, int>) return static_cast<int>(it->second.as_int());
    else if constexpr (std::is_same_v<T, bool>) return it->second.as_bool();
    else if constexpr (std::is_same_v<T, std::string>) return it->second.as_string();
    else static_assert(!sizeof(T), "unsupported get_or type");
}

} // namespace bss::toml
