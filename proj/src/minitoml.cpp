#include "punctr/minitoml.hpp"

#include <cctype>
#include <charconv>
#include <stdexcept>

#include "punctr/util.hpp"

namespace punctr::toml {

namespace {

[[noreturn]] void fail(size_t lineno, const std::string& msg) {
    throw FileError("toml parse error at line " + std::to_string(lineno) + ": " + msg);
}

std::string strip_comment(const std::string& line) {
    bool in_str = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (c == '"' && (i == 0 || line[i - 1] != '\\')) in_str = !in_str;
        if (c == '#' && !in_str) return line.substr(0, i);
    }
    return line;
}

Value parse_scalar(const std::string& raw, size_t lineno) {
    Value v;
    std::string s = trim(raw);
    if (s.empty()) fail(lineno, "empty value");
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"') fail(lineno, "unterminated string");
        v.kind = Value::Kind::String;
        std::string out;
        for (size_t i = 1; i + 1 < s.size(); ++i) {
            char c = s[i];
            if (c == '\\' && i + 2 < s.size()) {
                char n = s[++i];
                switch (n) {
                    case 'n': out.push_back('\n'); break;
                    case 't': out.push_back('\t'); break;
                    case '"': out.push_back('"'); break;
                    case '\\': out.push_back('\\'); break;
                    default: fail(lineno, "unsupported escape");
                }
            } else {
                out.push_back(c);
            }
        }
        v.str = out;
        return v;
    }
    if (s == "true" || s == "false") {
        v.kind = Value::Kind::Bool;
        v.boolean = s == "true";
        return v;
    }
    // number: integer if it parses exactly as one, float otherwise
    bool looks_float = s.find_first_of(".eE") != std::string::npos;
    if (!looks_float) {
        int64_t iv = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), iv);
        if (ec == std::errc() && p == s.data() + s.size()) {
            v.kind = Value::Kind::Int;
            v.integer = iv;
            v.real = static_cast<double>(iv);
            return v;
        }
    }
    try {
        size_t used = 0;
        double dv = std::stod(s, &used);
        if (used != s.size()) fail(lineno, "bad number: " + s);
        v.kind = Value::Kind::Float;
        v.real = dv;
        return v;
    } catch (const std::invalid_argument&) {
        fail(lineno, "unrecognized value: " + s);
    } catch (const std::out_of_range&) {
        fail(lineno, "number out of range: " + s);
    }
}

Value parse_value(const std::string& raw, size_t lineno) {
    std::string s = trim(raw);
    if (!s.empty() && s.front() == '[') {
        if (s.back() != ']') fail(lineno, "unterminated array");
        Value v;
        v.kind = Value::Kind::Array;
        std::string body = s.substr(1, s.size() - 2);
        std::string item;
        bool in_str = false;
        for (size_t i = 0; i < body.size(); ++i) {
            char c = body[i];
            if (c == '"' && (i == 0 || body[i - 1] != '\\')) in_str = !in_str;
            if (c == ',' && !in_str) {
                if (!trim(item).empty()) v.array.push_back(parse_scalar(item, lineno));
                item.clear();
            } else {
                item.push_back(c);
            }
        }
        if (!trim(item).empty()) v.array.push_back(parse_scalar(item, lineno));
        return v;
    }
    return parse_scalar(s, lineno);
}

bool valid_key(const std::string& key) {
    if (key.empty()) return false;
    for (char c : key)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
    return true;
}

}  // namespace

double Value::as_number() const {
    if (kind == Kind::Int) return static_cast<double>(integer);
    if (kind == Kind::Float) return real;
    throw FileError("toml value is not a number");
}

const Value& Table::get(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) throw FileError("missing required key: " + key);
    return it->second;
}

std::string Table::get_string(const std::string& key) const {
    const Value& v = get(key);
    if (v.kind != Value::Kind::String) throw FileError("key is not a string: " + key);
    return v.str;
}

std::string Table::get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
}

int64_t Table::get_int(const std::string& key) const {
    const Value& v = get(key);
    if (v.kind != Value::Kind::Int) throw FileError("key is not an integer: " + key);
    return v.integer;
}

int64_t Table::get_int(const std::string& key, int64_t fallback) const {
    return has(key) ? get_int(key) : fallback;
}

double Table::get_double(const std::string& key, double fallback) const {
    return has(key) ? get(key).as_number() : fallback;
}

bool Table::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const Value& v = get(key);
    if (v.kind != Value::Kind::Bool) throw FileError("key is not a boolean: " + key);
    return v.boolean;
}

std::vector<std::string> Table::get_string_array(const std::string& key) const {
    const Value& v = get(key);
    if (v.kind != Value::Kind::Array) throw FileError("key is not an array: " + key);
    std::vector<std::string> out;
    for (const auto& item : v.array) {
        if (item.kind != Value::Kind::String) throw FileError("array item is not a string: " + key);
        out.push_back(item.str);
    }
    return out;
}

Document parse(const std::string& text) {
    Document doc;
    Table* current = &doc.root;

    size_t lineno = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        std::string line = text.substr(pos, nl == std::string::npos ? nl : nl - pos);
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
        ++lineno;

        line = trim(strip_comment(line));
        if (line.empty()) continue;

        if (starts_with(line, "[[")) {
            if (line.size() < 5 || line.substr(line.size() - 2) != "]]")
                fail(lineno, "malformed table-array header");
            std::string name = trim(line.substr(2, line.size() - 4));
            if (!valid_key(name)) fail(lineno, "bad table-array name: " + name);
            doc.arrays[name].emplace_back();
            current = &doc.arrays[name].back();
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') fail(lineno, "malformed table header");
            std::string name = trim(line.substr(1, line.size() - 2));
            if (!valid_key(name)) fail(lineno, "bad table name: " + name);
            current = &doc.tables[name];
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos) fail(lineno, "expected key = value");
        std::string key = trim(line.substr(0, eq));
        if (!valid_key(key)) fail(lineno, "bad key: " + key);
        if (current->values.count(key)) fail(lineno, "duplicate key: " + key);
        current->values.emplace(key, parse_value(line.substr(eq + 1), lineno));
    }
    return doc;
}

Document parse_file(const std::string& path) { return parse(read_file(path)); }

}  // namespace punctr::toml
