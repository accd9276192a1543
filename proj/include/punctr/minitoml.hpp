#ifndef PUNCTR_MINITOML_HPP
#define PUNCTR_MINITOML_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace punctr::toml {

// Minimal TOML subset for plan and train-config files: comments, [table],
// [[array-of-table]], and key = string | integer | float | bool | array of
// scalars. Enough for the shipped configs; anything else is rejected loudly.

struct Value {
    enum class Kind { String, Int, Float, Bool, Array };
    Kind kind = Kind::String;
    std::string str;
    int64_t integer = 0;
    double real = 0.0;
    bool boolean = false;
    std::vector<Value> array;

    double as_number() const;  // Int or Float
};

struct Table {
    std::map<std::string, Value> values;

    bool has(const std::string& key) const { return values.count(key) > 0; }
    const Value& get(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    int64_t get_int(const std::string& key, int64_t fallback) const;
    int64_t get_int(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::string> get_string_array(const std::string& key) const;
};

struct Document {
    Table root;
    std::map<std::string, Table> tables;               // [name]
    std::map<std::string, std::vector<Table>> arrays;  // [[name]]
};

Document parse(const std::string& text);
Document parse_file(const std::string& path);

}  // namespace punctr::toml

#endif  // PUNCTR_MINITOML_HPP
