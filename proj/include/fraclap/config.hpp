#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>

namespace fl {

// Flat TOML subset: `key = value` lines, `#` comments, blank lines. Values are
// numbers, booleans or double-quoted strings; tables and arrays are rejected.
class FlatConfig {
public:
    static FlatConfig parse(const std::string& text);
    static FlatConfig load(const std::string& path);  // IoError when unreadable

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    std::optional<double> number(const std::string& key) const;
    std::optional<int> integer(const std::string& key) const;
    std::optional<std::string> string(const std::string& key) const;

    // Throws ParseError naming the first key outside `allowed`.
    void require_keys(const std::set<std::string>& allowed) const;

private:
    struct Value {
        bool quoted = false;
        std::string text;
        long line = 0;
    };
    std::map<std::string, Value> values_;
};

}  // namespace fl
