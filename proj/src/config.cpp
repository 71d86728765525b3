#include "fraclap/config.hpp"

#include "fraclap/errors.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace fl {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
    return true;
}

}  // namespace

FlatConfig FlatConfig::parse(const std::string& text) {
    FlatConfig cfg;
    std::istringstream in(text);
    std::string raw;
    long lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        if (line[0] == '[') throw ParseError("tables are not supported", lineno);
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected key = value", lineno);
        const std::string key = trim(line.substr(0, eq));
        std::string rest = trim(line.substr(eq + 1));
        if (!valid_key(key)) throw ParseError("invalid key '" + key + "'", lineno);
        Value v;
        v.line = lineno;
        if (!rest.empty() && rest[0] == '"') {
            const auto close = rest.find('"', 1);
            if (close == std::string::npos) throw ParseError("unterminated string", lineno);
            v.quoted = true;
            v.text = rest.substr(1, close - 1);
            const std::string tail = trim(rest.substr(close + 1));
            if (!tail.empty() && tail[0] != '#') throw ParseError("trailing characters", lineno);
        } else {
            const auto hash = rest.find('#');
            if (hash != std::string::npos) rest = trim(rest.substr(0, hash));
            if (rest.empty()) throw ParseError("missing value for '" + key + "'", lineno);
            if (rest[0] == '[' || rest[0] == '{') throw ParseError("arrays and tables are not supported", lineno);
            v.text = rest;
        }
        if (!cfg.values_.emplace(key, v).second) throw ParseError("duplicate key '" + key + "'", lineno);
    }
    return cfg;
}

FlatConfig FlatConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::optional<double> FlatConfig::number(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    const auto& v = it->second;
    double x = 0;
    const char* end = v.text.data() + v.text.size();
    const auto r = std::from_chars(v.text.data(), end, x);
    if (v.quoted || r.ec != std::errc() || r.ptr != end)
        throw ParseError("'" + key + "' must be a number", v.line);
    return x;
}

std::optional<int> FlatConfig::integer(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    const auto& v = it->second;
    int x = 0;
    const char* end = v.text.data() + v.text.size();
    const auto r = std::from_chars(v.text.data(), end, x);
    if (v.quoted || r.ec != std::errc() || r.ptr != end)
        throw ParseError("'" + key + "' must be an integer", v.line);
    return x;
}

std::optional<std::string> FlatConfig::string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    if (!it->second.quoted) throw ParseError("'" + key + "' must be a quoted string", it->second.line);
    return it->second.text;
}

void FlatConfig::require_keys(const std::set<std::string>& allowed) const {
    for (const auto& [k, v] : values_)
        if (!allowed.count(k)) throw ParseError("unknown key '" + k + "'", v.line);
}

}  // namespace fl
