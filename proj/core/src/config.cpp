#include "fexpbayes/config.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fexpbayes/errors.hpp"

namespace fexpbayes {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double parse_double(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw config_error("key '" + key + "': not a number: '" + v + "'");
    return x;
}

std::int64_t parse_int(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
        throw config_error("key '" + key + "': not an integer: '" + v + "'");
    return x;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    if (!v.empty() && v[0] == '-')
        throw config_error("key '" + key + "': must be nonnegative: '" + v + "'");
    char* end = nullptr;
    const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
        throw config_error("key '" + key + "': not an integer: '" + v + "'");
    return x;
}

std::vector<std::string> split_commas(const std::string& v) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= v.size()) {
        const std::size_t comma = v.find(',', start);
        if (comma == std::string::npos) {
            parts.push_back(trim(v.substr(start)));
            break;
        }
        parts.push_back(trim(v.substr(start, comma - start)));
        start = comma + 1;
    }
    return parts;
}

std::string format_double(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& is) {
    KeyValueConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("line " + std::to_string(lineno) +
                               ": expected key = value, got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty())
            throw config_error("line " + std::to_string(lineno) + ": empty key");
        cfg.kv_[key] = trim(line.substr(eq + 1));
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::parse_string(const std::string& text) {
    std::istringstream is(text);
    return parse(is);
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw config_error("cannot open config file: " + path);
    return parse(is);
}

std::string KeyValueConfig::get_string(const std::string& key) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) throw config_error("missing config key: " + key);
    return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) const {
    const auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key) const {
    return parse_double(key, get_string(key));
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

std::int64_t KeyValueConfig::get_int(const std::string& key) const {
    return parse_int(key, get_string(key));
}

std::int64_t KeyValueConfig::get_int(const std::string& key,
                                     std::int64_t fallback) const {
    return has(key) ? get_int(key) : fallback;
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key) const {
    return parse_u64(key, get_string(key));
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key,
                                      std::uint64_t fallback) const {
    return has(key) ? get_u64(key) : fallback;
}

bool KeyValueConfig::get_bool(const std::string& key) const {
    const std::string v = get_string(key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw config_error("key '" + key + "': expected true/false/1/0, got '" + v + "'");
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
    return has(key) ? get_bool(key) : fallback;
}

std::vector<double> KeyValueConfig::get_double_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& part : split_commas(get_string(key)))
        out.push_back(parse_double(key, part));
    return out;
}

std::vector<std::uint64_t> KeyValueConfig::get_u64_list(const std::string& key) const {
    std::vector<std::uint64_t> out;
    for (const auto& part : split_commas(get_string(key)))
        out.push_back(parse_u64(key, part));
    return out;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
    if (key.empty()) throw config_error("empty config key");
    kv_[key] = value;
}

void KeyValueConfig::set_double(const std::string& key, double value) {
    set(key, format_double(value));
}

void KeyValueConfig::set_int(const std::string& key, std::int64_t value) {
    set(key, std::to_string(value));
}

void KeyValueConfig::set_u64(const std::string& key, std::uint64_t value) {
    set(key, std::to_string(value));
}

void KeyValueConfig::set_bool(const std::string& key, bool value) {
    set(key, value ? "true" : "false");
}

void KeyValueConfig::set_double_list(const std::string& key,
                                     const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += format_double(v[i]);
    }
    set(key, s);
}

void KeyValueConfig::set_u64_list(const std::string& key,
                                  const std::vector<std::uint64_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(v[i]);
    }
    set(key, s);
}

std::string KeyValueConfig::serialize() const {
    std::string out;
    for (const auto& [k, v] : kv_) {
        out += k;
        out += " = ";
        out += v;
        out += '\n';
    }
    return out;
}

void KeyValueConfig::save(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw config_error("cannot write config file: " + path);
    os << serialize();
}

}  // namespace fexpbayes
