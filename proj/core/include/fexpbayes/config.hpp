#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace fexpbayes {

// Flat key=value configuration text. One entry per line; '#' starts a
// comment; blank lines are skipped; keys may be dotted (prior.mu). A key
// given twice keeps the last value, so later files or flags can overlay
// earlier ones. serialize() writes keys in sorted order, so equal configs
// produce byte-identical text.
class KeyValueConfig {
  public:
    KeyValueConfig() = default;

    static KeyValueConfig parse(std::istream& is);
    static KeyValueConfig parse_string(const std::string& text);
    static KeyValueConfig load(const std::string& path);

    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    // getters throw config_error on a missing key or malformed value
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::uint64_t get_u64(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key) const;  // true/false/1/0
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_double_list(const std::string& key) const;  // comma separated
    std::vector<std::uint64_t> get_u64_list(const std::string& key) const;

    void set(const std::string& key, const std::string& value);
    void set_double(const std::string& key, double value);  // %.17g
    void set_int(const std::string& key, std::int64_t value);
    void set_u64(const std::string& key, std::uint64_t value);
    void set_bool(const std::string& key, bool value);
    void set_double_list(const std::string& key, const std::vector<double>& v);
    void set_u64_list(const std::string& key, const std::vector<std::uint64_t>& v);

    std::string serialize() const;
    void save(const std::string& path) const;

    const std::map<std::string, std::string>& entries() const { return kv_; }

    friend bool operator==(const KeyValueConfig& a, const KeyValueConfig& b) {
        return a.kv_ == b.kv_;
    }

  private:
    std::map<std::string, std::string> kv_;
};

}  // namespace fexpbayes
