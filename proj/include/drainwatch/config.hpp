#pragma once

#include <map>
#include <string>

#include "drainwatch/common.hpp"

namespace drainwatch {

// Plain-text key=value configuration. Lines starting with '#' are comments.
class KvConfig {
public:
    static KvConfig from_file(const std::string& path);
    static KvConfig from_string(const std::string& text);

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    std::string get(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int64_t get_int(const std::string& key, int64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace drainwatch
