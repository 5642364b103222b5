#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "vacant/errors.hpp"

namespace vacant {

/// Flat `key = value` configuration with typed, key-naming validation.
/// '#' starts a comment; blank lines are ignored; a key may appear once per file.
class FlatConfig {
public:
    static FlatConfig parse(std::istream& in)
    {
        FlatConfig cfg;
        std::string line;
        int number = 0;
        while (std::getline(in, line)) {
            ++number;
            if (const auto hash = line.find('#'); hash != std::string::npos)
                line.erase(hash);
            line = trim(line);
            if (line.empty())
                continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError(line, "line " + std::to_string(number) + ": expected key = value");
            const auto key = trim(line.substr(0, eq));
            const auto value = trim(line.substr(eq + 1));
            if (key.empty())
                throw ConfigError("", "line " + std::to_string(number) + ": empty key");
            if (cfg.values_.count(key))
                throw ConfigError(key, "duplicate config key '" + key + "'");
            cfg.values_[key] = value;
        }
        return cfg;
    }

    static FlatConfig parse_string(const std::string& text)
    {
        std::istringstream in(text);
        return parse(in);
    }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) != 0; }
    void erase(const std::string& key) { values_.erase(key); }
    const std::map<std::string, std::string>& values() const noexcept { return values_; }

    void require_known(const std::set<std::string>& allowed) const
    {
        for (const auto& [k, v] : values_)
            if (!allowed.count(k))
                throw ConfigError(k, "unknown config key '" + k + "'");
    }

    std::string get_string(const std::string& key, const std::string& fallback) const
    {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    template <class Int>
    Int get_int(const std::string& key, Int fallback) const
    {
        auto it = values_.find(key);
        if (it == values_.end())
            return fallback;
        return parse_int<Int>(key, it->second);
    }

    double get_double(const std::string& key, double fallback) const
    {
        auto it = values_.find(key);
        if (it == values_.end())
            return fallback;
        return parse_double(key, it->second);
    }

    bool get_bool(const std::string& key, bool fallback) const
    {
        auto it = values_.find(key);
        if (it == values_.end())
            return fallback;
        const auto& v = it->second;
        if (v == "true" || v == "1" || v == "yes")
            return true;
        if (v == "false" || v == "0" || v == "no")
            return false;
        throw ConfigError(key, "config key '" + key + "' expects true or false, got '" + v + "'");
    }

    std::vector<std::string> get_list(const std::string& key) const
    {
        std::vector<std::string> out;
        auto it = values_.find(key);
        if (it == values_.end())
            return out;
        std::string item;
        std::istringstream in(it->second);
        while (std::getline(in, item, ','))
            if (auto t = trim(item); !t.empty())
                out.push_back(t);
        return out;
    }

    template <class Int>
    std::vector<Int> get_int_list(const std::string& key) const
    {
        std::vector<Int> out;
        for (const auto& s : get_list(key))
            out.push_back(parse_int<Int>(key, s));
        return out;
    }

    std::vector<double> get_double_list(const std::string& key) const
    {
        std::vector<double> out;
        for (const auto& s : get_list(key))
            out.push_back(parse_double(key, s));
        return out;
    }

    /// Canonical text: one `key = value` per line in key order.
    std::string render() const
    {
        std::string out;
        for (const auto& [k, v] : values_)
            out += k + " = " + v + "\n";
        return out;
    }

private:
    static std::string trim(const std::string& s)
    {
        const auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos)
            return {};
        const auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    template <class Int>
    static Int parse_int(const std::string& key, const std::string& v)
    {
        Int out{};
        const auto* end = v.data() + v.size();
        auto [ptr, ec] = std::from_chars(v.data(), end, out);
        if (ec == std::errc() && ptr == end)
            return out;
        // accept integral scientific notation such as 1e6
        try {
            std::size_t used = 0;
            const double d = std::stod(v, &used);
            if (used == v.size() && d >= static_cast<double>(std::numeric_limits<Int>::lowest()) &&
                d < static_cast<double>(std::numeric_limits<Int>::max()) &&
                d == static_cast<double>(static_cast<Int>(d)))
                return static_cast<Int>(d);
        } catch (const std::exception&) {
        }
        throw ConfigError(key, "config key '" + key + "' expects an integer, got '" + v + "'");
    }

    static double parse_double(const std::string& key, const std::string& v)
    {
        try {
            std::size_t used = 0;
            const double d = std::stod(v, &used);
            if (used == v.size())
                return d;
        } catch (const std::exception&) {
        }
        throw ConfigError(key, "config key '" + key + "' expects a number, got '" + v + "'");
    }

    std::map<std::string, std::string> values_;
};

} // namespace vacant
