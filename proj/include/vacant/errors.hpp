#pragma once

#include <stdexcept>
#include <string>

namespace vacant {

/// A precondition on an operation's arguments does not hold.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A geometry or experiment cannot be represented (volume, horizon, memory).
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A run configuration failed validation. `key()` names the offending entry.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(what), key_(std::move(key))
    {
    }
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

} // namespace vacant
