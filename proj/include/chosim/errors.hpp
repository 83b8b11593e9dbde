#pragma once

#include <stdexcept>
#include <string>

namespace chosim {

// Bad or inconsistent configuration; maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Argument outside its documented domain.
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// Internal invariant violated (ledger ordering, report identities);
// maps to CLI exit code 3.
class ConsistencyError : public std::runtime_error {
public:
    explicit ConsistencyError(const std::string& msg) : std::runtime_error(msg) {}
};

// Operation invoked off its scheduling grid (e.g. measurement between SSB
// instants).
class SchedulingError : public std::runtime_error {
public:
    explicit SchedulingError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace chosim
