#pragma once

#include <stdexcept>
#include <string>

namespace hom {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Scenario or component configuration that violates a type invariant.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A simulation finished without enough events to form the requested estimate.
class StatisticsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require_domain(bool ok, const std::string& what) {
    if (!ok) throw DomainError(what);
}

inline void require_config(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

}  // namespace hom
