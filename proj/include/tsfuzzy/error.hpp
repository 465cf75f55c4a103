#pragma once

#include <stdexcept>
#include <string>

namespace tsfuzzy {

/// Broad failure category. The CLI maps each kind onto its own exit code.
enum class ErrorKind { config, data, numerical };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

/// Malformed, inconsistent or out-of-domain input data (including shape mismatches).
struct DataError : Error {
    explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

struct NumericalError : Error {
    explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

/// Re-throws `e` with `prefix` prepended to the message, keeping its type.
[[noreturn]] inline void rethrow_with_context(const Error& e, const std::string& prefix)
{
    const std::string what = prefix + e.what();
    switch (e.kind()) {
    case ErrorKind::config: throw ConfigError(what);
    case ErrorKind::data: throw DataError(what);
    case ErrorKind::numerical: throw NumericalError(what);
    }
    throw Error(e.kind(), what);
}

} // namespace tsfuzzy
