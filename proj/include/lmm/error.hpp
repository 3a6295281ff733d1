#pragma once

#include <stdexcept>
#include <string>

namespace lmm {

/// Broad failure class; the CLI maps each to an exit code.
enum class ErrorKind {
    invalid_config,
    analysis_failure,
    io_failure,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct InvalidArgument : Error {
    explicit InvalidArgument(const std::string& what)
        : Error(ErrorKind::invalid_config, what) {}
};

struct AnalysisError : Error {
    explicit AnalysisError(const std::string& what)
        : Error(ErrorKind::analysis_failure, what) {}
};

struct IoError : Error {
    explicit IoError(const std::string& what)
        : Error(ErrorKind::io_failure, what) {}
};

namespace detail {

inline void require(bool cond, const char* msg) {
    if (!cond) throw InvalidArgument(msg);
}

} // namespace detail
} // namespace lmm
