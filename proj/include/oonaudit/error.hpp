#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace oonaudit {

// Failure classes map onto CLI exit codes (config 2, data 3, analysis 4).
enum class ErrorCategory { Config, Data, Analysis };

class AuditError : public std::runtime_error {
public:
    AuditError(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

class ConfigError : public AuditError {
public:
    explicit ConfigError(const std::string& what) : AuditError(ErrorCategory::Config, what) {}
};

class DataError : public AuditError {
public:
    explicit DataError(const std::string& what) : AuditError(ErrorCategory::Data, what) {}
};

class AnalysisError : public AuditError {
public:
    explicit AnalysisError(const std::string& what) : AuditError(ErrorCategory::Analysis, what) {}
};

/// Attention target cannot be met by any positive decay rate.
class DegenerateConstraintError : public AnalysisError {
public:
    using AnalysisError::AnalysisError;
};

/// Every exposure value is zero, so inequality measures are undefined.
class AllZeroError : public AnalysisError {
public:
    using AnalysisError::AnalysisError;
};

class UndefinedShareError : public AnalysisError {
public:
    using AnalysisError::AnalysisError;
};

class ExactInfeasibleError : public AnalysisError {
public:
    using AnalysisError::AnalysisError;
};

class EmptySessionsError : public AnalysisError {
public:
    using AnalysisError::AnalysisError;
};

class EmptyCandidatePoolError : public DataError {
public:
    using DataError::DataError;
};

class ParseError : public DataError {
public:
    ParseError(std::size_t line, const std::string& what)
        : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

inline int exit_code(ErrorCategory category) {
    switch (category) {
    case ErrorCategory::Config: return 2;
    case ErrorCategory::Data: return 3;
    case ErrorCategory::Analysis: return 4;
    }
    return 1;
}

}  // namespace oonaudit
