#pragma once

#include <stdexcept>
#include <string>

namespace due {

enum class ErrorCode {
    InvalidArgument,
    GridMismatch,
    Diverged,
    NoConvergence,
    MissingJacobian,
    ModelBreakdown,
    Schema,
    Io,
};

const char* to_string(ErrorCode code);

/// Base for every error thrown by the library. Carries a machine-readable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Picard iteration hit its cap. `last_bound` is the a-posteriori distance
/// estimate of the final iterate.
class NoConvergenceError : public Error {
public:
    NoConvergenceError(const std::string& message, int iterations, double last_bound)
        : Error(ErrorCode::NoConvergence, message),
          iterations_(iterations), last_bound_(last_bound) {}

    int iterations() const noexcept { return iterations_; }
    double last_bound() const noexcept { return last_bound_; }

private:
    int iterations_;
    double last_bound_;
};

/// FIFO breakdown in the link model (exit time not strictly increasing).
class ModelBreakdownError : public Error {
public:
    ModelBreakdownError(const std::string& link, double time)
        : Error(ErrorCode::ModelBreakdown,
                "FIFO violated on link '" + link + "' at t=" + std::to_string(time)),
          link_(link), time_(time) {}

    const std::string& link() const noexcept { return link_; }
    double time() const noexcept { return time_; }

private:
    std::string link_;
    double time_;
};

/// Input file does not match its schema. `field` is a JSON path such as
/// `od_pairs[0].Q`; `line` is 0 when unknown.
class SchemaError : public Error {
public:
    SchemaError(const std::string& field, const std::string& message, int line = 0)
        : Error(ErrorCode::Schema, format(field, message, line)),
          field_(field), line_(line) {}

    const std::string& field() const noexcept { return field_; }
    int line() const noexcept { return line_; }

private:
    static std::string format(const std::string& field, const std::string& message, int line) {
        std::string out = field.empty() ? message : field + ": " + message;
        if (line > 0) out += " (line " + std::to_string(line) + ")";
        return out;
    }

    std::string field_;
    int line_;
};

}  // namespace due
