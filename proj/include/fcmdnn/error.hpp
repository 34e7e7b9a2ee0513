#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fcmdnn {

enum class ErrorKind {
    configuration,
    ingestion,
    empty_class,
    invalid_dimension,
    shape_mismatch,
    invalid_fold_count,
    insufficient_data,
    domain,
    training_diverged,
    undefined_auc,
    io,
    parse,
    incompatible_version,
    usage,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can map it onto a stable exit code.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::configuration: return "configuration error";
    case ErrorKind::ingestion: return "ingestion error";
    case ErrorKind::empty_class: return "empty-class error";
    case ErrorKind::invalid_dimension: return "invalid-dimension error";
    case ErrorKind::shape_mismatch: return "shape-mismatch error";
    case ErrorKind::invalid_fold_count: return "invalid-fold-count error";
    case ErrorKind::insufficient_data: return "insufficient-data error";
    case ErrorKind::domain: return "domain error";
    case ErrorKind::training_diverged: return "training-diverged error";
    case ErrorKind::undefined_auc: return "undefined-AUC error";
    case ErrorKind::io: return "I/O error";
    case ErrorKind::parse: return "parse error";
    case ErrorKind::incompatible_version: return "incompatible-version error";
    case ErrorKind::usage: return "usage error";
    }
    return "error";
}

} // namespace fcmdnn
