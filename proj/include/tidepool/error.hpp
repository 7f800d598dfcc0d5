#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace tidepool {

enum class Errc {
    io,
    missing_column,
    malformed_row,
    non_monotonic_dates,
    empty_file,
    insufficient_data,
    empty_input,
    column_mismatch,
    scaler_mismatch,
    format_version,
    missing_artifact,
    empty_series,
    empty_dataset,
    empty_test_set,
    empty_batch,
    non_finite_input,
    non_finite_loss,
    shape_mismatch,
    stale_cache,
    precondition,
};

inline const char* errc_name(Errc code) {
    switch (code) {
    case Errc::io: return "IoError";
    case Errc::missing_column: return "MissingColumn";
    case Errc::malformed_row: return "MalformedRow";
    case Errc::non_monotonic_dates: return "NonMonotonicDates";
    case Errc::empty_file: return "EmptyFile";
    case Errc::insufficient_data: return "InsufficientData";
    case Errc::empty_input: return "EmptyInput";
    case Errc::column_mismatch: return "ColumnMismatch";
    case Errc::scaler_mismatch: return "ScalerMismatch";
    case Errc::format_version: return "FormatVersion";
    case Errc::missing_artifact: return "MissingArtifact";
    case Errc::empty_series: return "EmptySeries";
    case Errc::empty_dataset: return "EmptyDataset";
    case Errc::empty_test_set: return "EmptyTestSet";
    case Errc::empty_batch: return "EmptyBatch";
    case Errc::non_finite_input: return "NonFiniteInput";
    case Errc::non_finite_loss: return "NonFiniteLoss";
    case Errc::shape_mismatch: return "ShapeMismatch";
    case Errc::stale_cache: return "StaleCache";
    case Errc::precondition: return "PreconditionViolated";
    }
    return "Error";
}

/// Every failure raised by the library. `code()` identifies the failure kind;
/// `line()` is the 1-based source line for file-parsing errors.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message, std::optional<std::size_t> line = std::nullopt)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code), line_(line) {}

    Errc code() const noexcept { return code_; }
    std::optional<std::size_t> line() const noexcept { return line_; }

    /// Errors that stem from the numerics rather than from the inputs.
    bool is_numerical() const noexcept { return code_ == Errc::non_finite_loss; }

private:
    Errc code_;
    std::optional<std::size_t> line_;
};

inline std::string at_line(const std::string& path, std::size_t line) {
    return path + ":" + std::to_string(line);
}

} // namespace tidepool
