#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace uq {

/// Invalid configuration or argument values supplied by the caller.
struct BadConfig : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A matrix that was required to be positive definite is not, even after
/// exhausting the jitter schedule.
struct NotPositiveDefinite : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A triangular factor has a zero diagonal entry.
struct SingularTriangular : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LengthMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct IndexOutOfRange : std::out_of_range {
    using std::out_of_range::out_of_range;
};

struct FileNotFound : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MissingColumn : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A cell failed to parse; carries the 1-based data row and the column name.
struct ParseError : std::runtime_error {
    ParseError(std::size_t row_, std::string column_, const std::string& what_)
        : std::runtime_error(what_), row(row_), column(std::move(column_)) {}
    std::size_t row;
    std::string column;
};

}  // namespace uq
