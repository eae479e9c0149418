#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pmtbn {

/// Base of every error raised by the library. `what()` is prefixed with the
/// error kind, e.g. "CycleError: edge a -> b lies on a directed cycle".
class Error : public std::runtime_error {
  public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

  private:
    std::string kind_;
};

#define PMTBN_DEFINE_ERROR(Name)                                          \
    class Name : public Error {                                           \
      public:                                                             \
        explicit Name(const std::string& message) : Error(#Name, message) {} \
    }

// Structure and model validation
PMTBN_DEFINE_ERROR(CycleError);
PMTBN_DEFINE_ERROR(UnknownNodeError);
PMTBN_DEFINE_ERROR(DuplicateError);
PMTBN_DEFINE_ERROR(InvalidModelError);
PMTBN_DEFINE_ERROR(IncompleteAssignmentError);

// File formats
PMTBN_DEFINE_ERROR(HeaderMismatchError);
PMTBN_DEFINE_ERROR(MissingCptRowError);
PMTBN_DEFINE_ERROR(RowSumError);
PMTBN_DEFINE_ERROR(IoError);

// Learning
PMTBN_DEFINE_ERROR(EmptyDataError);
PMTBN_DEFINE_ERROR(DisconnectedError);
PMTBN_DEFINE_ERROR(InvalidArgumentError);

// Inference
PMTBN_DEFINE_ERROR(CardinalityMismatchError);
PMTBN_DEFINE_ERROR(VariableNotInScopeError);
PMTBN_DEFINE_ERROR(ImpossibleEvidenceError);
PMTBN_DEFINE_ERROR(TooLargeError);

// Evaluation
PMTBN_DEFINE_ERROR(EmptyDatasetError);
PMTBN_DEFINE_ERROR(StudyError);

#undef PMTBN_DEFINE_ERROR

/// A malformed line in one of the text formats. Line numbers are 1-based.
class SyntaxError : public Error {
  public:
    SyntaxError(std::size_t line, const std::string& message)
        : Error("SyntaxError", "line " + std::to_string(line) + ": " + message), line_(line) {}

    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

/// A dataset cell naming a state its variable does not have.
class UnknownStateLabelError : public Error {
  public:
    UnknownStateLabelError(std::size_t row, const std::string& column, const std::string& label)
        : Error("UnknownStateLabelError",
                "row " + std::to_string(row) + ", column '" + column + "': unknown state '" +
                    label + "'"),
          row_(row),
          column_(column) {}

    std::size_t row() const noexcept { return row_; }
    const std::string& column() const noexcept { return column_; }

  private:
    std::size_t row_;
    std::string column_;
};

}  // namespace pmtbn
