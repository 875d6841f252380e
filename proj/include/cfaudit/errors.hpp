#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cfaudit {

struct MissingColumnError : std::runtime_error {
    explicit MissingColumnError(const std::string& column)
        : std::runtime_error("missing column: " + column), column(column) {}
    std::string column;
};

struct RowViolationError : std::runtime_error {
    RowViolationError(std::size_t line, const std::string& rule)
        : std::runtime_error("row violation at line " + std::to_string(line) + ": " + rule),
          line(line),
          rule(rule) {}
    std::size_t line;
    std::string rule;
};

struct InvalidConfigError : std::runtime_error {
    explicit InvalidConfigError(const std::string& reason)
        : std::runtime_error("invalid config: " + reason) {}
};

struct NonConvergenceError : std::runtime_error {
    explicit NonConvergenceError(const std::string& what)
        : std::runtime_error("did not converge: " + what) {}
};

struct MissingOutcomeError : std::runtime_error {
    explicit MissingOutcomeError(const std::string& column)
        : std::runtime_error("missing outcome column: " + column) {}
};

struct TooFewPatientsError : std::runtime_error {
    TooFewPatientsError(std::size_t n_patients, int k)
        : std::runtime_error("cannot assign " + std::to_string(n_patients) +
                             " patients to " + std::to_string(k) + " folds") {}
};

struct FoldOutOfRangeError : std::runtime_error {
    FoldOutOfRangeError(int fold, int k)
        : std::runtime_error("fold " + std::to_string(fold) + " out of range [0," +
                             std::to_string(k) + ")") {}
};

struct SingleClassTrainingError : std::runtime_error {
    SingleClassTrainingError() : std::runtime_error("training labels contain a single class") {}
};

struct DimensionMismatchError : std::runtime_error {
    DimensionMismatchError(std::size_t expected, std::size_t got)
        : std::runtime_error("feature count mismatch: model expects " + std::to_string(expected) +
                             ", matrix has " + std::to_string(got)) {}
};

struct InsufficientPairsError : std::runtime_error {
    explicit InsufficientPairsError(std::size_t n)
        : std::runtime_error("paired test needs at least 2 defined pairs, got " +
                             std::to_string(n)) {}
};

struct UnknownObsIdError : std::runtime_error {
    explicit UnknownObsIdError(const std::string& obs_id)
        : std::runtime_error("prediction obs_id not present in cohort: " + obs_id) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error("io error: " + what) {}
};

}  // namespace cfaudit
