#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cfaudit/cohort.hpp"

namespace cfaudit {

enum class Task : std::uint8_t { Mortality, FutureRsofa, SofaIncrease };
inline constexpr std::array<Task, 3> kAllTasks = {Task::Mortality, Task::FutureRsofa,
                                                  Task::SofaIncrease};
const char* task_name(Task t);
std::optional<Task> task_from_name(const std::string& name);

// control = gold-standard SaO2 feeds the oxygen column, treatment = SpO2.
enum class Arm : std::uint8_t { ControlSao2, TreatmentSpo2 };
inline constexpr std::array<Arm, 2> kAllArms = {Arm::ControlSao2, Arm::TreatmentSpo2};
const char* arm_name(Arm a);

struct TaskLabel {
    Task task = Task::Mortality;
    std::vector<int> y;  // aligned to table rows
};

TaskLabel make_labels(const CohortTable& table, Task task);

// Ordered feature list plus the normal ranges used for midpoint imputation.
// `oxygen_saturation` is always the final column.
struct FeatureSchema {
    std::vector<std::string> feature_names;
    std::map<std::string, std::pair<double, double>> imputation_ranges;

    static FeatureSchema defaults();
    static FeatureSchema from_json_text(const std::string& text);
    static FeatureSchema from_json_file(const std::string& path);
    std::string to_json_text() const;

    std::size_t n_features() const { return feature_names.size(); }
    void validate() const;  // throws InvalidConfigError
};

struct FeatureMatrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    Arm arm = Arm::ControlSao2;
    std::vector<double> values;        // row-major, aligned to table row order
    std::vector<std::uint8_t> imputed; // row-major mask of midpoint-filled cells
    std::size_t rsofa_clamp_count = 0;

    double at(std::size_t r, std::size_t c) const { return values[r * n_cols + c]; }
    std::span<const double> row(std::size_t r) const {
        return {values.data() + r * n_cols, n_cols};
    }
    std::map<std::string, std::size_t> imputed_by_column(const FeatureSchema& schema) const;
};

// rSOFA = total minus the five non-respiratory components, clamped to [0,4].
int compute_rsofa(int total, std::span<const int, 5> non_resp_components, bool* clamped = nullptr);

double impute_midpoint(std::optional<double> value, std::pair<double, double> range);

FeatureMatrix build_feature_matrix(const CohortTable& table, const FeatureSchema& schema, Arm arm);

}  // namespace cfaudit
