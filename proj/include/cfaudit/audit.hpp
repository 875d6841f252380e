#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cfaudit/cohort.hpp"
#include "cfaudit/eval.hpp"
#include "cfaudit/learn.hpp"
#include "cfaudit/prep.hpp"

namespace cfaudit {

enum class ReportFormat : std::uint8_t { Json, Csv, Both };
const char* format_name(ReportFormat f);
std::optional<ReportFormat> format_from_name(const std::string& name);

struct AuditConfig {
    std::string cohort_path;
    std::vector<Task> tasks{kAllTasks.begin(), kAllTasks.end()};
    std::vector<ModelFamily> model_families{kAllFamilies.begin(), kAllFamilies.end()};
    int k = 10;
    std::uint64_t seed = 42;
    double threshold = 0.5;
    std::vector<Axis> axes{kAllAxes.begin(), kAllAxes.end()};
    std::string schema_path;  // optional FeatureSchema override
    std::string out_dir;
    ReportFormat format = ReportFormat::Json;
    bool strict = false;
    LogisticHyper logistic_hyper;
    GbtHyper gbt_hyper;

    static AuditConfig from_json_text(const std::string& text);
    static AuditConfig from_json_file(const std::string& path);
    void validate() const;  // throws InvalidConfigError
};

// One fold-level subgroup metric observation.
struct FoldMetricRecord {
    Task task = Task::Mortality;
    ModelFamily family = ModelFamily::Logistic;
    Arm arm = Arm::ControlSao2;
    Axis axis = Axis::Overall;
    std::string subgroup;
    int fold = 0;
    Metric metric = Metric::Auroc;
    std::optional<double> value;
    std::size_t n = 0;
    bool unstable = false;
};

// Fold-paired comparison of the two arms for one subgroup metric.
struct ArmComparison {
    Task task = Task::Mortality;
    ModelFamily family = ModelFamily::Logistic;
    Axis axis = Axis::Overall;
    std::string subgroup;
    Metric metric = Metric::Auroc;
    std::optional<double> mean_control;
    std::optional<double> mean_treatment;
    std::optional<double> mean_diff;  // control - treatment
    std::optional<double> t_stat;     // +-inf sentinel when sd = 0, mean != 0
    std::optional<double> p_value;
    std::size_t n_pairs = 0;
    std::string stars;
};

struct AuditReport {
    AuditConfig config;  // echo, including all frozen hyperparameters
    std::string cohort_hash;
    std::string toolkit_version;
    std::size_t n_rows = 0;
    std::size_t n_patients = 0;
    double wall_clock_ms = 0.0;  // excluded from determinism comparisons
    std::vector<FoldMetricRecord> records;
    std::vector<ArmComparison> tests;
    std::vector<std::string> warnings;
    // per task: patient -> fold; exported as CSV, not part of the JSON report
    std::map<std::string, std::map<std::string, int>> fold_assignments;
};

AuditReport run_audit(const CohortTable& table, const AuditConfig& cfg);
AuditReport run_audit_file(const AuditConfig& cfg);  // loads cfg.cohort_path

// Throws std::logic_error unless the two matrices agree on every column but
// the last (the oxygen column).
void assert_arm_parity(const FeatureMatrix& control, const FeatureMatrix& treatment);

std::string report_to_json(const AuditReport& report);
AuditReport report_from_json(const std::string& text);

// Writes report.json and/or the tidy CSVs plus fold assignment CSVs into
// `out_dir` (created if needed).
void write_report(const AuditReport& report, ReportFormat format, const std::string& out_dir);

std::uint64_t fnv1a64(const std::string& s);

}  // namespace cfaudit
