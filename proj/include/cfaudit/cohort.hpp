#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace cfaudit {

enum class RaceEthnicity : std::uint8_t { Asian, Black, HispanicLatino, White, OtherUnknown };
inline constexpr std::size_t kNumRaces = 5;
inline constexpr std::array<RaceEthnicity, kNumRaces> kAllRaces = {
    RaceEthnicity::Asian, RaceEthnicity::Black, RaceEthnicity::HispanicLatino,
    RaceEthnicity::White, RaceEthnicity::OtherUnknown};

enum class Sex : std::uint8_t { Female, Male, Unknown };

const char* race_name(RaceEthnicity r);
const char* sex_name(Sex s);
std::optional<RaceEthnicity> race_from_name(const std::string& name);
std::optional<Sex> sex_from_name(const std::string& name);

// Vital signs carried per observation; blood pressure may arrive as
// systolic/diastolic, mean, or both.
enum class Vital : std::uint8_t { HeartRate, RespRate, TemperatureC, MapMmhg, Sbp, Dbp };
inline constexpr std::size_t kNumVitals = 6;
extern const std::array<const char*, kNumVitals> kVitalNames;

enum class Lab : std::uint8_t {
    Albumin, AnionGap, Bicarbonate, Bun, Creatinine, Glucose, Hemoglobin,
    Lactate, Platelets, Potassium, Rbc, Rdw, Sodium
};
inline constexpr std::size_t kNumLabs = 13;
extern const std::array<const char*, kNumLabs> kLabNames;

// Non-respiratory SOFA components, in the column order of the cohort CSV.
enum class SofaComponent : std::uint8_t { Coagulation, Liver, Cardiovascular, Cns, Renal, Respiratory };
inline constexpr std::size_t kNumSofaComponents = 6;
extern const std::array<const char*, kNumSofaComponents> kSofaComponentNames;

// One paired (SpO2, SaO2) measurement with its aligned features and outcomes.
struct PairedObservation {
    std::string obs_id;
    std::string patient_id;
    double spo2 = 0.0;  // percent, [70, 100]
    double sao2 = 0.0;  // percent, [70, 100]
    std::optional<double> time_delta_s;
    RaceEthnicity race_ethnicity = RaceEthnicity::OtherUnknown;
    Sex sex = Sex::Unknown;
    double age = 0.0;
    int comorbidity_score = 0;
    std::array<std::optional<double>, kNumVitals> vitals;
    std::array<std::optional<double>, kNumLabs> labs;
    int sofa_past_total = 0;
    std::array<int, kNumSofaComponents> sofa_past_components{};
    int sofa_future_total = 0;
    int sofa_future_resp = 0;
    int in_hospital_mortality = 0;

    std::optional<double> vital(Vital v) const { return vitals[static_cast<std::size_t>(v)]; }
    std::optional<double> lab(Lab l) const { return labs[static_cast<std::size_t>(l)]; }
    int sofa_past(SofaComponent c) const { return sofa_past_components[static_cast<std::size_t>(c)]; }
    double delta() const { return spo2 - sao2; }
};

enum class Provenance : std::uint8_t { Ingested, Synthetic };

struct CohortTable {
    std::vector<PairedObservation> rows;
    std::string schema_version;
    Provenance provenance = Provenance::Ingested;

    std::size_t n_rows() const { return rows.size(); }
    // obs_id -> row index; built on first use
    const std::unordered_map<std::string, std::size_t>& obs_index() const;

  private:
    mutable std::unordered_map<std::string, std::size_t> obs_index_;
};

// Canonical CSV column names, in order.
extern const std::vector<std::string>& cohort_csv_columns();

struct RowIssue {
    std::size_t line = 0;  // 1-based, header is line 1
    std::string rule;
};

struct ParseIssues {
    std::vector<RowIssue> skipped;  // non-strict mode: offending rows, one entry each
    std::map<std::string, std::size_t> counts_by_rule() const;
};

// Reads the canonical cohort CSV. In strict mode the first invalid row
// throws RowViolationError; otherwise invalid rows are skipped and recorded
// in `issues` (when provided). A missing canonical column always throws
// MissingColumnError.
CohortTable parse_cohort_csv(std::istream& in, bool strict, ParseIssues* issues = nullptr);
CohortTable parse_cohort_csv_file(const std::string& path, bool strict, ParseIssues* issues = nullptr);

void write_cohort_csv(const CohortTable& table, std::ostream& out);
void write_cohort_csv_file(const CohortTable& table, const std::string& path);

// Content hash of the canonical CSV serialization (FNV-1a 64), hex-encoded.
std::string cohort_content_hash(const CohortTable& table);

struct ValidationReport {
    std::size_t n_rows = 0;
    std::size_t n_patients = 0;
    std::map<std::string, std::size_t> violations;          // rule -> count
    std::vector<std::string> duplicate_obs_ids;
    std::map<std::string, std::size_t> rows_per_patient;
    std::map<std::string, double> task_positivity;          // task name -> positive fraction
    std::map<std::string, std::size_t> missing_by_column;   // imputable column -> absent cells

    std::size_t total_violations() const;
    bool clean() const { return total_violations() == 0 && duplicate_obs_ids.empty(); }
};

ValidationReport validate_cohort(const CohortTable& table);

}  // namespace cfaudit
