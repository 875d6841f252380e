#include "cfaudit/cohort.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "cfaudit/csv.hpp"
#include "cfaudit/errors.hpp"
#include "cfaudit/prep.hpp"
#include "cfaudit/version.hpp"

namespace cfaudit {

const std::array<const char*, kNumVitals> kVitalNames = {
    "heart_rate", "resp_rate", "temperature_c", "map_mmhg", "sbp", "dbp"};

const std::array<const char*, kNumLabs> kLabNames = {
    "albumin", "anion_gap", "bicarbonate", "bun", "creatinine", "glucose", "hemoglobin",
    "lactate", "platelets", "potassium", "rbc", "rdw", "sodium"};

const std::array<const char*, kNumSofaComponents> kSofaComponentNames = {
    "coag", "liver", "cardio", "cns", "renal", "resp"};

const char* race_name(RaceEthnicity r) {
    switch (r) {
        case RaceEthnicity::Asian: return "Asian";
        case RaceEthnicity::Black: return "Black";
        case RaceEthnicity::HispanicLatino: return "Hispanic or Latino";
        case RaceEthnicity::White: return "White";
        case RaceEthnicity::OtherUnknown: return "Other or Unknown";
    }
    return "Other or Unknown";
}

const char* sex_name(Sex s) {
    switch (s) {
        case Sex::Female: return "Female";
        case Sex::Male: return "Male";
        case Sex::Unknown: return "Unknown";
    }
    return "Unknown";
}

std::optional<RaceEthnicity> race_from_name(const std::string& name) {
    for (RaceEthnicity r : kAllRaces)
        if (name == race_name(r)) return r;
    return std::nullopt;
}

std::optional<Sex> sex_from_name(const std::string& name) {
    for (Sex s : {Sex::Female, Sex::Male, Sex::Unknown})
        if (name == sex_name(s)) return s;
    return std::nullopt;
}

const std::vector<std::string>& cohort_csv_columns() {
    static const std::vector<std::string> cols = [] {
        std::vector<std::string> c = {"obs_id", "patient_id", "spo2", "sao2", "time_delta_s",
                                      "race_ethnicity", "sex", "age", "comorbidity_score"};
        c.insert(c.end(), {"heart_rate", "resp_rate", "temperature_c", "map_mmhg", "sbp", "dbp"});
        for (const char* lab : kLabNames) c.emplace_back(lab);
        c.emplace_back("sofa_past_total");
        for (const char* comp : kSofaComponentNames) c.emplace_back(std::string("sofa_past_") + comp);
        c.insert(c.end(), {"sofa_future_total", "sofa_future_resp", "in_hospital_mortality"});
        return c;
    }();
    return cols;
}

const std::unordered_map<std::string, std::size_t>& CohortTable::obs_index() const {
    if (obs_index_.size() != rows.size()) {
        obs_index_.clear();
        obs_index_.reserve(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) obs_index_.emplace(rows[i].obs_id, i);
    }
    return obs_index_;
}

std::map<std::string, std::size_t> ParseIssues::counts_by_rule() const {
    std::map<std::string, std::size_t> counts;
    for (const auto& issue : skipped) ++counts[issue.rule];
    return counts;
}

namespace {

struct FieldCursor {
    const std::vector<std::string>& fields;
    const std::vector<std::size_t>& col_of;  // canonical column order -> field index
    std::size_t next = 0;

    const std::string& take() { return fields[col_of[next++]]; }
};

// Rule names double as keys in violation reports.
constexpr const char* kRuleColumnCount = "column_count";
constexpr const char* kRuleMissingValue = "missing_value";
constexpr const char* kRuleBadNumber = "bad_number";
constexpr const char* kRuleSpo2Range = "spo2_range";
constexpr const char* kRuleSao2Range = "sao2_range";
constexpr const char* kRuleTimeDeltaRange = "time_delta_range";
constexpr const char* kRuleRaceValue = "race_value";
constexpr const char* kRuleSexValue = "sex_value";
constexpr const char* kRuleAgeRange = "age_range";
constexpr const char* kRuleComorbidityRange = "comorbidity_range";
constexpr const char* kRuleSofaComponentRange = "sofa_component_range";
constexpr const char* kRuleSofaTotalRange = "sofa_total_range";
constexpr const char* kRuleMortalityBinary = "mortality_binary";

struct RowError {
    std::string rule;
};

double require_double(FieldCursor& cur) {
    const std::string& s = cur.take();
    if (s.empty()) throw RowError{kRuleMissingValue};
    const auto v = csv::parse_double(s);
    if (!v) throw RowError{kRuleBadNumber};
    return *v;
}

int require_int(FieldCursor& cur) {
    const std::string& s = cur.take();
    if (s.empty()) throw RowError{kRuleMissingValue};
    const auto v = csv::parse_int(s);
    if (!v) throw RowError{kRuleBadNumber};
    return static_cast<int>(*v);
}

std::optional<double> optional_double(FieldCursor& cur) {
    const std::string& s = cur.take();
    if (s.empty()) return std::nullopt;
    const auto v = csv::parse_double(s);
    if (!v) throw RowError{kRuleBadNumber};
    return v;
}

PairedObservation parse_row(const std::vector<std::string>& fields,
                            const std::vector<std::size_t>& col_of) {
    FieldCursor cur{fields, col_of};
    PairedObservation obs;

    obs.obs_id = cur.take();
    if (obs.obs_id.empty()) throw RowError{kRuleMissingValue};
    obs.patient_id = cur.take();
    if (obs.patient_id.empty()) throw RowError{kRuleMissingValue};

    obs.spo2 = require_double(cur);
    if (obs.spo2 < 70.0 || obs.spo2 > 100.0) throw RowError{kRuleSpo2Range};
    obs.sao2 = require_double(cur);
    if (obs.sao2 < 70.0 || obs.sao2 > 100.0) throw RowError{kRuleSao2Range};

    obs.time_delta_s = optional_double(cur);
    if (obs.time_delta_s && (*obs.time_delta_s < 0.0 || *obs.time_delta_s > 300.0))
        throw RowError{kRuleTimeDeltaRange};

    {
        const std::string& s = cur.take();
        if (s.empty()) {
            obs.race_ethnicity = RaceEthnicity::OtherUnknown;
        } else {
            const auto r = race_from_name(s);
            if (!r) throw RowError{kRuleRaceValue};
            obs.race_ethnicity = *r;
        }
    }
    {
        const std::string& s = cur.take();
        if (s.empty()) {
            obs.sex = Sex::Unknown;
        } else {
            const auto sx = sex_from_name(s);
            if (!sx) throw RowError{kRuleSexValue};
            obs.sex = *sx;
        }
    }

    obs.age = require_double(cur);
    if (obs.age < 0.0) throw RowError{kRuleAgeRange};
    obs.comorbidity_score = require_int(cur);
    if (obs.comorbidity_score < 0) throw RowError{kRuleComorbidityRange};

    for (std::size_t v = 0; v < kNumVitals; ++v) obs.vitals[v] = optional_double(cur);
    for (std::size_t l = 0; l < kNumLabs; ++l) obs.labs[l] = optional_double(cur);

    obs.sofa_past_total = require_int(cur);
    if (obs.sofa_past_total < 0 || obs.sofa_past_total > 24) throw RowError{kRuleSofaTotalRange};
    for (std::size_t c = 0; c < kNumSofaComponents; ++c) {
        obs.sofa_past_components[c] = require_int(cur);
        if (obs.sofa_past_components[c] < 0 || obs.sofa_past_components[c] > 4)
            throw RowError{kRuleSofaComponentRange};
    }
    obs.sofa_future_total = require_int(cur);
    if (obs.sofa_future_total < 0 || obs.sofa_future_total > 24) throw RowError{kRuleSofaTotalRange};
    obs.sofa_future_resp = require_int(cur);
    if (obs.sofa_future_resp < 0 || obs.sofa_future_resp > 4) throw RowError{kRuleSofaComponentRange};

    obs.in_hospital_mortality = require_int(cur);
    if (obs.in_hospital_mortality != 0 && obs.in_hospital_mortality != 1)
        throw RowError{kRuleMortalityBinary};

    return obs;
}

}  // namespace

CohortTable parse_cohort_csv(std::istream& in, bool strict, ParseIssues* issues) {
    std::string line;
    if (!std::getline(in, line)) throw MissingColumnError(cohort_csv_columns().front());
    const auto header = csv::split_record(line);

    const auto& canonical = cohort_csv_columns();
    std::vector<std::size_t> col_of(canonical.size());
    for (std::size_t c = 0; c < canonical.size(); ++c) {
        bool found = false;
        for (std::size_t f = 0; f < header.size(); ++f) {
            if (header[f] == canonical[c]) {
                col_of[c] = f;
                found = true;
                break;
            }
        }
        if (!found) throw MissingColumnError(canonical[c]);
    }

    CohortTable table;
    table.schema_version = kCohortSchemaVersion;
    table.provenance = Provenance::Ingested;

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        const auto fields = csv::split_record(line);
        try {
            if (fields.size() != header.size()) throw RowError{kRuleColumnCount};
            table.rows.push_back(parse_row(fields, col_of));
        } catch (const RowError& err) {
            if (strict) throw RowViolationError(line_no, err.rule);
            if (issues) issues->skipped.push_back({line_no, err.rule});
        }
    }
    table.obs_index();  // warm the lookup cache while still single-threaded
    return table;
}

CohortTable parse_cohort_csv_file(const std::string& path, bool strict, ParseIssues* issues) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return parse_cohort_csv(in, strict, issues);
}

namespace {

void write_optional(std::ostream& out, const std::optional<double>& v) {
    if (v) out << csv::format_double(*v);
}

}  // namespace

void write_cohort_csv(const CohortTable& table, std::ostream& out) {
    const auto& cols = cohort_csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (i) out << ',';
        out << cols[i];
    }
    out << '\n';
    for (const auto& obs : table.rows) {
        out << csv::escape_field(obs.obs_id) << ',' << csv::escape_field(obs.patient_id) << ','
            << csv::format_double(obs.spo2) << ',' << csv::format_double(obs.sao2) << ',';
        write_optional(out, obs.time_delta_s);
        out << ',' << race_name(obs.race_ethnicity) << ',' << sex_name(obs.sex) << ','
            << csv::format_double(obs.age) << ',' << obs.comorbidity_score;
        for (const auto& v : obs.vitals) {
            out << ',';
            write_optional(out, v);
        }
        for (const auto& l : obs.labs) {
            out << ',';
            write_optional(out, l);
        }
        out << ',' << obs.sofa_past_total;
        for (int c : obs.sofa_past_components) out << ',' << c;
        out << ',' << obs.sofa_future_total << ',' << obs.sofa_future_resp << ','
            << obs.in_hospital_mortality << '\n';
    }
}

void write_cohort_csv_file(const CohortTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    write_cohort_csv(table, out);
}

std::string cohort_content_hash(const CohortTable& table) {
    std::ostringstream buf;
    write_cohort_csv(table, buf);
    const std::string bytes = buf.str();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return std::string("fnv1a64:") + hex;
}

std::size_t ValidationReport::total_violations() const {
    std::size_t total = 0;
    for (const auto& [rule, count] : violations) total += count;
    return total;
}

ValidationReport validate_cohort(const CohortTable& table) {
    ValidationReport report;
    report.n_rows = table.rows.size();

    std::set<std::string> seen;
    std::set<std::string> duplicates;
    for (const auto& obs : table.rows) {
        ++report.rows_per_patient[obs.patient_id];
        if (!seen.insert(obs.obs_id).second) duplicates.insert(obs.obs_id);

        auto flag = [&](const char* rule, bool bad) {
            if (bad) ++report.violations[rule];
        };
        flag("spo2_range", obs.spo2 < 70.0 || obs.spo2 > 100.0);
        flag("sao2_range", obs.sao2 < 70.0 || obs.sao2 > 100.0);
        flag("time_delta_range",
             obs.time_delta_s && (*obs.time_delta_s < 0.0 || *obs.time_delta_s > 300.0));
        flag("age_range", obs.age < 0.0);
        flag("comorbidity_range", obs.comorbidity_score < 0);
        flag("sofa_total_range", obs.sofa_past_total < 0 || obs.sofa_past_total > 24 ||
                                     obs.sofa_future_total < 0 || obs.sofa_future_total > 24);
        bool comp_bad = obs.sofa_future_resp < 0 || obs.sofa_future_resp > 4;
        for (int c : obs.sofa_past_components) comp_bad = comp_bad || c < 0 || c > 4;
        flag("sofa_component_range", comp_bad);
        flag("mortality_binary", obs.in_hospital_mortality != 0 && obs.in_hospital_mortality != 1);

        for (std::size_t v = 0; v < kNumVitals; ++v)
            if (!obs.vitals[v]) ++report.missing_by_column[kVitalNames[v]];
        for (std::size_t l = 0; l < kNumLabs; ++l)
            if (!obs.labs[l]) ++report.missing_by_column[kLabNames[l]];
    }
    report.n_patients = report.rows_per_patient.size();
    report.duplicate_obs_ids.assign(duplicates.begin(), duplicates.end());

    if (!table.rows.empty()) {
        for (Task task : kAllTasks) {
            const TaskLabel labels = make_labels(table, task);
            std::size_t positives = 0;
            for (int y : labels.y) positives += static_cast<std::size_t>(y);
            report.task_positivity[task_name(task)] =
                static_cast<double>(positives) / static_cast<double>(labels.y.size());
        }
    }
    return report;
}

}  // namespace cfaudit
