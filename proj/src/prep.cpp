#include "cfaudit/prep.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cfaudit/errors.hpp"

namespace cfaudit {

const char* task_name(Task t) {
    switch (t) {
        case Task::Mortality: return "mortality";
        case Task::FutureRsofa: return "future_rsofa";
        case Task::SofaIncrease: return "sofa_increase";
    }
    return "mortality";
}

std::optional<Task> task_from_name(const std::string& name) {
    for (Task t : kAllTasks)
        if (name == task_name(t)) return t;
    return std::nullopt;
}

const char* arm_name(Arm a) {
    return a == Arm::ControlSao2 ? "control_sao2" : "treatment_spo2";
}

TaskLabel make_labels(const CohortTable& table, Task task) {
    TaskLabel labels;
    labels.task = task;
    labels.y.reserve(table.rows.size());
    for (const auto& obs : table.rows) {
        int y = 0;
        switch (task) {
            case Task::Mortality: y = obs.in_hospital_mortality; break;
            case Task::FutureRsofa: y = obs.sofa_future_resp >= 1 ? 1 : 0; break;
            case Task::SofaIncrease:
                y = obs.sofa_future_total - obs.sofa_past_total >= 2 ? 1 : 0;
                break;
        }
        labels.y.push_back(y);
    }
    return labels;
}

namespace {

// Everything except sbp/dbp (folded into map_mmhg) and the always-present
// demographics/SOFA columns.
const std::vector<std::string>& imputable_features() {
    static const std::vector<std::string> f = [] {
        std::vector<std::string> v = {"heart_rate", "resp_rate", "temperature_c", "map_mmhg"};
        for (const char* lab : kLabNames) v.emplace_back(lab);
        return v;
    }();
    return f;
}

}  // namespace

FeatureSchema FeatureSchema::defaults() {
    FeatureSchema schema;
    schema.feature_names = {"age", "sex_female", "comorbidity_score",
                            "heart_rate", "resp_rate", "temperature_c", "map_mmhg"};
    for (const char* lab : kLabNames) schema.feature_names.emplace_back(lab);
    schema.feature_names.insert(schema.feature_names.end(),
                                {"sofa_past_total", "sofa_past_resp", "sofa_past_cardio",
                                 "oxygen_saturation"});
    schema.imputation_ranges = {
        {"heart_rate", {60.0, 100.0}}, {"resp_rate", {12.0, 20.0}},
        {"temperature_c", {36.5, 37.5}}, {"map_mmhg", {70.0, 100.0}},
        {"albumin", {3.5, 5.5}}, {"anion_gap", {3.0, 11.0}}, {"bicarbonate", {22.0, 28.0}},
        {"bun", {7.0, 20.0}}, {"creatinine", {0.6, 1.2}}, {"glucose", {70.0, 100.0}},
        {"hemoglobin", {12.0, 17.0}}, {"lactate", {0.5, 2.0}}, {"platelets", {150.0, 400.0}},
        {"potassium", {3.5, 5.0}}, {"rbc", {4.2, 5.9}}, {"rdw", {11.5, 14.5}},
        {"sodium", {135.0, 145.0}}};
    return schema;
}

void FeatureSchema::validate() const {
    if (feature_names.empty() || feature_names.back() != "oxygen_saturation")
        throw InvalidConfigError("feature schema must end with oxygen_saturation");
    for (const auto& [name, range] : imputation_ranges)
        if (!(range.first < range.second))
            throw InvalidConfigError("imputation range for " + name + " must have low < high");
    for (const auto& name : imputable_features()) {
        bool used = false;
        for (const auto& f : feature_names) used = used || f == name;
        if (used && imputation_ranges.find(name) == imputation_ranges.end())
            throw InvalidConfigError("no imputation range for feature " + name);
    }
}

FeatureSchema FeatureSchema::from_json_text(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    FeatureSchema schema = defaults();
    if (j.contains("feature_names")) schema.feature_names = j["feature_names"].get<std::vector<std::string>>();
    if (j.contains("imputation_ranges")) {
        for (const auto& [name, range] : j["imputation_ranges"].items()) {
            if (!range.is_array() || range.size() != 2)
                throw InvalidConfigError("imputation range for " + name + " must be [low, high]");
            schema.imputation_ranges[name] = {range[0].get<double>(), range[1].get<double>()};
        }
    }
    schema.validate();
    return schema;
}

FeatureSchema FeatureSchema::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

std::string FeatureSchema::to_json_text() const {
    nlohmann::json j;
    j["feature_names"] = feature_names;
    nlohmann::json ranges;
    for (const auto& [name, range] : imputation_ranges)
        ranges[name] = {range.first, range.second};
    j["imputation_ranges"] = ranges;
    return j.dump(2);
}

int compute_rsofa(int total, std::span<const int, 5> non_resp_components, bool* clamped) {
    int sum = 0;
    for (int c : non_resp_components) sum += c;
    const int raw = total - sum;
    const int value = raw < 0 ? 0 : raw > 4 ? 4 : raw;
    if (clamped) *clamped = value != raw;
    return value;
}

double impute_midpoint(std::optional<double> value, std::pair<double, double> range) {
    return value ? *value : (range.first + range.second) / 2.0;
}

std::map<std::string, std::size_t> FeatureMatrix::imputed_by_column(
    const FeatureSchema& schema) const {
    std::map<std::string, std::size_t> counts;
    for (std::size_t c = 0; c < n_cols; ++c) {
        std::size_t n = 0;
        for (std::size_t r = 0; r < n_rows; ++r) n += imputed[r * n_cols + c];
        if (n > 0) counts[schema.feature_names[c]] = n;
    }
    return counts;
}

FeatureMatrix build_feature_matrix(const CohortTable& table, const FeatureSchema& schema,
                                   Arm arm) {
    schema.validate();
    FeatureMatrix m;
    m.n_rows = table.rows.size();
    m.n_cols = schema.n_features();
    m.arm = arm;
    m.values.assign(m.n_rows * m.n_cols, 0.0);
    m.imputed.assign(m.n_rows * m.n_cols, 0);

    // Resolve column roles once.
    struct Column {
        enum Kind { Age, SexFemale, Comorbidity, VitalPlain, MapPressure, LabValue,
                    SofaTotal, SofaResp, SofaCardio, Oxygen } kind;
        std::size_t source = 0;                   // vital/lab index
        std::pair<double, double> range{0, 1};
    };
    std::vector<Column> columns;
    columns.reserve(m.n_cols);
    for (const auto& name : schema.feature_names) {
        Column col;
        auto range_of = [&](const std::string& n) {
            const auto it = schema.imputation_ranges.find(n);
            if (it == schema.imputation_ranges.end())
                throw InvalidConfigError("no imputation range for feature " + n);
            return it->second;
        };
        if (name == "age") {
            col.kind = Column::Age;
        } else if (name == "sex_female") {
            col.kind = Column::SexFemale;
        } else if (name == "comorbidity_score") {
            col.kind = Column::Comorbidity;
        } else if (name == "map_mmhg") {
            col.kind = Column::MapPressure;
            col.range = range_of(name);
        } else if (name == "sofa_past_total") {
            col.kind = Column::SofaTotal;
        } else if (name == "sofa_past_resp") {
            col.kind = Column::SofaResp;
        } else if (name == "sofa_past_cardio") {
            col.kind = Column::SofaCardio;
        } else if (name == "oxygen_saturation") {
            col.kind = Column::Oxygen;
        } else {
            bool matched = false;
            for (std::size_t v = 0; v < kNumVitals && !matched; ++v) {
                if (name == kVitalNames[v]) {
                    col.kind = Column::VitalPlain;
                    col.source = v;
                    col.range = range_of(name);
                    matched = true;
                }
            }
            for (std::size_t l = 0; l < kNumLabs && !matched; ++l) {
                if (name == kLabNames[l]) {
                    col.kind = Column::LabValue;
                    col.source = l;
                    col.range = range_of(name);
                    matched = true;
                }
            }
            if (!matched) throw InvalidConfigError("unknown feature name " + name);
        }
        columns.push_back(col);
    }

    std::size_t clamp_count = 0;
    for (std::size_t r = 0; r < m.n_rows; ++r) {
        const auto& obs = table.rows[r];
        double* out = m.values.data() + r * m.n_cols;
        std::uint8_t* mask = m.imputed.data() + r * m.n_cols;
        for (std::size_t c = 0; c < columns.size(); ++c) {
            const Column& col = columns[c];
            switch (col.kind) {
                case Column::Age: out[c] = obs.age; break;
                case Column::SexFemale:
                    if (obs.sex == Sex::Unknown) {
                        out[c] = 0.5;
                        mask[c] = 1;
                    } else {
                        out[c] = obs.sex == Sex::Female ? 1.0 : 0.0;
                    }
                    break;
                case Column::Comorbidity: out[c] = obs.comorbidity_score; break;
                case Column::VitalPlain: {
                    const auto& v = obs.vitals[col.source];
                    out[c] = impute_midpoint(v, col.range);
                    mask[c] = v ? 0 : 1;
                    break;
                }
                case Column::MapPressure: {
                    const auto& map = obs.vital(Vital::MapMmhg);
                    const auto& sbp = obs.vital(Vital::Sbp);
                    const auto& dbp = obs.vital(Vital::Dbp);
                    if (map) {
                        out[c] = *map;
                    } else if (sbp && dbp) {
                        out[c] = (*sbp + 2.0 * *dbp) / 3.0;
                    } else {
                        out[c] = impute_midpoint(std::nullopt, col.range);
                        mask[c] = 1;
                    }
                    break;
                }
                case Column::LabValue: {
                    const auto& v = obs.labs[col.source];
                    out[c] = impute_midpoint(v, col.range);
                    mask[c] = v ? 0 : 1;
                    break;
                }
                case Column::SofaTotal: out[c] = obs.sofa_past_total; break;
                case Column::SofaResp: {
                    const std::array<int, 5> non_resp = {
                        obs.sofa_past(SofaComponent::Coagulation), obs.sofa_past(SofaComponent::Liver),
                        obs.sofa_past(SofaComponent::Cardiovascular), obs.sofa_past(SofaComponent::Cns),
                        obs.sofa_past(SofaComponent::Renal)};
                    bool clamped = false;
                    out[c] = compute_rsofa(obs.sofa_past_total, non_resp, &clamped);
                    if (clamped) ++clamp_count;
                    break;
                }
                case Column::SofaCardio:
                    out[c] = obs.sofa_past(SofaComponent::Cardiovascular);
                    break;
                case Column::Oxygen:
                    out[c] = arm == Arm::ControlSao2 ? obs.sao2 : obs.spo2;
                    break;
            }
        }
    }
    m.rsofa_clamp_count = clamp_count;
    return m;
}

}  // namespace cfaudit
