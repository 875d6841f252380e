#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "cfaudit/audit.hpp"
#include "cfaudit/csv.hpp"
#include "cfaudit/errors.hpp"
#include "cfaudit/folds.hpp"
#include "cfaudit/version.hpp"

namespace cfaudit {

namespace {

using nlohmann::json;

json optional_to_json(const std::optional<double>& v) {
    if (!v) return nullptr;
    if (std::isinf(*v)) return *v > 0 ? json("inf") : json("-inf");
    return *v;
}

std::optional<double> optional_from_json(const json& j) {
    if (j.is_null()) return std::nullopt;
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        throw InvalidConfigError("unexpected string value in report: " + s);
    }
    return j.get<double>();
}

json config_to_json(const AuditConfig& cfg) {
    json j;
    j["cohort_path"] = cfg.cohort_path;
    std::vector<std::string> tasks, families, axes;
    for (Task t : cfg.tasks) tasks.emplace_back(task_name(t));
    for (ModelFamily f : cfg.model_families) families.emplace_back(family_name(f));
    for (Axis a : cfg.axes) axes.emplace_back(axis_name(a));
    j["tasks"] = tasks;
    j["model_families"] = families;
    j["axes"] = axes;
    j["k"] = cfg.k;
    j["seed"] = cfg.seed;
    j["threshold"] = cfg.threshold;
    j["schema_path"] = cfg.schema_path;
    j["out_dir"] = cfg.out_dir;
    j["format"] = format_name(cfg.format);
    j["strict"] = cfg.strict;
    j["logistic"] = {{"l2_lambda", cfg.logistic_hyper.l2_lambda},
                     {"max_iter", cfg.logistic_hyper.max_iter},
                     {"tol", cfg.logistic_hyper.tol}};
    j["gbt"] = {{"n_rounds", cfg.gbt_hyper.n_rounds},
                {"max_depth", cfg.gbt_hyper.max_depth},
                {"learning_rate", cfg.gbt_hyper.learning_rate},
                {"min_child_weight", cfg.gbt_hyper.min_child_weight},
                {"candidate_quantiles", cfg.gbt_hyper.candidate_quantiles}};
    return j;
}

AuditConfig config_from_json(const json& j, AuditConfig cfg = {}) {
    if (j.contains("cohort_path")) cfg.cohort_path = j["cohort_path"].get<std::string>();
    if (j.contains("tasks")) {
        cfg.tasks.clear();
        for (const auto& name : j["tasks"]) {
            const auto t = task_from_name(name.get<std::string>());
            if (!t) throw InvalidConfigError("unknown task: " + name.get<std::string>());
            cfg.tasks.push_back(*t);
        }
    }
    if (j.contains("model_families")) {
        cfg.model_families.clear();
        for (const auto& name : j["model_families"]) {
            const auto f = family_from_name(name.get<std::string>());
            if (!f) throw InvalidConfigError("unknown model family: " + name.get<std::string>());
            cfg.model_families.push_back(*f);
        }
    }
    if (j.contains("axes")) {
        cfg.axes.clear();
        for (const auto& name : j["axes"]) {
            const auto a = axis_from_name(name.get<std::string>());
            if (!a) throw InvalidConfigError("unknown axis: " + name.get<std::string>());
            cfg.axes.push_back(*a);
        }
    }
    if (j.contains("k")) cfg.k = j["k"].get<int>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("threshold")) cfg.threshold = j["threshold"].get<double>();
    if (j.contains("schema_path")) cfg.schema_path = j["schema_path"].get<std::string>();
    if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
    if (j.contains("format")) {
        const auto f = format_from_name(j["format"].get<std::string>());
        if (!f) throw InvalidConfigError("unknown format: " + j["format"].get<std::string>());
        cfg.format = *f;
    }
    if (j.contains("strict")) cfg.strict = j["strict"].get<bool>();
    if (j.contains("logistic")) {
        const auto& l = j["logistic"];
        if (l.contains("l2_lambda")) cfg.logistic_hyper.l2_lambda = l["l2_lambda"].get<double>();
        if (l.contains("max_iter")) cfg.logistic_hyper.max_iter = l["max_iter"].get<int>();
        if (l.contains("tol")) cfg.logistic_hyper.tol = l["tol"].get<double>();
    }
    if (j.contains("gbt")) {
        const auto& g = j["gbt"];
        if (g.contains("n_rounds")) cfg.gbt_hyper.n_rounds = g["n_rounds"].get<int>();
        if (g.contains("max_depth")) cfg.gbt_hyper.max_depth = g["max_depth"].get<int>();
        if (g.contains("learning_rate")) cfg.gbt_hyper.learning_rate = g["learning_rate"].get<double>();
        if (g.contains("min_child_weight"))
            cfg.gbt_hyper.min_child_weight = g["min_child_weight"].get<double>();
        if (g.contains("candidate_quantiles"))
            cfg.gbt_hyper.candidate_quantiles = g["candidate_quantiles"].get<int>();
    }
    return cfg;
}

}  // namespace

AuditConfig AuditConfig::from_json_text(const std::string& text) {
    AuditConfig cfg = config_from_json(json::parse(text));
    cfg.validate();
    return cfg;
}

AuditConfig AuditConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

std::string report_to_json(const AuditReport& report) {
    json j;
    j["schema_version"] = kReportSchemaVersion;
    j["config"] = config_to_json(report.config);
    j["provenance"] = {{"cohort_hash", report.cohort_hash},
                       {"toolkit_version", report.toolkit_version},
                       {"n_rows", report.n_rows},
                       {"n_patients", report.n_patients},
                       {"wall_clock_ms", report.wall_clock_ms}};
    json records = json::array();
    for (const auto& rec : report.records) {
        records.push_back({{"task", task_name(rec.task)},
                           {"family", family_name(rec.family)},
                           {"arm", arm_name(rec.arm)},
                           {"axis", axis_name(rec.axis)},
                           {"subgroup", rec.subgroup},
                           {"fold", rec.fold},
                           {"metric", metric_name(rec.metric)},
                           {"value", optional_to_json(rec.value)},
                           {"n", rec.n},
                           {"unstable", rec.unstable}});
    }
    j["records"] = std::move(records);
    json tests = json::array();
    for (const auto& t : report.tests) {
        tests.push_back({{"task", task_name(t.task)},
                         {"family", family_name(t.family)},
                         {"axis", axis_name(t.axis)},
                         {"subgroup", t.subgroup},
                         {"metric", metric_name(t.metric)},
                         {"mean_control", optional_to_json(t.mean_control)},
                         {"mean_treatment", optional_to_json(t.mean_treatment)},
                         {"mean_diff", optional_to_json(t.mean_diff)},
                         {"t_stat", optional_to_json(t.t_stat)},
                         {"p_value", optional_to_json(t.p_value)},
                         {"n_pairs", t.n_pairs},
                         {"stars", t.stars}});
    }
    j["tests"] = std::move(tests);
    j["warnings"] = report.warnings;
    return j.dump(2);
}

AuditReport report_from_json(const std::string& text) {
    const json j = json::parse(text);
    AuditReport report;
    report.config = config_from_json(j.at("config"));
    const auto& prov = j.at("provenance");
    report.cohort_hash = prov.at("cohort_hash").get<std::string>();
    report.toolkit_version = prov.at("toolkit_version").get<std::string>();
    report.n_rows = prov.at("n_rows").get<std::size_t>();
    report.n_patients = prov.at("n_patients").get<std::size_t>();
    report.wall_clock_ms = prov.at("wall_clock_ms").get<double>();
    for (const auto& r : j.at("records")) {
        FoldMetricRecord rec;
        rec.task = *task_from_name(r.at("task").get<std::string>());
        rec.family = *family_from_name(r.at("family").get<std::string>());
        rec.arm = r.at("arm").get<std::string>() == arm_name(Arm::ControlSao2)
                      ? Arm::ControlSao2
                      : Arm::TreatmentSpo2;
        rec.axis = *axis_from_name(r.at("axis").get<std::string>());
        rec.subgroup = r.at("subgroup").get<std::string>();
        rec.fold = r.at("fold").get<int>();
        for (Metric m : kAllMetrics)
            if (r.at("metric").get<std::string>() == metric_name(m)) rec.metric = m;
        rec.value = optional_from_json(r.at("value"));
        rec.n = r.at("n").get<std::size_t>();
        rec.unstable = r.at("unstable").get<bool>();
        report.records.push_back(std::move(rec));
    }
    for (const auto& t : j.at("tests")) {
        ArmComparison cmp;
        cmp.task = *task_from_name(t.at("task").get<std::string>());
        cmp.family = *family_from_name(t.at("family").get<std::string>());
        cmp.axis = *axis_from_name(t.at("axis").get<std::string>());
        cmp.subgroup = t.at("subgroup").get<std::string>();
        for (Metric m : kAllMetrics)
            if (t.at("metric").get<std::string>() == metric_name(m)) cmp.metric = m;
        cmp.mean_control = optional_from_json(t.at("mean_control"));
        cmp.mean_treatment = optional_from_json(t.at("mean_treatment"));
        cmp.mean_diff = optional_from_json(t.at("mean_diff"));
        cmp.t_stat = optional_from_json(t.at("t_stat"));
        cmp.p_value = optional_from_json(t.at("p_value"));
        cmp.n_pairs = t.at("n_pairs").get<std::size_t>();
        cmp.stars = t.at("stars").get<std::string>();
        report.tests.push_back(std::move(cmp));
    }
    report.warnings = j.at("warnings").get<std::vector<std::string>>();
    return report;
}

namespace {

std::string format_optional(const std::optional<double>& v) {
    if (!v) return "";
    if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
    return csv::format_double(*v);
}

std::string format_2dp(const std::optional<double>& v) {
    if (!v) return "";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", *v);
    return buf;
}

void write_records_csv(const AuditReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "task,family,axis,subgroup,fold,arm,metric,value,n,unstable\n";
    for (const auto& rec : report.records) {
        out << task_name(rec.task) << ',' << family_name(rec.family) << ',' << axis_name(rec.axis)
            << ',' << csv::escape_field(rec.subgroup) << ',' << rec.fold << ',' << arm_name(rec.arm)
            << ',' << metric_name(rec.metric) << ',' << format_optional(rec.value) << ',' << rec.n
            << ',' << (rec.unstable ? 1 : 0) << '\n';
    }
}

void write_tests_csv(const AuditReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "task,family,axis,subgroup,metric,mean_control,mean_treatment,mean_diff,"
           "t_stat,p_value,n_pairs,stars\n";
    for (const auto& t : report.tests) {
        out << task_name(t.task) << ',' << family_name(t.family) << ',' << axis_name(t.axis) << ','
            << csv::escape_field(t.subgroup) << ',' << metric_name(t.metric) << ','
            << format_optional(t.mean_control) << ',' << format_optional(t.mean_treatment) << ','
            << format_optional(t.mean_diff) << ',' << format_optional(t.t_stat) << ','
            << format_optional(t.p_value) << ',' << t.n_pairs << ',' << t.stars << '\n';
    }
}

// Long-format table mirroring the per-subgroup bar charts: one row per
// (subgroup, metric, arm) with the across-fold mean at full precision plus a
// 2-decimal display column.
void write_plot_table_csv(const AuditReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "task,family,axis,subgroup,metric,arm,mean,mean_2dp,stars\n";
    for (const auto& t : report.tests) {
        out << task_name(t.task) << ',' << family_name(t.family) << ',' << axis_name(t.axis) << ','
            << csv::escape_field(t.subgroup) << ',' << metric_name(t.metric) << ','
            << arm_name(Arm::ControlSao2) << ',' << format_optional(t.mean_control) << ','
            << format_2dp(t.mean_control) << ',' << t.stars << '\n';
        out << task_name(t.task) << ',' << family_name(t.family) << ',' << axis_name(t.axis) << ','
            << csv::escape_field(t.subgroup) << ',' << metric_name(t.metric) << ','
            << arm_name(Arm::TreatmentSpo2) << ',' << format_optional(t.mean_treatment) << ','
            << format_2dp(t.mean_treatment) << ',' << t.stars << '\n';
    }
}

}  // namespace

void write_report(const AuditReport& report, ReportFormat format, const std::string& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());
    const std::filesystem::path dir(out_dir);

    if (format == ReportFormat::Json || format == ReportFormat::Both) {
        std::ofstream out(dir / "report.json");
        if (!out) throw IoError("cannot open report.json for writing");
        out << report_to_json(report) << '\n';
    }
    if (format == ReportFormat::Csv || format == ReportFormat::Both) {
        write_records_csv(report, (dir / "records.csv").string());
        write_tests_csv(report, (dir / "tests.csv").string());
        write_plot_table_csv(report, (dir / "plot_table.csv").string());
    }
    for (const auto& [task, assignment] : report.fold_assignments) {
        std::ofstream out(dir / ("folds_" + task + ".csv"));
        if (!out) throw IoError("cannot open fold assignment csv for writing");
        out << "patient_id,fold\n";
        for (const auto& [patient, fold] : assignment) out << patient << ',' << fold << '\n';
    }
}

}  // namespace cfaudit
