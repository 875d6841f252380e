#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cfaudit/audit.hpp"
#include "cfaudit/cohort.hpp"
#include "cfaudit/errors.hpp"
#include "cfaudit/parallel.hpp"
#include "cfaudit/prep.hpp"
#include "cfaudit/synth.hpp"
#include "cfaudit/version.hpp"

namespace {

using namespace cfaudit;

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

int cmd_synth(const std::string& config_path, std::uint64_t seed, bool seed_given,
              const std::string& out_path, double calibrate_target, bool calibrate) {
    SynthConfig cfg = config_path.empty() ? SynthConfig::defaults()
                                          : SynthConfig::from_json_file(config_path);
    if (seed_given) cfg.seed = seed;
    if (calibrate) {
        cfg = calibrate_intercept(cfg, calibrate_target);
        std::cout << "calibrated mortality_intercept=" << cfg.severity_effect.mortality_intercept
                  << " for target " << calibrate_target << "\n";
    }
    const CohortTable table = generate_cohort(cfg);
    write_cohort_csv_file(table, out_path);

    const BiasSummary overall = overall_bias_summary(table);
    std::cout << "wrote " << out_path << ": " << table.rows.size() << " rows, " << cfg.n_patients
              << " patients\n";
    std::cout << "patient mortality rate: " << patient_mortality_rate(table) << "\n";
    std::cout << "overall delta mean/sd: " << overall.mean_delta << " / " << overall.sd_delta
              << ", hidden hypoxemia rate: " << overall.hh_rate << "\n";
    for (const auto& [race, s] : injected_bias_summary(table))
        std::cout << "  " << race_name(race) << ": n=" << s.n_rows << " delta=" << s.mean_delta
                  << " hh=" << s.hh_rate << "\n";
    return 0;
}

int cmd_validate(const std::string& cohort_path, bool strict) {
    ParseIssues issues;
    CohortTable table;
    try {
        table = parse_cohort_csv_file(cohort_path, strict, &issues);
    } catch (const RowViolationError& e) {
        std::cerr << "validation failed: " << e.what() << "\n";
        return 1;
    }
    const ValidationReport report = validate_cohort(table);

    std::cout << "rows: " << report.n_rows << ", patients: " << report.n_patients << "\n";
    if (!issues.skipped.empty()) {
        std::cout << "rows skipped at parse: " << issues.skipped.size() << "\n";
        for (const auto& [rule, count] : issues.counts_by_rule())
            std::cout << "  " << rule << ": " << count << "\n";
    }
    std::cout << "in-table violations: " << report.total_violations() << "\n";
    for (const auto& [rule, count] : report.violations)
        std::cout << "  " << rule << ": " << count << "\n";
    if (!report.duplicate_obs_ids.empty()) {
        std::cout << "duplicate obs_ids: " << report.duplicate_obs_ids.size() << "\n";
        for (std::size_t i = 0; i < report.duplicate_obs_ids.size() && i < 10; ++i)
            std::cout << "  " << report.duplicate_obs_ids[i] << "\n";
    }
    std::cout << "task positivity:\n";
    for (const auto& [task, rate] : report.task_positivity)
        std::cout << "  " << task << ": " << rate << "\n";

    if (report.n_rows > 0) {
        const FeatureSchema schema = FeatureSchema::defaults();
        const FeatureMatrix matrix = build_feature_matrix(table, schema, Arm::ControlSao2);
        std::cout << "imputation counts per column:\n";
        for (const auto& [column, count] : matrix.imputed_by_column(schema))
            std::cout << "  " << column << ": " << count << "\n";
        if (matrix.rsofa_clamp_count > 0)
            std::cout << "rsofa clamp events: " << matrix.rsofa_clamp_count << "\n";
    }

    const bool clean = issues.skipped.empty() && report.clean();
    std::cout << (clean ? "cohort OK\n" : "cohort has problems\n");
    return clean ? 0 : 1;
}

int cmd_audit(AuditConfig cfg) {
    AuditReport report = run_audit_file(cfg);
    write_report(report, cfg.format, cfg.out_dir);

    std::size_t significant = 0;
    for (const auto& t : report.tests)
        significant += static_cast<std::size_t>(!t.stars.empty());
    std::cout << "audit complete in " << report.wall_clock_ms / 1000.0 << " s: "
              << report.records.size() << " records, " << report.tests.size() << " paired tests, "
              << significant << " significant (p <= 0.05)\n";
    std::cout << "report written to " << cfg.out_dir << "\n";
    for (const auto& w : report.warnings) std::cout << "warning: " << w << "\n";
    return 0;
}

int cmd_report(const std::string& in_path, const std::string& out_dir, ReportFormat format,
               bool summary) {
    std::ifstream in(in_path);
    if (!in) throw IoError("cannot open " + in_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const AuditReport report = report_from_json(buf.str());
    if (!out_dir.empty()) {
        write_report(report, format, out_dir);
        std::cout << "rewrote report into " << out_dir << "\n";
    }
    if (summary) {
        std::cout << "cohort " << report.cohort_hash << ", " << report.n_rows << " rows, "
                  << report.n_patients << " patients\n";
        for (const auto& t : report.tests) {
            if (t.stars.empty() || !t.mean_diff) continue;
            std::cout << task_name(t.task) << " " << family_name(t.family) << " "
                      << axis_name(t.axis) << "/" << t.subgroup << " " << metric_name(t.metric)
                      << ": control " << *t.mean_control << " vs treatment " << *t.mean_treatment
                      << " (p=" << *t.p_value << " " << t.stars << ")\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"counterfactual audit of device-bias impact on downstream models"};
    app.require_subcommand(1);
    app.set_version_flag("--version", cfaudit::kToolkitVersion);

    int threads = 0;
    app.add_option("--threads", threads, "worker thread cap (0 = library default)");

    auto* synth = app.add_subcommand("synth", "generate a synthetic cohort CSV");
    std::string synth_config, synth_out;
    std::uint64_t synth_seed = 0;
    double calibrate_target = 0.0;
    synth->add_option("--config", synth_config, "SynthConfig JSON path");
    auto* seed_opt = synth->add_option("--seed", synth_seed, "generator seed");
    synth->add_option("--out", synth_out, "output CSV path")->required();
    auto* calib_opt = synth->add_option("--calibrate-mortality", calibrate_target,
                                        "bisect mortality_intercept to this rate first");

    auto* audit = app.add_subcommand("audit", "run the paired control/treatment audit");
    std::string audit_cohort, audit_config, audit_out, audit_format, audit_tasks, audit_models,
        audit_axes;
    std::uint64_t audit_seed = 0;
    double audit_threshold = 0.0;
    int audit_k = 0;
    bool audit_strict = false;
    audit->add_option("--cohort", audit_cohort, "cohort CSV path")->required();
    audit->add_option("--config", audit_config, "AuditConfig JSON path");
    audit->add_option("--out", audit_out, "output directory (default $CFAUDIT_OUT or audit_out)");
    auto* audit_seed_opt = audit->add_option("--seed", audit_seed, "master seed");
    audit->add_option("--format", audit_format, "json|csv|both");
    audit->add_option("--tasks", audit_tasks, "comma list: mortality,future_rsofa,sofa_increase");
    audit->add_option("--models", audit_models, "comma list: logistic,gbt");
    audit->add_option("--axes", audit_axes,
                      "comma list: overall,race_ethnicity,bias_magnitude,hidden_hypoxemia");
    auto* audit_thr_opt = audit->add_option("--threshold", audit_threshold, "classification threshold");
    auto* audit_k_opt = audit->add_option("--k", audit_k, "fold count");
    audit->add_flag("--strict", audit_strict, "abort on the first invalid cohort row");

    auto* validate = app.add_subcommand("validate", "check a cohort CSV against the schema");
    std::string validate_cohort_path;
    bool validate_strict = false;
    validate->add_option("--cohort", validate_cohort_path, "cohort CSV path")->required();
    validate->add_flag("--strict", validate_strict, "abort on the first invalid row");

    auto* report = app.add_subcommand("report", "reformat or summarize an audit report");
    std::string report_in, report_out, report_format = "csv";
    bool report_summary = false;
    report->add_option("--in", report_in, "report.json path")->required();
    report->add_option("--out", report_out, "output directory");
    report->add_option("--format", report_format, "json|csv|both");
    report->add_flag("--summary", report_summary, "print significant comparisons");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    cfaudit::set_threads(threads);

    try {
        if (synth->parsed())
            return cmd_synth(synth_config, synth_seed, seed_opt->count() > 0, synth_out,
                             calibrate_target, calib_opt->count() > 0);
        if (validate->parsed()) return cmd_validate(validate_cohort_path, validate_strict);
        if (audit->parsed()) {
            AuditConfig cfg = audit_config.empty() ? AuditConfig{}
                                                   : AuditConfig::from_json_file(audit_config);
            cfg.cohort_path = audit_cohort;
            if (audit_seed_opt->count() > 0) cfg.seed = audit_seed;
            if (!audit_format.empty()) {
                const auto f = format_from_name(audit_format);
                if (!f) throw InvalidConfigError("unknown format: " + audit_format);
                cfg.format = *f;
            }
            if (!audit_tasks.empty()) {
                cfg.tasks.clear();
                for (const auto& name : split_list(audit_tasks)) {
                    const auto t = task_from_name(name);
                    if (!t) throw InvalidConfigError("unknown task: " + name);
                    cfg.tasks.push_back(*t);
                }
            }
            if (!audit_models.empty()) {
                cfg.model_families.clear();
                for (const auto& name : split_list(audit_models)) {
                    const auto f = family_from_name(name);
                    if (!f) throw InvalidConfigError("unknown model family: " + name);
                    cfg.model_families.push_back(*f);
                }
            }
            if (!audit_axes.empty()) {
                cfg.axes.clear();
                for (const auto& name : split_list(audit_axes)) {
                    const auto a = axis_from_name(name);
                    if (!a) throw InvalidConfigError("unknown axis: " + name);
                    cfg.axes.push_back(*a);
                }
            }
            if (audit_thr_opt->count() > 0) cfg.threshold = audit_threshold;
            if (audit_k_opt->count() > 0) cfg.k = audit_k;
            cfg.strict = audit_strict;
            if (!audit_out.empty()) {
                cfg.out_dir = audit_out;
            } else if (cfg.out_dir.empty()) {
                const char* env = std::getenv("CFAUDIT_OUT");
                cfg.out_dir = env ? env : "audit_out";
            }
            cfg.validate();
            return cmd_audit(cfg);
        }
        if (report->parsed()) {
            const auto f = format_from_name(report_format);
            if (!f) throw InvalidConfigError("unknown format: " + report_format);
            return cmd_report(report_in, report_out, *f, report_summary);
        }
    } catch (const InvalidConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
