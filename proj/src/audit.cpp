#include "cfaudit/audit.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "cfaudit/errors.hpp"
#include "cfaudit/folds.hpp"
#include "cfaudit/rng.hpp"
#include "cfaudit/version.hpp"

namespace cfaudit {

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

const char* format_name(ReportFormat f) {
    switch (f) {
        case ReportFormat::Json: return "json";
        case ReportFormat::Csv: return "csv";
        case ReportFormat::Both: return "both";
    }
    return "json";
}

std::optional<ReportFormat> format_from_name(const std::string& name) {
    for (ReportFormat f : {ReportFormat::Json, ReportFormat::Csv, ReportFormat::Both})
        if (name == format_name(f)) return f;
    return std::nullopt;
}

namespace {

template <typename T>
bool has_duplicates(const std::vector<T>& values) {
    for (std::size_t i = 0; i < values.size(); ++i)
        for (std::size_t j = i + 1; j < values.size(); ++j)
            if (values[i] == values[j]) return true;
    return false;
}

}  // namespace

void AuditConfig::validate() const {
    if (tasks.empty()) throw InvalidConfigError("tasks must be nonempty");
    if (model_families.empty()) throw InvalidConfigError("model_families must be nonempty");
    if (axes.empty()) throw InvalidConfigError("axes must be nonempty");
    if (has_duplicates(tasks)) throw InvalidConfigError("tasks must be unique");
    if (has_duplicates(model_families)) throw InvalidConfigError("model_families must be unique");
    if (has_duplicates(axes)) throw InvalidConfigError("axes must be unique");
    if (k < 2) throw InvalidConfigError("k must be >= 2");
    if (!(threshold > 0.0 && threshold < 1.0)) throw InvalidConfigError("threshold must be in (0,1)");
}

void assert_arm_parity(const FeatureMatrix& control, const FeatureMatrix& treatment) {
    if (control.n_rows != treatment.n_rows || control.n_cols != treatment.n_cols)
        throw std::logic_error("arm parity violated: matrix shapes differ");
    const std::size_t d = control.n_cols;
    for (std::size_t r = 0; r < control.n_rows; ++r) {
        const double* a = control.values.data() + r * d;
        const double* b = treatment.values.data() + r * d;
        for (std::size_t c = 0; c + 1 < d; ++c) {
            if (a[c] != b[c])
                throw std::logic_error("arm parity violated: matrices differ outside oxygen column");
        }
    }
}

namespace {

struct GroupKey {
    std::size_t task, family, axis;
    std::string subgroup;
    std::size_t metric;
    bool operator<(const GroupKey& o) const {
        if (task != o.task) return task < o.task;
        if (family != o.family) return family < o.family;
        if (axis != o.axis) return axis < o.axis;
        if (subgroup != o.subgroup) return subgroup < o.subgroup;
        return metric < o.metric;
    }
};

}  // namespace

AuditReport run_audit(const CohortTable& table, const AuditConfig& cfg) {
    cfg.validate();
    const auto t_start = std::chrono::steady_clock::now();

    FeatureSchema schema =
        cfg.schema_path.empty() ? FeatureSchema::defaults() : FeatureSchema::from_json_file(cfg.schema_path);

    AuditReport report;
    report.config = cfg;
    report.toolkit_version = kToolkitVersion;
    report.cohort_hash = cohort_content_hash(table);
    report.n_rows = table.rows.size();

    // Overall is always reported, whatever the requested axes.
    std::vector<Axis> axes;
    axes.push_back(Axis::Overall);
    for (Axis a : kAllAxes)
        if (a != Axis::Overall &&
            std::find(cfg.axes.begin(), cfg.axes.end(), a) != cfg.axes.end())
            axes.push_back(a);

    const FeatureMatrix control = build_feature_matrix(table, schema, Arm::ControlSao2);
    const FeatureMatrix treatment = build_feature_matrix(table, schema, Arm::TreatmentSpo2);
    assert_arm_parity(control, treatment);

    {
        std::map<std::string, int> seen;
        for (const auto& obs : table.rows) seen.emplace(obs.patient_id, 0);
        report.n_patients = seen.size();
    }

    for (Task task : cfg.tasks) {
        const TaskLabel labels = make_labels(table, task);
        const std::uint64_t task_seed = mix64(cfg.seed, fnv1a64(task_name(task)));
        const FoldAssignment assignment = assign_folds(table, labels, cfg.k, task_seed);
        std::map<std::string, int> plain_assignment(assignment.patient_to_fold.begin(),
                                                    assignment.patient_to_fold.end());
        report.fold_assignments[task_name(task)] = std::move(plain_assignment);

        std::size_t valid_folds = 0;
        for (int fold = 0; fold < cfg.k; ++fold) {
            const auto [train_idx, test_idx] = fold_slices(assignment, table, fold);
            std::size_t train_pos = 0;
            for (std::size_t i : train_idx) train_pos += static_cast<std::size_t>(labels.y[i] != 0);
            if (train_pos == 0 || train_pos == train_idx.size() || test_idx.empty()) {
                report.warnings.push_back(std::string("aborted fold: task=") + task_name(task) +
                                          " fold=" + std::to_string(fold) +
                                          " reason=single-class training labels");
                continue;
            }
            ++valid_folds;

            std::vector<std::string> test_obs_ids;
            test_obs_ids.reserve(test_idx.size());
            for (std::size_t i : test_idx) test_obs_ids.push_back(table.rows[i].obs_id);

            for (ModelFamily family : cfg.model_families) {
                for (Arm arm : kAllArms) {
                    const FeatureMatrix& matrix = arm == Arm::ControlSao2 ? control : treatment;
                    const Dataset train = gather(matrix, labels, train_idx);
                    const Dataset test = gather(matrix, labels, test_idx);

                    PredictionSet preds;
                    preds.obs_ids = test_obs_ids;
                    preds.labels = test.y;
                    preds.arm = arm;
                    preds.fold = fold;
                    preds.task = task;
                    preds.model_family = family;
                    if (family == ModelFamily::Logistic) {
                        const LinearModel model = train_logistic(train, cfg.logistic_hyper);
                        preds.scores = predict_proba(model, test);
                    } else {
                        const TreeEnsemble model = train_gbt(train, cfg.gbt_hyper);
                        preds.scores = predict_proba(model, test);
                    }

                    for (Axis axis : axes) {
                        for (auto& rec : slice_metrics(preds, table, axis, cfg.threshold)) {
                            FoldMetricRecord out;
                            out.task = task;
                            out.family = family;
                            out.arm = rec.arm;
                            out.axis = rec.axis;
                            out.subgroup = rec.subgroup;
                            out.fold = rec.fold;
                            out.metric = rec.metric;
                            out.value = rec.value;
                            out.n = rec.n;
                            out.unstable = rec.unstable;
                            report.records.push_back(std::move(out));
                        }
                    }
                }
            }
        }
        if (valid_folds < 2)
            report.warnings.push_back(std::string("task ") + task_name(task) +
                                      ": fewer than 2 valid folds, paired tests unavailable");
    }

    // Unstable subgroup warnings, aggregated per (task, axis, subgroup);
    // subgroup membership does not depend on arm or family.
    {
        std::map<std::string, std::size_t> unstable_folds;
        for (const auto& rec : report.records) {
            if (rec.unstable && rec.family == cfg.model_families.front() &&
                rec.arm == Arm::ControlSao2 && rec.metric == Metric::Auroc) {
                unstable_folds[std::string(task_name(rec.task)) + "|" + axis_name(rec.axis) + "|" +
                               rec.subgroup] += 1;
            }
        }
        for (const auto& [key, count] : unstable_folds)
            report.warnings.push_back("unstable subgroup (n<10): " + key + " in " +
                                      std::to_string(count) + " fold(s)");
    }

    // Fold-paired comparisons.
    std::map<GroupKey, std::map<int, std::pair<std::optional<double>, std::optional<double>>>>
        grouped;
    for (const auto& rec : report.records) {
        GroupKey key{static_cast<std::size_t>(rec.task), static_cast<std::size_t>(rec.family),
                     static_cast<std::size_t>(rec.axis), rec.subgroup,
                     static_cast<std::size_t>(rec.metric)};
        auto& per_fold = grouped[key];
        if (rec.arm == Arm::ControlSao2)
            per_fold[rec.fold].first = rec.value;
        else
            per_fold[rec.fold].second = rec.value;
    }

    // Iterate groups in canonical enumeration order for a deterministic
    // report layout.
    for (Task task : cfg.tasks) {
        for (ModelFamily family : cfg.model_families) {
            for (Axis axis : axes) {
                for (const std::string& subgroup : axis_subgroups(axis)) {
                    for (Metric metric : kAllMetrics) {
                        GroupKey key{static_cast<std::size_t>(task),
                                     static_cast<std::size_t>(family),
                                     static_cast<std::size_t>(axis), subgroup,
                                     static_cast<std::size_t>(metric)};
                        const auto it = grouped.find(key);
                        if (it == grouped.end()) continue;

                        ArmComparison cmp;
                        cmp.task = task;
                        cmp.family = family;
                        cmp.axis = axis;
                        cmp.subgroup = subgroup;
                        cmp.metric = metric;

                        std::vector<double> control_vals, treatment_vals;
                        for (const auto& [fold, pair] : it->second) {
                            if (pair.first && pair.second) {
                                control_vals.push_back(*pair.first);
                                treatment_vals.push_back(*pair.second);
                            }
                        }
                        cmp.n_pairs = control_vals.size();
                        if (cmp.n_pairs >= 2) {
                            double mc = 0.0, mt = 0.0;
                            for (double v : control_vals) mc += v;
                            for (double v : treatment_vals) mt += v;
                            mc /= static_cast<double>(cmp.n_pairs);
                            mt /= static_cast<double>(cmp.n_pairs);
                            cmp.mean_control = mc;
                            cmp.mean_treatment = mt;
                            cmp.mean_diff = mc - mt;
                            const PairedTestCore core = paired_t_test(control_vals, treatment_vals);
                            cmp.t_stat = core.t_stat;
                            cmp.p_value = core.p_value;
                            cmp.stars = stars(core.p_value);
                            const std::size_t scheduled =
                                it->second.size();
                            if (cmp.n_pairs < scheduled)
                                report.warnings.push_back(
                                    std::string("dropped pairs: task=") + task_name(task) +
                                    " family=" + family_name(family) + " axis=" + axis_name(axis) +
                                    " subgroup=" + subgroup + " metric=" + metric_name(metric) +
                                    " n_pairs=" + std::to_string(cmp.n_pairs) + " of " +
                                    std::to_string(scheduled));
                        } else if (cmp.n_pairs == 1) {
                            cmp.mean_control = control_vals[0];
                            cmp.mean_treatment = treatment_vals[0];
                            cmp.mean_diff = control_vals[0] - treatment_vals[0];
                        }
                        report.tests.push_back(std::move(cmp));
                    }
                }
            }
        }
    }

    const auto t_end = std::chrono::steady_clock::now();
    report.wall_clock_ms =
        std::chrono::duration<double, std::milli>(t_end - t_start).count();
    return report;
}

AuditReport run_audit_file(const AuditConfig& cfg) {
    ParseIssues issues;
    CohortTable table = parse_cohort_csv_file(cfg.cohort_path, cfg.strict, &issues);
    AuditReport report = run_audit(table, cfg);
    if (!issues.skipped.empty())
        report.warnings.push_back("cohort parse skipped " + std::to_string(issues.skipped.size()) +
                                  " invalid row(s)");
    return report;
}

}  // namespace cfaudit
