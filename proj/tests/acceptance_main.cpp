// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Heavier end-to-end checks live here rather than in the
// unit suites.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cfaudit/audit.hpp"
#include "cfaudit/eval.hpp"
#include "cfaudit/folds.hpp"
#include "cfaudit/learn.hpp"
#include "cfaudit/prep.hpp"
#include "cfaudit/synth.hpp"
#include "oracles.hpp"

using namespace cfaudit;

namespace {

int failures = 0;

void criterion(int number, const std::string& description, bool pass,
               const std::string& detail = "") {
    std::printf("[%s] criterion %2d: %s%s%s\n", pass ? "PASS" : "FAIL", number,
                description.c_str(), detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

const ArmComparison* find_test(const AuditReport& report, ModelFamily family, Axis axis,
                               const std::string& subgroup, Metric metric) {
    for (const auto& t : report.tests) {
        if (t.family == family && t.axis == axis && t.subgroup == subgroup && t.metric == metric)
            return &t;
    }
    return nullptr;
}

CohortTable random_grouped_cohort(std::mt19937& rng, std::size_t n_patients) {
    CohortTable t;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t p = 0; p < n_patients; ++p) {
        const std::size_t n_obs = 1 + rng() % 6;
        const double risk = unif(rng);
        for (std::size_t j = 0; j < n_obs; ++j) {
            PairedObservation obs;
            obs.obs_id = "p" + std::to_string(p) + "-" + std::to_string(j);
            obs.patient_id = "p" + std::to_string(p);
            obs.spo2 = obs.sao2 = 90;
            obs.in_hospital_mortality = unif(rng) < risk ? 1 : 0;
            t.rows.push_back(obs);
        }
    }
    return t;
}

}  // namespace

int main() {
    // ---- criteria 1 + 11 share the default 20k-patient audit ----
    {
        const auto t0 = std::chrono::steady_clock::now();
        SynthConfig scfg = SynthConfig::defaults();  // 20000 patients, seed 42, calibrated
        const CohortTable cohort = generate_cohort(scfg);

        AuditConfig cfg;
        cfg.tasks = {Task::Mortality};
        cfg.model_families = {ModelFamily::Logistic, ModelFamily::Gbt};
        cfg.k = 10;
        cfg.seed = 42;
        const AuditReport report = run_audit(cohort, cfg);
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        bool directional = true;
        std::string detail;
        for (ModelFamily family : {ModelFamily::Logistic, ModelFamily::Gbt}) {
            const auto* recall =
                find_test(report, family, Axis::BiasMagnitude, "ge_3", Metric::Recall);
            const auto* accuracy =
                find_test(report, family, Axis::BiasMagnitude, "lt_minus_3", Metric::Accuracy);
            const bool recall_ok = recall && recall->mean_diff && *recall->mean_diff > 0.0 &&
                                   recall->p_value && *recall->p_value <= 0.05;
            const bool accuracy_ok = accuracy && accuracy->mean_diff && *accuracy->mean_diff > 0.0;
            directional = directional && recall_ok && accuracy_ok;
            detail += std::string(family_name(family)) +
                      ": ge_3 recall diff=" + fmt(recall && recall->mean_diff ? *recall->mean_diff : -1) +
                      " p=" + fmt(recall && recall->p_value ? *recall->p_value : -1) +
                      ", lt_minus_3 accuracy diff=" +
                      fmt(accuracy && accuracy->mean_diff ? *accuracy->mean_diff : -1) + "; ";
        }
        const bool in_budget = seconds <= 600.0;
        criterion(1,
                  "directional reproduction on the default cohort (recall drop in ge_3 with "
                  "p<=0.05, accuracy drop in lt_minus_3, both families, <=10 min)",
                  directional && in_budget, detail + "runtime=" + fmt(seconds) + "s");

        // criterion 11: arm parity holds for every fold of every task (the
        // in-audit assertion never fired to get here); re-check explicitly
        bool parity = true;
        const FeatureSchema schema = FeatureSchema::defaults();
        const FeatureMatrix control = build_feature_matrix(cohort, schema, Arm::ControlSao2);
        const FeatureMatrix treatment = build_feature_matrix(cohort, schema, Arm::TreatmentSpo2);
        try {
            assert_arm_parity(control, treatment);
        } catch (const std::exception&) {
            parity = false;
        }
        for (std::size_t r = 0; r < control.n_rows && parity; ++r)
            for (std::size_t c = 0; c + 1 < control.n_cols && parity; ++c)
                parity = control.at(r, c) == treatment.at(r, c);
        criterion(11,
                  "confounder freeze: arm matrices differ only in the oxygen column and the "
                  "runtime assertion never fired",
                  parity);

        // criterion 9 (second half) reuses the same cohort
        const BiasSummary overall = overall_bias_summary(cohort);
        const bool truth_table = hidden_hypoxemia(87.9, 88.0) && !hidden_hypoxemia(88.0, 88.0) &&
                                 !hidden_hypoxemia(87.9, 87.9) && !hidden_hypoxemia(88.0, 90.0);
        criterion(9, "hidden hypoxemia truth table and default cohort rate in [0.02, 0.04]",
                  truth_table && overall.hh_rate >= 0.02 && overall.hh_rate <= 0.04,
                  "overall HH rate=" + fmt(overall.hh_rate));
    }

    // ---- criterion 2: zero-bias null ----
    {
        SynthConfig scfg = SynthConfig::defaults();
        scfg.n_patients = 2000;
        scfg.bias_mean = {};
        scfg.bias_sd = 0.0;
        const CohortTable cohort = generate_cohort(scfg);

        AuditConfig cfg;
        cfg.k = 5;
        cfg.seed = 42;
        cfg.gbt_hyper.n_rounds = 50;
        const AuditReport report = run_audit(cohort, cfg);
        bool null_ok = !report.tests.empty();
        for (const auto& test : report.tests) {
            if (test.mean_diff && *test.mean_diff != 0.0) null_ok = false;
            if (test.t_stat && *test.t_stat != 0.0) null_ok = false;
            if (test.p_value && *test.p_value != 1.0) null_ok = false;
        }
        criterion(2, "zero-bias null: all arm differences exactly 0 and all reported p exactly 1",
                  null_ok, fmt(static_cast<double>(report.tests.size())) + " comparisons");
    }

    // ---- criterion 3: AUROC oracle equivalence ----
    {
        std::mt19937 rng(2026);
        bool all_equal = true;
        std::size_t tested = 0;
        for (int rep = 0; rep < 1000; ++rep) {
            const std::size_t n = 2 + rng() % 199;
            std::vector<double> scores(n);
            std::vector<int> labels(n);
            bool has_pos = false, has_neg = false;
            for (std::size_t i = 0; i < n; ++i) {
                scores[i] = (rng() % 50) / 50.0;  // heavy ties
                labels[i] = rng() % 2;
                (labels[i] ? has_pos : has_neg) = true;
            }
            if (!has_pos || !has_neg) continue;
            ++tested;
            const auto fast = auroc(scores, labels);
            if (!fast || *fast != oracles::auroc_bruteforce(scores, labels)) all_equal = false;
        }
        criterion(3, "AUROC equals O(n^2) brute-force pair counting exactly on 1000 random sets",
                  all_equal && tested > 900, fmt(static_cast<double>(tested)) + " sets with both classes");
    }

    // ---- criterion 4: paired t-test oracle ----
    {
        std::mt19937 rng(7);
        std::normal_distribution<double> noise(0.0, 0.05);
        bool ok = true;
        double worst = 0.0;
        for (int rep = 0; rep < 100; ++rep) {
            std::vector<double> c(10), t(10);
            for (int i = 0; i < 10; ++i) {
                c[i] = 0.7 + noise(rng);
                t[i] = 0.7 + noise(rng) + (rep % 3 == 0 ? 0.02 : 0.0);
            }
            const PairedTestCore core = paired_t_test(c, t);
            const double oracle_p = oracles::t_two_sided_p_quadrature(core.t_stat, 9.0);
            worst = std::max(worst, std::fabs(core.p_value - oracle_p));
            ok = ok && std::fabs(core.p_value - oracle_p) <= 1e-9;
        }
        criterion(4, "paired t-test p matches the quadrature oracle within 1e-9 on 100 pairs", ok,
                  "worst |dp|=" + fmt(worst));
    }

    // ---- criterion 5: LR gradient check + intercept-only bound ----
    {
        std::mt19937 rng(99);
        std::normal_distribution<double> normal(0.0, 1.0);
        bool grad_ok = true, loss_ok = true;
        double worst_rel = 0.0;
        for (int rep = 0; rep < 50; ++rep) {
            const std::size_t n = 30 + rng() % 120;
            const std::size_t d = 2 + rng() % 6;
            Dataset data;
            data.n_rows = n;
            data.n_cols = d;
            data.x.resize(n * d);
            data.y.resize(n);
            for (auto& v : data.x) v = normal(rng);
            for (auto& y : data.y) y = rng() % 2;
            data.y[0] = 1;
            data.y[1] = 0;

            std::vector<double> params(d + 1);
            for (auto& v : params) v = 0.5 * normal(rng);
            const double l2 = 0.5;
            const auto loss_at = [&](const std::vector<double>& p) {
                std::vector<double> margins(n);
                kernels::linear_margins(data.x.data(), n, d, p.data(), p[d], margins.data());
                return kernels::logistic_loss(margins.data(), data.y.data(), n, p.data(), d, l2);
            };
            std::vector<double> margins(n), grad(d + 1);
            kernels::linear_margins(data.x.data(), n, d, params.data(), params[d], margins.data());
            kernels::logistic_grad(data.x.data(), margins.data(), data.y.data(), n, d,
                                   params.data(), l2, grad.data());
            const auto numeric = oracles::central_differences(loss_at, params);
            for (std::size_t j = 0; j <= d; ++j) {
                const double rel =
                    std::fabs(grad[j] - numeric[j]) / std::max(1e-8, std::fabs(numeric[j]));
                worst_rel = std::max(worst_rel, rel);
                grad_ok = grad_ok && rel <= 1e-6;
            }

            const LinearModel model = train_logistic(data);
            double pos = 0;
            for (int y : data.y) pos += y;
            const double p = pos / static_cast<double>(n);
            const double intercept_only = -(p * std::log(p) + (1 - p) * std::log(1 - p));
            loss_ok = loss_ok && model.final_loss <= intercept_only + 1e-12;
        }
        criterion(5, "LR analytic gradient within 1e-6 relative of central differences; training "
                     "loss never above the intercept-only loss",
                  grad_ok && loss_ok, "worst rel err=" + fmt(worst_rel));
    }

    // ---- criterion 6: GBT monotonicity + XOR capacity ----
    {
        std::mt19937 rng(123);
        std::normal_distribution<double> normal(0.0, 1.0);
        bool monotone = true;
        for (int rep = 0; rep < 20; ++rep) {
            const std::size_t n = 100 + rng() % 400;
            const std::size_t d = 2 + rng() % 6;
            Dataset data;
            data.n_rows = n;
            data.n_cols = d;
            data.x.resize(n * d);
            data.y.resize(n);
            for (auto& v : data.x) v = normal(rng);
            for (std::size_t i = 0; i < n; ++i)
                data.y[i] = normal(rng) + data.x[i * d] > 0 ? 1 : 0;
            data.y[0] = 1;
            data.y[1] = 0;
            const TreeEnsemble model = train_gbt(data);  // default 100 rounds
            for (std::size_t r = 1; r < model.round_train_logloss.size(); ++r)
                monotone = monotone &&
                           model.round_train_logloss[r] <= model.round_train_logloss[r - 1] + 1e-12;
        }

        Dataset xor_data;
        xor_data.n_rows = 200;
        xor_data.n_cols = 2;
        xor_data.x.resize(400);
        xor_data.y.resize(200);
        for (std::size_t i = 0; i < 200; ++i) {
            const double a = (rng() % 1000) / 1000.0;
            const double b = (rng() % 1000) / 1000.0;
            xor_data.x[i * 2] = a;
            xor_data.x[i * 2 + 1] = b;
            xor_data.y[i] = (a > 0.5) != (b > 0.5) ? 1 : 0;
        }
        const TreeEnsemble xor_model = train_gbt(xor_data);
        const auto proba = predict_proba(xor_model, xor_data);
        std::size_t correct = 0;
        for (std::size_t i = 0; i < 200; ++i)
            correct += (proba[i] >= 0.5) == (xor_data.y[i] == 1);
        const double xor_acc = static_cast<double>(correct) / 200.0;
        criterion(6, "GBT logloss non-increasing over all rounds on 20 datasets; XOR accuracy >= 0.95",
                  monotone && xor_acc >= 0.95, "xor accuracy=" + fmt(xor_acc));
    }

    // ---- criterion 7: fold integrity over 200 random cohorts ----
    {
        std::mt19937 rng(31337);
        bool integrity = true, stratification = true;
        for (int rep = 0; rep < 200; ++rep) {
            const std::size_t n_patients = 205 + rng() % 400;
            const CohortTable t = random_grouped_cohort(rng, n_patients);
            const TaskLabel labels = make_labels(t, Task::Mortality);
            const int k = 2 + static_cast<int>(rng() % 9);
            const FoldAssignment a = assign_folds(t, labels, k, rng());

            std::size_t pos_patients = 0, neg_patients = 0;
            {
                std::map<std::string, int> any;
                for (std::size_t i = 0; i < t.rows.size(); ++i)
                    any[t.rows[i].patient_id] |= labels.y[i];
                for (const auto& [p, v] : any) (v ? pos_patients : neg_patients) += 1;
            }

            std::vector<double> fold_rows(static_cast<std::size_t>(k), 0.0);
            std::vector<double> fold_pos(static_cast<std::size_t>(k), 0.0);
            for (int f = 0; f < k; ++f) {
                const auto [train, test] = fold_slices(a, t, f);
                std::set<std::string> train_patients;
                for (auto i : train) train_patients.insert(t.rows[i].patient_id);
                for (auto i : test) {
                    integrity = integrity && train_patients.count(t.rows[i].patient_id) == 0;
                    fold_rows[static_cast<std::size_t>(f)] += 1.0;
                    fold_pos[static_cast<std::size_t>(f)] += labels.y[i];
                }
            }
            double global = 0.0;
            for (int y : labels.y) global += y;
            global /= static_cast<double>(labels.y.size());
            if (pos_patients >= 100 && neg_patients >= 100) {
                for (int f = 0; f < k; ++f) {
                    const auto fu = static_cast<std::size_t>(f);
                    stratification = stratification &&
                                     std::fabs(fold_pos[fu] / fold_rows[fu] - global) <= 0.05;
                }
            }
        }
        criterion(7, "fold integrity on 200 random cohorts: zero train/test patient overlap and "
                     "positivity deviation <= 5pp",
                  integrity && stratification);
    }

    // ---- criterion 8: intercept calibration targets ----
    {
        bool ok = true;
        std::string detail;
        for (double target : {0.24, 0.416, 0.238}) {
            SynthConfig calibrated = calibrate_intercept(SynthConfig::defaults(), target);
            SynthConfig at_calib = calibrated;
            at_calib.n_patients = kCalibrationPatients;
            at_calib.seed = kCalibrationSeed;
            const double calib_rate = patient_mortality_rate(generate_cohort(at_calib));
            ok = ok && std::fabs(calib_rate - target) <= 0.005;

            SynthConfig fresh = calibrated;
            fresh.n_patients = 20000;
            fresh.seed = 1234;
            const double fresh_rate = patient_mortality_rate(generate_cohort(fresh));
            ok = ok && std::fabs(fresh_rate - target) <= 0.02;
            detail += fmt(target) + "->" + fmt(calib_rate) + "/" + fmt(fresh_rate) + " ";
        }
        criterion(8, "calibration hits 0.24 / 0.416 / 0.238 within 0.005 at the calibration "
                     "sample and 0.02 on fresh seeds",
                  ok, detail);
    }

    // ---- criterion 10: end-to-end determinism ----
    {
        SynthConfig scfg = SynthConfig::defaults();
        scfg.n_patients = 2000;
        const CohortTable table = generate_cohort(scfg);
        std::ostringstream bytes;
        write_cohort_csv(table, bytes);

        AuditConfig cfg;
        cfg.tasks = {Task::Mortality, Task::FutureRsofa};
        cfg.k = 5;
        cfg.seed = 42;
        cfg.gbt_hyper.n_rounds = 50;

        const auto run_from_bytes = [&]() {
            std::istringstream in(bytes.str());
            const CohortTable parsed = parse_cohort_csv(in, true);
            AuditReport report = run_audit(parsed, cfg);
            report.wall_clock_ms = 0.0;
            return report_to_json(report);
        };
        const std::string first = run_from_bytes();
        const std::string second = run_from_bytes();
        criterion(10, "two end-to-end runs from identical cohort bytes produce byte-identical "
                      "report records",
                  !first.empty() && first == second);
    }

    std::printf("%d of 11 criteria passed\n", 11 - failures);
    return failures == 0 ? 0 : 1;
}
