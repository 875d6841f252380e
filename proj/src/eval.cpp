#include "cfaudit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cfaudit/errors.hpp"
#include "cfaudit/stats.hpp"

namespace cfaudit {

const char* family_name(ModelFamily f) {
    return f == ModelFamily::Logistic ? "logistic" : "gbt";
}

std::optional<ModelFamily> family_from_name(const std::string& name) {
    for (ModelFamily f : kAllFamilies)
        if (name == family_name(f)) return f;
    return std::nullopt;
}

const char* axis_name(Axis a) {
    switch (a) {
        case Axis::Overall: return "overall";
        case Axis::RaceEthnicity: return "race_ethnicity";
        case Axis::BiasMagnitude: return "bias_magnitude";
        case Axis::HiddenHypoxemia: return "hidden_hypoxemia";
    }
    return "overall";
}

std::optional<Axis> axis_from_name(const std::string& name) {
    for (Axis a : kAllAxes)
        if (name == axis_name(a)) return a;
    return std::nullopt;
}

const char* metric_name(Metric m) {
    switch (m) {
        case Metric::Auroc: return "auroc";
        case Metric::Recall: return "recall";
        case Metric::F1: return "f1";
        case Metric::Accuracy: return "accuracy";
    }
    return "auroc";
}

const char* bin_name(DisparityBin b) {
    switch (b) {
        case DisparityBin::LtMinus3: return "lt_minus_3";
        case DisparityBin::Minus3To0: return "minus_3_to_0";
        case DisparityBin::ZeroTo3: return "zero_to_3";
        case DisparityBin::Ge3: return "ge_3";
    }
    return "zero_to_3";
}

ThresholdMetrics metrics_at_threshold(const PredictionSet& preds, double threshold) {
    std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < preds.scores.size(); ++i) {
        const bool predicted = preds.scores[i] >= threshold;
        const bool actual = preds.labels[i] != 0;
        if (predicted && actual) ++tp;
        else if (predicted && !actual) ++fp;
        else if (!predicted && actual) ++fn;
        else ++tn;
    }
    ThresholdMetrics out;
    const std::size_t n = tp + tn + fp + fn;
    out.accuracy = n ? static_cast<double>(tp + tn) / static_cast<double>(n) : 0.0;
    if (tp + fn > 0) out.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    if (tp + fp + fn > 0) out.f1 = 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
    return out;
}

std::optional<double> auroc(const std::vector<double>& scores, const std::vector<int>& labels) {
    const std::size_t n = scores.size();
    std::size_t n_pos = 0;
    for (int y : labels) n_pos += static_cast<std::size_t>(y != 0);
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) return std::nullopt;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Rank-sum with average ranks over ties. Ranks are half-integers, exact
    // in double, so this matches pairwise counting bit for bit.
    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k)
            if (labels[order[k]] != 0) pos_rank_sum += avg_rank;
        i = j + 1;
    }
    const double u = pos_rank_sum -
                     static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

std::optional<double> auroc(const PredictionSet& preds) {
    return auroc(preds.scores, preds.labels);
}

DisparityBin disparity_bin(double spo2, double sao2) {
    const double delta = spo2 - sao2;
    if (delta < -3.0) return DisparityBin::LtMinus3;
    if (delta < 0.0) return DisparityBin::Minus3To0;
    if (delta < 3.0) return DisparityBin::ZeroTo3;
    return DisparityBin::Ge3;
}

bool hidden_hypoxemia(double sao2, double spo2) { return sao2 < 88.0 && spo2 >= 88.0; }

std::vector<std::string> axis_subgroups(Axis axis) {
    switch (axis) {
        case Axis::Overall: return {"all"};
        case Axis::RaceEthnicity: {
            std::vector<std::string> names;
            for (RaceEthnicity r : kAllRaces) names.emplace_back(race_name(r));
            return names;
        }
        case Axis::BiasMagnitude: {
            std::vector<std::string> names;
            for (DisparityBin b : kAllBins) names.emplace_back(bin_name(b));
            return names;
        }
        case Axis::HiddenHypoxemia: return {"class_0", "class_1"};
    }
    return {"all"};
}

std::string subgroup_of(const PairedObservation& obs, Axis axis) {
    switch (axis) {
        case Axis::Overall: return "all";
        case Axis::RaceEthnicity: return race_name(obs.race_ethnicity);
        case Axis::BiasMagnitude: return bin_name(disparity_bin(obs.spo2, obs.sao2));
        case Axis::HiddenHypoxemia:
            return hidden_hypoxemia(obs.sao2, obs.spo2) ? "class_1" : "class_0";
    }
    return "all";
}

std::vector<SubgroupMetricRecord> slice_metrics(const PredictionSet& preds,
                                                const CohortTable& table, Axis axis,
                                                double threshold) {
    const auto& index = table.obs_index();
    const auto groups = axis_subgroups(axis);

    std::vector<std::vector<std::size_t>> members(groups.size());
    for (std::size_t i = 0; i < preds.obs_ids.size(); ++i) {
        const auto it = index.find(preds.obs_ids[i]);
        if (it == index.end()) throw UnknownObsIdError(preds.obs_ids[i]);
        const std::string group = subgroup_of(table.rows[it->second], axis);
        for (std::size_t g = 0; g < groups.size(); ++g) {
            if (groups[g] == group) {
                members[g].push_back(i);
                break;
            }
        }
    }

    std::vector<SubgroupMetricRecord> records;
    records.reserve(groups.size() * kAllMetrics.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
        PredictionSet sub;
        sub.arm = preds.arm;
        sub.fold = preds.fold;
        sub.task = preds.task;
        sub.model_family = preds.model_family;
        sub.scores.reserve(members[g].size());
        sub.labels.reserve(members[g].size());
        for (std::size_t i : members[g]) {
            sub.scores.push_back(preds.scores[i]);
            sub.labels.push_back(preds.labels[i]);
        }

        std::optional<double> auc;
        ThresholdMetrics tm;
        if (!sub.scores.empty()) {
            auc = auroc(sub.scores, sub.labels);
            tm = metrics_at_threshold(sub, threshold);
        }
        for (Metric metric : kAllMetrics) {
            SubgroupMetricRecord rec;
            rec.axis = axis;
            rec.subgroup = groups[g];
            rec.fold = preds.fold;
            rec.arm = preds.arm;
            rec.metric = metric;
            rec.n = members[g].size();
            rec.unstable = rec.n < 10;
            if (!sub.scores.empty()) {
                switch (metric) {
                    case Metric::Auroc: rec.value = auc; break;
                    case Metric::Recall: rec.value = tm.recall; break;
                    case Metric::F1: rec.value = tm.f1; break;
                    case Metric::Accuracy: rec.value = tm.accuracy; break;
                }
            }
            records.push_back(std::move(rec));
        }
    }
    return records;
}

PairedTestCore paired_t_test(const std::vector<double>& control,
                             const std::vector<double>& treatment) {
    if (control.size() != treatment.size())
        throw InsufficientPairsError(std::min(control.size(), treatment.size()));
    const std::size_t n = control.size();
    if (n < 2) throw InsufficientPairsError(n);

    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += control[i] - treatment[i];
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dev = (control[i] - treatment[i]) - mean;
        ss += dev * dev;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));

    PairedTestCore out;
    out.n_pairs = n;
    if (sd == 0.0) {
        if (mean == 0.0) {
            out.t_stat = 0.0;
            out.p_value = 1.0;
        } else {
            out.t_stat = mean > 0.0 ? std::numeric_limits<double>::infinity()
                                    : -std::numeric_limits<double>::infinity();
            out.p_value = 0.0;
        }
        return out;
    }
    out.t_stat = mean / (sd / std::sqrt(static_cast<double>(n)));
    out.p_value = student_t_two_sided_p(out.t_stat, static_cast<double>(n - 1));
    return out;
}

std::string stars(double p) {
    if (p <= 0.001) return "***";
    if (p <= 0.01) return "**";
    if (p <= 0.05) return "*";
    return "";
}

}  // namespace cfaudit
