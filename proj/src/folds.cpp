#include "cfaudit/folds.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "cfaudit/errors.hpp"
#include "cfaudit/rng.hpp"

namespace cfaudit {

int FoldAssignment::fold_of(const std::string& patient_id) const {
    const auto it = patient_to_fold.find(patient_id);
    if (it == patient_to_fold.end())
        throw std::out_of_range("patient not in fold assignment: " + patient_id);
    return it->second;
}

FoldAssignment assign_folds(const CohortTable& table, const TaskLabel& labels, int k,
                            std::uint64_t seed) {
    if (k < 2) throw TooFewPatientsError(0, k);
    if (labels.y.size() != table.rows.size())
        throw std::invalid_argument("labels not aligned to table");

    struct PatientStat {
        std::string id;
        std::size_t n_obs = 0;
        std::size_t n_pos = 0;
    };
    std::map<std::string, PatientStat> stats;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        auto& s = stats[table.rows[i].patient_id];
        s.id = table.rows[i].patient_id;
        ++s.n_obs;
        s.n_pos += static_cast<std::size_t>(labels.y[i] != 0);
    }
    if (stats.size() < static_cast<std::size_t>(k)) throw TooFewPatientsError(stats.size(), k);

    std::vector<PatientStat> order;
    order.reserve(stats.size());
    for (auto& [id, s] : stats) order.push_back(s);
    std::sort(order.begin(), order.end(), [](const PatientStat& a, const PatientStat& b) {
        if (a.n_pos != b.n_pos) return a.n_pos > b.n_pos;
        if (a.n_obs != b.n_obs) return a.n_obs > b.n_obs;
        return a.id < b.id;
    });

    // Seeded Fisher-Yates within each run of equal (n_pos, n_obs) keys; the
    // sorted base order makes the shuffle reproducible for a given seed.
    SubRng rng(seed, 0, 0);
    std::size_t run_start = 0;
    for (std::size_t i = 1; i <= order.size(); ++i) {
        const bool run_ends = i == order.size() || order[i].n_pos != order[run_start].n_pos ||
                              order[i].n_obs != order[run_start].n_obs;
        if (run_ends) {
            for (std::size_t j = i - 1; j > run_start; --j) {
                const std::size_t pick = run_start + rng.next_u64() % (j - run_start + 1);
                std::swap(order[j], order[pick]);
            }
            run_start = i;
        }
    }

    // Greedy packing: each patient goes to the fold that, after adding it,
    // minimizes the spread of per-class observation shares across folds
    // (positivity deviation), breaking ties toward the smallest fold, then
    // the lowest index.
    double total_pos = 0.0, total_neg = 0.0;
    for (const auto& p : order) {
        total_pos += static_cast<double>(p.n_pos);
        total_neg += static_cast<double>(p.n_obs - p.n_pos);
    }
    total_pos = std::max(total_pos, 1.0);
    total_neg = std::max(total_neg, 1.0);

    const auto ku = static_cast<std::size_t>(k);
    std::vector<double> fold_pos(ku, 0.0);
    std::vector<double> fold_neg(ku, 0.0);
    std::vector<std::size_t> fold_obs(ku, 0);

    const auto share_spread = [&](const std::vector<double>& counts, double total, std::size_t fold,
                                  double extra) {
        double mean = 0.0;
        for (std::size_t f = 0; f < ku; ++f) mean += (counts[f] + (f == fold ? extra : 0.0)) / total;
        mean /= static_cast<double>(ku);
        double ss = 0.0;
        for (std::size_t f = 0; f < ku; ++f) {
            const double dev = (counts[f] + (f == fold ? extra : 0.0)) / total - mean;
            ss += dev * dev;
        }
        return ss;
    };

    FoldAssignment assignment;
    assignment.k = k;
    assignment.seed = seed;
    assignment.task = labels.task;
    for (const auto& p : order) {
        const double add_pos = static_cast<double>(p.n_pos);
        const double add_neg = static_cast<double>(p.n_obs - p.n_pos);
        std::size_t best = 0;
        double best_score = 0.0;
        for (std::size_t f = 0; f < ku; ++f) {
            const double score = share_spread(fold_pos, total_pos, f, add_pos) +
                                 share_spread(fold_neg, total_neg, f, add_neg);
            if (f == 0 || score < best_score ||
                (score == best_score && fold_obs[f] < fold_obs[best])) {
                best = f;
                best_score = score;
            }
        }
        assignment.patient_to_fold[p.id] = static_cast<int>(best);
        fold_pos[best] += add_pos;
        fold_neg[best] += add_neg;
        fold_obs[best] += p.n_obs;
    }
    return assignment;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> fold_slices(
    const FoldAssignment& assignment, const CohortTable& table, int fold) {
    if (fold < 0 || fold >= assignment.k) throw FoldOutOfRangeError(fold, assignment.k);
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        if (assignment.fold_of(table.rows[i].patient_id) == fold)
            test.push_back(i);
        else
            train.push_back(i);
    }
    return {std::move(train), std::move(test)};
}

void write_fold_csv(const FoldAssignment& assignment, std::ostream& out) {
    out << "patient_id,fold\n";
    for (const auto& [patient, fold] : assignment.patient_to_fold)
        out << patient << ',' << fold << '\n';
}

void write_fold_csv_file(const FoldAssignment& assignment, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    write_fold_csv(assignment, out);
}

}  // namespace cfaudit
