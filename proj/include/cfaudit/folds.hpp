#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cfaudit/cohort.hpp"
#include "cfaudit/prep.hpp"

namespace cfaudit {

// Patient -> fold map for grouped stratified cross-validation: every
// observation of a patient lands in the same fold.
struct FoldAssignment {
    int k = 0;
    std::map<std::string, int> patient_to_fold;
    std::uint64_t seed = 0;
    Task task = Task::Mortality;

    int fold_of(const std::string& patient_id) const;
};

FoldAssignment assign_folds(const CohortTable& table, const TaskLabel& labels, int k,
                            std::uint64_t seed);

// test = rows of patients in `fold`, train = everything else.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> fold_slices(
    const FoldAssignment& assignment, const CohortTable& table, int fold);

void write_fold_csv(const FoldAssignment& assignment, std::ostream& out);
void write_fold_csv_file(const FoldAssignment& assignment, const std::string& path);

}  // namespace cfaudit
