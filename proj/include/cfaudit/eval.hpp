#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cfaudit/cohort.hpp"
#include "cfaudit/prep.hpp"

namespace cfaudit {

enum class ModelFamily : std::uint8_t { Logistic, Gbt };
inline constexpr std::array<ModelFamily, 2> kAllFamilies = {ModelFamily::Logistic,
                                                            ModelFamily::Gbt};
const char* family_name(ModelFamily f);
std::optional<ModelFamily> family_from_name(const std::string& name);

enum class Axis : std::uint8_t { Overall, RaceEthnicity, BiasMagnitude, HiddenHypoxemia };
inline constexpr std::array<Axis, 4> kAllAxes = {Axis::Overall, Axis::RaceEthnicity,
                                                 Axis::BiasMagnitude, Axis::HiddenHypoxemia};
const char* axis_name(Axis a);
std::optional<Axis> axis_from_name(const std::string& name);

enum class Metric : std::uint8_t { Auroc, Recall, F1, Accuracy };
inline constexpr std::array<Metric, 4> kAllMetrics = {Metric::Auroc, Metric::Recall, Metric::F1,
                                                      Metric::Accuracy};
const char* metric_name(Metric m);

enum class DisparityBin : std::uint8_t { LtMinus3, Minus3To0, ZeroTo3, Ge3 };
inline constexpr std::array<DisparityBin, 4> kAllBins = {
    DisparityBin::LtMinus3, DisparityBin::Minus3To0, DisparityBin::ZeroTo3, DisparityBin::Ge3};
const char* bin_name(DisparityBin b);

struct PredictionSet {
    std::vector<std::string> obs_ids;
    std::vector<double> scores;  // probabilities in (0,1)
    std::vector<int> labels;
    Arm arm = Arm::ControlSao2;
    int fold = 0;
    Task task = Task::Mortality;
    ModelFamily model_family = ModelFamily::Logistic;
};

struct SubgroupMetricRecord {
    Axis axis = Axis::Overall;
    std::string subgroup;
    int fold = 0;
    Arm arm = Arm::ControlSao2;
    Metric metric = Metric::Auroc;
    std::optional<double> value;
    std::size_t n = 0;       // subgroup test size
    bool unstable = false;   // n < 10
};

struct TestResult {
    Metric metric = Metric::Auroc;
    Axis axis = Axis::Overall;
    std::string subgroup;
    double mean_control = 0.0;
    double mean_treatment = 0.0;
    double t_stat = 0.0;
    double p_value = 1.0;
    std::size_t n_pairs = 0;
    std::string stars;
};

struct ThresholdMetrics {
    double accuracy = 0.0;
    std::optional<double> recall;
    std::optional<double> f1;
};

ThresholdMetrics metrics_at_threshold(const PredictionSet& preds, double threshold);

// Mann-Whitney AUROC with tie handling; nullopt when a class is empty.
std::optional<double> auroc(const PredictionSet& preds);
std::optional<double> auroc(const std::vector<double>& scores, const std::vector<int>& labels);

DisparityBin disparity_bin(double spo2, double sao2);
bool hidden_hypoxemia(double sao2, double spo2);

// Subgroup labels for an axis, in canonical order.
std::vector<std::string> axis_subgroups(Axis axis);
// Subgroup of one observation along an axis (depends only on table columns).
std::string subgroup_of(const PairedObservation& obs, Axis axis);

std::vector<SubgroupMetricRecord> slice_metrics(const PredictionSet& preds,
                                                const CohortTable& table, Axis axis,
                                                double threshold);

// Two-sided paired t-test over per-fold metric values; pairs with an
// undefined side are dropped by the caller before this point.
struct PairedTestCore {
    double t_stat = 0.0;
    double p_value = 1.0;
    std::size_t n_pairs = 0;
};
PairedTestCore paired_t_test(const std::vector<double>& control,
                             const std::vector<double>& treatment);

std::string stars(double p);

}  // namespace cfaudit
