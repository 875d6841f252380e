#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>

#include "cfaudit/cohort.hpp"

namespace cfaudit {

struct SeverityEffect {
    double mortality_intercept = 0.0;
    double mortality_severity = 0.0;
    double mortality_hypox = 0.0;
};

// Generator configuration. Outcomes are driven by latent severity and true
// SaO2 only; SpO2 enters nothing downstream of measurement.
struct SynthConfig {
    std::size_t n_patients = 20000;
    std::array<double, kNumRaces> race_probs{};  // indexed by RaceEthnicity
    std::array<double, kNumRaces> bias_mean{};   // percent added to SaO2
    double bias_sd = 1.5;
    double sao2_noise_sd = 1.8;
    double desat_slope = 6.5;  // severity -> desaturation strength
    SeverityEffect severity_effect;
    double target_mortality = 0.24;
    double pairs_dist = 0.4;   // geometric success probability
    double missing_rate = 0.08;
    std::uint64_t seed = 42;

    static SynthConfig defaults();
    static SynthConfig from_json_text(const std::string& text);
    static SynthConfig from_json_file(const std::string& path);
    std::string to_json_text() const;
    void validate() const;  // throws InvalidConfigError
};

CohortTable generate_cohort(const SynthConfig& cfg);

struct BiasSummary {
    std::size_t n_rows = 0;
    double mean_delta = 0.0;
    double sd_delta = 0.0;  // sample sd
    double hh_rate = 0.0;   // fraction of rows with hidden hypoxemia
};

// Per-race delta and hidden-hypoxemia summary; races absent from the table
// are omitted.
std::map<RaceEthnicity, BiasSummary> injected_bias_summary(const CohortTable& table);
BiasSummary overall_bias_summary(const CohortTable& table);

// Patient-level mortality rate (a patient counts once).
double patient_mortality_rate(const CohortTable& table);

inline constexpr std::size_t kCalibrationPatients = 50000;
inline constexpr std::uint64_t kCalibrationSeed = 0x5eedca11b2026ULL;
inline constexpr double kCalibrationTolerance = 0.005;

// Bisects mortality_intercept until simulated patient-level mortality at
// kCalibrationSeed / kCalibrationPatients lands within the calibration
// tolerance of target.
SynthConfig calibrate_intercept(const SynthConfig& cfg, double target);

}  // namespace cfaudit
