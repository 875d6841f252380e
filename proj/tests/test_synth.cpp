#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cfaudit/errors.hpp"
#include "cfaudit/learn.hpp"
#include "cfaudit/parallel.hpp"
#include "cfaudit/prep.hpp"
#include "cfaudit/synth.hpp"

using namespace cfaudit;

namespace {

std::string csv_bytes(const CohortTable& t) {
    std::ostringstream out;
    write_cohort_csv(t, out);
    return out.str();
}

}  // namespace

TEST_CASE("generation is deterministic in the config") {
    SynthConfig cfg = SynthConfig::defaults();
    cfg.n_patients = 800;
    CHECK(csv_bytes(generate_cohort(cfg)) == csv_bytes(generate_cohort(cfg)));
    cfg.seed = 43;
    CHECK(csv_bytes(generate_cohort(cfg)) != csv_bytes(generate_cohort(SynthConfig::defaults())));
}

TEST_CASE("generation does not depend on the thread count") {
    SynthConfig cfg = SynthConfig::defaults();
    cfg.n_patients = 1200;
    set_threads(1);
    const std::string serial = csv_bytes(generate_cohort(cfg));
    set_threads(2);
    const std::string parallel = csv_bytes(generate_cohort(cfg));
    set_threads(0);
    CHECK(serial == parallel);
}

TEST_CASE("zero bias makes the two measurements identical") {
    SynthConfig cfg = SynthConfig::defaults();
    cfg.n_patients = 1000;
    cfg.bias_mean = {};
    cfg.bias_sd = 0.0;
    CohortTable t = generate_cohort(cfg);
    for (const auto& obs : t.rows) CHECK(obs.spo2 == obs.sao2);
    const auto summary = injected_bias_summary(t);
    for (const auto& [race, s] : summary) {
        CHECK(s.mean_delta == 0.0);
        CHECK(s.hh_rate == 0.0);
    }
}

TEST_CASE("injected bias is recoverable from the generated measurements") {
    SynthConfig cfg = SynthConfig::defaults();  // Black +1.5, Asian +0.5
    CohortTable t = generate_cohort(cfg);
    const auto summary = injected_bias_summary(t);
    CHECK(std::fabs(summary.at(RaceEthnicity::Black).mean_delta - 1.5) <= 0.1);
    CHECK(std::fabs(summary.at(RaceEthnicity::White).mean_delta) <= 0.1);
}

TEST_CASE("hidden hypoxemia summary definitions") {
    CohortTable t;
    PairedObservation obs;
    obs.obs_id = "a";
    obs.patient_id = "p";
    obs.spo2 = 90;
    obs.sao2 = 85;
    obs.race_ethnicity = RaceEthnicity::Black;
    t.rows.push_back(obs);
    const auto summary = injected_bias_summary(t);
    CHECK(summary.at(RaceEthnicity::Black).hh_rate == 1.0);
    CHECK(summary.at(RaceEthnicity::Black).mean_delta == 5.0);
    CHECK(summary.size() == 1);
}

TEST_CASE("default cohort hidden hypoxemia rate matches the documented band") {
    CohortTable t = generate_cohort(SynthConfig::defaults());
    const auto overall = overall_bias_summary(t);
    CHECK(overall.hh_rate >= 0.02);
    CHECK(overall.hh_rate <= 0.04);
    // the biased group is hit hardest
    const auto per_race = injected_bias_summary(t);
    CHECK(per_race.at(RaceEthnicity::Black).hh_rate > per_race.at(RaceEthnicity::White).hh_rate);
}

TEST_CASE("generated rows satisfy the cohort invariants") {
    SynthConfig cfg = SynthConfig::defaults();
    cfg.n_patients = 3000;
    CohortTable t = generate_cohort(cfg);
    CHECK(t.provenance == Provenance::Synthetic);
    const auto report = validate_cohort(t);
    CHECK(report.total_violations() == 0);
    CHECK(report.duplicate_obs_ids.empty());
    CHECK(report.n_patients == 3000);
}

TEST_CASE("seed changes values but not the schema or scale") {
    SynthConfig a = SynthConfig::defaults();
    a.n_patients = 3000;
    SynthConfig b = a;
    b.seed = 777;
    CohortTable ta = generate_cohort(a);
    CohortTable tb = generate_cohort(b);
    const double ra = static_cast<double>(ta.rows.size());
    const double rb = static_cast<double>(tb.rows.size());
    CHECK(std::fabs(ra - rb) / ra < 0.05);
    CHECK(validate_cohort(tb).total_violations() == 0);
}

TEST_CASE("intercept calibration hits a symmetric target with zero effects") {
    SynthConfig cfg = SynthConfig::defaults();
    cfg.severity_effect.mortality_severity = 0.0;
    cfg.severity_effect.mortality_hypox = 0.0;
    const SynthConfig out = calibrate_intercept(cfg, 0.5);
    CHECK(std::fabs(out.severity_effect.mortality_intercept) <= 0.02);
}

TEST_CASE("intercept calibration is exact at the calibration seed") {
    for (double target : {0.24, 0.416}) {
        SynthConfig out = calibrate_intercept(SynthConfig::defaults(), target);
        // generating at the calibration seed and size replays the same draws
        out.n_patients = kCalibrationPatients;
        out.seed = kCalibrationSeed;
        const double rate = patient_mortality_rate(generate_cohort(out));
        CHECK(std::fabs(rate - target) <= kCalibrationTolerance);
    }
}

TEST_CASE("calibrated config lands near the target on fresh seeds") {
    SynthConfig out = calibrate_intercept(SynthConfig::defaults(), 0.24);
    out.n_patients = 20000;
    out.seed = 4242;
    CHECK(std::fabs(patient_mortality_rate(generate_cohort(out)) - 0.24) <= 0.02);
}

TEST_CASE("outcomes are independent of the device measurement given the truth") {
    // two-feature logistic refit: the spo2 coefficient given sao2 must
    // vanish, because the generator never feeds spo2 into outcomes
    SynthConfig cfg = SynthConfig::defaults();
    cfg.n_patients = 40000;  // about 100k rows
    CohortTable t = generate_cohort(cfg);
    Dataset data;
    data.n_rows = t.rows.size();
    data.n_cols = 2;
    data.x.reserve(2 * t.rows.size());
    for (const auto& obs : t.rows) {
        data.x.push_back(obs.sao2);
        data.x.push_back(obs.spo2);
        data.y.push_back(obs.in_hospital_mortality);
    }
    const LinearModel model = train_logistic(data);
    CHECK(std::fabs(model.weights[1]) <= 0.05);  // standardized spo2 coefficient
    CHECK(model.weights[0] < -0.05);             // true saturation carries signal
}

TEST_CASE("config json round trip and validation errors") {
    SynthConfig cfg = SynthConfig::defaults();
    cfg.n_patients = 123;
    cfg.seed = 9;
    const SynthConfig parsed = SynthConfig::from_json_text(cfg.to_json_text());
    CHECK(parsed.n_patients == 123);
    CHECK(parsed.seed == 9);
    CHECK(parsed.bias_mean == cfg.bias_mean);
    CHECK(parsed.race_probs == cfg.race_probs);
    CHECK(parsed.severity_effect.mortality_intercept ==
          cfg.severity_effect.mortality_intercept);

    CHECK_THROWS_AS(SynthConfig::from_json_text(R"({"bias_sd": -1})"), InvalidConfigError);
    CHECK_THROWS_AS(SynthConfig::from_json_text(R"({"race_probs": {"White": 0.5}})"),
                    InvalidConfigError);
    CHECK_THROWS_AS(SynthConfig::from_json_text(R"({"race_probs": {"Martian": 1.0}})"),
                    InvalidConfigError);
    CHECK_THROWS_AS(SynthConfig::from_json_text(R"({"n_patients": 0})"), InvalidConfigError);

    // partial overrides keep the remaining defaults
    const SynthConfig partial = SynthConfig::from_json_text(R"({"missing_rate": 0.2})");
    CHECK(partial.missing_rate == 0.2);
    CHECK(partial.n_patients == SynthConfig::defaults().n_patients);
}
