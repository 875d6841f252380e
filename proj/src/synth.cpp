#include "cfaudit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cfaudit/errors.hpp"
#include "cfaudit/rng.hpp"
#include "cfaudit/version.hpp"

namespace cfaudit {

namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double clamp(double v, double lo, double hi) { return v < lo ? lo : v > hi ? hi : v; }

double round_to(double v, int decimals) {
    const double scale = decimals == 0 ? 1.0 : decimals == 1 ? 10.0 : 100.0;
    return std::round(v * scale) / scale;
}

// Field tags for per-patient substreams. Each observation owns a 64-tag
// region so per-field draws stay order-independent.
enum PatientTag : std::uint64_t {
    kTagRace = 0,
    kTagSeverity = 1,
    kTagPairs = 2,
    kTagAge = 3,
    kTagSex = 4,
    kTagComorbidity = 5,
    kTagSofaComponentBase = 6,  // ..11
    kTagMortality = 12,
};
constexpr std::uint64_t kObsRegion = 64;
enum ObsTag : std::uint64_t {
    kObsSao2Noise = 0,
    kObsSpo2Noise = 1,
    kObsTimeDelta = 2,
    kObsVitalBase = 3,   // hr, rr, temp, sbp, dbp -> ..7
    kObsLabBase = 9,     // ..21
    kObsRespStep = 22,
    kObsTotalStep = 23,
    kObsVitalMaskBase = 30,  // 6 masks
    kObsLabMaskBase = 36,    // 13 masks
};

std::uint64_t obs_tag(std::uint32_t obs, std::uint64_t tag) {
    return kObsRegion + kObsRegion * obs + tag;
}

constexpr std::uint32_t kMaxExtraPairs = 39;

// SOFA trajectory shape; step offsets are tuned so the default cohort lands
// near the documented task positivity targets.
constexpr double kSofaComponentBase = 0.9;
constexpr double kSofaComponentSeverity = 0.65;
constexpr double kSofaComponentNoise = 0.55;
constexpr double kRespStepBase = -0.80;
constexpr double kRespStepSeverity = 0.80;
constexpr double kTotalStepBase = 0.59;
constexpr double kTotalStepSeverity = 0.80;
constexpr double kStepNoise = 1.0;

struct ContinuousSpec {
    double base;
    double severity_coef;
    double noise_sd;
    double floor;
    int decimals;
};

// hr, rr, temp, sbp, dbp (map_mmhg is composed from sbp/dbp)
constexpr std::array<ContinuousSpec, 5> kVitalSpecs = {{
    {82.0, 6.0, 9.0, 20.0, 1},
    {17.0, 1.8, 3.0, 4.0, 1},
    {36.9, 0.15, 0.4, 30.0, 1},
    {118.0, -6.0, 12.0, 50.0, 1},
    {68.0, -3.0, 8.0, 25.0, 1},
}};

// one per Lab, in enum order
constexpr std::array<ContinuousSpec, kNumLabs> kLabSpecs = {{
    {4.0, -0.25, 0.4, 0.5, 2},    // albumin
    {8.0, 1.0, 2.0, 1.0, 2},      // anion_gap
    {25.0, -1.2, 2.5, 5.0, 2},    // bicarbonate
    {16.0, 4.0, 5.0, 1.0, 2},     // bun
    {1.1, 0.3, 0.4, 0.1, 2},      // creatinine
    {112.0, 8.0, 26.0, 20.0, 2},  // glucose
    {11.8, -0.5, 1.6, 3.0, 2},    // hemoglobin
    {1.6, 0.6, 0.7, 0.2, 2},      // lactate
    {240.0, -25.0, 70.0, 10.0, 2},// platelets
    {4.1, 0.15, 0.4, 2.0, 2},     // potassium
    {4.1, -0.15, 0.5, 1.5, 2},    // rbc
    {14.3, 0.5, 1.5, 10.0, 2},    // rdw
    {139.0, 0.8, 4.0, 115.0, 2},  // sodium
}};

struct PatientCore {
    RaceEthnicity race = RaceEthnicity::OtherUnknown;
    double severity = 0.0;
    std::uint32_t n_pairs = 1;
    std::vector<double> sao2;  // final clamped + rounded values
    double min_sao2 = 100.0;
    double mortality_u = 0.0;
};

// Draws shared by full generation and intercept calibration; everything the
// mortality mechanism sees comes from here.
PatientCore patient_core(const SynthConfig& cfg, std::uint64_t seed, std::uint64_t index) {
    PatientCore core;
    {
        SubRng rng(seed, index, kTagRace);
        const double u = rng.uniform();
        double cum = 0.0;
        core.race = RaceEthnicity::OtherUnknown;
        for (RaceEthnicity r : kAllRaces) {
            cum += cfg.race_probs[static_cast<std::size_t>(r)];
            if (u < cum) {
                core.race = r;
                break;
            }
        }
    }
    core.severity = SubRng(seed, index, kTagSeverity).normal();
    core.n_pairs = 1 + std::min(SubRng(seed, index, kTagPairs).geometric(cfg.pairs_dist),
                                kMaxExtraPairs);
    core.sao2.reserve(core.n_pairs);
    const double desat = cfg.desat_slope * softplus(core.severity);
    for (std::uint32_t j = 0; j < core.n_pairs; ++j) {
        SubRng rng(seed, index, obs_tag(j, kObsSao2Noise));
        const double raw = 97.0 - desat + cfg.sao2_noise_sd * rng.normal();
        const double value = round_to(clamp(raw, 70.0, 100.0), 1);
        core.sao2.push_back(value);
        core.min_sao2 = std::min(core.min_sao2, value);
    }
    core.mortality_u = SubRng(seed, index, kTagMortality).uniform();
    return core;
}

int mortality_draw(const SynthConfig& cfg, const PatientCore& core) {
    const double hypox = std::max(0.0, 88.0 - core.min_sao2);
    const double p = sigmoid(cfg.severity_effect.mortality_intercept +
                             cfg.severity_effect.mortality_severity * core.severity +
                             cfg.severity_effect.mortality_hypox * hypox);
    return core.mortality_u < p ? 1 : 0;
}

std::string patient_name(std::uint64_t index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "P%07llu", static_cast<unsigned long long>(index));
    return buf;
}

}  // namespace

SynthConfig SynthConfig::defaults() {
    SynthConfig cfg;
    cfg.race_probs[static_cast<std::size_t>(RaceEthnicity::Asian)] = 0.018;
    cfg.race_probs[static_cast<std::size_t>(RaceEthnicity::Black)] = 0.100;
    cfg.race_probs[static_cast<std::size_t>(RaceEthnicity::HispanicLatino)] = 0.042;
    cfg.race_probs[static_cast<std::size_t>(RaceEthnicity::White)] = 0.758;
    cfg.race_probs[static_cast<std::size_t>(RaceEthnicity::OtherUnknown)] = 0.082;
    cfg.bias_mean[static_cast<std::size_t>(RaceEthnicity::Asian)] = 0.5;
    cfg.bias_mean[static_cast<std::size_t>(RaceEthnicity::Black)] = 1.5;
    // mortality_intercept from calibrate_intercept at target 0.24, frozen
    cfg.severity_effect = {-1.71875, 1.0, 0.5};
    return cfg;
}

void SynthConfig::validate() const {
    if (n_patients == 0) throw InvalidConfigError("n_patients must be positive");
    double sum = 0.0;
    for (double p : race_probs) {
        if (p < 0.0 || p > 1.0) throw InvalidConfigError("race_probs entries must be in [0,1]");
        sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-9) throw InvalidConfigError("race_probs must sum to 1");
    if (bias_sd < 0.0) throw InvalidConfigError("bias_sd must be >= 0");
    if (sao2_noise_sd < 0.0) throw InvalidConfigError("sao2_noise_sd must be >= 0");
    if (desat_slope < 0.0) throw InvalidConfigError("desat_slope must be >= 0");
    if (!(pairs_dist > 0.0 && pairs_dist <= 1.0))
        throw InvalidConfigError("pairs_dist must be in (0,1]");
    if (missing_rate < 0.0 || missing_rate > 1.0)
        throw InvalidConfigError("missing_rate must be in [0,1]");
    if (!(target_mortality > 0.0 && target_mortality < 1.0))
        throw InvalidConfigError("target_mortality must be in (0,1)");
}

CohortTable generate_cohort(const SynthConfig& cfg) {
    cfg.validate();
    const std::size_t n = cfg.n_patients;
    std::vector<std::vector<PairedObservation>> per_patient(n);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t pi = 0; pi < static_cast<std::ptrdiff_t>(n); ++pi) {
        const auto index = static_cast<std::uint64_t>(pi);
        const PatientCore core = patient_core(cfg, cfg.seed, index);
        const double s = core.severity;
        const int died = mortality_draw(cfg, core);
        const std::string patient_id = patient_name(index);

        const double age = clamp(std::round(65.0 + 15.0 * SubRng(cfg.seed, index, kTagAge).normal()),
                                 18.0, 100.0);
        const Sex sex = SubRng(cfg.seed, index, kTagSex).uniform() < 0.44 ? Sex::Female : Sex::Male;
        const int comorbidity = static_cast<int>(std::max(
            0.0, std::round(4.0 + 2.0 * SubRng(cfg.seed, index, kTagComorbidity).normal() + 0.3 * s)));

        std::array<int, kNumSofaComponents> past{};
        int past_total = 0;
        for (std::size_t c = 0; c < kNumSofaComponents; ++c) {
            const double z = SubRng(cfg.seed, index, kTagSofaComponentBase + c).normal();
            const double raw = kSofaComponentBase + kSofaComponentSeverity * s + kSofaComponentNoise * z;
            past[c] = static_cast<int>(clamp(std::round(raw), 0.0, 4.0));
            past_total += past[c];
        }
        const int past_resp = past[static_cast<std::size_t>(SofaComponent::Respiratory)];

        auto& rows = per_patient[static_cast<std::size_t>(pi)];
        rows.reserve(core.n_pairs);
        for (std::uint32_t j = 0; j < core.n_pairs; ++j) {
            PairedObservation obs;
            obs.patient_id = patient_id;
            obs.obs_id = patient_id + "-" + std::to_string(j);
            obs.race_ethnicity = core.race;
            obs.sex = sex;
            obs.age = age;
            obs.comorbidity_score = comorbidity;

            obs.sao2 = core.sao2[j];
            {
                SubRng rng(cfg.seed, index, obs_tag(j, kObsSpo2Noise));
                const double raw = obs.sao2 + cfg.bias_mean[static_cast<std::size_t>(core.race)] +
                                   cfg.bias_sd * rng.normal();
                obs.spo2 = round_to(clamp(raw, 70.0, 100.0), 1);
            }
            obs.time_delta_s =
                std::round(SubRng(cfg.seed, index, obs_tag(j, kObsTimeDelta)).uniform() * 300.0);

            double sbp = 0.0, dbp = 0.0;
            for (std::size_t v = 0; v < kVitalSpecs.size(); ++v) {
                const ContinuousSpec& spec = kVitalSpecs[v];
                const double z = SubRng(cfg.seed, index, obs_tag(j, kObsVitalBase + v)).normal();
                const double value = round_to(
                    std::max(spec.floor, spec.base + spec.severity_coef * s + spec.noise_sd * z),
                    spec.decimals);
                switch (v) {
                    case 0: obs.vitals[static_cast<std::size_t>(Vital::HeartRate)] = value; break;
                    case 1: obs.vitals[static_cast<std::size_t>(Vital::RespRate)] = value; break;
                    case 2: obs.vitals[static_cast<std::size_t>(Vital::TemperatureC)] = value; break;
                    case 3: sbp = value; obs.vitals[static_cast<std::size_t>(Vital::Sbp)] = value; break;
                    case 4: dbp = value; obs.vitals[static_cast<std::size_t>(Vital::Dbp)] = value; break;
                }
            }
            obs.vitals[static_cast<std::size_t>(Vital::MapMmhg)] = round_to((sbp + 2.0 * dbp) / 3.0, 1);

            for (std::size_t l = 0; l < kNumLabs; ++l) {
                const ContinuousSpec& spec = kLabSpecs[l];
                const double z = SubRng(cfg.seed, index, obs_tag(j, kObsLabBase + l)).normal();
                obs.labs[l] = round_to(
                    std::max(spec.floor, spec.base + spec.severity_coef * s + spec.noise_sd * z),
                    spec.decimals);
            }

            // Missing-value masks, independent per cell.
            for (std::size_t v = 0; v < kNumVitals; ++v) {
                if (SubRng(cfg.seed, index, obs_tag(j, kObsVitalMaskBase + v)).uniform() <
                    cfg.missing_rate)
                    obs.vitals[v].reset();
            }
            for (std::size_t l = 0; l < kNumLabs; ++l) {
                if (SubRng(cfg.seed, index, obs_tag(j, kObsLabMaskBase + l)).uniform() <
                    cfg.missing_rate)
                    obs.labs[l].reset();
            }

            obs.sofa_past_components = past;
            obs.sofa_past_total = past_total;
            {
                const double z = SubRng(cfg.seed, index, obs_tag(j, kObsRespStep)).normal();
                const double step = clamp(
                    std::round(kRespStepBase + kRespStepSeverity * s + kStepNoise * z), -2.0, 3.0);
                obs.sofa_future_resp =
                    static_cast<int>(clamp(past_resp + step, 0.0, 4.0));
            }
            {
                const double z = SubRng(cfg.seed, index, obs_tag(j, kObsTotalStep)).normal();
                const double step = clamp(
                    std::round(kTotalStepBase + kTotalStepSeverity * s + kStepNoise * z), -2.0, 3.0);
                obs.sofa_future_total =
                    static_cast<int>(clamp(past_total + step, 0.0, 24.0));
            }
            obs.in_hospital_mortality = died;
            rows.push_back(std::move(obs));
        }
    }

    CohortTable table;
    table.schema_version = kCohortSchemaVersion;
    table.provenance = Provenance::Synthetic;
    std::size_t total = 0;
    for (const auto& rows : per_patient) total += rows.size();
    table.rows.reserve(total);
    for (auto& rows : per_patient)
        for (auto& obs : rows) table.rows.push_back(std::move(obs));
    table.obs_index();  // warm the lookup cache while still single-threaded
    return table;
}

std::map<RaceEthnicity, BiasSummary> injected_bias_summary(const CohortTable& table) {
    std::map<RaceEthnicity, std::vector<double>> deltas;
    std::map<RaceEthnicity, std::size_t> hh;
    for (const auto& obs : table.rows) {
        deltas[obs.race_ethnicity].push_back(obs.delta());
        hh[obs.race_ethnicity] += static_cast<std::size_t>(obs.sao2 < 88.0 && obs.spo2 >= 88.0);
    }
    std::map<RaceEthnicity, BiasSummary> out;
    for (const auto& [race, d] : deltas) {
        BiasSummary s;
        s.n_rows = d.size();
        double mean = 0.0;
        for (double v : d) mean += v;
        mean /= static_cast<double>(d.size());
        double ss = 0.0;
        for (double v : d) ss += (v - mean) * (v - mean);
        s.mean_delta = mean;
        s.sd_delta = d.size() > 1 ? std::sqrt(ss / static_cast<double>(d.size() - 1)) : 0.0;
        s.hh_rate = static_cast<double>(hh[race]) / static_cast<double>(d.size());
        out[race] = s;
    }
    return out;
}

BiasSummary overall_bias_summary(const CohortTable& table) {
    BiasSummary s;
    s.n_rows = table.rows.size();
    if (table.rows.empty()) return s;
    double mean = 0.0;
    std::size_t hh = 0;
    for (const auto& obs : table.rows) {
        mean += obs.delta();
        hh += static_cast<std::size_t>(obs.sao2 < 88.0 && obs.spo2 >= 88.0);
    }
    mean /= static_cast<double>(s.n_rows);
    double ss = 0.0;
    for (const auto& obs : table.rows) ss += (obs.delta() - mean) * (obs.delta() - mean);
    s.mean_delta = mean;
    s.sd_delta = s.n_rows > 1 ? std::sqrt(ss / static_cast<double>(s.n_rows - 1)) : 0.0;
    s.hh_rate = static_cast<double>(hh) / static_cast<double>(s.n_rows);
    return s;
}

double patient_mortality_rate(const CohortTable& table) {
    std::map<std::string, int> died;
    for (const auto& obs : table.rows) died[obs.patient_id] = obs.in_hospital_mortality;
    if (died.empty()) return 0.0;
    std::size_t count = 0;
    for (const auto& [id, d] : died) count += static_cast<std::size_t>(d);
    return static_cast<double>(count) / static_cast<double>(died.size());
}

SynthConfig calibrate_intercept(const SynthConfig& cfg, double target) {
    cfg.validate();
    if (!(target > 0.0 && target < 1.0)) throw InvalidConfigError("target must be in (0,1)");

    constexpr int kMaxSteps = 60;

    struct Draw {
        double severity;
        double hypox;
        double u;
    };
    std::vector<Draw> draws(kCalibrationPatients);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(kCalibrationPatients); ++i) {
        const PatientCore core = patient_core(cfg, kCalibrationSeed, static_cast<std::uint64_t>(i));
        draws[static_cast<std::size_t>(i)] = {core.severity, std::max(0.0, 88.0 - core.min_sao2),
                                              core.mortality_u};
    }

    const auto rate_at = [&](double intercept) {
        std::size_t died = 0;
        for (const auto& d : draws) {
            const double p = sigmoid(intercept + cfg.severity_effect.mortality_severity * d.severity +
                                     cfg.severity_effect.mortality_hypox * d.hypox);
            died += static_cast<std::size_t>(d.u < p);
        }
        return static_cast<double>(died) / static_cast<double>(kCalibrationPatients);
    };

    double lo = -20.0, hi = 10.0;
    for (int step = 0; step < kMaxSteps; ++step) {
        const double mid = (lo + hi) / 2.0;
        const double rate = rate_at(mid);
        if (std::fabs(rate - target) <= kCalibrationTolerance) {
            SynthConfig out = cfg;
            out.severity_effect.mortality_intercept = mid;
            return out;
        }
        if (rate < target) lo = mid;
        else hi = mid;
    }
    throw NonConvergenceError("calibrate_intercept: no intercept within tolerance after 60 steps");
}

// ---------------------------------------------------------------------------
// JSON config
// ---------------------------------------------------------------------------

namespace {

std::array<double, kNumRaces> race_array_from_json(const nlohmann::json& j,
                                                   std::array<double, kNumRaces> base) {
    for (const auto& [name, value] : j.items()) {
        const auto race = race_from_name(name);
        if (!race) throw InvalidConfigError("unknown race/ethnicity key: " + name);
        base[static_cast<std::size_t>(*race)] = value.get<double>();
    }
    return base;
}

nlohmann::json race_array_to_json(const std::array<double, kNumRaces>& values) {
    nlohmann::json j;
    for (RaceEthnicity r : kAllRaces) j[race_name(r)] = values[static_cast<std::size_t>(r)];
    return j;
}

}  // namespace

SynthConfig SynthConfig::from_json_text(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    SynthConfig cfg = defaults();
    if (j.contains("n_patients")) cfg.n_patients = j["n_patients"].get<std::size_t>();
    if (j.contains("race_probs")) cfg.race_probs = race_array_from_json(j["race_probs"], cfg.race_probs);
    if (j.contains("bias_mean")) cfg.bias_mean = race_array_from_json(j["bias_mean"], cfg.bias_mean);
    if (j.contains("bias_sd")) cfg.bias_sd = j["bias_sd"].get<double>();
    if (j.contains("sao2_noise_sd")) cfg.sao2_noise_sd = j["sao2_noise_sd"].get<double>();
    if (j.contains("desat_slope")) cfg.desat_slope = j["desat_slope"].get<double>();
    if (j.contains("severity_effect")) {
        const auto& e = j["severity_effect"];
        if (e.contains("mortality_intercept"))
            cfg.severity_effect.mortality_intercept = e["mortality_intercept"].get<double>();
        if (e.contains("mortality_severity"))
            cfg.severity_effect.mortality_severity = e["mortality_severity"].get<double>();
        if (e.contains("mortality_hypox"))
            cfg.severity_effect.mortality_hypox = e["mortality_hypox"].get<double>();
    }
    if (j.contains("target_mortality")) cfg.target_mortality = j["target_mortality"].get<double>();
    if (j.contains("pairs_dist")) cfg.pairs_dist = j["pairs_dist"].get<double>();
    if (j.contains("missing_rate")) cfg.missing_rate = j["missing_rate"].get<double>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    cfg.validate();
    return cfg;
}

SynthConfig SynthConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

std::string SynthConfig::to_json_text() const {
    nlohmann::json j;
    j["n_patients"] = n_patients;
    j["race_probs"] = race_array_to_json(race_probs);
    j["bias_mean"] = race_array_to_json(bias_mean);
    j["bias_sd"] = bias_sd;
    j["sao2_noise_sd"] = sao2_noise_sd;
    j["desat_slope"] = desat_slope;
    j["severity_effect"] = {{"mortality_intercept", severity_effect.mortality_intercept},
                            {"mortality_severity", severity_effect.mortality_severity},
                            {"mortality_hypox", severity_effect.mortality_hypox}};
    j["target_mortality"] = target_mortality;
    j["pairs_dist"] = pairs_dist;
    j["missing_rate"] = missing_rate;
    j["seed"] = seed;
    return j.dump(2);
}

}  // namespace cfaudit
