#pragma once

#include "dprisk/glm.hpp"
#include "dprisk/ingest.hpp"
#include "dprisk/records.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dprisk::analytics {

struct ScoredRow {
    std::string person_id;
    int year = 0;
    double probability = 0.0;
    bool top_decile = false;
};

/// One probability per observation, in input (person_id, year) order.
std::vector<ScoredRow> score_population(std::span<const PersonYearObservation> observations,
                                        const glm::Scorer& scorer,
                                        const features::OccupationRiskMap& risk_map,
                                        const features::EmployerGiniMap& gini_map);

/// Flags the top 10% of `rows` by probability (ceil(n/10) rows; boundary
/// ties broken by probability desc, then person_id asc, then year asc).
void flag_highest_decile(std::span<ScoredRow> rows);

struct AgeBand {
    std::string label;
    int min_age = 0;
    int max_age = std::numeric_limits<int>::max();
};

/// Table 2 style bands: everyone, and 55 and older.
std::vector<AgeBand> default_age_bands();

struct RiskTableRow {
    std::string occupation_code; // "Total" for the whole-population row
    std::string age_band;
    long n_employees = 0;
    bool suppressed = false;     // cell below the reporting threshold
    double mean_predicted_risk = 0.0;
    double expected_dps = 0.0;   // sum of predicted probabilities
};

struct RiskTable {
    std::vector<RiskTableRow> rows;
};

/// Occupation x age-band risk table with per-band Total rows. Cells with
/// fewer employees than `suppression_threshold` are masked.
RiskTable risk_table(std::span<const PersonYearObservation> observations,
                     std::span<const ScoredRow> scored, std::span<const AgeBand> bands,
                     int suppression_threshold = 30);

struct CriticalDurationResult {
    std::string occupation_code;
    long eligible_n = 0;
    int threshold_days = 0;
    double objective_value = 0.0;
    long crossing_count = 0;              // eligible employees with days >= threshold
    long crossing_highest_risk_count = 0; // of which flagged highest-risk
};

/// One eligible employee: accrued annual SA days and the highest-risk flag.
struct DurationEntry {
    int annual_days = 0;
    bool flagged = false;
};

/// Exhaustive scan over integer thresholds t in [1, 365], maximizing
/// (flagged crossing) x (share of flagged among crossing); smallest t wins
/// ties. Returns nullopt when no flagged employee crosses any threshold;
/// `status` then explains why.
std::optional<CriticalDurationResult> critical_duration(std::span<const DurationEntry> entries,
                                                        const std::string& occupation_code,
                                                        std::string* status = nullptr);

/// True when the observation passes the Table 3 eligibility filter:
/// age >= 45, no DP history, no same-year 60+ day spell.
bool critical_duration_eligible(const PersonYearObservation& observation);

/// Per-occupation results over the pooled scored rows (plus a "Total" row
/// across occupations). Occupations with no result are skipped and reported
/// in `skipped` as (occupation, reason).
std::vector<CriticalDurationResult> critical_duration_by_occupation(
    std::span<const PersonYearObservation> observations, std::span<const ScoredRow> scored,
    std::vector<std::pair<std::string, std::string>>* skipped = nullptr);

/// Spell-length interval whose merged spells are candidates for removal.
struct ScenarioBand {
    std::string label;
    int min_days = 1;
    int max_days = std::numeric_limits<int>::max();
};

ScenarioBand scenario_band_from_label(const std::string& label); // "1-5", "6-30", "31+", "all"

struct ScenarioSpec {
    ScenarioBand band;
    double reduction = 0.0; // fraction of the band's spells removed
    int replications = 10;
    std::uint64_t seed = 0;
    double cost_per_sa_day = 0.0;
    double avg_employer_dp_cost = 0.0;
    int age_min = 17; // only spells of persons in this age range are removed
    int age_max = std::numeric_limits<int>::max();
};

struct ScenarioResult {
    std::string band_label;
    double reduction = 0.0;
    double baseline_expected_dps = 0.0;
    double relative_dp_risk_change = 0.0;
    double delta_expected_dps = 0.0;
    double delta_direct_sa_cost = 0.0;
    double delta_pension_payments = 0.0;
    double mean_removed_spells = 0.0;
    double mean_removed_days = 0.0;
    std::string notice; // e.g. empty band
};

/// Removes a seeded random draw of the scenario year's merged spells in the
/// band (whole spells), rebuilds the spell-derived features including the
/// employer Gini, rescores the year's observations, and averages the deltas
/// over the replications. Bitwise reproducible for identical seed and spec.
ScenarioResult run_scenario(const Dataset& data, int scenario_year, const ScenarioSpec& spec,
                            const glm::Scorer& scorer,
                            const features::OccupationRiskMap& risk_map,
                            const ingest::IngestOptions& options);

} // namespace dprisk::analytics
