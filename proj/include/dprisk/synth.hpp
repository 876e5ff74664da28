#pragma once

#include "dprisk/glm.hpp"
#include "dprisk/ingest.hpp"
#include "dprisk/records.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace dprisk::synth {

struct OccupationSpec {
    std::string code;
    double weight = 1.0;   // relative person share
    double severity = 1.0; // multiplies the spell frequency
};

struct EmployerSpec {
    std::string id;
    double weight = 1.0;       // relative person share
    double length_sigma = 1.0; // spell-length dispersion
};

struct SynthConfig {
    long n_persons = 20000;
    int first_year = 2016;
    int last_year = 2021;
    double female_share = 0.759;
    double age_mean = 45.0; // age at panel start, clipped normal
    double age_sd = 11.5;
    int age_min = 19;
    int age_max = 62;
    double base_spell_rate = 1.3; // mean spells per person-year at severity 1, age 43
    double age_spell_slope = 0.012;
    std::array<double, 3> length_band_shares = {0.84, 0.149, 0.011}; // 1-5, 6-30, 31+
    double split_probability = 0.22; // spell emitted as overlapping/abutting pieces
    double dp_history_rate = 0.035;
    double full_panel_share = 0.75;
    double yearly_exit_rate = 0.03;
    std::vector<OccupationSpec> occupations; // default catalog when empty
    std::vector<EmployerSpec> employers;     // default catalog when empty
    std::uint64_t seed = 1;

    void validate() const; // throws InputError on infeasible settings
};

std::vector<OccupationSpec> default_occupations();
std::vector<EmployerSpec> default_employers();

/// Latent occupation risk classes: the same weight-midpoint decile partition
/// the feature pipeline derives from observed rates, applied to the catalog
/// in severity order. Keyed by occupation code.
std::vector<std::pair<std::string, int>> latent_risk_classes(
    std::span<const OccupationSpec> catalog, int n_classes = 10);

struct GenerateResult {
    Dataset data;
    YearMonth pension_data_through; // horizon covering every outcome window
    long observation_rows = 0;      // person-years that received an outcome draw
    long positive_outcomes = 0;
};

/// Seeded synthetic register extract: demographics, employment panels,
/// spells (with overlapping/abutting raw pieces), DP history, and outcomes
/// simulated from the supplied coefficients through the real ingest and
/// feature pipeline. Identical seeds produce identical datasets.
GenerateResult generate(const SynthConfig& config, const glm::CoefficientSet& coefficients);

/// Writes persons/spells/employment/pensions CSVs; returns the paths.
std::vector<std::filesystem::path> write_dataset(const Dataset& data,
                                                 const std::filesystem::path& directory);

/// One observation prepared for outcome simulation.
struct SimRow {
    std::string person_id;
    int year = 0;
    features::FeatureVector x{};
};

struct SimulatedOutcomes {
    std::vector<std::uint8_t> labels;  // 1 = DP within three years
    std::vector<std::uint8_t> dropped; // row suppressed: panel ended by an earlier positive
    std::vector<PensionEvent> events;  // one dp_full event per positive
};

/// Independent Bernoulli(predict(x)) draw per surviving row, rows sorted by
/// (person_id, year). A positive draw emits a dp_full event placed inside
/// [y+1, y+3] such that relabeling the emitted events through
/// ingest::label_outcome reproduces the drawn labels exactly; the person's
/// later rows are dropped (the panel ends when permanent DP starts).
SimulatedOutcomes simulate_outcomes(std::span<const SimRow> rows, const glm::Scorer& scorer,
                                    std::uint64_t seed, YearMonth horizon);

} // namespace dprisk::synth
