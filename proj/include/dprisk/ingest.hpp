#pragma once

#include "dprisk/records.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace dprisk::ingest {

struct InputPaths {
    std::filesystem::path persons;
    std::filesystem::path spells;
    std::filesystem::path employment;
    std::filesystem::path pensions;

    static InputPaths in_directory(const std::filesystem::path& dir);
};

struct ParseReport {
    long persons = 0;
    long spells = 0;
    long employment = 0;
    long pensions = 0;
};

/// Parses the four register CSVs. Malformed rows raise SchemaError naming
/// file, line and column; missing files raise InputError.
Dataset parse_inputs(const InputPaths& paths, ParseReport* report = nullptr);

/// Concatenates overlapping or back-to-back spells of one person, but only
/// when their start dates fall in the same calendar year. Merging is
/// transitive; output is sorted by start date.
std::vector<MergedSpell> merge_spells(std::span<const RawSpell> spells);

/// Merged spells for every person, sorted by (person_id, start).
std::vector<MergedSpell> merge_all_spells(std::span<const RawSpell> spells_sorted);

struct IngestOptions {
    /// Restrict the benefit kinds counting as "DP payments" (outcome and DP
    /// history) to dp_full/dp_partial. Default counts all four non-OA kinds.
    bool strict_dp_benefits = false;
    /// Last month through which pension data is complete. Outcomes whose
    /// three-year window extends beyond it are labeled unknown rather than
    /// false. Defaults to the latest last_month present in the data.
    std::optional<YearMonth> pension_data_through;
    /// Observations below this age are skipped with a warning.
    int min_age = 17;
};

bool counts_as_dp(BenefitKind kind, bool strict);

/// True / false / unknown DP outcome for the window [Jan y+1, Dec y+3].
/// `person_pensions` must contain only this person's events.
Outcome label_outcome(int observation_year, std::span<const PensionEvent> person_pensions,
                      const IngestOptions& options, YearMonth data_through);

/// Assembles the person-year observations for one calendar year, applying the
/// old-age and December-DP exclusions and deriving the spell/pension history
/// fields. `merged` must hold merge_all_spells output for the whole dataset.
/// Missing person records for employed persons raise SchemaError.
std::vector<PersonYearObservation> assemble_observations(
    const Dataset& data, std::span<const MergedSpell> merged, int year,
    const IngestOptions& options, std::vector<std::string>* warnings = nullptr);

/// All years [first_year, last_year], output sorted by (person_id, year).
std::vector<PersonYearObservation> assemble_all(const Dataset& data, int first_year,
                                                int last_year, const IngestOptions& options,
                                                std::vector<std::string>* warnings = nullptr);

/// Smallest/largest employment year present, if any.
std::optional<std::pair<int, int>> employment_year_range(const Dataset& data);

/// Latest pension month in the data, used as the default knowledge horizon.
std::optional<YearMonth> max_pension_month(const Dataset& data);

} // namespace dprisk::ingest
