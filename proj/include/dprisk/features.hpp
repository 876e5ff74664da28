#pragma once

#include "dprisk/records.hpp"

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace dprisk::features {

/// Counts of same-year merged spells per length band, plus the days beyond
/// the 60th of the longest same-year spell.
struct SpellBucketCounts {
    int band_0_4 = 0;
    int band_5_9 = 0;
    int band_10_14 = 0;
    int band_15_29 = 0;
    int band_30_44 = 0;
    int band_45_59 = 0;
    int band_60_plus = 0;
    int days_beyond_60 = 0;
};

SpellBucketCounts bucket_spells(std::span<const int> same_year_lengths);

/// Gini coefficient of a duration list: sum |xi - xj| / (2 n^2 mean).
/// Defined as 0 for empty and single-element lists.
double gini(std::span<const int> durations);

/// Occupation -> risk decile (1 = lowest observed DP rate, 10 = highest),
/// built from training observations with known outcomes.
class OccupationRiskMap {
  public:
    struct Entry {
        double observed_rate = 0.0;
        long person_years = 0;
        int risk_class = 0;
    };

    int n_classes = 10;
    int default_class = 5;
    std::map<std::string, Entry> entries;

    /// Class for an occupation; unseen codes get default_class and are
    /// recorded in unseen_codes for the caller to report.
    int class_for(const std::string& occupation_code) const;

    mutable std::map<std::string, long> unseen_codes;
};

/// Orders occupations by observed outcome rate (ties by code) and partitions
/// them into `n_classes` groups of approximately equal person-year weight;
/// an occupation spanning several groups gets the class of its cumulative
/// weight midpoint.
OccupationRiskMap build_risk_map(std::span<const PersonYearObservation> observations,
                                 int n_classes = 10);

/// Splits a cumulative-weight axis into classes: input is (weight, key) in
/// rate order; returns the 1-based class per input position. Shared by the
/// risk map and by synthetic catalog construction.
std::vector<int> assign_weight_classes(std::span<const double> weights, int n_classes);

/// (employer_id, year) -> Gini of that employer-year's merged spell lengths.
class EmployerGiniMap {
  public:
    std::map<std::pair<std::string, int>, double> values;

    /// 0 for employer-years absent from the map (no spells reported).
    double value_for(const std::string& employer_id, int year) const;
};

/// Pools merged spells by (principal employer, initiation year) over all
/// employed persons, including persons later excluded from observations.
EmployerGiniMap build_gini_map(const Dataset& data, std::span<const MergedSpell> merged);

/// 0 when old-age eligibility is more than three years away, then 1/3, 2/3,
/// 1 as the eligibility year approaches. Throws InputError when the person
/// is already eligible (such rows are excluded upstream).
double oa_fraction(int personal_oa_year, int observation_year);

inline constexpr int kTermCount = 30;
inline constexpr int kBaseYear = 2015; // year_counter = year - kBaseYear

/// Fixed model term order; coefficient files follow the same names.
extern const std::array<std::string, kTermCount> kTermNames;

enum Term : std::size_t {
    kIntercept = 0,
    kYearCounter,
    kOaFraction,
    kPrior60Flag,
    kPreviousDpFlag,
    kFemaleFlag,
    kAge4353Flag,
    kAge,
    kDaysBeyond60,
    kSpells1529,
    kSpells3044,
    kSpells4559,
    kSpells60Plus,
    kYearXAge,
    kPrior60XYearsSince,
    kPreviousDpXYearsSince,
    kFemaleXDaysBeyond60,
    kFemaleXSpells1529,
    kFemaleXSpells4559,
    kFemaleXSpells60Plus,
    kSpells04XAgeGe31,
    kSpells04XAgeLe30,
    kSpells04XAge4353,
    kAge4353XSpells3044,
    kAgeXSpells59,
    kAgeXSpells1014,
    kAgeXSpells3044,
    kAgeXSpells60Plus,
    kAgeXRiskClass,
    kAgeXSpells04XGini,
};

using FeatureVector = std::array<double, kTermCount>;

FeatureVector build_feature_vector(const PersonYearObservation& observation,
                                   const OccupationRiskMap& risk_map,
                                   const EmployerGiniMap& gini_map);

/// Same, with the risk class and Gini already resolved (used by the
/// synthetic generator, which supplies latent classes).
FeatureVector build_feature_vector(const PersonYearObservation& observation, int risk_class,
                                   double employer_gini);

} // namespace dprisk::features
