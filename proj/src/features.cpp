#include "dprisk/features.hpp"

#include "dprisk/errors.hpp"

#include <algorithm>
#include <cmath>

namespace dprisk::features {

const std::array<std::string, kTermCount> kTermNames = {
    "intercept",
    "year_counter",
    "oa_fraction",
    "prior_60plus_flag",
    "previous_dp_flag",
    "female_flag",
    "age_43_53_flag",
    "age",
    "days_beyond_60",
    "spells_15_29",
    "spells_30_44",
    "spells_45_59",
    "spells_60_plus",
    "year_counter_x_age",
    "prior_60plus_x_years_since_60plus",
    "previous_dp_x_years_since_dp",
    "female_x_days_beyond_60",
    "female_x_spells_15_29",
    "female_x_spells_45_59",
    "female_x_spells_60_plus",
    "spells_0_4_x_age_ge31",
    "spells_0_4_x_age_le30",
    "spells_0_4_x_age_43_53",
    "age_43_53_x_spells_30_44",
    "age_x_spells_5_9",
    "age_x_spells_10_14",
    "age_x_spells_30_44",
    "age_x_spells_60_plus",
    "age_x_risk_class",
    "age_x_spells_0_4_x_gini",
};

SpellBucketCounts bucket_spells(std::span<const int> same_year_lengths) {
    SpellBucketCounts counts;
    int longest = 0;
    for (const int length : same_year_lengths) {
        if (length <= 4) {
            ++counts.band_0_4;
        } else if (length <= 9) {
            ++counts.band_5_9;
        } else if (length <= 14) {
            ++counts.band_10_14;
        } else if (length <= 29) {
            ++counts.band_15_29;
        } else if (length <= 44) {
            ++counts.band_30_44;
        } else if (length <= 59) {
            ++counts.band_45_59;
        } else {
            ++counts.band_60_plus;
        }
        longest = std::max(longest, length);
    }
    counts.days_beyond_60 = std::max(0, longest - 60);
    return counts;
}

double gini(std::span<const int> durations) {
    const std::size_t n = durations.size();
    if (n <= 1) {
        return 0.0;
    }
    std::vector<double> sorted(durations.begin(), durations.end());
    std::sort(sorted.begin(), sorted.end());
    double total = 0.0;
    double weighted = 0.0; // sum of i * x_(i), 1-based
    for (std::size_t i = 0; i < n; ++i) {
        total += sorted[i];
        weighted += static_cast<double>(i + 1) * sorted[i];
    }
    if (total <= 0.0) {
        return 0.0;
    }
    const double dn = static_cast<double>(n);
    // Equivalent to sum_ij |xi-xj| / (2 n^2 mean) via the sorted identity.
    return (2.0 * weighted - (dn + 1.0) * total) / (dn * total);
}

std::vector<int> assign_weight_classes(std::span<const double> weights, int n_classes) {
    double total = 0.0;
    for (const double w : weights) {
        total += w;
    }
    std::vector<int> classes(weights.size(), 1);
    if (total <= 0.0) {
        return classes;
    }
    double cumulative = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double midpoint = cumulative + weights[i] / 2.0;
        int cls = static_cast<int>(std::floor(midpoint / total * n_classes)) + 1;
        classes[i] = std::clamp(cls, 1, n_classes);
        cumulative += weights[i];
    }
    return classes;
}

int OccupationRiskMap::class_for(const std::string& occupation_code) const {
    const auto it = entries.find(occupation_code);
    if (it != entries.end()) {
        return it->second.risk_class;
    }
    ++unseen_codes[occupation_code];
    return default_class;
}

OccupationRiskMap build_risk_map(std::span<const PersonYearObservation> observations,
                                 int n_classes) {
    if (n_classes < 1) {
        throw InputError("risk map requires at least one class");
    }
    struct Tally {
        long n = 0;
        long positives = 0;
    };
    std::map<std::string, Tally> tallies;
    for (const auto& obs : observations) {
        if (obs.outcome == Outcome::unknown) {
            continue;
        }
        auto& tally = tallies[obs.occupation_code];
        ++tally.n;
        if (obs.outcome == Outcome::yes) {
            ++tally.positives;
        }
    }
    if (static_cast<int>(tallies.size()) < n_classes) {
        throw InputError("risk map: only " + std::to_string(tallies.size()) +
                         " occupation(s) with known outcomes, need at least " +
                         std::to_string(n_classes) +
                         "; rerun with a smaller class count (--risk-classes)");
    }

    struct Row {
        std::string code;
        double rate;
        long n;
    };
    std::vector<Row> rows;
    rows.reserve(tallies.size());
    for (const auto& [code, tally] : tallies) {
        rows.push_back({code, static_cast<double>(tally.positives) / static_cast<double>(tally.n),
                        tally.n});
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.rate != b.rate) {
            return a.rate < b.rate;
        }
        return a.code < b.code;
    });

    std::vector<double> weights;
    weights.reserve(rows.size());
    for (const auto& row : rows) {
        weights.push_back(static_cast<double>(row.n));
    }
    const auto classes = assign_weight_classes(weights, n_classes);

    OccupationRiskMap map;
    map.n_classes = n_classes;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        map.entries[rows[i].code] = {rows[i].rate, rows[i].n, classes[i]};
    }
    return map;
}

double EmployerGiniMap::value_for(const std::string& employer_id, int year) const {
    const auto it = values.find({employer_id, year});
    return it != values.end() ? it->second : 0.0;
}

EmployerGiniMap build_gini_map(const Dataset& data, std::span<const MergedSpell> merged) {
    // Spell lengths pooled by the person's principal employer for the spell's
    // initiation year. Spells of years without an employment row have no
    // employer attribution and are skipped.
    std::map<std::pair<std::string, int>, std::vector<int>> pools;
    for (const auto& record : data.employment) {
        pools[{record.employer_id, record.year}]; // employer-years with no spells stay empty
    }

    std::size_t ei = 0;
    std::size_t mi = 0;
    const auto& employment = data.employment;
    while (mi < merged.size()) {
        const std::string& pid = merged[mi].person_id;
        while (ei < employment.size() && employment[ei].person_id < pid) {
            ++ei;
        }
        std::size_t ei_end = ei;
        while (ei_end < employment.size() && employment[ei_end].person_id == pid) {
            ++ei_end;
        }
        for (; mi < merged.size() && merged[mi].person_id == pid; ++mi) {
            const int year = merged[mi].initiation_year;
            for (std::size_t k = ei; k < ei_end; ++k) {
                if (employment[k].year == year) {
                    pools[{employment[k].employer_id, year}].push_back(merged[mi].length_days);
                    break;
                }
            }
        }
        ei = ei_end;
    }

    EmployerGiniMap map;
    for (const auto& [key, lengths] : pools) {
        map.values[key] = gini(lengths);
    }
    return map;
}

double oa_fraction(int personal_oa_year, int observation_year) {
    const int years_until = personal_oa_year - observation_year;
    if (years_until <= 0) {
        throw InputError("oa_fraction: person already eligible for OA pension (oa year " +
                         std::to_string(personal_oa_year) + ", observation year " +
                         std::to_string(observation_year) + ")");
    }
    switch (years_until) {
    case 1:
        return 1.0;
    case 2:
        return 2.0 / 3.0;
    case 3:
        return 1.0 / 3.0;
    default:
        return 0.0;
    }
}

FeatureVector build_feature_vector(const PersonYearObservation& obs, int risk_class,
                                   double employer_gini) {
    const auto buckets = bucket_spells(obs.spell_lengths);
    const double age = obs.age;
    const double female = obs.gender == Gender::female ? 1.0 : 0.0;
    const double age_le30 = obs.age <= 30 ? 1.0 : 0.0;
    const double age_ge31 = 1.0 - age_le30;
    const double age_4353 = (obs.age >= 43 && obs.age <= 53) ? 1.0 : 0.0;
    const double year_counter = obs.year - kBaseYear;
    const double prior_60 = obs.prior_60plus_flag ? 1.0 : 0.0;
    const double previous_dp = obs.previous_dp_flag ? 1.0 : 0.0;
    const double spells_0_4 = buckets.band_0_4;
    const double days_beyond = buckets.days_beyond_60;

    FeatureVector x{};
    x[kIntercept] = 1.0;
    x[kYearCounter] = year_counter;
    x[kOaFraction] = obs.oa_fraction;
    x[kPrior60Flag] = prior_60;
    x[kPreviousDpFlag] = previous_dp;
    x[kFemaleFlag] = female;
    x[kAge4353Flag] = age_4353;
    x[kAge] = age;
    x[kDaysBeyond60] = days_beyond;
    x[kSpells1529] = buckets.band_15_29;
    x[kSpells3044] = buckets.band_30_44;
    x[kSpells4559] = buckets.band_45_59;
    x[kSpells60Plus] = buckets.band_60_plus;
    x[kYearXAge] = year_counter * age;
    x[kPrior60XYearsSince] = prior_60 * obs.years_since_60plus;
    x[kPreviousDpXYearsSince] = previous_dp * obs.years_since_dp;
    x[kFemaleXDaysBeyond60] = female * days_beyond;
    x[kFemaleXSpells1529] = female * buckets.band_15_29;
    x[kFemaleXSpells4559] = female * buckets.band_45_59;
    x[kFemaleXSpells60Plus] = female * buckets.band_60_plus;
    x[kSpells04XAgeGe31] = spells_0_4 * age_ge31;
    x[kSpells04XAgeLe30] = spells_0_4 * age_le30;
    x[kSpells04XAge4353] = spells_0_4 * age_4353;
    x[kAge4353XSpells3044] = age_4353 * buckets.band_30_44;
    x[kAgeXSpells59] = age * buckets.band_5_9;
    x[kAgeXSpells1014] = age * buckets.band_10_14;
    x[kAgeXSpells3044] = age * buckets.band_30_44;
    x[kAgeXSpells60Plus] = age * buckets.band_60_plus;
    x[kAgeXRiskClass] = age * risk_class;
    x[kAgeXSpells04XGini] = age * spells_0_4 * employer_gini;
    return x;
}

FeatureVector build_feature_vector(const PersonYearObservation& obs,
                                   const OccupationRiskMap& risk_map,
                                   const EmployerGiniMap& gini_map) {
    return build_feature_vector(obs, risk_map.class_for(obs.occupation_code),
                                gini_map.value_for(obs.employer_id, obs.year));
}

} // namespace dprisk::features
