#include "dprisk/features.hpp"

#include "dprisk/errors.hpp"
#include "dprisk/rng.hpp"
#include "test_support.hpp"

#include "doctest.h"

#include <set>

using namespace dprisk;
using namespace dprisk::features;

TEST_CASE("bucket_spells assigns each length to exactly one band") {
    SUBCASE("mixed lengths") {
        const std::vector<int> lengths = {3, 7, 12, 61};
        const auto counts = bucket_spells(lengths);
        CHECK(counts.band_0_4 == 1);
        CHECK(counts.band_5_9 == 1);
        CHECK(counts.band_10_14 == 1);
        CHECK(counts.band_15_29 == 0);
        CHECK(counts.band_30_44 == 0);
        CHECK(counts.band_45_59 == 0);
        CHECK(counts.band_60_plus == 1);
        CHECK(counts.days_beyond_60 == 1);
    }
    SUBCASE("no spells") {
        const auto counts = bucket_spells({});
        CHECK(counts.band_0_4 == 0);
        CHECK(counts.band_60_plus == 0);
        CHECK(counts.days_beyond_60 == 0);
    }
    SUBCASE("days beyond 60 comes from the longest spell only") {
        const std::vector<int> lengths = {60, 90};
        const auto counts = bucket_spells(lengths);
        CHECK(counts.band_60_plus == 2);
        CHECK(counts.days_beyond_60 == 30);
    }
    SUBCASE("band edges are total and disjoint") {
        Rng rng(11);
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<int> lengths;
            const int n = static_cast<int>(rng.below(8));
            for (int i = 0; i < n; ++i) {
                lengths.push_back(1 + static_cast<int>(rng.below(120)));
            }
            const auto counts = bucket_spells(lengths);
            CHECK(counts.band_0_4 + counts.band_5_9 + counts.band_10_14 + counts.band_15_29 +
                      counts.band_30_44 + counts.band_45_59 + counts.band_60_plus ==
                  n);
        }
    }
}

TEST_CASE("gini matches the pairwise definition") {
    CHECK(gini(std::vector<int>{4, 4, 4, 4}) == doctest::Approx(0.0));
    CHECK(gini(std::vector<int>{1, 3}) == doctest::Approx(0.25));
    CHECK(gini(std::vector<int>{1, 1, 1, 9}) == doctest::Approx(0.5));
    CHECK(gini(std::vector<int>{}) == 0.0);
    CHECK(gini(std::vector<int>{17}) == 0.0);

    Rng rng(42);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<int> values;
        const int n = 1 + static_cast<int>(rng.below(60));
        for (int i = 0; i < n; ++i) {
            values.push_back(1 + static_cast<int>(rng.below(200)));
        }
        const double lib = gini(values);
        CHECK(lib == doctest::Approx(testsupport::gini_oracle(values)).epsilon(1e-12));
        CHECK(lib >= 0.0);
        CHECK(lib < 1.0);
        // Scale invariance.
        std::vector<int> scaled;
        for (const int v : values) {
            scaled.push_back(v * 7);
        }
        CHECK(gini(scaled) == doctest::Approx(lib).epsilon(1e-12));
    }
}

TEST_CASE("oa_fraction steps through the three-year approach") {
    CHECK(oa_fraction(2017, 2016) == doctest::Approx(1.0));
    CHECK(oa_fraction(2018, 2016) == doctest::Approx(2.0 / 3.0));
    CHECK(oa_fraction(2019, 2016) == doctest::Approx(1.0 / 3.0));
    CHECK(oa_fraction(2026, 2016) == 0.0);
    CHECK_THROWS_AS(oa_fraction(2016, 2016), InputError);
}

namespace {

PersonYearObservation make_obs(const std::string& pid, int year, int age, Gender gender,
                               const std::string& occupation, Outcome outcome) {
    PersonYearObservation obs;
    obs.person_id = pid;
    obs.year = year;
    obs.age = age;
    obs.gender = gender;
    obs.occupation_code = occupation;
    obs.employer_id = "E1";
    obs.outcome = outcome;
    return obs;
}

} // namespace

TEST_CASE("build_risk_map partitions occupations into weight deciles") {
    SUBCASE("20 equal occupations with increasing rates give classes 1..10 twice each") {
        std::vector<PersonYearObservation> rows;
        for (int occ = 0; occ < 20; ++occ) {
            const std::string code = "OCC" + std::string(occ < 10 ? "0" : "") + std::to_string(occ);
            // 100 observations, occ index determines the positive count.
            for (int i = 0; i < 100; ++i) {
                rows.push_back(make_obs("P", 2016, 40, Gender::female, code,
                                        i < occ + 1 ? Outcome::yes : Outcome::no));
            }
        }
        const auto map = build_risk_map(rows);
        std::map<int, int> class_counts;
        for (const auto& [code, entry] : map.entries) {
            ++class_counts[entry.risk_class];
        }
        for (int cls = 1; cls <= 10; ++cls) {
            CHECK(class_counts[cls] == 2);
        }
        CHECK(map.entries.at("OCC00").risk_class == 1);
        CHECK(map.entries.at("OCC19").risk_class == 10);
    }

    SUBCASE("identical rates tie-break by occupation code and stay weight balanced") {
        std::vector<PersonYearObservation> rows;
        for (int occ = 0; occ < 10; ++occ) {
            const std::string code = "OCC" + std::to_string(occ);
            for (int i = 0; i < 50; ++i) {
                rows.push_back(make_obs("P", 2016, 40, Gender::female, code,
                                        i == 0 ? Outcome::yes : Outcome::no));
            }
        }
        const auto map = build_risk_map(rows);
        for (int occ = 0; occ < 10; ++occ) {
            CHECK(map.entries.at("OCC" + std::to_string(occ)).risk_class == occ + 1);
        }
    }

    SUBCASE("a dominant occupation takes the class of its weight midpoint") {
        std::vector<PersonYearObservation> rows;
        // 9500 person-years in the lowest-rate occupation, 100 in five others.
        for (int i = 0; i < 9500; ++i) {
            rows.push_back(make_obs("P", 2016, 40, Gender::female, "BIG",
                                    i < 10 ? Outcome::yes : Outcome::no));
        }
        for (int occ = 0; occ < 9; ++occ) {
            const std::string code = "S" + std::to_string(occ);
            for (int i = 0; i < 56; ++i) {
                rows.push_back(make_obs("P", 2016, 40, Gender::female, code,
                                        i <= occ ? Outcome::yes : Outcome::no));
            }
        }
        const auto map = build_risk_map(rows);
        // BIG spans deciles 1..9-ish; its midpoint sits in decile 5.
        CHECK(map.entries.at("BIG").risk_class == 5);
    }

    SUBCASE("weak monotonicity in the observed rate") {
        Rng rng(507);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<PersonYearObservation> rows;
            const int n_occ = 10 + static_cast<int>(rng.below(15));
            for (int occ = 0; occ < n_occ; ++occ) {
                const std::string code = "O" + std::to_string(occ);
                const int n = 20 + static_cast<int>(rng.below(200));
                const double rate = rng.uniform() * 0.2;
                for (int i = 0; i < n; ++i) {
                    rows.push_back(make_obs("P", 2016, 40, Gender::male, code,
                                            rng.bernoulli(rate) ? Outcome::yes : Outcome::no));
                }
            }
            const auto map = build_risk_map(rows);
            for (const auto& [code_a, a] : map.entries) {
                for (const auto& [code_b, b] : map.entries) {
                    if (a.observed_rate < b.observed_rate) {
                        CHECK(a.risk_class <= b.risk_class);
                    }
                }
            }
        }
    }

    SUBCASE("fewer than ten occupations errors with an override hint") {
        std::vector<PersonYearObservation> rows;
        for (int occ = 0; occ < 4; ++occ) {
            rows.push_back(make_obs("P", 2016, 40, Gender::male, "O" + std::to_string(occ),
                                    Outcome::no));
        }
        try {
            build_risk_map(rows);
            FAIL("expected InputError");
        } catch (const InputError& e) {
            CHECK(std::string(e.what()).find("smaller class count") != std::string::npos);
        }
        CHECK_NOTHROW(build_risk_map(rows, 4));
    }

    SUBCASE("unknown outcomes are ignored, unseen codes fall back to the default class") {
        std::vector<PersonYearObservation> rows;
        for (int occ = 0; occ < 10; ++occ) {
            const std::string code = "O" + std::to_string(occ);
            rows.push_back(make_obs("P", 2016, 40, Gender::male, code, Outcome::no));
            rows.push_back(make_obs("P", 2016, 40, Gender::male, code, Outcome::unknown));
        }
        const auto map = build_risk_map(rows);
        CHECK(map.entries.at("O0").person_years == 1);
        CHECK(map.class_for("NEW") == 5);
        CHECK(map.unseen_codes.count("NEW") == 1);
    }
}

TEST_CASE("employer gini map pools spells by employer-year") {
    Dataset data;
    data.persons = {{"P1", Gender::male, 1970}, {"P2", Gender::female, 1980}};
    data.employment = {{"P1", 2016, "E1", "2221", 2040},
                       {"P2", 2016, "E1", "2221", 2040},
                       {"P2", 2017, "E2", "2221", 2040}};
    data.spells = {{"P1", Date::parse("2016-01-01"), Date::parse("2016-01-01")},
                   {"P2", Date::parse("2016-02-01"), Date::parse("2016-02-03")},
                   {"P2", Date::parse("2017-05-01"), Date::parse("2017-05-04")}};
    const auto merged = ingest::merge_all_spells(data.spells);
    const auto map = build_gini_map(data, merged);
    // E1/2016 pools lengths {1, 3}: gini 0.25.
    CHECK(map.value_for("E1", 2016) == doctest::Approx(0.25));
    // Single spell employer-year.
    CHECK(map.value_for("E2", 2017) == 0.0);
    // Unknown employer-year defaults to zero.
    CHECK(map.value_for("E9", 2016) == 0.0);
}

TEST_CASE("feature vector: hand-expanded no-spell case") {
    // Age 50, male, no spells, no history, year 2016, risk class 5, OA far
    // away. Nonzero terms are the intercept, the year counter, the 43-53 age
    // flag, age, year x age, and age x risk class.
    auto obs = make_obs("P1", 2016, 50, Gender::male, "2221", Outcome::no);
    const auto x = build_feature_vector(obs, 5, 0.3);
    CHECK(x[kIntercept] == 1.0);
    CHECK(x[kYearCounter] == 1.0);
    CHECK(x[kAge4353Flag] == 1.0);
    CHECK(x[kAge] == 50.0);
    CHECK(x[kYearXAge] == 50.0);
    CHECK(x[kAgeXRiskClass] == 250.0);
    // Everything else vanishes, including the 0-4 band terms and the Gini
    // interaction (the band count is zero).
    for (const std::size_t term :
         {kOaFraction, kPrior60Flag, kPreviousDpFlag, kFemaleFlag, kDaysBeyond60, kSpells1529,
          kSpells3044, kSpells4559, kSpells60Plus, kPrior60XYearsSince, kPreviousDpXYearsSince,
          kFemaleXDaysBeyond60, kFemaleXSpells1529, kFemaleXSpells4559, kFemaleXSpells60Plus,
          kSpells04XAgeGe31, kSpells04XAgeLe30, kSpells04XAge4353, kAge4353XSpells3044,
          kAgeXSpells59, kAgeXSpells1014, kAgeXSpells3044, kAgeXSpells60Plus,
          kAgeXSpells04XGini}) {
        CHECK(x[term] == 0.0);
    }
}

TEST_CASE("feature vector: age flag boundaries") {
    auto obs = make_obs("P1", 2016, 30, Gender::male, "2221", Outcome::no);
    obs.spell_lengths = {2};
    auto x = build_feature_vector(obs, 5, 0.0);
    CHECK(x[kSpells04XAgeLe30] == 1.0);
    CHECK(x[kSpells04XAgeGe31] == 0.0);

    obs.age = 31;
    x = build_feature_vector(obs, 5, 0.0);
    CHECK(x[kSpells04XAgeLe30] == 0.0);
    CHECK(x[kSpells04XAgeGe31] == 1.0);

    obs.age = 42;
    CHECK(build_feature_vector(obs, 5, 0.0)[kAge4353Flag] == 0.0);
    obs.age = 43;
    CHECK(build_feature_vector(obs, 5, 0.0)[kAge4353Flag] == 1.0);
    obs.age = 53;
    CHECK(build_feature_vector(obs, 5, 0.0)[kAge4353Flag] == 1.0);
    obs.age = 54;
    CHECK(build_feature_vector(obs, 5, 0.0)[kAge4353Flag] == 0.0);
}

TEST_CASE("feature vector: female band interactions are plain products") {
    auto obs = make_obs("P1", 2016, 40, Gender::female, "2221", Outcome::no);
    obs.spell_lengths = {16, 20};
    const auto x = build_feature_vector(obs, 5, 0.0);
    CHECK(x[kSpells1529] == 2.0);
    CHECK(x[kFemaleXSpells1529] == 2.0);
}

TEST_CASE("feature vector: interactions equal their factor products exactly") {
    Rng rng(314);
    for (int trial = 0; trial < 300; ++trial) {
        PersonYearObservation obs;
        obs.person_id = "P1";
        obs.year = 2016 + static_cast<int>(rng.below(6));
        obs.age = 17 + static_cast<int>(rng.below(50));
        obs.gender = rng.bernoulli(0.5) ? Gender::female : Gender::male;
        obs.occupation_code = "X";
        obs.employer_id = "E";
        const int n = static_cast<int>(rng.below(6));
        for (int i = 0; i < n; ++i) {
            obs.spell_lengths.push_back(1 + static_cast<int>(rng.below(100)));
        }
        obs.prior_60plus_flag = rng.bernoulli(0.3);
        obs.years_since_60plus = obs.prior_60plus_flag ? 1 + static_cast<int>(rng.below(8)) : 0;
        obs.previous_dp_flag = rng.bernoulli(0.3);
        obs.years_since_dp = obs.previous_dp_flag ? static_cast<int>(rng.below(11)) : 0;
        obs.oa_fraction = std::vector<double>{0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0}[rng.below(4)];
        const int risk_class = 1 + static_cast<int>(rng.below(10));
        const double g = rng.uniform();
        const auto x = build_feature_vector(obs, risk_class, g);

        const double female = obs.gender == Gender::female ? 1.0 : 0.0;
        CHECK(x[kYearXAge] == x[kYearCounter] * x[kAge]);
        CHECK(x[kPrior60XYearsSince] == x[kPrior60Flag] * obs.years_since_60plus);
        CHECK(x[kPreviousDpXYearsSince] == x[kPreviousDpFlag] * obs.years_since_dp);
        CHECK(x[kFemaleXDaysBeyond60] == female * x[kDaysBeyond60]);
        CHECK(x[kFemaleXSpells1529] == female * x[kSpells1529]);
        CHECK(x[kFemaleXSpells4559] == female * x[kSpells4559]);
        CHECK(x[kFemaleXSpells60Plus] == female * x[kSpells60Plus]);
        const auto buckets = bucket_spells(obs.spell_lengths);
        CHECK(x[kSpells04XAgeGe31] + x[kSpells04XAgeLe30] == double(buckets.band_0_4));
        CHECK(x[kSpells04XAge4353] == buckets.band_0_4 * x[kAge4353Flag]);
        CHECK(x[kAge4353XSpells3044] == x[kAge4353Flag] * x[kSpells3044]);
        CHECK(x[kAgeXSpells59] == x[kAge] * buckets.band_5_9);
        CHECK(x[kAgeXSpells1014] == x[kAge] * buckets.band_10_14);
        CHECK(x[kAgeXSpells3044] == x[kAge] * x[kSpells3044]);
        CHECK(x[kAgeXSpells60Plus] == x[kAge] * x[kSpells60Plus]);
        CHECK(x[kAgeXRiskClass] == x[kAge] * risk_class);
        CHECK(x[kAgeXSpells04XGini] == x[kAge] * buckets.band_0_4 * g);
        // Flags are 0/1.
        for (const std::size_t flag : {kPrior60Flag, kPreviousDpFlag, kFemaleFlag, kAge4353Flag}) {
            CHECK((x[flag] == 0.0 || x[flag] == 1.0));
        }
    }
}

TEST_CASE("all thirty term names are distinct") {
    std::set<std::string> names(kTermNames.begin(), kTermNames.end());
    CHECK(names.size() == 30);
}
