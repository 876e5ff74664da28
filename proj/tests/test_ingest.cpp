#include "dprisk/ingest.hpp"

#include "dprisk/errors.hpp"
#include "dprisk/rng.hpp"
#include "test_support.hpp"

#include "doctest.h"

#include <algorithm>
#include <string>

using namespace dprisk;
using ingest::IngestOptions;

namespace {

RawSpell spell(const std::string& pid, const std::string& start, const std::string& end) {
    return {pid, Date::parse(start), Date::parse(end)};
}

ingest::InputPaths write_fixture(const std::filesystem::path& dir, const std::string& persons,
                                 const std::string& spells, const std::string& employment,
                                 const std::string& pensions) {
    testsupport::write_file(dir / "persons.csv", persons);
    testsupport::write_file(dir / "spells.csv", spells);
    testsupport::write_file(dir / "employment.csv", employment);
    testsupport::write_file(dir / "pensions.csv", pensions);
    return ingest::InputPaths::in_directory(dir);
}

} // namespace

TEST_CASE("parse_inputs reads well-formed files") {
    const auto dir = testsupport::make_temp_dir("parse_ok");
    const auto paths = write_fixture(dir,
                                     "person_id,gender,birth_year\n"
                                     "P1,M,1970\n"
                                     "P2,F,1985\n",
                                     "person_id,start_date,end_date\n"
                                     "P1,2016-01-10,2016-01-14\n"
                                     "P1,2016-03-01,2016-03-01\n"
                                     "P2,2016-05-05,2016-06-20\n",
                                     "person_id,year,employer_id,occupation_code,personal_oa_year\n"
                                     "P1,2016,E1,2221,2033\n"
                                     "P2,2016,E1,5311,2050\n",
                                     "person_id,benefit_kind,first_month,last_month\n"
                                     "P1,rehab_benefit,2010-03,2010-09\n");
    ingest::ParseReport report;
    const Dataset data = ingest::parse_inputs(paths, &report);
    CHECK(report.persons == 2);
    CHECK(report.spells == 3);
    CHECK(report.employment == 2);
    CHECK(report.pensions == 1);
    CHECK(data.spells.size() == 3);
    CHECK(data.persons.front().person_id == "P1");
}

TEST_CASE("parse_inputs rejects malformed rows with file/line/column context") {
    const auto dir = testsupport::make_temp_dir("parse_bad");

    SUBCASE("end date before start date") {
        const auto paths = write_fixture(dir,
                                         "person_id,gender,birth_year\nP1,M,1970\n",
                                         "person_id,start_date,end_date\n"
                                         "P1,2016-01-10,2016-01-14\n"
                                         "P1,2016-02-10,2016-02-01\n",
                                         "person_id,year,employer_id,occupation_code,personal_oa_year\n",
                                         "person_id,benefit_kind,first_month,last_month\n");
        try {
            ingest::parse_inputs(paths);
            FAIL("expected SchemaError");
        } catch (const SchemaError& e) {
            const std::string what = e.what();
            CHECK(what.find("spells.csv") != std::string::npos);
            CHECK(what.find("line 3") != std::string::npos);
        }
    }

    SUBCASE("invalid gender code") {
        const auto paths = write_fixture(dir,
                                         "person_id,gender,birth_year\nP1,X,1970\n",
                                         "person_id,start_date,end_date\n",
                                         "person_id,year,employer_id,occupation_code,personal_oa_year\n",
                                         "person_id,benefit_kind,first_month,last_month\n");
        try {
            ingest::parse_inputs(paths);
            FAIL("expected SchemaError");
        } catch (const SchemaError& e) {
            const std::string what = e.what();
            CHECK(what.find("gender") != std::string::npos);
            CHECK(what.find("line 2") != std::string::npos);
        }
    }

    SUBCASE("duplicate employment rows") {
        const auto paths = write_fixture(dir,
                                         "person_id,gender,birth_year\nP1,M,1970\n",
                                         "person_id,start_date,end_date\n",
                                         "person_id,year,employer_id,occupation_code,personal_oa_year\n"
                                         "P1,2016,E1,2221,2033\n"
                                         "P1,2016,E2,2221,2033\n",
                                         "person_id,benefit_kind,first_month,last_month\n");
        CHECK_THROWS_AS(ingest::parse_inputs(paths), SchemaError);
    }

    SUBCASE("missing file") {
        ingest::InputPaths paths = ingest::InputPaths::in_directory(dir / "nowhere");
        CHECK_THROWS_AS(ingest::parse_inputs(paths), InputError);
    }

    SUBCASE("bad header") {
        const auto paths = write_fixture(dir, "id,gender,birth_year\nP1,M,1970\n",
                                         "person_id,start_date,end_date\n",
                                         "person_id,year,employer_id,occupation_code,personal_oa_year\n",
                                         "person_id,benefit_kind,first_month,last_month\n");
        CHECK_THROWS_AS(ingest::parse_inputs(paths), SchemaError);
    }
}

TEST_CASE("merge_spells: zero-gap same-year spells concatenate") {
    const std::vector<RawSpell> raw = {spell("P1", "2016-01-10", "2016-01-14"),
                                       spell("P1", "2016-01-15", "2016-01-20")};
    const auto merged = ingest::merge_spells(raw);
    REQUIRE(merged.size() == 1);
    CHECK(merged[0].start.to_string() == "2016-01-10");
    CHECK(merged[0].end.to_string() == "2016-01-20");
    CHECK(merged[0].length_days == 11);
    CHECK(merged[0].initiation_year == 2016);
}

TEST_CASE("merge_spells: different initiation years never merge") {
    const std::vector<RawSpell> raw = {spell("P1", "2016-12-20", "2017-01-10"),
                                       spell("P1", "2017-01-11", "2017-01-15")};
    const auto merged = ingest::merge_spells(raw);
    REQUIRE(merged.size() == 2);
    CHECK(merged[0].initiation_year == 2016);
    CHECK(merged[0].length_days == 22);
    CHECK(merged[1].initiation_year == 2017);
    CHECK(merged[1].length_days == 5);
}

TEST_CASE("merge_spells: transitive closure across overlapping and abutting spells") {
    const std::vector<RawSpell> raw = {spell("P1", "2016-03-01", "2016-03-10"),
                                       spell("P1", "2016-03-05", "2016-03-20"),
                                       spell("P1", "2016-03-21", "2016-03-25")};
    const auto merged = ingest::merge_spells(raw);
    REQUIRE(merged.size() == 1);
    CHECK(merged[0].start.to_string() == "2016-03-01");
    CHECK(merged[0].end.to_string() == "2016-03-25");
    CHECK(merged[0].length_days == 25);
}

namespace {

std::vector<RawSpell> random_spell_set(Rng& rng) {
    std::vector<RawSpell> out;
    const int n = static_cast<int>(rng.below(12));
    for (int i = 0; i < n; ++i) {
        const int year = 2015 + static_cast<int>(rng.below(3));
        const int day_of_year = static_cast<int>(rng.below(364));
        const int length = 1 + static_cast<int>(rng.below(90));
        const Date start = Date::from_serial(Date::from_ymd(year, 1, 1).serial + day_of_year);
        out.push_back({"P1", start, Date::from_serial(start.serial + length - 1)});
    }
    return out;
}

bool merged_equal(const std::vector<MergedSpell>& a, const std::vector<MergedSpell>& b) {
    if (a.size() != b.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].person_id != b[i].person_id || a[i].start.serial != b[i].start.serial ||
            a[i].end.serial != b[i].end.serial || a[i].length_days != b[i].length_days ||
            a[i].initiation_year != b[i].initiation_year) {
            return false;
        }
    }
    return true;
}

} // namespace

TEST_CASE("merge_spells properties against the day-set oracle") {
    Rng rng(20240601);
    for (int trial = 0; trial < 300; ++trial) {
        auto raw = random_spell_set(rng);
        const auto merged = ingest::merge_spells(raw);

        // Oracle equivalence.
        CHECK(merged_equal(merged, testsupport::merge_oracle(raw)));

        // Permutation invariance.
        for (std::size_t i = raw.size(); i > 1; --i) {
            std::swap(raw[i - 1], raw[rng.below(i)]);
        }
        CHECK(merged_equal(merged, ingest::merge_spells(raw)));

        // Idempotence: feeding the merged spells back in changes nothing.
        std::vector<RawSpell> again;
        for (const auto& m : merged) {
            again.push_back({m.person_id, m.start, m.end});
        }
        CHECK(merged_equal(merged, ingest::merge_spells(again)));

        // Merging never increases the total covered days.
        long raw_days = 0;
        for (const auto& s : raw) {
            raw_days += inclusive_days(s.start, s.end);
        }
        long merged_days = 0;
        for (const auto& m : merged) {
            merged_days += m.length_days;
        }
        CHECK(merged_days <= raw_days);
    }
}

TEST_CASE("merge_spells: disjoint non-adjacent spells keep exact day counts") {
    Rng rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        // Construct same-year spells with gaps of at least one day.
        std::vector<RawSpell> raw;
        std::int32_t cursor = Date::from_ymd(2016, 1, 1).serial;
        long total = 0;
        const int n = 1 + static_cast<int>(rng.below(6));
        for (int i = 0; i < n; ++i) {
            cursor += 2 + static_cast<int>(rng.below(10));
            const int length = 1 + static_cast<int>(rng.below(20));
            raw.push_back(
                {"P1", Date::from_serial(cursor), Date::from_serial(cursor + length - 1)});
            total += length;
            cursor += length;
        }
        const auto merged = ingest::merge_spells(raw);
        CHECK(merged.size() == raw.size());
        long merged_days = 0;
        for (const auto& m : merged) {
            merged_days += m.length_days;
        }
        CHECK(merged_days == total);
    }
}

namespace {

/// Fixture with one employed person and configurable extras.
struct AssembleFixture {
    Dataset data;
    IngestOptions options;

    AssembleFixture() {
        data.persons.push_back({"P1", Gender::male, 1970});
        data.employment.push_back({"P1", 2016, "E1", "2221", 2033});
        options.pension_data_through = YearMonth::of(2023, 12);
    }

    std::vector<PersonYearObservation> run(int year) {
        std::sort(data.persons.begin(), data.persons.end(),
                  [](const auto& a, const auto& b) { return a.person_id < b.person_id; });
        std::sort(data.employment.begin(), data.employment.end(),
                  [](const auto& a, const auto& b) {
                      if (a.person_id != b.person_id) {
                          return a.person_id < b.person_id;
                      }
                      return a.year < b.year;
                  });
        std::sort(data.pensions.begin(), data.pensions.end(), [](const auto& a, const auto& b) {
            if (a.person_id != b.person_id) {
                return a.person_id < b.person_id;
            }
            return a.first_month < b.first_month;
        });
        std::sort(data.spells.begin(), data.spells.end(), [](const auto& a, const auto& b) {
            if (a.person_id != b.person_id) {
                return a.person_id < b.person_id;
            }
            return a.start.serial < b.start.serial;
        });
        const auto merged = ingest::merge_all_spells(data.spells);
        return ingest::assemble_observations(data, merged, year, options);
    }
};

} // namespace

TEST_CASE("assemble_observations applies the OA and December-DP exclusions") {
    SUBCASE("person already eligible for OA is excluded") {
        AssembleFixture fx;
        fx.data.employment[0].personal_oa_year = 2016;
        CHECK(fx.run(2016).empty());
    }
    SUBCASE("dp_full covering December of the year excludes the row") {
        AssembleFixture fx;
        fx.data.pensions.push_back(
            {"P1", BenefitKind::dp_full, YearMonth::of(2016, 7), YearMonth::of(2017, 3)});
        CHECK(fx.run(2016).empty());
    }
    SUBCASE("dp ending before December keeps the row with history flags") {
        AssembleFixture fx;
        fx.data.pensions.push_back(
            {"P1", BenefitKind::dp_partial, YearMonth::of(2016, 2), YearMonth::of(2016, 5)});
        const auto rows = fx.run(2016);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].previous_dp_flag);
        CHECK(rows[0].years_since_dp == 0);
    }
    SUBCASE("rehabilitation benefit in December does not exclude") {
        AssembleFixture fx;
        fx.data.pensions.push_back(
            {"P1", BenefitKind::rehab_benefit, YearMonth::of(2016, 10), YearMonth::of(2016, 12)});
        CHECK(fx.run(2016).size() == 1);
    }
}

TEST_CASE("assemble_observations derives spell history") {
    AssembleFixture fx;
    fx.data.spells.push_back(spell("P1", "2014-02-01", "2014-04-16")); // 75 days
    fx.data.spells.push_back(spell("P1", "2016-06-01", "2016-06-10"));
    const auto rows = fx.run(2016);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].prior_60plus_flag);
    CHECK(rows[0].years_since_60plus == 2);
    CHECK(rows[0].spell_lengths == std::vector<int>{10});
    CHECK(rows[0].longest_spell_days == 10);
    CHECK(rows[0].age == 46);
    CHECK(rows[0].oa_fraction == 0.0);
}

TEST_CASE("assemble_observations: years_since_dp caps at ten") {
    AssembleFixture fx;
    fx.data.pensions.push_back(
        {"P1", BenefitKind::rehab_allowance, YearMonth::of(2001, 1), YearMonth::of(2001, 6)});
    const auto rows = fx.run(2016);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].previous_dp_flag);
    CHECK(rows[0].years_since_dp == 10);
}

TEST_CASE("assemble_observations errors on employed persons without a person record") {
    AssembleFixture fx;
    fx.data.employment.push_back({"P9", 2016, "E1", "2221", 2040});
    try {
        fx.run(2016);
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(std::string(e.what()).find("P9") != std::string::npos);
    }
}

TEST_CASE("label_outcome window semantics") {
    IngestOptions options;
    const auto event = [](int y0, int m0, int y1, int m1, BenefitKind kind) {
        return PensionEvent{"P1", kind, YearMonth::of(y0, m0), YearMonth::of(y1, m1)};
    };

    SUBCASE("payment inside the three-year window") {
        const std::vector<PensionEvent> events = {
            event(2018, 5, 2018, 8, BenefitKind::dp_full)};
        CHECK(ingest::label_outcome(2016, events, options, YearMonth::of(2019, 12)) ==
              Outcome::yes);
    }
    SUBCASE("payment after the window is a known negative") {
        const std::vector<PensionEvent> events = {
            event(2020, 1, 2021, 6, BenefitKind::dp_full)};
        CHECK(ingest::label_outcome(2016, events, options, YearMonth::of(2021, 6)) ==
              Outcome::no);
    }
    SUBCASE("window not fully observed yields unknown") {
        const std::vector<PensionEvent> events;
        CHECK(ingest::label_outcome(2021, events, options, YearMonth::of(2022, 12)) ==
              Outcome::unknown);
    }
    SUBCASE("positive evidence beats an incomplete window") {
        const std::vector<PensionEvent> events = {
            event(2022, 3, 2022, 5, BenefitKind::dp_partial)};
        CHECK(ingest::label_outcome(2021, events, options, YearMonth::of(2022, 12)) ==
              Outcome::yes);
    }
    SUBCASE("strict benefit set ignores rehabilitation events") {
        const std::vector<PensionEvent> events = {
            event(2018, 5, 2018, 8, BenefitKind::rehab_benefit)};
        IngestOptions strict;
        strict.strict_dp_benefits = true;
        CHECK(ingest::label_outcome(2016, events, strict, YearMonth::of(2019, 12)) ==
              Outcome::no);
        CHECK(ingest::label_outcome(2016, events, options, YearMonth::of(2019, 12)) ==
              Outcome::yes);
    }
    SUBCASE("events outside the window never change the label") {
        Rng rng(99);
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<PensionEvent> events;
            const int year = 2016;
            const bool inside = rng.bernoulli(0.5);
            if (inside) {
                const int start = 12 * (year + 1) + static_cast<int>(rng.below(36));
                events.push_back({"P1", BenefitKind::dp_full,
                                  YearMonth::of(start / 12, start % 12 + 1),
                                  YearMonth::of(start / 12, start % 12 + 1)});
            }
            const auto base =
                ingest::label_outcome(year, events, options, YearMonth::of(2030, 12));
            // Add events strictly before or strictly after the window.
            const int before = 12 * (year - 5) + static_cast<int>(rng.below(60));
            events.push_back({"P1", BenefitKind::dp_partial,
                              YearMonth::of(before / 12, before % 12 + 1),
                              YearMonth::of(before / 12, before % 12 + 1)});
            const int after = 12 * (year + 4) + static_cast<int>(rng.below(36));
            events.push_back({"P1", BenefitKind::dp_full,
                              YearMonth::of(after / 12, after % 12 + 1),
                              YearMonth::of(after / 12, after % 12 + 1)});
            CHECK(ingest::label_outcome(year, events, options, YearMonth::of(2030, 12)) == base);
        }
    }
}
