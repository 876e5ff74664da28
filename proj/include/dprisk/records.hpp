#pragma once

#include "dprisk/calendar.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dprisk {

enum class Gender : std::uint8_t { male, female };

enum class BenefitKind : std::uint8_t {
    dp_full,        // disability pension, paid until further notice
    dp_partial,     // partial disability pension
    rehab_benefit,  // cash rehabilitation benefit (fixed term)
    rehab_allowance,// partial rehabilitation allowance (fixed term)
    oa              // old-age pension
};

const char* to_string(Gender gender);
const char* to_string(BenefitKind kind);
Gender gender_from_code(const std::string& code);      // "M" / "F"
BenefitKind benefit_kind_from_code(const std::string& code);

/// One sickness-absence period as reported, before concatenation.
struct RawSpell {
    std::string person_id;
    Date start;
    Date end; // inclusive
};

/// A continuous SA period after concatenating overlapping or back-to-back
/// spells that share an initiation year.
struct MergedSpell {
    std::string person_id;
    Date start;
    Date end; // inclusive
    int length_days = 0;
    int initiation_year = 0;
};

struct PersonRecord {
    std::string person_id;
    Gender gender = Gender::male;
    int birth_year = 0;
};

/// Principal employer and primary occupation for one person-year.
struct EmploymentRecord {
    std::string person_id;
    int year = 0;
    std::string employer_id;
    std::string occupation_code;
    int personal_oa_year = 0; // first calendar year of old-age eligibility
};

/// Months during which a pension benefit was paid, endpoints inclusive.
struct PensionEvent {
    std::string person_id;
    BenefitKind kind = BenefitKind::dp_full;
    YearMonth first_month;
    YearMonth last_month;
};

enum class Outcome : std::uint8_t { no = 0, yes = 1, unknown = 2 };

/// One person x one calendar year: the modeling unit.
struct PersonYearObservation {
    std::string person_id;
    int year = 0;
    int age = 0; // integer age at end of year
    Gender gender = Gender::male;
    std::string occupation_code;
    std::string employer_id;

    /// Lengths of merged spells initiated in this year.
    std::vector<int> spell_lengths;
    int longest_spell_days = 0;

    bool prior_60plus_flag = false; // any 60+ day spell in a preceding year
    int years_since_60plus = 0;     // 0 when the flag is false
    bool previous_dp_flag = false;  // any DP payment up to the end of this year
    int years_since_dp = 0;         // capped at 10; 0 when the flag is false

    double oa_fraction = 0.0; // 0, 1/3, 2/3 or 1

    Outcome outcome = Outcome::unknown;

    int annual_sa_days() const {
        int total = 0;
        for (const int len : spell_lengths) {
            total += len;
        }
        return total;
    }
};

/// The four register extracts, already parsed and validated.
struct Dataset {
    std::vector<PersonRecord> persons;        // sorted by person_id
    std::vector<RawSpell> spells;             // sorted by (person_id, start)
    std::vector<EmploymentRecord> employment; // sorted by (person_id, year)
    std::vector<PensionEvent> pensions;       // sorted by (person_id, first_month)
};

} // namespace dprisk
