#include "dprisk/ingest.hpp"

#include "dprisk/csv.hpp"
#include "dprisk/errors.hpp"
#include "dprisk/features.hpp"

#include <algorithm>
#include <set>

namespace dprisk::ingest {

namespace {

const std::vector<std::string> kPersonsHeader = {"person_id", "gender", "birth_year"};
const std::vector<std::string> kSpellsHeader = {"person_id", "start_date", "end_date"};
const std::vector<std::string> kEmploymentHeader = {"person_id", "year", "employer_id",
                                                    "occupation_code", "personal_oa_year"};
const std::vector<std::string> kPensionsHeader = {"person_id", "benefit_kind", "first_month",
                                                  "last_month"};

int parse_year_field(const CsvReader& reader, std::size_t column, const std::string& value) {
    const int year = parse_int_field(reader, column, value);
    if (year < 1880 || year > 2200) {
        throw SchemaError(reader.context(column) + ": year " + value + " out of range");
    }
    return year;
}

YearMonth december_of(int year) { return YearMonth::of(year, 12); }

bool event_covers_month(const PensionEvent& event, YearMonth month) {
    return event.first_month <= month && month <= event.last_month;
}

// The exclusion "receiving DP during the end of the observation year" refers
// to the disability pensions proper, not the fixed-term rehabilitation
// benefits.
bool is_dp_pension(BenefitKind kind) {
    return kind == BenefitKind::dp_full || kind == BenefitKind::dp_partial;
}

} // namespace

InputPaths InputPaths::in_directory(const std::filesystem::path& dir) {
    InputPaths paths;
    paths.persons = dir / "persons.csv";
    paths.spells = dir / "spells.csv";
    paths.employment = dir / "employment.csv";
    paths.pensions = dir / "pensions.csv";
    return paths;
}

bool counts_as_dp(BenefitKind kind, bool strict) {
    if (strict) {
        return is_dp_pension(kind);
    }
    return kind != BenefitKind::oa;
}

Dataset parse_inputs(const InputPaths& paths, ParseReport* report) {
    Dataset data;
    std::vector<std::string> fields;

    {
        CsvReader reader(paths.persons, kPersonsHeader);
        while (reader.next(fields)) {
            PersonRecord person;
            person.person_id = fields[0];
            if (person.person_id.empty()) {
                throw SchemaError(reader.context(0) + ": empty person_id");
            }
            try {
                person.gender = gender_from_code(fields[1]);
            } catch (const SchemaError& e) {
                throw SchemaError(reader.context(1) + ": " + e.what());
            }
            person.birth_year = parse_year_field(reader, 2, fields[2]);
            data.persons.push_back(std::move(person));
        }
        std::sort(data.persons.begin(), data.persons.end(),
                  [](const auto& a, const auto& b) { return a.person_id < b.person_id; });
        const auto dup = std::adjacent_find(
            data.persons.begin(), data.persons.end(),
            [](const auto& a, const auto& b) { return a.person_id == b.person_id; });
        if (dup != data.persons.end()) {
            throw SchemaError("persons.csv: duplicate person_id '" + dup->person_id + "'");
        }
    }

    {
        CsvReader reader(paths.spells, kSpellsHeader);
        while (reader.next(fields)) {
            RawSpell spell;
            spell.person_id = fields[0];
            try {
                spell.start = Date::parse(fields[1]);
            } catch (const SchemaError& e) {
                throw SchemaError(reader.context(1) + ": " + e.what());
            }
            try {
                spell.end = Date::parse(fields[2]);
            } catch (const SchemaError& e) {
                throw SchemaError(reader.context(2) + ": " + e.what());
            }
            if (spell.end < spell.start) {
                throw SchemaError(reader.context() + ": end_date " + spell.end.to_string() +
                                  " before start_date " + spell.start.to_string());
            }
            data.spells.push_back(std::move(spell));
        }
        std::sort(data.spells.begin(), data.spells.end(), [](const auto& a, const auto& b) {
            if (a.person_id != b.person_id) {
                return a.person_id < b.person_id;
            }
            if (a.start.serial != b.start.serial) {
                return a.start.serial < b.start.serial;
            }
            return a.end.serial < b.end.serial;
        });
    }

    {
        CsvReader reader(paths.employment, kEmploymentHeader);
        while (reader.next(fields)) {
            EmploymentRecord record;
            record.person_id = fields[0];
            record.year = parse_year_field(reader, 1, fields[1]);
            record.employer_id = fields[2];
            record.occupation_code = fields[3];
            if (record.employer_id.empty() || record.occupation_code.empty()) {
                throw SchemaError(reader.context() + ": empty employer_id or occupation_code");
            }
            record.personal_oa_year = parse_year_field(reader, 4, fields[4]);
            data.employment.push_back(std::move(record));
        }
        std::sort(data.employment.begin(), data.employment.end(),
                  [](const auto& a, const auto& b) {
                      if (a.person_id != b.person_id) {
                          return a.person_id < b.person_id;
                      }
                      return a.year < b.year;
                  });
        const auto dup = std::adjacent_find(data.employment.begin(), data.employment.end(),
                                            [](const auto& a, const auto& b) {
                                                return a.person_id == b.person_id &&
                                                       a.year == b.year;
                                            });
        if (dup != data.employment.end()) {
            throw SchemaError("employment.csv: duplicate (person_id, year) row for '" +
                              dup->person_id + "', " + std::to_string(dup->year) +
                              "; principal employer must be resolved upstream");
        }
    }

    {
        CsvReader reader(paths.pensions, kPensionsHeader);
        while (reader.next(fields)) {
            PensionEvent event;
            event.person_id = fields[0];
            try {
                event.kind = benefit_kind_from_code(fields[1]);
            } catch (const SchemaError& e) {
                throw SchemaError(reader.context(1) + ": " + e.what());
            }
            try {
                event.first_month = YearMonth::parse(fields[2]);
            } catch (const SchemaError& e) {
                throw SchemaError(reader.context(2) + ": " + e.what());
            }
            try {
                event.last_month = YearMonth::parse(fields[3]);
            } catch (const SchemaError& e) {
                throw SchemaError(reader.context(3) + ": " + e.what());
            }
            if (event.last_month < event.first_month) {
                throw SchemaError(reader.context() + ": last_month before first_month");
            }
            data.pensions.push_back(std::move(event));
        }
        std::sort(data.pensions.begin(), data.pensions.end(), [](const auto& a, const auto& b) {
            if (a.person_id != b.person_id) {
                return a.person_id < b.person_id;
            }
            if (a.first_month != b.first_month) {
                return a.first_month < b.first_month;
            }
            return static_cast<int>(a.kind) < static_cast<int>(b.kind);
        });
    }

    if (report != nullptr) {
        report->persons = static_cast<long>(data.persons.size());
        report->spells = static_cast<long>(data.spells.size());
        report->employment = static_cast<long>(data.employment.size());
        report->pensions = static_cast<long>(data.pensions.size());
    }
    return data;
}

std::vector<MergedSpell> merge_spells(std::span<const RawSpell> spells) {
    std::vector<const RawSpell*> sorted;
    sorted.reserve(spells.size());
    for (const auto& spell : spells) {
        sorted.push_back(&spell);
    }
    std::sort(sorted.begin(), sorted.end(), [](const RawSpell* a, const RawSpell* b) {
        if (a->start.serial != b->start.serial) {
            return a->start.serial < b->start.serial;
        }
        return a->end.serial < b->end.serial;
    });

    std::vector<MergedSpell> merged;
    for (const RawSpell* spell : sorted) {
        const int start_year = spell->start.year;
        // Merge when overlapping or back-to-back (gap zero) and the start
        // dates share a calendar year; start years are monotone in start
        // date, so candidates are always the most recent merged spell.
        if (!merged.empty() && merged.back().initiation_year == start_year &&
            spell->start.serial <= merged.back().end.serial + 1) {
            if (spell->end.serial > merged.back().end.serial) {
                merged.back().end = spell->end;
                merged.back().length_days = inclusive_days(merged.back().start, merged.back().end);
            }
            continue;
        }
        MergedSpell out;
        out.person_id = spell->person_id;
        out.start = spell->start;
        out.end = spell->end;
        out.length_days = inclusive_days(spell->start, spell->end);
        out.initiation_year = start_year;
        merged.push_back(std::move(out));
    }
    return merged;
}

std::vector<MergedSpell> merge_all_spells(std::span<const RawSpell> spells_sorted) {
    std::vector<MergedSpell> merged;
    std::size_t begin = 0;
    while (begin < spells_sorted.size()) {
        std::size_t end = begin + 1;
        while (end < spells_sorted.size() &&
               spells_sorted[end].person_id == spells_sorted[begin].person_id) {
            ++end;
        }
        auto person_merged = merge_spells(spells_sorted.subspan(begin, end - begin));
        merged.insert(merged.end(), std::make_move_iterator(person_merged.begin()),
                      std::make_move_iterator(person_merged.end()));
        begin = end;
    }
    return merged;
}

Outcome label_outcome(int observation_year, std::span<const PensionEvent> person_pensions,
                      const IngestOptions& options, YearMonth data_through) {
    const YearMonth window_first = YearMonth::of(observation_year + 1, 1);
    const YearMonth window_last = december_of(observation_year + 3);
    for (const auto& event : person_pensions) {
        if (!counts_as_dp(event.kind, options.strict_dp_benefits)) {
            continue;
        }
        if (event.first_month <= window_last && window_first <= event.last_month) {
            return Outcome::yes;
        }
    }
    return data_through >= window_last ? Outcome::no : Outcome::unknown;
}

namespace {

struct PersonContext {
    const PersonRecord* person = nullptr;
    std::span<const MergedSpell> merged;
    std::span<const PensionEvent> pensions;
};

// Single sweep over the person-sorted tables.
template <typename Fn>
void for_each_employed_person(const Dataset& data, std::span<const MergedSpell> merged, Fn&& fn) {
    std::size_t pi = 0;   // persons cursor
    std::size_t mi = 0;   // merged spells cursor
    std::size_t bi = 0;   // pensions (benefits) cursor
    std::size_t ei = 0;   // employment cursor
    while (ei < data.employment.size()) {
        const std::string& pid = data.employment[ei].person_id;
        std::size_t ei_end = ei + 1;
        while (ei_end < data.employment.size() && data.employment[ei_end].person_id == pid) {
            ++ei_end;
        }
        while (pi < data.persons.size() && data.persons[pi].person_id < pid) {
            ++pi;
        }
        while (mi < merged.size() && merged[mi].person_id < pid) {
            ++mi;
        }
        std::size_t mi_end = mi;
        while (mi_end < merged.size() && merged[mi_end].person_id == pid) {
            ++mi_end;
        }
        while (bi < data.pensions.size() && data.pensions[bi].person_id < pid) {
            ++bi;
        }
        std::size_t bi_end = bi;
        while (bi_end < data.pensions.size() && data.pensions[bi_end].person_id == pid) {
            ++bi_end;
        }

        PersonContext ctx;
        if (pi < data.persons.size() && data.persons[pi].person_id == pid) {
            ctx.person = &data.persons[pi];
        }
        ctx.merged = merged.subspan(mi, mi_end - mi);
        ctx.pensions = std::span<const PensionEvent>(data.pensions).subspan(bi, bi_end - bi);
        fn(pid, std::span<const EmploymentRecord>(data.employment).subspan(ei, ei_end - ei), ctx);
        ei = ei_end;
        mi = mi_end;
        bi = bi_end;
    }
}

std::vector<PersonYearObservation> assemble_range(const Dataset& data,
                                                  std::span<const MergedSpell> merged,
                                                  int first_year, int last_year,
                                                  const IngestOptions& options,
                                                  std::vector<std::string>* warnings) {
    YearMonth data_through = YearMonth::of(1800, 1);
    if (options.pension_data_through.has_value()) {
        data_through = *options.pension_data_through;
    } else if (auto latest = max_pension_month(data)) {
        data_through = *latest;
    }

    std::vector<PersonYearObservation> rows;
    std::vector<std::string> missing_persons;
    long underage_skipped = 0;

    for_each_employed_person(
        data, merged,
        [&](const std::string& pid, std::span<const EmploymentRecord> employment,
            const PersonContext& ctx) {
            bool any_in_range = false;
            for (const auto& record : employment) {
                if (record.year >= first_year && record.year <= last_year) {
                    any_in_range = true;
                    break;
                }
            }
            if (!any_in_range) {
                return;
            }
            if (ctx.person == nullptr) {
                missing_persons.push_back(pid);
                return;
            }
            for (const auto& record : employment) {
                const int year = record.year;
                if (year < first_year || year > last_year) {
                    continue;
                }
                if (record.personal_oa_year <= year) {
                    continue; // already eligible for an OA pension
                }
                const YearMonth december = december_of(year);
                bool on_dp_in_december = false;
                for (const auto& event : ctx.pensions) {
                    if (is_dp_pension(event.kind) && event_covers_month(event, december)) {
                        on_dp_in_december = true;
                        break;
                    }
                }
                if (on_dp_in_december) {
                    continue;
                }
                const int age = year - ctx.person->birth_year;
                if (age < options.min_age) {
                    ++underage_skipped;
                    continue;
                }

                PersonYearObservation obs;
                obs.person_id = pid;
                obs.year = year;
                obs.age = age;
                obs.gender = ctx.person->gender;
                obs.occupation_code = record.occupation_code;
                obs.employer_id = record.employer_id;

                int latest_60plus_year = 0;
                for (const auto& spell : ctx.merged) {
                    if (spell.initiation_year == year) {
                        obs.spell_lengths.push_back(spell.length_days);
                        obs.longest_spell_days =
                            std::max(obs.longest_spell_days, spell.length_days);
                    } else if (spell.initiation_year < year && spell.length_days >= 60) {
                        latest_60plus_year = std::max(latest_60plus_year, spell.initiation_year);
                    }
                }
                if (latest_60plus_year > 0) {
                    obs.prior_60plus_flag = true;
                    obs.years_since_60plus = year - latest_60plus_year;
                }

                int last_dp_month_index = -1;
                const int december_index = december.index();
                for (const auto& event : ctx.pensions) {
                    if (!counts_as_dp(event.kind, options.strict_dp_benefits)) {
                        continue;
                    }
                    if (event.first_month.index() > december_index) {
                        continue;
                    }
                    last_dp_month_index =
                        std::max(last_dp_month_index,
                                 std::min(event.last_month.index(), december_index));
                }
                if (last_dp_month_index >= 0) {
                    obs.previous_dp_flag = true;
                    const int last_dp_year = last_dp_month_index / 12;
                    obs.years_since_dp = std::clamp(year - last_dp_year, 0, 10);
                }

                obs.oa_fraction = features::oa_fraction(record.personal_oa_year, year);
                obs.outcome = label_outcome(year, ctx.pensions, options, data_through);
                rows.push_back(std::move(obs));
            }
        });

    if (!missing_persons.empty()) {
        std::sort(missing_persons.begin(), missing_persons.end());
        std::string listed;
        const std::size_t shown = std::min<std::size_t>(missing_persons.size(), 20);
        for (std::size_t i = 0; i < shown; ++i) {
            if (i > 0) {
                listed += ", ";
            }
            listed += missing_persons[i];
        }
        if (missing_persons.size() > shown) {
            listed += ", ... (" + std::to_string(missing_persons.size()) + " total)";
        }
        throw SchemaError("employment references person_ids missing from persons.csv: " + listed);
    }
    if (underage_skipped > 0 && warnings != nullptr) {
        warnings->push_back("skipped " + std::to_string(underage_skipped) +
                            " observation(s) below age " + std::to_string(options.min_age));
    }
    // The person sweep emits rows ordered by (person_id, year) already.
    return rows;
}

} // namespace

std::vector<PersonYearObservation> assemble_observations(
    const Dataset& data, std::span<const MergedSpell> merged, int year,
    const IngestOptions& options, std::vector<std::string>* warnings) {
    return assemble_range(data, merged, year, year, options, warnings);
}

std::vector<PersonYearObservation> assemble_all(const Dataset& data, int first_year,
                                                int last_year, const IngestOptions& options,
                                                std::vector<std::string>* warnings) {
    if (first_year > last_year) {
        throw InputError("invalid year range " + std::to_string(first_year) + ".." +
                         std::to_string(last_year));
    }
    const auto merged = merge_all_spells(data.spells);
    return assemble_range(data, merged, first_year, last_year, options, warnings);
}

std::optional<std::pair<int, int>> employment_year_range(const Dataset& data) {
    if (data.employment.empty()) {
        return std::nullopt;
    }
    int lo = data.employment.front().year;
    int hi = lo;
    for (const auto& record : data.employment) {
        lo = std::min(lo, record.year);
        hi = std::max(hi, record.year);
    }
    return std::make_pair(lo, hi);
}

std::optional<YearMonth> max_pension_month(const Dataset& data) {
    std::optional<YearMonth> latest;
    for (const auto& event : data.pensions) {
        if (!latest.has_value() || *latest < event.last_month) {
            latest = event.last_month;
        }
    }
    return latest;
}

} // namespace dprisk::ingest
