#include "dprisk/synth.hpp"

#include "dprisk/csv.hpp"
#include "dprisk/errors.hpp"
#include "dprisk/features.hpp"
#include "dprisk/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace dprisk::synth {

namespace {

constexpr std::uint64_t kPersonStream = 1;
constexpr std::uint64_t kSpellStream = 2;
constexpr std::uint64_t kOutcomeStream = 3;

struct PersonPlan {
    std::string id;
    Gender gender = Gender::male;
    int birth_year = 0;
    std::size_t occupation = 0;
    std::size_t employer = 0;
    int oa_year = 0;
    int panel_start = 0;
    int panel_end = 0;
};

std::size_t weighted_pick(Rng& rng, std::span<const double> cumulative) {
    const double u = rng.uniform() * cumulative.back();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const std::size_t idx = static_cast<std::size_t>(it - cumulative.begin());
    return std::min(idx, cumulative.size() - 1);
}

std::vector<double> cumulative_weights(std::span<const double> weights) {
    std::vector<double> cumulative(weights.size());
    double running = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        running += weights[i];
        cumulative[i] = running;
    }
    return cumulative;
}

int spell_length(Rng& rng, const std::array<double, 3>& band_shares, double sigma) {
    const double u = rng.uniform() * (band_shares[0] + band_shares[1] + band_shares[2]);
    if (u < band_shares[0]) {
        const double v = rng.uniform();
        if (v < 0.36) {
            return 1;
        }
        if (v < 0.61) {
            return 2;
        }
        if (v < 0.77) {
            return 3;
        }
        if (v < 0.89) {
            return 4;
        }
        return 5;
    }
    if (u < band_shares[0] + band_shares[1]) {
        return 6 + std::min(24, static_cast<int>(std::floor(rng.exponential(6.0 * sigma))));
    }
    const double log_extra = 3.0 + 0.8 * sigma * rng.normal();
    return 31 + std::min(269, static_cast<int>(std::floor(std::exp(log_extra))));
}

/// Places the dp_full event for a positive draw at `year` so that the
/// windows of this person's earlier (false-labeled) observation years stay
/// clean: an observed year y' forbids payments in [y'+1, y'+3].
PensionEvent make_outcome_event(Rng& rng, const std::string& person_id, int year,
                                bool prev_year_observed, bool prev2_year_observed,
                                YearMonth horizon) {
    int earliest = year + 1;
    if (prev_year_observed) {
        earliest = year + 3;
    } else if (prev2_year_observed) {
        earliest = year + 2;
    }
    const int start_year = static_cast<int>(rng.between(earliest, year + 3));
    const int start_month = static_cast<int>(rng.between(1, 12));
    PensionEvent event;
    event.person_id = person_id;
    event.kind = BenefitKind::dp_full;
    event.first_month = YearMonth::of(start_year, start_month);
    event.last_month = horizon < event.first_month ? event.first_month : horizon;
    return event;
}

void sort_dataset(Dataset& data) {
    std::sort(data.persons.begin(), data.persons.end(),
              [](const auto& a, const auto& b) { return a.person_id < b.person_id; });
    std::sort(data.spells.begin(), data.spells.end(), [](const auto& a, const auto& b) {
        if (a.person_id != b.person_id) {
            return a.person_id < b.person_id;
        }
        if (a.start.serial != b.start.serial) {
            return a.start.serial < b.start.serial;
        }
        return a.end.serial < b.end.serial;
    });
    std::sort(data.employment.begin(), data.employment.end(), [](const auto& a, const auto& b) {
        if (a.person_id != b.person_id) {
            return a.person_id < b.person_id;
        }
        return a.year < b.year;
    });
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

std::string format_person_id(long index) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "P%07ld", index + 1);
    return buffer;
}

} // namespace

void SynthConfig::validate() const {
    if (n_persons < 0) {
        throw InputError("synth: n_persons must be non-negative");
    }
    if (first_year > last_year) {
        throw InputError("synth: first_year must not exceed last_year");
    }
    if (female_share < 0.0 || female_share > 1.0) {
        throw InputError("synth: female_share must be in [0, 1]");
    }
    if (age_min < 17 || age_max < age_min) {
        throw InputError("synth: invalid age range");
    }
    if (base_spell_rate < 0.0) {
        throw InputError("synth: base_spell_rate must be non-negative");
    }
    const double share_sum = length_band_shares[0] + length_band_shares[1] + length_band_shares[2];
    if (length_band_shares[0] < 0.0 || length_band_shares[1] < 0.0 ||
        length_band_shares[2] < 0.0 || share_sum <= 0.0) {
        throw InputError("synth: length band shares must be non-negative and not all zero");
    }
    if (dp_history_rate < 0.0 || dp_history_rate > 1.0 || split_probability < 0.0 ||
        split_probability > 1.0 || full_panel_share < 0.0 || full_panel_share > 1.0 ||
        yearly_exit_rate < 0.0 || yearly_exit_rate > 1.0) {
        throw InputError("synth: probabilities must be in [0, 1]");
    }
    if (!occupations.empty()) {
        for (const auto& occ : occupations) {
            if (occ.code.empty() || occ.weight <= 0.0 || occ.severity <= 0.0) {
                throw InputError("synth: occupation specs need a code and positive weight/severity");
            }
        }
    }
    if (!employers.empty()) {
        for (const auto& emp : employers) {
            if (emp.id.empty() || emp.weight <= 0.0 || emp.length_sigma <= 0.0) {
                throw InputError("synth: employer specs need an id and positive weight/sigma");
            }
        }
    }
}

std::vector<OccupationSpec> default_occupations() {
    // ISCO-08-like codes. Severities step by latent risk class so that the
    // within-class ordering of observed rates is free to vary without moving
    // any occupation across a class boundary.
    return {
        {"2611", 1.0, 0.55},  // legal professionals
        {"2421", 1.0, 0.55},  // analysts
        {"2310", 1.0, 0.631}, // university teachers
        {"2211", 1.0, 0.725}, // physicians
        {"2330", 1.0, 0.725}, // secondary school teachers
        {"2341", 1.0, 0.832}, // primary school teachers
        {"2635", 1.0, 0.955}, // social work professionals
        {"3412", 1.0, 0.955}, // social work associates
        {"2221", 1.0, 1.096}, // nursing professionals
        {"3258", 1.0, 1.096}, // ambulance workers
        {"5311", 1.0, 1.258}, // childcare workers
        {"4110", 1.0, 1.444}, // office clerks
        {"5321", 1.0, 1.444}, // health care assistants
        {"9333", 1.0, 1.658}, // freight handlers
        {"9112", 1.0, 1.903}, // cleaners
        {"5322", 1.0, 1.903}, // home care aides
    };
}

std::vector<EmployerSpec> default_employers() {
    std::vector<EmployerSpec> employers;
    employers.reserve(40);
    static constexpr std::array<double, 5> sigmas = {0.7, 0.85, 1.0, 1.15, 1.3};
    for (int i = 1; i <= 40; ++i) {
        char id[8];
        std::snprintf(id, sizeof(id), "E%02d", i);
        employers.push_back({id, 1.0 / std::sqrt(static_cast<double>(i)),
                             sigmas[static_cast<std::size_t>((i - 1) % 5)]});
    }
    return employers;
}

std::vector<std::pair<std::string, int>> latent_risk_classes(
    std::span<const OccupationSpec> catalog, int n_classes) {
    std::vector<std::size_t> order(catalog.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (catalog[a].severity != catalog[b].severity) {
            return catalog[a].severity < catalog[b].severity;
        }
        return catalog[a].code < catalog[b].code;
    });
    std::vector<double> weights;
    weights.reserve(order.size());
    for (const std::size_t idx : order) {
        weights.push_back(catalog[idx].weight);
    }
    const auto classes = features::assign_weight_classes(weights, n_classes);
    std::vector<std::pair<std::string, int>> result;
    result.reserve(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        result.emplace_back(catalog[order[i]].code, classes[i]);
    }
    return result;
}

SimulatedOutcomes simulate_outcomes(std::span<const SimRow> rows, const glm::Scorer& scorer,
                                    std::uint64_t seed, YearMonth horizon) {
    SimulatedOutcomes out;
    out.labels.assign(rows.size(), 0);
    out.dropped.assign(rows.size(), 0);

    std::size_t i = 0;
    while (i < rows.size()) {
        const std::string& pid = rows[i].person_id;
        std::size_t end = i + 1;
        while (end < rows.size() && rows[end].person_id == pid) {
            ++end;
        }
        bool terminated = false;
        int prev_observed = -1;
        int prev2_observed = -1;
        for (std::size_t r = i; r < end; ++r) {
            if (terminated) {
                out.dropped[r] = 1;
                continue;
            }
            const int year = rows[r].year;
            Rng rng = Rng::stream(seed, kOutcomeStream, fnv1a(pid),
                                  static_cast<std::uint64_t>(year));
            const double p = scorer.probability(rows[r].x);
            if (rng.uniform() < p) {
                out.labels[r] = 1;
                out.events.push_back(make_outcome_event(rng, pid, year, prev_observed == year - 1,
                                                        prev2_observed == year - 2, horizon));
                terminated = true;
            } else {
                prev2_observed = prev_observed;
                prev_observed = year;
            }
        }
        i = end;
    }
    return out;
}

GenerateResult generate(const SynthConfig& config, const glm::CoefficientSet& coefficients) {
    config.validate();
    const glm::Scorer scorer(coefficients);
    const auto occupations = config.occupations.empty() ? default_occupations()
                                                        : config.occupations;
    const auto employers = config.employers.empty() ? default_employers() : config.employers;
    if (occupations.empty()) {
        throw InputError("synth: occupation catalog is empty");
    }
    if (employers.empty()) {
        throw InputError("synth: employer catalog is empty");
    }

    std::map<std::string, int> risk_class;
    for (const auto& [code, cls] : latent_risk_classes(occupations)) {
        risk_class[code] = cls;
    }

    std::vector<double> occupation_weights;
    for (const auto& occ : occupations) {
        occupation_weights.push_back(occ.weight);
    }
    std::vector<double> employer_weights;
    for (const auto& emp : employers) {
        employer_weights.push_back(emp.weight);
    }
    const auto occupation_cdf = cumulative_weights(occupation_weights);
    const auto employer_cdf = cumulative_weights(employer_weights);

    const YearMonth horizon = YearMonth::of(config.last_year + 3, 12);

    GenerateResult result;
    result.pension_data_through = horizon;
    Dataset& data = result.data;

    std::vector<PersonPlan> plans;
    plans.reserve(static_cast<std::size_t>(config.n_persons));

    for (long i = 0; i < config.n_persons; ++i) {
        Rng rng = Rng::stream(config.seed, kPersonStream, static_cast<std::uint64_t>(i));
        PersonPlan plan;
        plan.id = format_person_id(i);
        plan.gender = rng.bernoulli(config.female_share) ? Gender::female : Gender::male;
        const int start_age = std::clamp(
            static_cast<int>(std::lround(config.age_mean + config.age_sd * rng.normal())),
            config.age_min, config.age_max);
        plan.occupation = weighted_pick(rng, occupation_cdf);
        plan.employer = weighted_pick(rng, employer_cdf);
        plan.oa_year = 63 + static_cast<int>(rng.below(6)); // completed with birth year below

        plan.panel_start = config.first_year;
        if (config.first_year < config.last_year && !rng.bernoulli(config.full_panel_share)) {
            plan.panel_start =
                static_cast<int>(rng.between(config.first_year, config.last_year));
        }
        plan.panel_end = config.last_year;
        for (int year = plan.panel_start + 1; year <= config.last_year; ++year) {
            if (rng.bernoulli(config.yearly_exit_rate)) {
                plan.panel_end = year - 1;
                break;
            }
        }
        plan.birth_year = plan.panel_start - start_age;
        plan.oa_year += plan.birth_year;

        data.persons.push_back({plan.id, plan.gender, plan.birth_year});
        for (int year = plan.panel_start; year <= plan.panel_end; ++year) {
            data.employment.push_back({plan.id, year, employers[plan.employer].id,
                                       occupations[plan.occupation].code, plan.oa_year});
        }

        // Prior disability-pension history: a fixed-term benefit that ended
        // at or before the panel start, exercising previous_dp flags and the
        // December-DP exclusion without touching any outcome window.
        if (rng.bernoulli(config.dp_history_rate)) {
            int gap = 0;
            while (gap < 9 && rng.uniform() < 0.62) {
                ++gap;
            }
            const int end_year = plan.panel_start - gap;
            const int end_month = static_cast<int>(rng.between(1, 12));
            const int duration = static_cast<int>(rng.between(3, 18));
            const int end_index = end_year * 12 + (end_month - 1);
            const int first_index = end_index - duration + 1;
            PensionEvent event;
            event.person_id = plan.id;
            const double kind_draw = rng.uniform();
            event.kind = kind_draw < 0.45
                             ? BenefitKind::dp_partial
                             : (kind_draw < 0.80 ? BenefitKind::rehab_benefit
                                                 : BenefitKind::rehab_allowance);
            event.first_month = YearMonth::of(first_index / 12, first_index % 12 + 1);
            event.last_month = YearMonth::of(end_index / 12, end_index % 12 + 1);
            data.pensions.push_back(std::move(event));
        }

        // Spells, including up to three pre-panel years of history.
        const double sigma = employers[plan.employer].length_sigma;
        const double severity = occupations[plan.occupation].severity;
        for (int year = plan.panel_start - 3; year <= plan.panel_end; ++year) {
            Rng spell_rng = Rng::stream(config.seed, kSpellStream, static_cast<std::uint64_t>(i),
                                        static_cast<std::uint64_t>(year - 1800));
            const int age = year - plan.birth_year;
            const double rate = std::clamp(config.base_spell_rate * severity *
                                               (1.0 + config.age_spell_slope * (age - 43)),
                                           0.02, 8.0);
            const int count = spell_rng.poisson(rate);
            if (count == 0) {
                continue;
            }
            std::vector<int> offsets(static_cast<std::size_t>(count));
            for (auto& offset : offsets) {
                offset = static_cast<int>(spell_rng.below(340));
            }
            std::sort(offsets.begin(), offsets.end());
            const Date jan1 = Date::from_ymd(year, 1, 1);
            const Date dec31 = Date::from_ymd(year, 12, 31);
            std::int32_t next_free = jan1.serial;
            for (int s = 0; s < count; ++s) {
                std::int32_t start_serial =
                    std::max(jan1.serial + offsets[static_cast<std::size_t>(s)], next_free);
                if (start_serial > dec31.serial) {
                    break; // year is full
                }
                const int length = spell_length(spell_rng, config.length_band_shares, sigma);
                const std::int32_t end_serial = start_serial + length - 1;
                next_free = end_serial + 2; // keep distinct merged spells apart

                const Date start = Date::from_serial(start_serial);
                const Date end = Date::from_serial(end_serial);
                bool split = length >= 2 && spell_rng.bernoulli(config.split_probability);
                // The cut must leave both pieces starting in the same year.
                const std::int32_t cut_max = std::min<std::int32_t>(end_serial - 1,
                                                                    dec31.serial - 1);
                if (split && cut_max >= start_serial) {
                    const std::int32_t cut =
                        start_serial +
                        static_cast<std::int32_t>(spell_rng.below(
                            static_cast<std::uint64_t>(cut_max - start_serial + 1)));
                    if (spell_rng.uniform() < 0.4) {
                        // Overlapping pieces.
                        const std::int32_t mid_end =
                            std::min<std::int32_t>(cut + 3, end_serial);
                        data.spells.push_back(
                            {plan.id, start, Date::from_serial(mid_end)});
                        data.spells.push_back({plan.id, Date::from_serial(cut), end});
                    } else {
                        // Back-to-back pieces.
                        data.spells.push_back({plan.id, start, Date::from_serial(cut)});
                        data.spells.push_back({plan.id, Date::from_serial(cut + 1), end});
                    }
                } else {
                    data.spells.push_back({plan.id, start, end});
                }
            }
        }
        plans.push_back(std::move(plan));
    }

    sort_dataset(data);

    // Year-ordered outcome simulation through the real pipeline. A positive
    // draw ends the person's panel, so every emitted row keeps an
    // independent Bernoulli label and the features seen here are exactly the
    // features a re-ingest of the emitted files reproduces.
    ingest::IngestOptions options;
    options.pension_data_through = horizon;
    std::map<std::string, int> terminated_after;
    std::map<std::string, std::pair<int, int>> observed_years; // pid -> (prev, prev2)
    std::vector<PensionEvent> outcome_events;

    std::vector<EmploymentRecord> active_employment = data.employment;
    Dataset working;
    working.persons = data.persons;
    working.spells = data.spells;
    working.pensions = data.pensions;
    const auto merged_all = ingest::merge_all_spells(data.spells);

    for (int year = config.first_year; year <= config.last_year; ++year) {
        working.employment = active_employment;
        const auto observations =
            ingest::assemble_observations(working, merged_all, year, options);
        if (observations.empty()) {
            continue;
        }
        Dataset year_slice;
        year_slice.employment.reserve(active_employment.size());
        for (const auto& record : active_employment) {
            if (record.year == year) {
                year_slice.employment.push_back(record);
            }
        }
        const auto gini_map = features::build_gini_map(year_slice, merged_all);

        for (const auto& obs : observations) {
            ++result.observation_rows;
            const auto cls_it = risk_class.find(obs.occupation_code);
            const int cls = cls_it != risk_class.end() ? cls_it->second : 5;
            const auto x = features::build_feature_vector(
                obs, cls, gini_map.value_for(obs.employer_id, year));

            Rng rng = Rng::stream(config.seed, kOutcomeStream, fnv1a(obs.person_id),
                                  static_cast<std::uint64_t>(year));
            const double p = scorer.probability(x);
            auto& observed = observed_years
                                 .try_emplace(obs.person_id, std::make_pair(-1, -1))
                                 .first->second;
            if (rng.uniform() < p) {
                ++result.positive_outcomes;
                outcome_events.push_back(make_outcome_event(rng, obs.person_id, year,
                                                            observed.first == year - 1,
                                                            observed.second == year - 2,
                                                            horizon));
                terminated_after[obs.person_id] = year;
            } else {
                observed.second = observed.first;
                observed.first = year;
            }
        }

        if (!terminated_after.empty()) {
            std::erase_if(active_employment, [&](const EmploymentRecord& record) {
                const auto it = terminated_after.find(record.person_id);
                return it != terminated_after.end() && record.year > it->second;
            });
        }
    }

    data.employment = std::move(active_employment);
    if (!terminated_after.empty()) {
        std::erase_if(data.spells, [&](const RawSpell& spell) {
            const auto it = terminated_after.find(spell.person_id);
            return it != terminated_after.end() && spell.start.year > it->second;
        });
    }

    for (auto& event : outcome_events) {
        data.pensions.push_back(std::move(event));
    }
    // Old-age pension events for persons retiring inside the data window;
    // ignored by the model but present in real extracts.
    for (const auto& plan : plans) {
        if (plan.oa_year > config.last_year || terminated_after.contains(plan.id)) {
            continue;
        }
        PensionEvent event;
        event.person_id = plan.id;
        event.kind = BenefitKind::oa;
        event.first_month = YearMonth::of(plan.oa_year, 1);
        event.last_month = horizon;
        data.pensions.push_back(std::move(event));
    }
    sort_dataset(data);
    return result;
}

std::vector<std::filesystem::path> write_dataset(const Dataset& data,
                                                 const std::filesystem::path& directory) {
    std::filesystem::create_directories(directory);
    std::vector<std::filesystem::path> written;

    {
        const std::vector<std::string> header = {"person_id", "gender", "birth_year"};
        const auto path = directory / "persons.csv";
        CsvWriter writer(path, header);
        for (const auto& person : data.persons) {
            writer.write_row(std::array<std::string, 3>{person.person_id,
                                                        to_string(person.gender),
                                                        std::to_string(person.birth_year)});
        }
        written.push_back(path);
    }
    {
        const std::vector<std::string> header = {"person_id", "start_date", "end_date"};
        const auto path = directory / "spells.csv";
        CsvWriter writer(path, header);
        for (const auto& spell : data.spells) {
            writer.write_row(std::array<std::string, 3>{spell.person_id, spell.start.to_string(),
                                                        spell.end.to_string()});
        }
        written.push_back(path);
    }
    {
        const std::vector<std::string> header = {"person_id", "year", "employer_id",
                                                 "occupation_code", "personal_oa_year"};
        const auto path = directory / "employment.csv";
        CsvWriter writer(path, header);
        for (const auto& record : data.employment) {
            writer.write_row(std::array<std::string, 5>{
                record.person_id, std::to_string(record.year), record.employer_id,
                record.occupation_code, std::to_string(record.personal_oa_year)});
        }
        written.push_back(path);
    }
    {
        const std::vector<std::string> header = {"person_id", "benefit_kind", "first_month",
                                                 "last_month"};
        const auto path = directory / "pensions.csv";
        CsvWriter writer(path, header);
        for (const auto& event : data.pensions) {
            writer.write_row(std::array<std::string, 4>{event.person_id, to_string(event.kind),
                                                        event.first_month.to_string(),
                                                        event.last_month.to_string()});
        }
        written.push_back(path);
    }
    return written;
}

} // namespace dprisk::synth
