#include "dprisk/analytics.hpp"

#include "dprisk/errors.hpp"
#include "dprisk/rng.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>

namespace dprisk::analytics {

std::vector<ScoredRow> score_population(std::span<const PersonYearObservation> observations,
                                        const glm::Scorer& scorer,
                                        const features::OccupationRiskMap& risk_map,
                                        const features::EmployerGiniMap& gini_map) {
    std::vector<ScoredRow> rows;
    rows.reserve(observations.size());
    for (const auto& obs : observations) {
        const auto x = features::build_feature_vector(obs, risk_map, gini_map);
        rows.push_back({obs.person_id, obs.year, scorer.probability(x), false});
    }
    return rows;
}

void flag_highest_decile(std::span<ScoredRow> rows) {
    const std::size_t n = rows.size();
    if (n == 0) {
        return;
    }
    for (auto& row : rows) {
        row.top_decile = false;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (rows[a].probability != rows[b].probability) {
            return rows[a].probability > rows[b].probability;
        }
        if (rows[a].person_id != rows[b].person_id) {
            return rows[a].person_id < rows[b].person_id;
        }
        return rows[a].year < rows[b].year;
    });
    const std::size_t flagged = (n + 9) / 10; // ceil(n/10): share >= 10%
    for (std::size_t i = 0; i < flagged; ++i) {
        rows[order[i]].top_decile = true;
    }
}

std::vector<AgeBand> default_age_bands() {
    return {{"17+", 17, std::numeric_limits<int>::max()},
            {"55+", 55, std::numeric_limits<int>::max()}};
}

RiskTable risk_table(std::span<const PersonYearObservation> observations,
                     std::span<const ScoredRow> scored, std::span<const AgeBand> bands,
                     int suppression_threshold) {
    if (observations.size() != scored.size()) {
        throw InputError("risk_table: observations and scored rows differ in length");
    }
    struct Cell {
        long n = 0;
        double sum_p = 0.0;
    };
    std::map<std::string, std::vector<Cell>> cells; // occupation -> per band
    std::vector<Cell> totals(bands.size());
    for (std::size_t i = 0; i < observations.size(); ++i) {
        const auto& obs = observations[i];
        auto it = cells.find(obs.occupation_code);
        if (it == cells.end()) {
            it = cells.emplace(obs.occupation_code, std::vector<Cell>(bands.size())).first;
        }
        for (std::size_t b = 0; b < bands.size(); ++b) {
            if (obs.age >= bands[b].min_age && obs.age <= bands[b].max_age) {
                ++it->second[b].n;
                it->second[b].sum_p += scored[i].probability;
                ++totals[b].n;
                totals[b].sum_p += scored[i].probability;
            }
        }
    }

    RiskTable table;
    const auto emit = [&](const std::string& occupation, const std::vector<Cell>& row_cells,
                          bool is_total) {
        for (std::size_t b = 0; b < bands.size(); ++b) {
            RiskTableRow row;
            row.occupation_code = occupation;
            row.age_band = bands[b].label;
            row.n_employees = row_cells[b].n;
            row.suppressed = !is_total && row_cells[b].n < suppression_threshold;
            if (!row.suppressed && row_cells[b].n > 0) {
                row.expected_dps = row_cells[b].sum_p;
                row.mean_predicted_risk = row_cells[b].sum_p / static_cast<double>(row_cells[b].n);
            }
            table.rows.push_back(std::move(row));
        }
    };
    for (const auto& [occupation, row_cells] : cells) {
        emit(occupation, row_cells, false);
    }
    emit("Total", totals, true);
    return table;
}

bool critical_duration_eligible(const PersonYearObservation& obs) {
    return obs.age >= 45 && !obs.previous_dp_flag && obs.longest_spell_days < 60;
}

std::optional<CriticalDurationResult> critical_duration(std::span<const DurationEntry> entries,
                                                        const std::string& occupation_code,
                                                        std::string* status) {
    constexpr int kMaxThreshold = 365;
    constexpr int kCap = kMaxThreshold + 1;
    std::array<long, kCap + 1> count_all{};
    std::array<long, kCap + 1> count_flagged{};
    long flagged_total = 0;
    for (const auto& entry : entries) {
        const int capped = std::clamp(entry.annual_days, 0, kCap);
        ++count_all[static_cast<std::size_t>(capped)];
        if (entry.flagged) {
            ++count_flagged[static_cast<std::size_t>(capped)];
            ++flagged_total;
        }
    }
    if (flagged_total == 0) {
        if (status != nullptr) {
            *status = "no highest-risk employees among eligibles";
        }
        return std::nullopt;
    }

    int best_t = 0;
    double best_objective = 0.0;
    long best_crossing = 0;
    long best_flagged = 0;
    long crossing = 0;
    long crossing_flagged = 0;
    // Suffix counts scanned from t = 365 down to 1; the strict comparison on
    // the upward pass would need a second array, so collect candidates and
    // pick the smallest maximizer afterwards.
    std::vector<std::array<long, 2>> suffix(kCap + 1, {0, 0});
    for (int d = kCap; d >= 1; --d) {
        crossing += count_all[static_cast<std::size_t>(d)];
        crossing_flagged += count_flagged[static_cast<std::size_t>(d)];
        suffix[static_cast<std::size_t>(d)] = {crossing, crossing_flagged};
    }
    for (int t = 1; t <= kMaxThreshold; ++t) {
        const long n_cross = suffix[static_cast<std::size_t>(t)][0];
        const long f_cross = suffix[static_cast<std::size_t>(t)][1];
        if (n_cross == 0 || f_cross == 0) {
            continue;
        }
        const double share = static_cast<double>(f_cross) / static_cast<double>(n_cross);
        const double objective = static_cast<double>(f_cross) * share;
        if (objective > best_objective) {
            best_objective = objective;
            best_t = t;
            best_crossing = n_cross;
            best_flagged = f_cross;
        }
    }
    if (best_t == 0) {
        if (status != nullptr) {
            *status = "no highest-risk employee crosses any threshold";
        }
        return std::nullopt;
    }
    CriticalDurationResult result;
    result.occupation_code = occupation_code;
    result.eligible_n = static_cast<long>(entries.size());
    result.threshold_days = best_t;
    result.objective_value = best_objective;
    result.crossing_count = best_crossing;
    result.crossing_highest_risk_count = best_flagged;
    return result;
}

std::vector<CriticalDurationResult> critical_duration_by_occupation(
    std::span<const PersonYearObservation> observations, std::span<const ScoredRow> scored,
    std::vector<std::pair<std::string, std::string>>* skipped) {
    if (observations.size() != scored.size()) {
        throw InputError("critical_duration: observations and scored rows differ in length");
    }
    std::map<std::string, std::vector<DurationEntry>> groups;
    std::vector<DurationEntry> pooled;
    for (std::size_t i = 0; i < observations.size(); ++i) {
        const auto& obs = observations[i];
        if (!critical_duration_eligible(obs)) {
            continue;
        }
        const DurationEntry entry{obs.annual_sa_days(), scored[i].top_decile};
        groups[obs.occupation_code].push_back(entry);
        pooled.push_back(entry);
    }

    std::vector<CriticalDurationResult> results;
    for (const auto& [occupation, entries] : groups) {
        std::string status;
        if (auto result = critical_duration(entries, occupation, &status)) {
            results.push_back(std::move(*result));
        } else if (skipped != nullptr) {
            skipped->emplace_back(occupation, status);
        }
    }
    std::string status;
    if (auto total = critical_duration(pooled, "Total", &status)) {
        results.push_back(std::move(*total));
    } else if (skipped != nullptr) {
        skipped->emplace_back("Total", status);
    }
    return results;
}

ScenarioBand scenario_band_from_label(const std::string& label) {
    const auto parse_int = [&](std::string_view text) {
        int value = 0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc{} || ptr != text.data() + text.size() || value < 1) {
            throw InputError("invalid scenario band '" + label + "'");
        }
        return value;
    };
    ScenarioBand band;
    band.label = label;
    if (label == "all") {
        return band;
    }
    const auto dash = label.find('-');
    if (dash != std::string::npos) {
        band.min_days = parse_int(std::string_view(label).substr(0, dash));
        band.max_days = parse_int(std::string_view(label).substr(dash + 1));
        if (band.max_days < band.min_days) {
            throw InputError("invalid scenario band '" + label + "'");
        }
        return band;
    }
    if (!label.empty() && label.back() == '+') {
        band.min_days = parse_int(std::string_view(label).substr(0, label.size() - 1));
        return band;
    }
    throw InputError("invalid scenario band '" + label + "' (expected 'a-b', 'a+' or 'all')");
}

namespace {

struct YearSpell {
    std::size_t obs_index = SIZE_MAX; // owning observation, if any
    std::size_t employer = 0;         // index into employer id table
    int length = 0;
    bool candidate = false;
};

} // namespace

ScenarioResult run_scenario(const Dataset& data, int scenario_year, const ScenarioSpec& spec,
                            const glm::Scorer& scorer,
                            const features::OccupationRiskMap& risk_map,
                            const ingest::IngestOptions& options) {
    if (spec.reduction < 0.0 || spec.reduction > 1.0) {
        throw InputError("scenario reduction must be in [0, 1]");
    }
    if (spec.replications < 1) {
        throw InputError("scenario replications must be >= 1");
    }

    const auto merged = ingest::merge_all_spells(data.spells);
    auto observations = ingest::assemble_observations(data, merged, scenario_year, options);

    // Employment and birth-year lookups for the scenario year.
    std::map<std::string, std::pair<std::string, int>> employed; // person -> (employer, age)
    {
        std::map<std::string, int> birth_years;
        for (const auto& person : data.persons) {
            birth_years[person.person_id] = person.birth_year;
        }
        for (const auto& record : data.employment) {
            if (record.year != scenario_year) {
                continue;
            }
            const auto it = birth_years.find(record.person_id);
            const int age = it != birth_years.end() ? scenario_year - it->second : 0;
            employed[record.person_id] = {record.employer_id, age};
        }
    }

    std::map<std::string, std::size_t> observation_index;
    for (std::size_t i = 0; i < observations.size(); ++i) {
        observation_index[observations[i].person_id] = i;
    }

    // All scenario-year merged spells with an employer attribution; removal
    // candidates are those in the band and the age filter.
    std::vector<std::string> employer_ids;
    std::map<std::string, std::size_t> employer_index;
    std::vector<YearSpell> year_spells;
    std::vector<std::size_t> candidates;
    for (const auto& spell : merged) {
        if (spell.initiation_year != scenario_year) {
            continue;
        }
        const auto it = employed.find(spell.person_id);
        if (it == employed.end()) {
            continue; // no principal employer that year: affects nothing scored
        }
        YearSpell ys;
        auto [employer_it, inserted] =
            employer_index.try_emplace(it->second.first, employer_ids.size());
        if (inserted) {
            employer_ids.push_back(it->second.first);
        }
        ys.employer = employer_it->second;
        ys.length = spell.length_days;
        const auto obs_it = observation_index.find(spell.person_id);
        if (obs_it != observation_index.end()) {
            ys.obs_index = obs_it->second;
        }
        const int age = it->second.second;
        ys.candidate = spell.length_days >= spec.band.min_days &&
                       spell.length_days <= spec.band.max_days && age >= spec.age_min &&
                       age <= spec.age_max;
        if (ys.candidate) {
            candidates.push_back(year_spells.size());
        }
        year_spells.push_back(ys);
    }

    const std::vector<int> risk_classes = [&] {
        std::vector<int> classes;
        classes.reserve(observations.size());
        for (const auto& obs : observations) {
            classes.push_back(risk_map.class_for(obs.occupation_code));
        }
        return classes;
    }();

    // Rescores the year with the given removal set; shared by the baseline
    // (nothing removed) and every replication so the arithmetic is identical.
    std::vector<char> removed(year_spells.size(), 0);
    std::vector<std::vector<int>> person_lengths(observations.size());
    std::vector<double> pool_gini(employer_ids.size(), 0.0);
    std::vector<std::vector<int>> pools(employer_ids.size());
    const auto rescore = [&]() {
        for (auto& lengths : person_lengths) {
            lengths.clear();
        }
        for (auto& pool : pools) {
            pool.clear();
        }
        for (std::size_t s = 0; s < year_spells.size(); ++s) {
            if (removed[s]) {
                continue;
            }
            pools[year_spells[s].employer].push_back(year_spells[s].length);
            if (year_spells[s].obs_index != SIZE_MAX) {
                person_lengths[year_spells[s].obs_index].push_back(year_spells[s].length);
            }
        }
        for (std::size_t e = 0; e < pools.size(); ++e) {
            pool_gini[e] = features::gini(pools[e]);
        }
        double total = 0.0;
        for (std::size_t i = 0; i < observations.size(); ++i) {
            PersonYearObservation& obs = observations[i];
            obs.spell_lengths = person_lengths[i];
            double employer_gini = 0.0;
            const auto it = employer_index.find(obs.employer_id);
            if (it != employer_index.end()) {
                employer_gini = pool_gini[it->second];
            }
            const auto x = features::build_feature_vector(obs, risk_classes[i], employer_gini);
            total += scorer.probability(x);
        }
        return total;
    };

    ScenarioResult result;
    result.band_label = spec.band.label;
    result.reduction = spec.reduction;
    result.baseline_expected_dps = rescore();

    if (candidates.empty()) {
        result.notice = "band contains no spells; deltas are zero";
        return result;
    }
    if (spec.reduction == 0.0) {
        return result; // exact zeros by definition
    }

    const double target = spec.reduction * static_cast<double>(candidates.size());
    const long whole = static_cast<long>(std::floor(target));
    const double fraction = target - static_cast<double>(whole);

    double sum_delta = 0.0;
    double sum_removed_days = 0.0;
    double sum_removed_count = 0.0;
    std::vector<std::size_t> pick = candidates;
    for (int rep = 0; rep < spec.replications; ++rep) {
        Rng rng = Rng::stream(spec.seed, 0x5ce0, static_cast<std::uint64_t>(rep));
        long remove_count = whole;
        if (fraction > 0.0 && rng.uniform() < fraction) {
            ++remove_count;
        }
        std::fill(removed.begin(), removed.end(), 0);
        pick = candidates;
        long removed_days = 0;
        for (long r = 0; r < remove_count; ++r) {
            const std::size_t limit = pick.size() - static_cast<std::size_t>(r);
            const std::size_t j = static_cast<std::size_t>(rng.below(limit));
            std::swap(pick[j], pick[limit - 1]);
            const std::size_t spell = pick[limit - 1];
            removed[spell] = 1;
            removed_days += year_spells[spell].length;
        }
        const double total = rescore();
        sum_delta += total - result.baseline_expected_dps;
        sum_removed_days += static_cast<double>(removed_days);
        sum_removed_count += static_cast<double>(remove_count);
    }

    const double reps = static_cast<double>(spec.replications);
    result.delta_expected_dps = sum_delta / reps;
    result.relative_dp_risk_change =
        result.baseline_expected_dps > 0.0 ? result.delta_expected_dps / result.baseline_expected_dps
                                           : 0.0;
    result.mean_removed_days = sum_removed_days / reps;
    result.mean_removed_spells = sum_removed_count / reps;
    result.delta_direct_sa_cost = -result.mean_removed_days * spec.cost_per_sa_day;
    result.delta_pension_payments = result.delta_expected_dps * spec.avg_employer_dp_cost;
    return result;
}

} // namespace dprisk::analytics
