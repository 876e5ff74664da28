#include "dprisk/io.hpp"

#include "dprisk/csv.hpp"
#include "dprisk/errors.hpp"

#include <array>
#include <cstdio>

namespace dprisk::io {

std::string format_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.12g", value);
    return buffer;
}

void save_risk_map(const features::OccupationRiskMap& map, const std::filesystem::path& path) {
    const std::vector<std::string> header = {"occupation_code", "observed_rate", "risk_class"};
    CsvWriter writer(path, header);
    for (const auto& [code, entry] : map.entries) {
        writer.write_row(std::array<std::string, 3>{code, format_double(entry.observed_rate),
                                                    std::to_string(entry.risk_class)});
    }
}

features::OccupationRiskMap load_risk_map(const std::filesystem::path& path) {
    const std::vector<std::string> header = {"occupation_code", "observed_rate", "risk_class"};
    CsvReader reader(path, header);
    features::OccupationRiskMap map;
    std::vector<std::string> fields;
    int max_class = 1;
    while (reader.next(fields)) {
        features::OccupationRiskMap::Entry entry;
        entry.observed_rate = parse_double_field(reader, 1, fields[1]);
        entry.risk_class = parse_int_field(reader, 2, fields[2]);
        if (entry.risk_class < 1) {
            throw SchemaError(reader.context(2) + ": risk_class must be >= 1");
        }
        max_class = std::max(max_class, entry.risk_class);
        if (!map.entries.emplace(fields[0], entry).second) {
            throw SchemaError(reader.context(0) + ": duplicate occupation_code '" + fields[0] +
                              "'");
        }
    }
    map.n_classes = std::max(map.n_classes, max_class);
    return map;
}

void save_gini_map(const features::EmployerGiniMap& map, const std::filesystem::path& path) {
    const std::vector<std::string> header = {"employer_id", "year", "gini"};
    CsvWriter writer(path, header);
    for (const auto& [key, value] : map.values) {
        writer.write_row(std::array<std::string, 3>{key.first, std::to_string(key.second),
                                                    format_double(value)});
    }
}

features::EmployerGiniMap load_gini_map(const std::filesystem::path& path) {
    const std::vector<std::string> header = {"employer_id", "year", "gini"};
    CsvReader reader(path, header);
    features::EmployerGiniMap map;
    std::vector<std::string> fields;
    while (reader.next(fields)) {
        const int year = parse_int_field(reader, 1, fields[1]);
        const double value = parse_double_field(reader, 2, fields[2]);
        if (!map.values.emplace(std::make_pair(fields[0], year), value).second) {
            throw SchemaError(reader.context() + ": duplicate (employer_id, year)");
        }
    }
    return map;
}

void save_scored(std::span<const analytics::ScoredRow> rows, const std::filesystem::path& path) {
    const std::vector<std::string> header = {"person_id", "year", "probability",
                                             "top_decile_flag"};
    CsvWriter writer(path, header);
    for (const auto& row : rows) {
        writer.write_row(std::array<std::string, 4>{row.person_id, std::to_string(row.year),
                                                    format_double(row.probability),
                                                    row.top_decile ? "1" : "0"});
    }
}

void save_risk_table(const analytics::RiskTable& table, const std::filesystem::path& path) {
    const std::vector<std::string> header = {"occupation_code", "age_band", "n", "mean_risk",
                                             "expected_dps"};
    CsvWriter writer(path, header);
    for (const auto& row : table.rows) {
        writer.write_row(std::array<std::string, 5>{
            row.occupation_code, row.age_band, std::to_string(row.n_employees),
            row.suppressed ? std::string() : format_double(row.mean_predicted_risk),
            row.suppressed ? std::string() : format_double(row.expected_dps)});
    }
}

void save_critical_durations(std::span<const analytics::CriticalDurationResult> results,
                             const std::filesystem::path& path) {
    const std::vector<std::string> header = {"occupation_code", "eligible_n",
                                             "threshold_days",  "objective",
                                             "crossing_count",  "crossing_highest_risk_count"};
    CsvWriter writer(path, header);
    for (const auto& result : results) {
        writer.write_row(std::array<std::string, 6>{
            result.occupation_code, std::to_string(result.eligible_n),
            std::to_string(result.threshold_days), format_double(result.objective_value),
            std::to_string(result.crossing_count),
            std::to_string(result.crossing_highest_risk_count)});
    }
}

void save_scenario_report(std::span<const analytics::ScenarioResult> results,
                          const std::filesystem::path& path) {
    const std::vector<std::string> header = {"band",
                                             "reduction",
                                             "relative_dp_risk_change",
                                             "delta_expected_dps",
                                             "delta_direct_sa_cost",
                                             "delta_pension_payments"};
    CsvWriter writer(path, header);
    for (const auto& result : results) {
        writer.write_row(std::array<std::string, 6>{
            result.band_label, format_double(result.reduction),
            format_double(result.relative_dp_risk_change),
            format_double(result.delta_expected_dps),
            format_double(result.delta_direct_sa_cost),
            format_double(result.delta_pension_payments)});
    }
}

void save_observations(std::span<const PersonYearObservation> observations,
                       const std::filesystem::path& path) {
    const std::vector<std::string> header = {
        "person_id",         "year",          "age",
        "gender",            "occupation_code", "employer_id",
        "n_spells",          "annual_sa_days",  "longest_spell_days",
        "prior_60plus_flag", "years_since_60plus", "previous_dp_flag",
        "years_since_dp",    "oa_fraction",     "outcome"};
    CsvWriter writer(path, header);
    for (const auto& obs : observations) {
        writer.write_row(std::array<std::string, 15>{
            obs.person_id, std::to_string(obs.year), std::to_string(obs.age),
            to_string(obs.gender), obs.occupation_code, obs.employer_id,
            std::to_string(obs.spell_lengths.size()), std::to_string(obs.annual_sa_days()),
            std::to_string(obs.longest_spell_days), obs.prior_60plus_flag ? "1" : "0",
            std::to_string(obs.years_since_60plus), obs.previous_dp_flag ? "1" : "0",
            std::to_string(obs.years_since_dp), format_double(obs.oa_fraction),
            obs.outcome == Outcome::unknown ? "" : (obs.outcome == Outcome::yes ? "1" : "0")});
    }
}

void save_feature_table(std::span<const PersonYearObservation> observations,
                        const features::OccupationRiskMap& risk_map,
                        const features::EmployerGiniMap& gini_map,
                        const std::filesystem::path& path) {
    std::vector<std::string> header = {"person_id", "year"};
    for (const auto& name : features::kTermNames) {
        header.push_back(name);
    }
    CsvWriter writer(path, header);
    std::vector<std::string> row(header.size());
    for (const auto& obs : observations) {
        const auto x = features::build_feature_vector(obs, risk_map, gini_map);
        row[0] = obs.person_id;
        row[1] = std::to_string(obs.year);
        for (int j = 0; j < features::kTermCount; ++j) {
            row[static_cast<std::size_t>(j) + 2] = format_double(x[static_cast<std::size_t>(j)]);
        }
        writer.write_row(row);
    }
}

} // namespace dprisk::io
