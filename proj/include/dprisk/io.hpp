#pragma once

#include "dprisk/analytics.hpp"
#include "dprisk/features.hpp"
#include "dprisk/records.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace dprisk::io {

/// Shortest round-trippable decimal representation used across output CSVs.
std::string format_double(double value);

void save_risk_map(const features::OccupationRiskMap& map, const std::filesystem::path& path);
features::OccupationRiskMap load_risk_map(const std::filesystem::path& path);

void save_gini_map(const features::EmployerGiniMap& map, const std::filesystem::path& path);
features::EmployerGiniMap load_gini_map(const std::filesystem::path& path);

void save_scored(std::span<const analytics::ScoredRow> rows, const std::filesystem::path& path);

void save_risk_table(const analytics::RiskTable& table, const std::filesystem::path& path);

void save_critical_durations(std::span<const analytics::CriticalDurationResult> results,
                             const std::filesystem::path& path);

void save_scenario_report(std::span<const analytics::ScenarioResult> results,
                          const std::filesystem::path& path);

/// Derived observation table (one row per person-year) for inspection and
/// downstream tooling.
void save_observations(std::span<const PersonYearObservation> observations,
                       const std::filesystem::path& path);

/// The 30 model terms per observation, columns in canonical term order.
void save_feature_table(std::span<const PersonYearObservation> observations,
                        const features::OccupationRiskMap& risk_map,
                        const features::EmployerGiniMap& gini_map,
                        const std::filesystem::path& path);

} // namespace dprisk::io
