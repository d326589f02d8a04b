#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <rcge/dynamics.hpp>
#include <rcge/economy.hpp>
#include <rcge/public_sector.hpp>

namespace rcge {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InfeasibleCalibration : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LoadReport {
    std::vector<std::string> defaulted_keys;  // optional parameters filled with defaults
};

/// Reads a format_version 1 economy document; defaults for omitted optional
/// parameters are recorded in the report. Unknown keys are ParseErrors,
/// structural problems SchemaErrors.
Economy load_economy(const std::filesystem::path& path, LoadReport* report = nullptr);
Economy parse_economy(const std::string& text, LoadReport* report = nullptr);

/// Writes an economy document that load_economy reproduces exactly.
void save_economy(const Economy& economy, const std::filesystem::path& path);
std::string economy_to_json(const Economy& economy);

PolicyScenario load_scenario(const std::filesystem::path& path, const Economy& economy);
PolicyScenario parse_scenario(const std::string& text, const Economy& economy);
void save_scenario(const PolicyScenario& scenario, const Economy& economy,
                   const std::filesystem::path& path);

/// Observed base-year flows (values at delivered prices). Generated by the
/// engine from a solved benchmark and invertible back to the calibrated
/// parameters.
struct BaseYearFlows {
    std::vector<Real> prices;       // p[s][r], full grid
    std::vector<Real> wages;        // w[e][r]
    std::vector<Real> output;       // X[s][r] per firm
    std::vector<Real> consumption;  // household spending value[q][s][r] incl. taxes, all households
    std::vector<Real> intermediates;  // value[q][u][s]: sector-u firms of q buying input s
    std::vector<Real> labour_compensation;  // [e][q], all households
    std::vector<Real> rnd_wage_bill;        // per country
    std::vector<Real> durable_sales;        // A p^z z per region
    std::vector<Real> rentals;              // r^k a per region
    std::vector<Real> design_sales;         // P_J dJ per country
    std::vector<Real> investment_value;     // P^c IAgg per region
    std::vector<Real> government_value;     // P^c G per region
    std::vector<Real> adjustment_value;     // wage-adjustment purchases per region
    std::vector<Real> durable_fixed_value;  // A FC_v per region
    std::vector<Real> exports;              // per (s,r): N tau p c_F
    std::vector<Real> imports;              // per region, pre-tax value
    std::vector<Real> gdp;                  // per region
};

BaseYearFlows generate_base_year(const Economy& economy, const EquilibriumSolution& solution);

/// Reads the optional base_year_flows section of an economy document.
std::optional<BaseYearFlows> load_base_year_flows(const std::filesystem::path& path,
                                                  const Economy& economy);

/// Writes an economy document including its base-year flow table.
void save_economy_with_flows(const Economy& economy, const BaseYearFlows& flows,
                             const std::filesystem::path& path);

struct CalibrationReport {
    EquilibriumSolution benchmark;
    Real drift = 0.0;           // stock drift of the final iteration
    int iterations = 0;
    std::vector<std::string> notes;
};

struct CalibrationOptions {
    Real tol = 1e-12;        // stock drift tolerance
    int max_iter = 120;
    Real relax = 1.0;        // update damping for the calibrated items
    SolveOptions solver{.tol = 1e-12, .max_iter = 400};
    std::optional<std::array<Real, kSkills>> labour_supply_target;  // tunes leisure weights
};

/// Makes the current stocks a stationary point of the engine: fixed costs x
/// zero profit, the foreign expenditure level x trade balance, transfers x
/// balanced budgets, design stocks x design demand, capital x solved demand.
/// When flows are supplied, sector weights, input coefficients and fixed
/// costs are first inverted from them.
CalibrationReport calibrate(Economy& economy, const BaseYearFlows* flows = nullptr,
                            const CalibrationOptions& options = {});

/// Consistency checks on a flow table (output disposition, labour totals);
/// violations beyond 1e-6 relative raise InfeasibleCalibration.
void check_base_year_consistency(const Economy& economy, const BaseYearFlows& flows);

enum class ExportFormat { Csv, Json };

/// Writes regions/sectors/countries/diagnostics tables for a trajectory.
/// Deterministic byte output; values at 12 significant digits.
std::vector<std::filesystem::path> export_results(const Trajectory& trajectory,
                                                  const Economy& economy,
                                                  const std::filesystem::path& directory,
                                                  ExportFormat format);

}  // namespace rcge
