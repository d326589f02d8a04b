#include <rcge/economy.hpp>

#include <cmath>
#include <sstream>

namespace rcge {

const char* skill_name(int skill) {
    switch (skill) {
        case 0: return "lo";
        case 1: return "me";
        case 2: return "hi";
    }
    return "?";
}

std::vector<std::vector<int>> EconomyTopology::regions_of_country() const {
    std::vector<std::vector<int>> out(countries);
    for (int r = 0; r < domestic_regions(); ++r)
        out[country_of_region[r]].push_back(r);
    return out;
}

Real EconomyTopology::country_households(int country) const {
    Real total = 0;
    for (int r = 0; r < domestic_regions(); ++r)
        if (country_of_region[r] == country) total += households[r];
    return total;
}

Real EconomyTopology::total_households() const {
    Real total = 0;
    for (Real h : households) total += h;
    return total;
}

std::string ValidationReport::summary() const {
    if (issues.empty()) return "valid";
    std::ostringstream os;
    os << issues.size() << " issue(s):";
    for (const auto& issue : issues) os << "\n  " << issue.field << ": " << issue.message;
    return os.str();
}

namespace {

void check(std::vector<ValidationIssue>& issues, bool ok, const std::string& field,
           const std::string& message) {
    if (!ok) issues.push_back({field, message});
}

bool in_unit_interval_open(Real x) { return x > 0.0 && x < 1.0; }

bool all_finite(const std::vector<Real>& v) {
    for (Real x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace

ValidationReport validate_economy(const EconomyTopology& topology,
                                  const ModelParameters& params,
                                  const StockState& stocks) {
    ValidationReport report;
    auto& issues = report.issues;

    const int R = topology.regions;
    const int S = topology.sectors;
    const int M = topology.countries;
    const int Rd = topology.domestic_regions();
    const int Sd = topology.domestic_sectors();

    check(issues, R >= 2, "topology.regions", "need at least one domestic region plus the rest of the world");
    check(issues, S >= 2, "topology.sectors", "need at least one domestic sector plus the foreign sector");
    check(issues, M >= 1, "topology.countries", "need at least one country");
    if (!report.passed()) return report;

    check(issues, static_cast<int>(topology.country_of_region.size()) == Rd,
          "topology.country_of_region", "one country per domestic region required");
    check(issues, static_cast<int>(topology.households.size()) == Rd,
          "topology.households", "one household weight per domestic region required");
    check(issues, topology.trade_cost.size() == static_cast<std::size_t>(S) * R * R,
          "topology.trade_costs", "dense sectors x regions x regions table required");
    if (!report.passed()) return report;

    for (int r = 0; r < Rd; ++r) {
        const int m = topology.country_of_region[r];
        check(issues, m >= 0 && m < M, "topology.country_of_region",
              "region " + std::to_string(r) + " maps to unknown country");
        const Real h = topology.households[r];
        check(issues, h >= 1.0 && std::floor(h) == h, "topology.households",
              "households must be a positive integer (region " + std::to_string(r) + ")");
    }
    for (int m = 0; m < M; ++m)
        check(issues, topology.country_households(m) > 0, "topology.countries",
              "country " + std::to_string(m) + " has no regions");

    for (int s = 0; s < S; ++s)
        for (int r = 0; r < R; ++r)
            for (int q = 0; q < R; ++q) {
                const Real t = topology.tau(s, r, q);
                if (!(t >= 1.0) || !std::isfinite(t)) {
                    issues.push_back({"topology.trade_costs",
                                      "trade cost below 1 at (s=" + std::to_string(s) + ",r=" +
                                          std::to_string(r) + ",q=" + std::to_string(q) + ")"});
                    goto tau_done;
                }
            }
tau_done:

    check(issues, in_unit_interval_open(params.goods_curvature), "parameters.goods_curvature",
          "curvature outside (0,1)");
    check(issues, in_unit_interval_open(params.durables_curvature), "parameters.durables_curvature",
          "curvature outside (0,1)");
    check(issues, in_unit_interval_open(params.labour_curvature), "parameters.labour_curvature",
          "curvature outside (0,1)");
    check(issues, params.leisure_curvature > 0, "parameters.leisure_curvature", "must be positive");
    check(issues, in_unit_interval_open(params.rnd_supply_elasticity),
          "parameters.rnd_supply_elasticity", "curvature outside (0,1)");
    check(issues, in_unit_interval_open(params.saving_rate), "parameters.saving_rate",
          "saving rate outside (0,1)");
    check(issues, params.innovation_weight > 0 && params.innovation_weight < 1,
          "parameters.innovation_weight", "must lie in (0,1)");
    check(issues, params.entry_speed > 0 && params.entry_speed <= 1, "parameters.entry_speed",
          "must lie in (0,1]");
    check(issues, params.rnd_spillover_union >= 0 && params.rnd_spillover_union < 1,
          "parameters.rnd_spillover_union", "spill-over elasticity must lie in [0,1)");
    check(issues, params.rnd_spillover_national >= 0 && params.rnd_spillover_national < 1,
          "parameters.rnd_spillover_national", "spill-over elasticity must lie in [0,1)");
    check(issues, params.capital_depreciation >= 0 && params.capital_depreciation <= 1,
          "parameters.capital_depreciation", "rate outside [0,1]");
    check(issues, params.human_capital_depreciation >= 0 && params.human_capital_depreciation <= 1,
          "parameters.human_capital_depreciation", "rate outside [0,1]");
    check(issues, params.wage_adjust_scale >= 0, "parameters.wage_adjust_scale", "must be non-negative");
    check(issues, params.foreign_price == 1.0, "parameters.foreign_price",
          "foreign variety is the numeraire; its price must be 1");
    check(issues, params.foreign_return >= 0, "parameters.foreign_return", "must be non-negative");
    check(issues, params.foreign_expenditure_share >= 0 && params.foreign_expenditure_share <= 1,
          "parameters.foreign_expenditure_share", "share outside [0,1]");
    check(issues, params.phi_floor > 0 && params.phi_floor < 1, "parameters.phi_floor",
          "floor must lie in (0,1)");

    for (int e = 0; e < kSkills; ++e)
        check(issues, params.leisure_weight[e] > 0, "parameters.leisure_weights",
              "leisure weight must be positive");
    check(issues,
          params.skill_productivity[0] < params.skill_productivity[1] &&
              params.skill_productivity[1] < params.skill_productivity[2],
          "parameters.skill_productivity", "require gamma_lo < gamma_me < gamma_hi");
    check(issues, params.skill_productivity[0] > 0, "parameters.skill_productivity",
          "productivities must be positive");

    check(issues, static_cast<int>(params.sector_weight.size()) == S, "parameters.sector_weights",
          "one weight per sector (incl. foreign) required");
    for (Real b : params.sector_weight)
        check(issues, b > 0, "parameters.sector_weights", "sector weight must be positive");

    check(issues, static_cast<int>(params.capital_share.size()) == Sd, "parameters.capital_shares",
          "one capital share per domestic sector required");
    for (Real a : params.capital_share)
        check(issues, a > 0 && a <= 1, "parameters.capital_shares", "capital share outside (0,1]");
    check(issues, params.public_capital_elasticity >= 0, "parameters.public_capital_elasticity",
          "must be non-negative");

    check(issues, params.input_coefficient.size() == static_cast<std::size_t>(M) * Sd * S,
          "parameters.input_coefficients", "need countries x domestic sectors x sectors table");
    for (Real a : params.input_coefficient)
        check(issues, a >= 0, "parameters.input_coefficients", "coefficients must be non-negative");

    check(issues, params.fixed_cost_final.size() == static_cast<std::size_t>(Sd) * Rd,
          "parameters.fixed_costs_final", "need domestic sectors x regions table");
    for (Real f : params.fixed_cost_final)
        check(issues, f > 0, "parameters.fixed_costs_final",
              "fixed cost must be strictly positive (zero admits no finite firm count)");
    check(issues, static_cast<int>(params.fixed_cost_durable.size()) == Rd,
          "parameters.fixed_costs_durable", "one durable fixed cost per domestic region");
    for (Real f : params.fixed_cost_durable)
        check(issues, f >= 0, "parameters.fixed_costs_durable", "must be non-negative");

    check(issues, params.consumption_tax.size() == static_cast<std::size_t>(M) * S,
          "parameters.consumption_tax", "need countries x sectors table");
    for (Real t : params.consumption_tax)
        check(issues, t >= 0 && t <= 1, "parameters.consumption_tax", "rate outside [0,1]");
    check(issues, static_cast<int>(params.wage_tax.size()) == M, "parameters.wage_tax",
          "one rate per country");
    for (Real t : params.wage_tax)
        check(issues, t >= 0 && t < 1, "parameters.wage_tax", "rate outside [0,1)");
    check(issues, static_cast<int>(params.profit_tax.size()) == M, "parameters.profit_tax",
          "one rate per country");
    for (Real t : params.profit_tax)
        check(issues, t >= 0 && t <= 1, "parameters.profit_tax", "rate outside [0,1]");

    check(issues, static_cast<int>(params.government_purchases.size()) == M,
          "parameters.government_purchases", "one level per country");
    check(issues, static_cast<int>(params.government_investment_share.size()) == M,
          "parameters.government_investment_share", "one share per country");
    for (Real g : params.government_investment_share)
        check(issues, g >= 0 && g <= 1, "parameters.government_investment_share",
              "share outside [0,1]");
    check(issues, static_cast<int>(params.household_transfers.size()) == M,
          "parameters.household_transfers", "one level per country");

    check(issues, params.subsidy_final.size() == static_cast<std::size_t>(Sd) * Rd,
          "parameters.subsidies.final", "need domestic sectors x regions table");
    check(issues, static_cast<int>(params.subsidy_durable.size()) == Rd,
          "parameters.subsidies.durable", "one envelope per domestic region");
    check(issues, static_cast<int>(params.subsidy_rnd.size()) == M, "parameters.subsidies.rnd_rate",
          "one rate per country");
    check(issues, params.education_time.size() == static_cast<std::size_t>(kSkills) * Rd,
          "parameters.education_time", "need skills x domestic regions table");
    for (Real lam : params.education_time)
        check(issues, lam >= 0, "parameters.education_time", "must be non-negative");

    // Stocks
    check(issues, static_cast<int>(stocks.capital.size()) == Rd, "stocks.capital_per_firm",
          "one value per domestic region");
    check(issues, static_cast<int>(stocks.capital_carry.size()) == Rd, "stocks.capital_carry",
          "one value per domestic region");
    check(issues, static_cast<int>(stocks.public_capital.size()) == Rd, "stocks.public_capital",
          "one value per domestic region");
    check(issues, stocks.human_capital.size() == static_cast<std::size_t>(kSkills) * Rd,
          "stocks.human_capital", "need skills x domestic regions table");
    check(issues, stocks.final_firms.size() == static_cast<std::size_t>(S) * R,
          "stocks.final_firms", "need full sectors x regions grid");
    check(issues, static_cast<int>(stocks.durable_firms.size()) == Rd, "stocks.durable_firms",
          "one count per domestic region");
    check(issues, static_cast<int>(stocks.designs.size()) == M, "stocks.designs",
          "one stock per country");
    check(issues, stocks.equity.size() == static_cast<std::size_t>(Rd) * Rd, "stocks.equity",
          "need holder-region x firm-region table");
    check(issues, stocks.bonds.size() == static_cast<std::size_t>(Rd) * M, "stocks.bonds",
          "need holder-region x country table");
    check(issues, static_cast<int>(stocks.foreign_bonds.size()) == Rd, "stocks.foreign_bonds",
          "one position per domestic region");
    if (!report.passed()) return report;

    for (Real k : stocks.capital) check(issues, k >= 0, "stocks.capital_per_firm", "stock negative");
    for (Real k : stocks.capital_carry) check(issues, k >= 0, "stocks.capital_carry", "stock negative");
    for (Real k : stocks.public_capital)
        check(issues, k > 0, "stocks.public_capital", "public capital must be positive");
    for (Real b : stocks.human_capital)
        check(issues, b > 0, "stocks.human_capital", "human capital must be positive");
    for (Real j : stocks.designs) check(issues, j > 0, "stocks.designs", "design stock must be positive");
    for (int r = 0; r < Rd; ++r)
        check(issues, stocks.durable_firms[r] > 0, "stocks.durable_firms",
              "every domestic region needs durable-goods firms (region " + std::to_string(r) + ")");

    // Foreign sector pattern: the foreign variety exists only in the
    // rest-of-world cell.
    for (int r = 0; r < Rd; ++r)
        check(issues, stocks.firms(topology.foreign_sector(), r, R) == 0.0, "stocks.final_firms",
              "foreign sector must have no firms in domestic regions");
    for (int s = 0; s < Sd; ++s)
        check(issues, stocks.firms(s, topology.rest_of_world(), R) == 0.0, "stocks.final_firms",
              "domestic sectors must have no firms in the rest of the world");
    check(issues, stocks.firms(topology.foreign_sector(), topology.rest_of_world(), R) == 1.0,
          "stocks.final_firms", "the rest of the world carries exactly one foreign firm");
    for (int s = 0; s < Sd; ++s)
        for (int r = 0; r < Rd; ++r)
            check(issues, stocks.firms(s, r, R) > 0, "stocks.final_firms",
                  "domestic firm counts must be positive");

    for (Real b : stocks.equity) check(issues, b >= 0, "stocks.equity", "position negative");
    for (int r = 0; r < Rd; ++r) {
        Real issued = 0;
        for (int q = 0; q < Rd; ++q)
            issued += topology.households[q] * stocks.equity[static_cast<std::size_t>(q) * Rd + r];
        check(issues, issued > 0, "stocks.equity",
              "region " + std::to_string(r) + " durable equity has no holders");
    }

    check(issues, all_finite(topology.trade_cost) && all_finite(stocks.human_capital) &&
                      all_finite(stocks.final_firms) && all_finite(params.sector_weight),
          "economy", "non-finite value present");

    if (!stocks.prev_wage.empty())
        check(issues, stocks.prev_wage.size() == static_cast<std::size_t>(kSkills) * Rd,
              "stocks.prev_wages", "need skills x domestic regions table when present");
    if (!stocks.prev_price_index.empty())
        check(issues, static_cast<int>(stocks.prev_price_index.size()) == Rd,
              "stocks.prev_price_index", "one value per domestic region when present");

    return report;
}

}  // namespace rcge
