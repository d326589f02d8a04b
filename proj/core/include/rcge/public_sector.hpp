#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <rcge/economy.hpp>

namespace rcge {

enum class InstrumentKind {
    RtdSubsidy,          // per-design EU subsidy to a country's R&D sector
    HumanCapital,        // extra education time for a (region, skill)
    TradeCostReduction,  // multiplies tau on a (sector, from, to) link
    PublicCapital,       // real addition to a region's public capital
    FinalGoodsSubsidy,   // EU envelope reducing final-goods fixed costs
    DurableGoodsSubsidy, // EU envelope reducing durable-goods fixed costs
    TechnicalAssistance, // pure increase in public consumption
};

const char* instrument_kind_name(InstrumentKind kind);

/// One timed policy instrument. `magnitude` is currency for subsidies and
/// transfers, a multiplier < 1 for trade costs, extra education time for
/// human capital, and real units for public capital. `funding` is the
/// accompanying EU transfer booked to TR_EU of `region` (demand side).
struct PolicyInstrument {
    InstrumentKind kind = InstrumentKind::TechnicalAssistance;
    int region = -1;   // target region (holder of TR_EU funding); -1 where n/a
    int country = -1;  // for RtdSubsidy
    int sector = -1;   // for TradeCostReduction / FinalGoodsSubsidy; -1 = all
    int skill = -1;    // for HumanCapital; -1 = all
    int from_region = -1;  // for TradeCostReduction; -1 = all sources
    int to_region = -1;    // for TradeCostReduction; -1 = all destinations
    Real magnitude = 0.0;
    Real funding = 0.0;
    int start = 1;  // first active period
    int end = 1;    // last active period (inclusive)
};

struct PolicyScenario {
    std::string name;
    int horizon = 0;  // T
    std::vector<PolicyInstrument> instruments;
};

struct PolicyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Scenario-adjusted exogenous inputs of one period.
struct PeriodPolicy {
    std::vector<Real> trade_cost;          // effective tau, dense copy
    std::vector<Real> education_time;      // effective Lambda[e][r]
    std::vector<Real> eu_transfer;         // TR_EU,q currency (excl. endogenous public-capital cost)
    std::vector<Real> public_capital_add;  // real units added to KG_r this period
    std::vector<Real> subsidy_rnd_eu;      // per-design rate per country
    std::vector<Real> subsidy_final_eu;    // envelope per [s][r]
    std::vector<Real> subsidy_durable_eu;  // envelope per region

    Real tau(int s, int from, int to, int regions) const {
        return trade_cost[(static_cast<std::size_t>(s) * regions + from) * regions + to];
    }
};

/// Baseline inputs with no instruments applied.
PeriodPolicy baseline_policy(const Economy& economy);

/// Applies every instrument whose window covers period t. Rejects instruments
/// that would push a trade cost below 1 or a stock negative.
PeriodPolicy apply_policy(const Economy& economy, const PolicyScenario& scenario, int period);

/// Checks targets and windows against the economy; returns problems found.
std::vector<std::string> validate_scenario(const Economy& economy, const PolicyScenario& scenario);

/// G_q = (H_q/H_m) G_m + TR_EU,q (caller keeps the two arguments in the same
/// units).
Real regional_budget(Real national_purchases, Real region_households, Real country_households,
                     Real eu_transfer);

/// Demand of the public sector of region q for one variety, spreading the
/// real purchase volume G_q with household preference weights.
Real gov_demand(Real delivered_price, Real sector_weight, Real price_index, Real real_purchases,
                Real goods_curvature);

struct TaxBase {
    Real consumption_tax_take = 0.0;  // sum over varieties of t_c * tau * p * quantity
    Real wage_bill = 0.0;             // pre-tax labour income of the country's households
    Real capital_income = 0.0;        // pre-tax capital income of the country's households
};

/// T_m = consumption tax take + t^w wage bill + t^pi capital income.
Real tax_revenue(const TaxBase& base, Real wage_tax, Real profit_tax);

struct DeficitInputs {
    Real government_purchases_value = 0.0;  // sum_q P^c_q G_q
    Real household_transfers = 0.0;         // TR_H,m
    Real eu_contribution = 0.0;             // TR_m,EU
    Real debt_service = 0.0;                // r^G B_G
    Real subsidies = 0.0;                   // Sub_m
    Real tax_revenue = 0.0;                 // T_m
    Real eu_transfers_received = 0.0;       // sum_q TR_EU,q
};

/// D_m = purchases + TR_H + TR_m,EU + r^G B_G + Sub_m - T_m - sum TR_EU,q.
Real deficit(const DeficitInputs& inputs);

/// TR_m,EU = (GDP_m / GDP) * CPF.
Real eu_contribution(Real country_gdp, Real union_gdp, Real cohesion_budget);

/// KG' = KG + GI - delta_K KG.
Real public_capital_step(Real public_capital, Real public_investment, Real capital_depreciation);

}  // namespace rcge
