#include <rcge/public_sector.hpp>

#include <cmath>

#include <rcge/ces.hpp>

namespace rcge {

const char* instrument_kind_name(InstrumentKind kind) {
    switch (kind) {
        case InstrumentKind::RtdSubsidy: return "rtd_subsidy";
        case InstrumentKind::HumanCapital: return "human_capital";
        case InstrumentKind::TradeCostReduction: return "trade_cost_reduction";
        case InstrumentKind::PublicCapital: return "public_capital";
        case InstrumentKind::FinalGoodsSubsidy: return "final_goods_subsidy";
        case InstrumentKind::DurableGoodsSubsidy: return "durable_goods_subsidy";
        case InstrumentKind::TechnicalAssistance: return "technical_assistance";
    }
    return "?";
}

PeriodPolicy baseline_policy(const Economy& economy) {
    const auto& topo = economy.topology;
    const int Rd = topo.domestic_regions();
    const int Sd = topo.domestic_sectors();
    PeriodPolicy p;
    p.trade_cost = topo.trade_cost;
    p.education_time = economy.params.education_time;
    p.eu_transfer.assign(Rd, 0.0);
    p.public_capital_add.assign(Rd, 0.0);
    p.subsidy_rnd_eu.assign(topo.countries, 0.0);
    p.subsidy_final_eu.assign(static_cast<std::size_t>(Sd) * Rd, 0.0);
    p.subsidy_durable_eu.assign(Rd, 0.0);
    return p;
}

namespace {

void apply_one(const Economy& economy, const PolicyInstrument& inst, PeriodPolicy& p) {
    const auto& topo = economy.topology;
    const int R = topo.regions;
    const int Rd = topo.domestic_regions();
    const int Sd = topo.domestic_sectors();

    auto need_region = [&](int q) {
        if (q < 0 || q >= Rd)
            throw PolicyError(std::string(instrument_kind_name(inst.kind)) +
                              ": target region out of range");
    };

    switch (inst.kind) {
        case InstrumentKind::RtdSubsidy: {
            if (inst.country < 0 || inst.country >= topo.countries)
                throw PolicyError("rtd_subsidy: target country out of range");
            if (inst.magnitude < 0) throw PolicyError("rtd_subsidy: negative subsidy");
            p.subsidy_rnd_eu[inst.country] += inst.magnitude;
            break;
        }
        case InstrumentKind::HumanCapital: {
            need_region(inst.region);
            if (inst.magnitude < 0) throw PolicyError("human_capital: negative education time");
            for (int e = 0; e < kSkills; ++e) {
                if (inst.skill >= 0 && e != inst.skill) continue;
                p.education_time[static_cast<std::size_t>(e) * Rd + inst.region] += inst.magnitude;
            }
            p.eu_transfer[inst.region] += inst.funding;
            break;
        }
        case InstrumentKind::TradeCostReduction: {
            if (!(inst.magnitude > 0))
                throw PolicyError("trade_cost_reduction: factor must be positive");
            for (int s = 0; s < topo.sectors; ++s) {
                if (inst.sector >= 0 && s != inst.sector) continue;
                for (int r = 0; r < R; ++r) {
                    if (inst.from_region >= 0 && r != inst.from_region) continue;
                    for (int q = 0; q < R; ++q) {
                        if (inst.to_region >= 0 && q != inst.to_region) continue;
                        Real& t = p.trade_cost[(static_cast<std::size_t>(s) * R + r) * R + q];
                        const Real next = t * inst.magnitude;
                        if (next < 1.0)
                            throw PolicyError("trade_cost_reduction: would push trade cost below 1 at (s=" +
                                              std::to_string(s) + ",r=" + std::to_string(r) + ",q=" +
                                              std::to_string(q) + ")");
                        t = next;
                    }
                }
            }
            if (inst.region >= 0) {
                need_region(inst.region);
                p.eu_transfer[inst.region] += inst.funding;
            }
            break;
        }
        case InstrumentKind::PublicCapital: {
            need_region(inst.region);
            if (economy.stocks.public_capital[inst.region] + inst.magnitude < 0)
                throw PolicyError("public_capital: would push the stock negative");
            p.public_capital_add[inst.region] += inst.magnitude;
            p.eu_transfer[inst.region] += inst.funding;
            break;
        }
        case InstrumentKind::FinalGoodsSubsidy: {
            need_region(inst.region);
            if (inst.magnitude < 0) throw PolicyError("final_goods_subsidy: negative envelope");
            for (int s = 0; s < Sd; ++s) {
                if (inst.sector >= 0 && s != inst.sector) continue;
                p.subsidy_final_eu[static_cast<std::size_t>(s) * Rd + inst.region] += inst.magnitude;
            }
            break;
        }
        case InstrumentKind::DurableGoodsSubsidy: {
            need_region(inst.region);
            if (inst.magnitude < 0) throw PolicyError("durable_goods_subsidy: negative envelope");
            p.subsidy_durable_eu[inst.region] += inst.magnitude;
            break;
        }
        case InstrumentKind::TechnicalAssistance: {
            need_region(inst.region);
            p.eu_transfer[inst.region] += inst.magnitude + inst.funding;
            break;
        }
    }
}

}  // namespace

PeriodPolicy apply_policy(const Economy& economy, const PolicyScenario& scenario, int period) {
    PeriodPolicy p = baseline_policy(economy);
    for (const auto& inst : scenario.instruments) {
        if (period < inst.start || period > inst.end) continue;
        apply_one(economy, inst, p);
    }
    return p;
}

std::vector<std::string> validate_scenario(const Economy& economy, const PolicyScenario& scenario) {
    std::vector<std::string> problems;
    if (scenario.horizon < 1) problems.push_back("horizon must be at least 1");
    int index = 0;
    for (const auto& inst : scenario.instruments) {
        const std::string tag = "instrument " + std::to_string(index) + " (" +
                                instrument_kind_name(inst.kind) + ")";
        if (inst.start < 1 || inst.end > scenario.horizon || inst.start > inst.end)
            problems.push_back(tag + ": window outside [1," + std::to_string(scenario.horizon) + "]");
        if (!std::isfinite(inst.magnitude) || !std::isfinite(inst.funding))
            problems.push_back(tag + ": non-finite magnitude");
        try {
            PeriodPolicy p = baseline_policy(economy);
            apply_one(economy, inst, p);
        } catch (const PolicyError& e) {
            problems.push_back(tag + ": " + e.what());
        }
        ++index;
    }
    return problems;
}

Real regional_budget(Real national_purchases, Real region_households, Real country_households,
                     Real eu_transfer) {
    return region_households / country_households * national_purchases + eu_transfer;
}

Real gov_demand(Real delivered_price, Real sector_weight, Real price_index, Real real_purchases,
                Real goods_curvature) {
    return ces_demand(delivered_price, sector_weight, price_index, price_index * real_purchases,
                      goods_curvature);
}

Real tax_revenue(const TaxBase& base, Real wage_tax, Real profit_tax) {
    return base.consumption_tax_take + wage_tax * base.wage_bill + profit_tax * base.capital_income;
}

Real deficit(const DeficitInputs& in) {
    return in.government_purchases_value + in.household_transfers + in.eu_contribution +
           in.debt_service + in.subsidies - in.tax_revenue - in.eu_transfers_received;
}

Real eu_contribution(Real country_gdp, Real union_gdp, Real cohesion_budget) {
    return country_gdp / union_gdp * cohesion_budget;
}

Real public_capital_step(Real public_capital, Real public_investment, Real capital_depreciation) {
    return public_capital + public_investment - capital_depreciation * public_capital;
}

}  // namespace rcge
