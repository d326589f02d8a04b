#include <rcge/production.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <rcge/ces.hpp>

namespace rcge {

Real effective_labour_units(Real human_capital, Real skill_productivity, Real labour_curvature) {
    return std::pow(skill_productivity, 1.0 / labour_curvature) * human_capital;
}

Real labour_price_index(const ModelParameters& params, std::span<const Real> wages,
                        std::span<const Real> human_capital, Real household_count) {
    const Real sigma = params.labour_curvature;
    Real sum = 0.0;
    for (int e = 0; e < kSkills; ++e) {
        if (!(wages[e] > 0.0)) throw std::domain_error("labour_price_index: non-positive wage");
        const Real beff =
            effective_labour_units(human_capital[e], params.skill_productivity[e], sigma);
        sum += household_count * std::pow(beff, sigma / (1.0 - sigma)) *
               std::pow(wages[e], sigma / (sigma - 1.0));
    }
    return std::pow(sum, (sigma - 1.0) / sigma);
}

FactorPriceIndices factor_price_indices(const EconomyTopology& topology,
                                        const ModelParameters& params,
                                        std::span<const Real> trade_cost,
                                        std::span<const Real> goods_price,
                                        std::span<const Real> firm_count, Real durable_price,
                                        Real durable_firms, std::span<const Real> wages,
                                        std::span<const Real> human_capital, Real household_count,
                                        int region) {
    const int R = topology.regions;
    const int S = topology.sectors;
    const Real theta = params.goods_curvature;
    const Real rho = params.durables_curvature;

    FactorPriceIndices out;
    out.intermediates.assign(S, 0.0);
    for (int u = 0; u < S; ++u) {
        std::vector<VarietyTerm> terms;
        for (int q = 0; q < R; ++q) {
            const Real n = firm_count[static_cast<std::size_t>(u) * R + q];
            if (n == 0.0) continue;
            const Real tau = trade_cost[(static_cast<std::size_t>(u) * R + q) * R + region];
            terms.push_back({n, 1.0, tau * goods_price[static_cast<std::size_t>(u) * R + q]});
        }
        out.intermediates[u] = ces_price_index(terms, theta);
    }

    if (!(durable_price > 0.0) || !(durable_firms > 0.0))
        throw std::domain_error("factor_price_indices: durable market degenerate");
    out.durables = std::pow(durable_firms, (rho - 1.0) / rho) * durable_price;

    out.labour = labour_price_index(params, wages, human_capital, household_count);
    return out;
}

Real value_added_price(Real durable_index, Real labour_index, Real public_capital,
                       Real capital_share, Real public_capital_elasticity) {
    if (!(public_capital > 0.0) && public_capital_elasticity > 0.0)
        throw std::domain_error("value_added_price: zero public capital with positive elasticity");
    const Real kg = public_capital_elasticity == 0.0
                        ? 1.0
                        : std::pow(public_capital, -public_capital_elasticity);
    if (capital_share >= 1.0) return kg * durable_index;  // labour share vanishes
    return kg * std::pow(durable_index / capital_share, capital_share) *
           std::pow(labour_index / (1.0 - capital_share), 1.0 - capital_share);
}

MarkupPrice marginal_cost_and_price(Real value_added_price, std::span<const Real> input_coefficients,
                                    std::span<const Real> input_price_indices, Real goods_curvature) {
    Real mc = value_added_price;
    for (std::size_t u = 0; u < input_coefficients.size(); ++u)
        mc += input_coefficients[u] * input_price_indices[u];
    return {mc, mc / goods_curvature};
}

Real intermediate_variety_demand(Real delivered_price, Real input_index, Real input_aggregate,
                                 Real goods_curvature) {
    return ces_quantity_demand(delivered_price, input_index, input_aggregate, goods_curvature);
}

Real durable_variety_demand(Real durable_price, Real durable_index, Real durable_aggregate,
                            Real durables_curvature) {
    return ces_quantity_demand(durable_price, durable_index, durable_aggregate, durables_curvature);
}

Real labour_variety_demand(Real wage, Real efficiency_units, Real labour_index,
                           Real labour_aggregate, Real labour_curvature) {
    if (!(wage > 0.0) || !(labour_index > 0.0))
        throw std::domain_error("labour_variety_demand: non-positive price");
    return std::pow(wage / (std::pow(efficiency_units, labour_curvature) * labour_index),
                    1.0 / (labour_curvature - 1.0)) *
           labour_aggregate;
}

FactorAggregates factor_aggregates(Real gross_value_added, Real value_added_price,
                                   Real durable_index, Real labour_index, Real capital_share) {
    FactorAggregates f;
    const Real outlay = value_added_price * gross_value_added;
    f.durables = capital_share * outlay / durable_index;
    f.labour = (1.0 - capital_share) * outlay / labour_index;
    return f;
}

Real leontief_output(Real value_added, std::span<const Real> input_limited_output) {
    Real out = value_added;
    for (Real x : input_limited_output) out = std::min(out, x);
    return out;
}

RndBalance rd_balance(Real union_designs, Real national_designs, Real design_price,
                      Real subsidy_per_design, Real wage_index, const ModelParameters& params) {
    const Real omega = params.rnd_spillover_union;
    const Real zeta = params.rnd_spillover_national;
    const Real eps = params.rnd_supply_elasticity;
    if (!(wage_index > 0.0)) throw std::domain_error("rd_balance: non-positive wage index");
    if ((omega > 0.0 || zeta > 0.0) && (!(union_designs > 0.0) || !(national_designs > 0.0)))
        throw std::domain_error("rd_balance: design stocks must be positive with spill-overs");

    const Real productivity = std::pow(union_designs, omega) * std::pow(national_designs, zeta);
    const Real ratio = productivity * (design_price + subsidy_per_design) / wage_index;
    if (!(ratio > 0.0)) throw std::domain_error("rd_balance: non-positive design revenue");

    RndBalance b;
    b.wage_index = wage_index;
    b.new_designs = std::pow(ratio, eps / (1.0 - eps));
    // Technology dJ = (productivity * L)^eps; at zero profit the wage bill
    // exactly absorbs design revenue including subsidies.
    b.labour_aggregate = std::pow(b.new_designs, 1.0 / eps) / productivity;
    b.wage_bill = wage_index * b.labour_aggregate;
    return b;
}

Real rnd_wage_index(const ModelParameters& params, std::span<const Real> hi_wages,
                    std::span<const Real> hi_human_capital, std::span<const Real> household_count) {
    const Real sigma = params.labour_curvature;
    Real sum = 0.0;
    for (std::size_t i = 0; i < hi_wages.size(); ++i) {
        if (!(hi_wages[i] > 0.0)) throw std::domain_error("rnd_wage_index: non-positive wage");
        const Real beff = effective_labour_units(hi_human_capital[i],
                                                 params.skill_productivity[int(Skill::High)], sigma);
        sum += household_count[i] * std::pow(beff, sigma / (1.0 - sigma)) *
               std::pow(hi_wages[i], sigma / (sigma - 1.0));
    }
    return std::pow(sum, (sigma - 1.0) / sigma);
}

Real innovation_probability(Real own_firms, Real total_firms, Real own_human_capital,
                            Real total_human_capital, Real innovation_weight) {
    if (!(own_firms > 0.0) || !(own_human_capital > 0.0))
        throw std::domain_error("innovation_probability: degenerate region (no firms or skilled labour)");
    if (!(total_firms > 0.0) || !(total_human_capital > 0.0))
        throw std::domain_error("innovation_probability: degenerate country totals");
    return std::pow(own_firms / total_firms, innovation_weight) *
           std::pow(own_human_capital / total_human_capital, 1.0 - innovation_weight);
}

DurablePricing durable_pricing_profit(Real rental_rate, Real consumer_price, Real design_price,
                                      Real fixed_cost, Real subsidy, Real output,
                                      Real success_probability, Real durables_curvature) {
    DurablePricing d;
    const Real marginal_cost = rental_rate * consumer_price;
    d.price = marginal_cost / durables_curvature;
    d.expected_profit =
        success_probability * (d.price * output - marginal_cost * output - design_price -
                               fixed_cost + subsidy);
    return d;
}

Real capital_goods_demand(Real delivered_price, Real sector_weight, Real price_index,
                          Real composite_quantity, Real goods_curvature) {
    return ces_demand(delivered_price, sector_weight, price_index, price_index * composite_quantity,
                      goods_curvature);
}

InvestmentFlow investment_step(Real capital, Real capital_next, Real capital_depreciation,
                               Real consumer_price) {
    InvestmentFlow f;
    f.investment = (capital_next - capital) + capital_depreciation * capital;
    f.new_assets = consumer_price * f.investment;
    return f;
}

}  // namespace rcge
