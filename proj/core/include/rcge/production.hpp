#pragma once

#include <span>

#include <rcge/economy.hpp>

namespace rcge {

/// CES price indices facing a firm in one region: intermediate inputs per
/// source sector, the durable-goods bundle, and the local labour bundle.
struct FactorPriceIndices {
    std::vector<Real> intermediates;  // P^u, one per sector
    Real durables = 0.0;              // P^z
    Real labour = 0.0;                // W
};

/// Efficiency units entering the labour aggregate: gamma_e^{1/sigma} * b.
Real effective_labour_units(Real human_capital, Real skill_productivity, Real labour_curvature);

/// P^u = (sum_q N_{u,q} (tau_{u,q,r} p_{u,q})^{t/(t-1)})^{(t-1)/t} for every u,
/// P^z = A^{(rho-1)/rho} p^z (durables face no internal trade cost),
/// W over the region's household varieties and skills.
FactorPriceIndices factor_price_indices(const EconomyTopology& topology,
                                        const ModelParameters& params,
                                        std::span<const Real> trade_cost,
                                        std::span<const Real> goods_price,
                                        std::span<const Real> firm_count, Real durable_price,
                                        Real durable_firms, std::span<const Real> wages,
                                        std::span<const Real> human_capital, Real household_count,
                                        int region);

/// Labour-bundle price index alone (skills x households of one region).
Real labour_price_index(const ModelParameters& params, std::span<const Real> wages,
                        std::span<const Real> human_capital, Real household_count);

/// P^y = KG^{-alpha_G} (P^z/alpha)^alpha (W/(1-alpha))^{1-alpha}.
Real value_added_price(Real durable_index, Real labour_index, Real public_capital,
                       Real capital_share, Real public_capital_elasticity);

struct MarkupPrice {
    Real marginal_cost = 0.0;
    Real price = 0.0;
};

/// MC = P^y + sum_u a_s^u P^u; p = MC/theta.
MarkupPrice marginal_cost_and_price(Real value_added_price, std::span<const Real> input_coefficients,
                                    std::span<const Real> input_price_indices, Real goods_curvature);

/// Per-variety factor demands of a firm, given the matching aggregate.
Real intermediate_variety_demand(Real delivered_price, Real input_index, Real input_aggregate,
                                 Real goods_curvature);
Real durable_variety_demand(Real durable_price, Real durable_index, Real durable_aggregate,
                            Real durables_curvature);
Real labour_variety_demand(Real wage, Real efficiency_units, Real labour_index,
                           Real labour_aggregate, Real labour_curvature);

/// Cost-minimising Cobb-Douglas factor aggregates for gross value added
/// (net output plus the value-added fixed cost).
struct FactorAggregates {
    Real durables = 0.0;  // Z
    Real labour = 0.0;    // L
};
FactorAggregates factor_aggregates(Real gross_value_added, Real value_added_price,
                                   Real durable_index, Real labour_index, Real capital_share);

/// Leontief output: the minimum of value added and the input-limited levels.
Real leontief_output(Real value_added, std::span<const Real> input_limited_output);

/// National R&D sector at a candidate design price: supply of new designs,
/// the labour it hires, and its wage index. Zero profit holds by construction:
/// (P_J + subsidies) * dJ = W_RD * L_RD.
struct RndBalance {
    Real new_designs = 0.0;      // dJ_m
    Real labour_aggregate = 0.0; // L_RD,m
    Real wage_index = 0.0;       // W_RD,m
    Real wage_bill = 0.0;
};
RndBalance rd_balance(Real union_designs, Real national_designs, Real design_price,
                      Real subsidy_per_design, Real wage_index, const ModelParameters& params);

/// R&D wage index over the hi-skill varieties of one country's regions.
Real rnd_wage_index(const ModelParameters& params, std::span<const Real> hi_wages,
                    std::span<const Real> hi_human_capital, std::span<const Real> household_count);

/// phi_r = (A_r/sum A)^nu (HC_r/sum HC)^{1-nu}.
/// Throws std::domain_error when a region has no firms or no employed skilled
/// labour (the solver floors phi instead, reporting the event).
Real innovation_probability(Real own_firms, Real total_firms, Real own_human_capital,
                            Real total_human_capital, Real innovation_weight);

struct DurablePricing {
    Real price = 0.0;            // p^z
    Real expected_profit = 0.0;  // phi * [p^z z - r^k P^c K - P_J - FC + Sub]
};

/// Markup pricing over the rental cost of capital and the expected profit of
/// one durable-goods firm with z = K.
DurablePricing durable_pricing_profit(Real rental_rate, Real consumer_price, Real design_price,
                                      Real fixed_cost, Real subsidy, Real output,
                                      Real success_probability, Real durables_curvature);

/// Demand of a durable-goods firm for one final-goods variety, spreading the
/// composite quantity over sources exactly like household consumption.
Real capital_goods_demand(Real delivered_price, Real sector_weight, Real price_index,
                          Real composite_quantity, Real goods_curvature);

struct InvestmentFlow {
    Real investment = 0.0;  // I = (K'-K) + delta_K K
    Real new_assets = 0.0;  // P^c * I
};
InvestmentFlow investment_step(Real capital, Real capital_next, Real capital_depreciation,
                               Real consumer_price);

}  // namespace rcge
