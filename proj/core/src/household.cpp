#include <rcge/household.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

#include <rcge/ces.hpp>

namespace rcge {

Real consumer_price_index(const EconomyTopology& topology, const ModelParameters& params,
                          std::span<const Real> trade_cost, std::span<const Real> goods_price,
                          std::span<const Real> firm_count, int region) {
    const int R = topology.regions;
    const int S = topology.sectors;
    const int country = topology.country_of_region[region];
    std::vector<VarietyTerm> terms;
    terms.reserve(static_cast<std::size_t>(S) * R);
    for (int s = 0; s < S; ++s)
        for (int r = 0; r < R; ++r) {
            const Real n = firm_count[static_cast<std::size_t>(s) * R + r];
            if (n == 0.0) continue;
            const Real tau = trade_cost[(static_cast<std::size_t>(s) * R + r) * R + region];
            const Real wedge = tau * (1.0 + params.consumption_tax_rate(country, s, S));
            terms.push_back({n, params.sector_weight[s],
                             wedge * goods_price[static_cast<std::size_t>(s) * R + r]});
        }
    return ces_price_index(terms, params.goods_curvature);
}

Real consumption_demand(Real delivered_price, Real sector_weight, Real price_index,
                        Real disposable_income, Real saving_rate, Real goods_curvature) {
    return ces_demand(delivered_price, sector_weight, price_index,
                      (1.0 - saving_rate) * disposable_income, goods_curvature);
}

Real capital_income(std::span<const Real> rental_rate, std::span<const Real> equity,
                    std::span<const Real> equity_issued, std::span<const Real> durable_profit,
                    std::span<const Real> bond_rate, std::span<const Real> bonds,
                    Real foreign_return, Real foreign_bonds, Real final_goods_profit_share) {
    Real ki = 0.0;
    for (std::size_t r = 0; r < equity.size(); ++r) {
        ki += rental_rate[r] * equity[r];
        if (equity[r] > 0.0) {
            if (equity_issued[r] <= 0.0)
                throw std::domain_error("capital_income: equity held in a firm with no issued assets");
            ki += equity[r] / equity_issued[r] * durable_profit[r];
        }
    }
    for (std::size_t m = 0; m < bonds.size(); ++m) ki += bond_rate[m] * bonds[m];
    ki += foreign_return * foreign_bonds;
    ki += final_goods_profit_share;
    return ki;
}

Real wage_adjustment_cost(std::span<const Real> wage, std::span<const Real> wage_change,
                          std::span<const Real> labour, Real wage_adjust_scale) {
    if (wage_adjust_scale == 0.0) return 0.0;
    Real cost = 0.0;
    for (std::size_t e = 0; e < wage.size(); ++e) {
        if (wage_change[e] == 0.0) continue;
        if (wage[e] == 0.0)
            throw std::domain_error("wage_adjustment_cost: zero wage with positive adjustment scale");
        cost += 0.5 * wage_adjust_scale * labour[e] * wage_change[e] * wage_change[e] / wage[e];
    }
    return cost;
}

Real disposable_income(std::span<const Real> wage, std::span<const Real> labour,
                       std::span<const Real> wage_change, Real wage_tax, Real profit_tax,
                       Real capital_income, Real transfer_per_household, Real wage_adjust_scale) {
    Real labour_income = 0.0;
    for (std::size_t e = 0; e < wage.size(); ++e) labour_income += wage[e] * labour[e];
    const Real gamma = wage_adjustment_cost(wage, wage_change, labour, wage_adjust_scale);
    return (1.0 - wage_tax) * labour_income - gamma + (1.0 - profit_tax) * capital_income +
           transfer_per_household;
}

Real wage_rule_markup(Real wage_inflation, Real labour_curvature, Real saving_rate, Real wage_tax,
                      Real wage_adjust_scale) {
    return labour_curvature * (1.0 - saving_rate) -
           wage_adjust_scale * (labour_curvature - 1.0) * wage_inflation / (1.0 - wage_tax);
}

Real wage_rule_residual(Real wage, Real labour, Real price_index, Real wage_inflation,
                        Real leisure_weight, Real leisure_curvature, Real labour_curvature,
                        Real saving_rate, Real wage_tax, Real wage_adjust_scale) {
    if (!(labour < 1.0) || labour < 0.0)
        throw std::domain_error("wage_rule_residual: labour outside [0,1)");
    const Real eta = wage_rule_markup(wage_inflation, labour_curvature, saving_rate, wage_tax,
                                      wage_adjust_scale);
    if (!(eta > 0.0)) throw std::domain_error("wage_rule_residual: singular markup (eta <= 0)");
    return leisure_weight * std::pow(1.0 - labour, -leisure_curvature) / eta -
           (1.0 - wage_tax) * wage / price_index;
}

Real human_capital_step(Real human_capital, Real education_time, Real depreciation) {
    return human_capital * (std::exp(education_time) - depreciation);
}

}  // namespace rcge
