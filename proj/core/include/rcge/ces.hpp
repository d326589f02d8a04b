#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

#include <rcge/economy.hpp>

namespace rcge {

/// One variety group inside a CES aggregate: `count` identical varieties with
/// preference weight `weight` sold at tax- and transport-inclusive price
/// `delivered_price`.
struct VarietyTerm {
    Real count = 1.0;
    Real weight = 1.0;
    Real delivered_price = 1.0;
};

/// P = ( sum_i n_i w_i^{1/(1-c)} p_i^{c/(c-1)} )^{(c-1)/c} with curvature c in (0,1).
inline Real ces_price_index(std::span<const VarietyTerm> terms, Real curvature) {
    Real sum = 0.0;
    const Real price_exp = curvature / (curvature - 1.0);
    const Real weight_exp = 1.0 / (1.0 - curvature);
    for (const auto& t : terms) {
        if (t.count == 0.0) continue;
        if (!(t.delivered_price > 0.0))
            throw std::domain_error("ces_price_index: non-positive delivered price");
        sum += t.count * std::pow(t.weight, weight_exp) * std::pow(t.delivered_price, price_exp);
    }
    if (!(sum > 0.0)) throw std::domain_error("ces_price_index: empty aggregate");
    return std::pow(sum, (curvature - 1.0) / curvature);
}

/// Expenditure-form demand for one variety:
/// x = (p/(w P))^{1/(c-1)} * E/P, so that sum n p x = E.
inline Real ces_demand(Real delivered_price, Real weight, Real price_index, Real expenditure,
                       Real curvature) {
    if (!(delivered_price > 0.0) || !(price_index > 0.0))
        throw std::domain_error("ces_demand: non-positive price");
    return std::pow(delivered_price / (weight * price_index), 1.0 / (curvature - 1.0)) *
           expenditure / price_index;
}

/// Quantity-form demand for one variety of an unweighted aggregate:
/// x = (p/P)^{1/(c-1)} * aggregate, so that sum n p x = P * aggregate.
inline Real ces_quantity_demand(Real delivered_price, Real price_index, Real aggregate,
                                Real curvature) {
    if (!(delivered_price > 0.0) || !(price_index > 0.0))
        throw std::domain_error("ces_quantity_demand: non-positive price");
    return std::pow(delivered_price / price_index, 1.0 / (curvature - 1.0)) * aggregate;
}

}  // namespace rcge
