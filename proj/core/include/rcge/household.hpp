#pragma once

#include <span>

#include <rcge/economy.hpp>

namespace rcge {

/// Per-household period accounts.
struct HouseholdAccounts {
    Real disposable_income = 0.0;  // YC
    Real capital_income = 0.0;     // KI
    Real wage_adjust_cost = 0.0;   // Gamma_w
    Real savings = 0.0;            // s*YC
    Real consumption = 0.0;        // C, real index units
};

/// CES consumer price index of region q over every variety in the economy,
/// delivered prices tau*(1+t_c)*p, preference weights beta_s. `trade_cost`
/// is the dense (possibly scenario-adjusted) tau table.
Real consumer_price_index(const EconomyTopology& topology, const ModelParameters& params,
                          std::span<const Real> trade_cost, std::span<const Real> goods_price,
                          std::span<const Real> firm_count, int region);

/// Demand of one household for one variety given its consumer price index and
/// disposable income. delivered_price = tau*(1+t_c)*p.
Real consumption_demand(Real delivered_price, Real sector_weight, Real price_index,
                        Real disposable_income, Real saving_rate, Real goods_curvature);

/// KI = sum_r r^k B^k + sum_m r^G B^G + r_F B^F + sum_r (B^k/a) Pi_r + pi^FG/H.
/// `durable_profit` and `equity_issued` are region aggregates (A_r firms).
Real capital_income(std::span<const Real> rental_rate, std::span<const Real> equity,
                    std::span<const Real> equity_issued, std::span<const Real> durable_profit,
                    std::span<const Real> bond_rate, std::span<const Real> bonds,
                    Real foreign_return, Real foreign_bonds, Real final_goods_profit_share);

/// Quadratic cost of changing wages: sum_e (gamma_w/2) l_e (dw_e)^2 / w_e.
Real wage_adjustment_cost(std::span<const Real> wage, std::span<const Real> wage_change,
                          std::span<const Real> labour, Real wage_adjust_scale);

/// YC = sum_e (1-t^w) w_e l_e - Gamma_w + (1-t^pi) KI + transfer.
Real disposable_income(std::span<const Real> wage, std::span<const Real> labour,
                       std::span<const Real> wage_change, Real wage_tax, Real profit_tax,
                       Real capital_income, Real transfer_per_household, Real wage_adjust_scale);

/// Wage-setting rule residual for one skill:
///   omega (1-l)^{-kappa} / eta - (1-t^w) w / P^c
/// with eta = sigma (1-s) - gamma_w (sigma-1) pi^w / (1-t^w).
/// Throws std::domain_error when eta crosses zero or l >= 1 (rejected step).
Real wage_rule_residual(Real wage, Real labour, Real price_index, Real wage_inflation,
                        Real leisure_weight, Real leisure_curvature, Real labour_curvature,
                        Real saving_rate, Real wage_tax, Real wage_adjust_scale);

/// The markup denominator eta of the wage rule.
Real wage_rule_markup(Real wage_inflation, Real labour_curvature, Real saving_rate, Real wage_tax,
                      Real wage_adjust_scale);

/// b' = b (exp(Lambda) - delta_HC).
Real human_capital_step(Real human_capital, Real education_time, Real depreciation);

}  // namespace rcge
