#include <rcge/dynamics.hpp>

#include <algorithm>
#include <cmath>

#include <rcge/household.hpp>

namespace rcge {

ZeroProfitTargets zero_profit_targets(const Economy& economy, const EquilibriumSolution& solution) {
    const auto& topo = economy.topology;
    const int R = topo.regions;
    const int Rd = topo.domestic_regions();
    ZeroProfitTargets t;
    t.output.assign(solution.zero_profit_output.size(), 0.0);
    t.durable.assign(Rd, 0.0);
    for (int s = 0; s < topo.domestic_sectors(); ++s)
        for (int r = 0; r < Rd; ++r) {
            const std::size_t k = static_cast<std::size_t>(s) * R + r;
            if (economy.stocks.firms(s, r, R) == 0.0) continue;
            const Real x = solution.zero_profit_output[k];
            if (!(x > 0.0) || !std::isfinite(x)) throw NonViable(s, r);
            t.output[k] = x;
        }
    for (int r = 0; r < Rd; ++r) {
        const Real z = solution.zero_profit_durable[r];
        if (!(z > 0.0) || !std::isfinite(z)) throw NonViable(topo.sectors - 1, r);
        t.durable[r] = z;
    }
    return t;
}

Real firm_entry_step(Real firms, Real target, Real entry_speed) {
    return std::max(0.0, firms + entry_speed * (target - firms));
}

StockState advance_stocks(const Economy& economy, const StockState& stocks,
                          const EquilibriumSolution& solution, const PeriodPolicy& policy) {
    const auto& topo = economy.topology;
    const auto& par = economy.params;
    const int R = topo.regions;
    const int Rd = topo.domestic_regions();
    const int M = topo.countries;

    StockState next = stocks;

    // Physical capital per durable firm tracks the solved demand; the carry
    // is the period-end aggregate the next period depreciates from.
    for (int r = 0; r < Rd; ++r) {
        next.capital[r] = std::max(0.0, solution.durable_output[r]);
        next.capital_carry[r] = stocks.durable_firms[r] * next.capital[r];
    }

    // Public capital: policy additions plus the investment share of public
    // purchases, net of depreciation.
    for (int q = 0; q < Rd; ++q) {
        const int m = topo.country_of_region[q];
        const Real kg_eff = stocks.public_capital[q] + policy.public_capital_add[q];
        const Real gi = par.government_investment_share[m] * solution.government_demand[q];
        next.public_capital[q] = std::max(0.0, public_capital_step(kg_eff, gi, par.capital_depreciation));
    }

    for (int e = 0; e < kSkills; ++e)
        for (int r = 0; r < Rd; ++r) {
            const std::size_t k = static_cast<std::size_t>(e) * Rd + r;
            next.human_capital[k] = std::max(
                0.0, human_capital_step(stocks.human_capital[k], policy.education_time[k],
                                        par.human_capital_depreciation));
        }

    // Designs become obsolete after one period.
    for (int m = 0; m < M; ++m) next.designs[m] = std::max(0.0, solution.new_designs[m]);

    // Entry toward the zero-profit scale, holding the demand addressed to the
    // cell fixed: N* = N X / X*. A non-positive scale signals exit.
    for (int s = 0; s < topo.domestic_sectors(); ++s)
        for (int r = 0; r < Rd; ++r) {
            const std::size_t k = static_cast<std::size_t>(s) * R + r;
            const Real n = stocks.firms(s, r, R);
            if (n == 0.0) continue;
            const Real zp = solution.zero_profit_output[k];
            const Real target = zp > 0.0 ? n * solution.output[k] / zp : 0.0;
            next.firms(s, r, R) = firm_entry_step(n, target, par.entry_speed);
        }
    for (int r = 0; r < Rd; ++r) {
        const Real a = stocks.durable_firms[r];
        const Real zp = solution.zero_profit_durable[r];
        const Real target = zp > 0.0 ? a * solution.durable_output[r] / zp : 0.0;
        next.durable_firms[r] = std::max(1e-12, firm_entry_step(a, target, par.entry_speed));
    }

    // Asset positions: savings buy the new issues in proportion, measured in
    // this period's prices. At a stationary point every term is zero.
    const Real total_savings = solution.total_savings;
    for (int r = 0; r < Rd; ++r) {
        Real held = 0.0;
        for (int q = 0; q < Rd; ++q)
            held += topo.households[q] * stocks.equity[static_cast<std::size_t>(q) * Rd + r];
        const Real issued = solution.consumer_price[r] * stocks.durable_firms[r] *
                            solution.durable_output[r];
        const Real change = issued - held;
        for (int q = 0; q < Rd; ++q) {
            const Real share = total_savings != 0.0
                                   ? topo.households[q] * solution.savings[q] / total_savings
                                   : topo.households[q] / topo.total_households();
            Real& b = next.equity[static_cast<std::size_t>(q) * Rd + r];
            b = std::max(0.0, b + share * change / topo.households[q]);
        }
    }
    for (int m = 0; m < M; ++m)
        for (int q = 0; q < Rd; ++q) {
            const Real share = total_savings != 0.0
                                   ? topo.households[q] * solution.savings[q] / total_savings
                                   : topo.households[q] / topo.total_households();
            next.bonds[static_cast<std::size_t>(q) * M + m] +=
                share * solution.deficit[m] / topo.households[q];
        }
    {
        const Real inflow = solution.trade_balance_total +
                            [&] {
                                Real fi = 0.0;
                                for (int q = 0; q < Rd; ++q)
                                    fi += par.foreign_return * topo.households[q] *
                                          stocks.foreign_bonds[q];
                                return fi;
                            }();
        for (int q = 0; q < Rd; ++q) {
            const Real share = total_savings != 0.0
                                   ? topo.households[q] * solution.savings[q] / total_savings
                                   : topo.households[q] / topo.total_households();
            next.foreign_bonds[q] += share * inflow / topo.households[q];
        }
    }

    next.prev_wage = solution.wage;
    next.prev_price_index = solution.consumer_price;
    return next;
}

Trajectory simulate(const Economy& economy, const PolicyScenario& scenario, int horizon,
                    const SolveOptions& options, const EquilibriumSolution* benchmark) {
    Trajectory traj;
    Economy current = economy;

    Candidate warm;
    bool have_warm = false;
    for (int t = 0; t <= horizon; ++t) {
        PeriodPolicy policy = apply_policy(current, scenario, t);
        EquilibriumSolution sol;
        try {
            if (t == 0 && benchmark) {
                sol = *benchmark;
            } else {
                sol = solve_period(current, current.stocks, policy, options,
                                   have_warm ? &warm : nullptr);
            }
        } catch (const NonConvergence& e) {
            traj.failure = SimulationFailure{t, e.what(), e.best_residual};
            return traj;
        } catch (const SingularJacobian& e) {
            traj.failure = SimulationFailure{t, e.what(), 0.0};
            return traj;
        }
        traj.stocks.push_back(current.stocks);
        traj.solutions.push_back(sol);
        warm.goods_price = sol.goods_price;
        warm.wage = sol.wage;
        warm.design_price = sol.design_price;
        have_warm = true;
        if (t < horizon) current.stocks = advance_stocks(current, current.stocks, sol, policy);
    }
    return traj;
}

}  // namespace rcge
