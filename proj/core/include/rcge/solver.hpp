#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <rcge/economy.hpp>
#include <rcge/public_sector.hpp>

namespace rcge {

/// Candidate point of the within-period system. Goods prices are a full
/// sectors x regions grid (the foreign cell pinned at the numeraire); only
/// active domestic cells are solver unknowns.
struct Candidate {
    std::vector<Real> goods_price;   // p[s][r]
    std::vector<Real> wage;          // w[e][r], domestic regions
    std::vector<Real> design_price;  // P_J per country
};

/// A candidate the solver cannot evaluate (labour at the time endowment,
/// singular wage markup, negative implied output). Line searches treat it as
/// a rejected step.
struct StepRejected : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonConvergence : std::runtime_error {
    Real best_residual;
    int iterations;
    NonConvergence(Real best, int iters)
        : std::runtime_error("solver did not converge: best residual " + std::to_string(best) +
                             " after " + std::to_string(iters) + " iterations"),
          best_residual(best), iterations(iters) {}
};

struct SingularJacobian : std::runtime_error {
    std::string market;
    explicit SingularJacobian(std::string which)
        : std::runtime_error("singular Jacobian near market: " + which), market(std::move(which)) {}
};

/// Everything implied by a candidate: price blocks, the cleared quantity
/// system, incomes, fiscal accounts and diagnostics. Goods, labour and
/// durable markets clear by construction; the pricing rules, wage rules and
/// design markets carry the residuals.
struct PeriodFlows {
    Candidate candidate;

    std::vector<Real> consumer_price;        // P^c_q
    std::vector<Real> consumer_price_change; // vs. previous period (0 without history)
    Real foreign_allocation_index = 0.0;     // index spreading foreign spending
    std::vector<Real> rental_rate;           // r^k_r (arbitrage-consistent)
    std::vector<Real> durable_price;         // p^z_r
    std::vector<Real> durable_index;         // P^z_r
    std::vector<Real> labour_index;          // W_r
    std::vector<Real> input_price;           // P^u[u][r]
    std::vector<Real> value_added_price;     // P^y[s][r]
    std::vector<Real> marginal_cost;         // MC[s][r]
    std::vector<Real> rnd_wage_index;        // W_RD,m
    std::vector<Real> new_designs;           // dJ_m (supply side)
    std::vector<Real> rnd_labour;            // L_RD,m
    std::vector<Real> rnd_wage_bill;         // per country
    std::vector<Real> rnd_labour_per_household;  // hi-skill demand per household, per region

    std::vector<Real> output;            // X[s][r] per firm
    std::vector<Real> gross_value_added; // X + FC
    std::vector<Real> durable_use;       // Z[s][r]
    std::vector<Real> labour_use;        // L[s][r]
    std::vector<Real> durable_output;    // z_r = K_r per firm
    std::vector<Real> aggregate_investment;  // A K - (1-delta) carry, real
    std::vector<Real> capital_composite;     // investment + durable fixed-cost purchases, real
    std::vector<Real> labour;            // l[e][q] per household
    std::vector<Real> wage_inflation;    // per [e][q]
    std::vector<Real> labour_income;     // per household
    std::vector<Real> wage_adjust;       // Gamma_w per household
    std::vector<Real> capital_income;    // KI per household
    std::vector<Real> disposable_income; // YC per household
    std::vector<Real> household_composite;   // consumption + adjustment purchases, real
    std::vector<Real> savings;           // per household
    std::vector<Real> government_real;   // G_q
    std::vector<Real> eu_transfer;       // TR_EU,q currency incl. public-capital cost

    std::vector<Real> success_probability;      // phi_r
    std::vector<Real> human_capital_employed;   // HC_r
    bool phi_floor_bound = false;

    std::vector<Real> firm_profit;            // per final-goods firm
    Real final_goods_profit_total = 0.0;
    std::vector<Real> durable_expected_profit; // per firm, entry signal
    std::vector<Real> durable_payout;          // per firm, distributed

    std::vector<Real> demand_households;  // per (s,r) incl. foreign household demand
    std::vector<Real> demand_firms;
    std::vector<Real> demand_capital;
    std::vector<Real> demand_government;

    std::vector<Real> tax_revenue;      // T_m
    std::vector<Real> subsidies;        // Sub_m (national outlays)
    std::vector<Real> eu_contribution;  // TR_m,EU
    std::vector<Real> deficit;          // D_m
    Real cohesion_budget = 0.0;

    std::vector<Real> exports;          // per m
    std::vector<Real> imports;          // per m
    std::vector<Real> imports_by_region;  // pre-tax value per domestic region
    std::vector<Real> trade_balance;    // per m
    Real trade_balance_total = 0.0;

    std::vector<Real> gdp;  // per region
    Real gdp_total = 0.0;
    Real total_savings = 0.0;
    Real foreign_interest = 0.0;  // r_F times foreign bonds outstanding
    Real closure_residual = 0.0;
};

/// Evaluates every flow implied by a candidate. Throws StepRejected when the
/// candidate leaves the feasible region.
PeriodFlows evaluate_flows(const Economy& economy, const StockState& stocks,
                           const PeriodPolicy& policy, const Candidate& candidate);

struct DemandBreakdown {
    Real households = 0.0;
    Real firms = 0.0;
    Real capital = 0.0;
    Real government = 0.0;
    Real total = 0.0;
};

/// The four demand components addressed to one firm of cell (s,r).
DemandBreakdown total_demand(const PeriodFlows& flows, int sector, int region);

/// l_{e,q} minus recomputed demand from final-goods firms and (for hi) R&D.
Real labour_market_residual(const Economy& economy, const PeriodFlows& flows, int region,
                            int skill);

/// dJ_m supply minus sum_r A_r / phi_r.
Real design_market_residual(const Economy& economy, const StockState& stocks,
                            const PeriodFlows& flows, int country);

struct TradeBalances {
    std::vector<Real> exports;
    std::vector<Real> imports;
    std::vector<Real> balance;
    Real total = 0.0;
};
TradeBalances trade_balance(const PeriodFlows& flows);

/// Savings minus their uses (investment, deficits, trade balance and the
/// interest on outstanding foreign bonds).
Real financial_closure_residual(const PeriodFlows& flows);

/// Per-region (r^k - delta)P^c + (1-delta)dP^c - r^G followed by per-country
/// r^G - r_F.
std::vector<Real> arbitrage_residuals(const Economy& economy, const PeriodFlows& flows);

Real walras_residual(const EquilibriumSolution& solution);
Real gdp(const EquilibriumSolution& solution, int region);

struct SolveOptions {
    Real tol = 1e-9;
    int max_iter = 500;
    Real damping = 1.0;    // scales the accepted Newton step
    bool verbose = false;
    std::ostream* trace = nullptr;  // per-iteration diagnostics, one JSON object per line
    bool reverse_unknown_ordering = false;
    Real fd_step = 1e-7;
};

/// Damped Newton iteration on the log unknown vector (prices, wages, design
/// prices); falls back to under-relaxed price adjustment when no Newton step
/// is acceptable. Deterministic given inputs and options.
EquilibriumSolution solve_period(const Economy& economy, const StockState& stocks,
                                 const PeriodPolicy& policy, const SolveOptions& options = {},
                                 const Candidate* warm_start = nullptr);

/// The flows behind a solved period (recomputed; used by dynamics and tests).
PeriodFlows solution_flows(const Economy& economy, const StockState& stocks,
                           const PeriodPolicy& policy, const EquilibriumSolution& solution);

EquilibriumSolution make_solution(const Economy& economy, const StockState& stocks,
                                  const PeriodPolicy& policy, const PeriodFlows& flows,
                                  int iterations, Real max_residual, bool converged);

}  // namespace rcge
