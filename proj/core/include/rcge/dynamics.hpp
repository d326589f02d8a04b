#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include <rcge/economy.hpp>
#include <rcge/public_sector.hpp>
#include <rcge/solver.hpp>

namespace rcge {

struct NonViable : std::runtime_error {
    int sector;
    int region;
    NonViable(int s, int r)
        : std::runtime_error("no viable zero-profit scale for sector " + std::to_string(s) +
                             ", region " + std::to_string(r)),
          sector(s), region(r) {}
};

struct ZeroProfitTargets {
    std::vector<Real> output;   // X*[s][r], full grid, 0 at inactive cells
    std::vector<Real> durable;  // z*[r]
};

/// Per-firm scales at which price equals average cost:
///   X* = theta (P^y FC - sub) / ((1-theta) MC),
///   z* = (P_J + FC_v - sub) / ((1-rho)/rho r^k P^c).
ZeroProfitTargets zero_profit_targets(const Economy& economy, const EquilibriumSolution& solution);

/// N' = N + lambda (N* - N), floored at zero.
Real firm_entry_step(Real firms, Real target, Real entry_speed);

/// Laws of motion from a solved period: capital follows the solved durable
/// demand, public capital and human capital accumulate, designs fully
/// depreciate, firm counts move toward their zero-profit targets, asset
/// positions absorb the period's savings.
StockState advance_stocks(const Economy& economy, const StockState& stocks,
                          const EquilibriumSolution& solution, const PeriodPolicy& policy);

struct SimulationFailure {
    int period = 0;
    std::string reason;
    Real best_residual = 0.0;
};

struct Trajectory {
    std::vector<StockState> stocks;              // indexed by period 0..T
    std::vector<EquilibriumSolution> solutions;  // same indexing
    std::optional<SimulationFailure> failure;

    std::size_t periods() const { return solutions.size(); }
};

/// Runs t = 0..T: apply_policy, solve_period, advance_stocks. Period 0 is the
/// benchmark (no instruments; windows start at 1). On a solver failure the
/// partial trajectory is returned with the failing period recorded.
Trajectory simulate(const Economy& economy, const PolicyScenario& scenario, int horizon,
                    const SolveOptions& options = {},
                    const EquilibriumSolution* benchmark = nullptr);

}  // namespace rcge
