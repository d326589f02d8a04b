#pragma once

#include <array>
#include <string>
#include <vector>

namespace rcge {

using Real = double;

inline constexpr int kSkills = 3;

enum class Skill { Low = 0, Medium = 1, High = 2 };

const char* skill_name(int skill);

/// Region/sector layout. The last region is the rest of the world, the last
/// sector is the foreign sector; both exist only as the single foreign
/// variety cell (S,R).
struct EconomyTopology {
    int regions = 0;   // including the rest-of-world region (last index)
    int countries = 0;
    int sectors = 0;   // including the foreign sector (last index)

    std::vector<std::string> region_names;   // domestic regions
    std::vector<std::string> country_names;
    std::vector<std::string> sector_names;   // domestic sectors

    std::vector<int> country_of_region;      // per domestic region
    std::vector<Real> households;            // H_r per domestic region
    std::vector<Real> trade_cost;            // tau[s][r][q], dense sectors*regions*regions

    int domestic_regions() const { return regions - 1; }
    int domestic_sectors() const { return sectors - 1; }
    int rest_of_world() const { return regions - 1; }
    int foreign_sector() const { return sectors - 1; }

    Real tau(int s, int from, int to) const {
        return trade_cost[(static_cast<std::size_t>(s) * regions + from) * regions + to];
    }
    Real& tau(int s, int from, int to) {
        return trade_cost[(static_cast<std::size_t>(s) * regions + from) * regions + to];
    }

    std::vector<std::vector<int>> regions_of_country() const;
    Real country_households(int country) const;
    Real total_households() const;
};

/// Behavioural and technology parameters. Curvatures are the CES exponents
/// in (0,1); the elasticity of substitution is 1/(1-curvature).
struct ModelParameters {
    Real goods_curvature = 0.6;     // theta
    Real durables_curvature = 0.5;  // rho
    Real labour_curvature = 0.55;   // sigma
    Real leisure_curvature = 1.5;   // kappa

    std::array<Real, kSkills> leisure_weight{1.0, 1.0, 1.0};      // omega_e
    std::array<Real, kSkills> skill_productivity{0.8, 1.0, 1.2};  // gamma_e
    Real wage_adjust_scale = 0.0;                                 // gamma_w

    Real saving_rate = 0.2;

    std::vector<Real> sector_weight;   // beta_s, size sectors
    std::vector<Real> capital_share;   // alpha_s, per domestic sector
    Real public_capital_elasticity = 0.05;  // alpha_G

    // a[m][s][u]: intermediate input of sector u per unit of sector-s output,
    // common to all firms of sector s in country m.
    std::vector<Real> input_coefficient;

    std::vector<Real> fixed_cost_final;    // FC[s][r], value-added units, domestic cells
    std::vector<Real> fixed_cost_durable;  // FC_v[r], currency

    Real capital_depreciation = 0.06;       // delta_K
    Real human_capital_depreciation = 0.02; // delta_HC

    Real rnd_spillover_union = 0.2;     // omega
    Real rnd_spillover_national = 0.3;  // zeta
    Real rnd_supply_elasticity = 0.5;   // epsilon
    Real innovation_weight = 0.5;       // nu
    Real entry_speed = 0.4;             // lambda

    std::vector<Real> consumption_tax;  // t_c[m][s], size countries*sectors
    std::vector<Real> wage_tax;         // t_w per country
    std::vector<Real> profit_tax;       // t_pi per country

    Real foreign_price = 1.0;   // numeraire
    Real foreign_return = 0.03; // r_F
    Real foreign_income = 100.0;
    Real foreign_expenditure_share = 0.3;

    std::vector<Real> government_purchases;        // G_m, real composite units
    std::vector<Real> government_investment_share; // share of G_q entering public capital
    std::vector<Real> household_transfers;         // TR_H,m

    std::vector<Real> subsidy_final;    // envelope per [s][r] domestic cells
    std::vector<Real> subsidy_durable;  // envelope per region
    std::vector<Real> subsidy_rnd;      // per-design rate, per country

    std::vector<Real> education_time;   // Lambda[e][r], per skill x domestic region

    Real phi_floor = 1e-6;

    Real input_coeff(int country, int s, int u, int sectors) const {
        return input_coefficient[(static_cast<std::size_t>(country) * (sectors - 1) + s) * sectors + u];
    }
    Real consumption_tax_rate(int country, int s, int sectors) const {
        return consumption_tax[static_cast<std::size_t>(country) * sectors + s];
    }
};

/// Everything carried between periods. Asset positions are per representative
/// household of the holding region.
struct StockState {
    std::vector<Real> capital;        // K_{v,r}, per durable firm, domestic regions
    std::vector<Real> capital_carry;  // A_r*K_{v,r} at the end of the period (depreciation base)
    std::vector<Real> public_capital; // KG_r
    std::vector<Real> human_capital;  // b[e][r]
    std::vector<Real> final_firms;    // N[s][r], full sectors x regions grid
    std::vector<Real> durable_firms;  // A_r
    std::vector<Real> designs;        // J_m

    std::vector<Real> equity;         // B^k[q][r], per household of q in region-r durable firms
    std::vector<Real> bonds;          // B^G[q][m]
    std::vector<Real> foreign_bonds;  // B^F[q]

    std::vector<Real> prev_wage;         // w[e][r] of the previous period; empty = no history
    std::vector<Real> prev_price_index;  // P^c[r] of the previous period; empty = no history

    Real firms(int s, int r, int regions) const {
        return final_firms[static_cast<std::size_t>(s) * regions + r];
    }
    Real& firms(int s, int r, int regions) {
        return final_firms[static_cast<std::size_t>(s) * regions + r];
    }
};

/// Solved within-period state.
struct EquilibriumSolution {
    bool converged = false;
    int iterations = 0;
    Real max_residual = 0.0;

    std::vector<Real> goods_price;      // p[s][r], full grid (foreign cell = numeraire)
    std::vector<Real> output;           // X[s][r] per firm, domestic cells
    std::vector<Real> value_added_price;// P^y[s][r]
    std::vector<Real> marginal_cost;    // MC[s][r]
    std::vector<Real> firm_profit;      // pi[s][r] per firm
    std::vector<Real> input_price;      // P^u[u][r], sectors x domestic regions

    std::vector<Real> consumer_price;   // P^c[q], domestic regions
    std::vector<Real> consumer_price_change; // delta P^c used in arbitrage
    std::vector<Real> wage;             // w[e][r]
    std::vector<Real> wage_inflation;   // pi^w[e][r]
    std::vector<Real> labour;           // l[e][r] per household
    std::vector<Real> labour_index;     // W_r
    std::vector<Real> disposable_income;// YC per household
    std::vector<Real> consumption;      // C per household, real
    std::vector<Real> savings;          // S per household
    std::vector<Real> wage_adjust_cost; // Gamma_w per household

    std::vector<Real> rental_rate;      // r^k_r
    std::vector<Real> durable_price;    // p^z_r
    std::vector<Real> durable_index;    // P^z_r
    std::vector<Real> durable_output;   // z_r = K_r per firm
    std::vector<Real> durable_profit;   // expected profit per firm (entry signal)
    std::vector<Real> durable_payout;   // distributed profit per firm
    std::vector<Real> investment;       // I_r per firm
    std::vector<Real> investment_value; // P^c * aggregate investment per region
    std::vector<Real> success_probability; // phi_r
    std::vector<Real> human_capital_employed; // HC_r

    std::vector<Real> design_price;     // P_J,m
    std::vector<Real> new_designs;      // dJ_m
    std::vector<Real> rnd_labour;       // L_RD,m
    std::vector<Real> rnd_wage_index;   // W_RD,m
    std::vector<Real> bond_rate;        // r^G_m

    std::vector<Real> tax_revenue;      // T_m
    std::vector<Real> deficit;          // D_m
    std::vector<Real> subsidies;        // Sub_m
    std::vector<Real> eu_contribution;  // TR_m,EU
    std::vector<Real> eu_transfers;     // TR_EU,q (currency, incl. policy funding)
    std::vector<Real> government_demand;// G_q real
    Real cohesion_budget = 0.0;         // CPF

    std::vector<Real> exports;          // X_m
    std::vector<Real> imports;          // M_m
    std::vector<Real> trade_balance;    // TB_m
    Real trade_balance_total = 0.0;

    std::vector<Real> gdp;              // GDP_r
    Real gdp_total = 0.0;
    Real total_savings = 0.0;
    Real foreign_price_index = 0.0;     // allocation index of foreign spending

    Real walras_absolute = 0.0;
    Real walras_relative = 0.0;

    std::vector<Real> zero_profit_output;   // X*[s][r]
    std::vector<Real> zero_profit_durable;  // z*[r]

    bool phi_floor_bound = false;

    Real price(int s, int r, int regions) const {
        return goods_price[static_cast<std::size_t>(s) * regions + r];
    }
};

struct ValidationIssue {
    std::string field;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool passed() const { return issues.empty(); }
    std::string summary() const;
};

struct Economy {
    EconomyTopology topology;
    ModelParameters params;
    StockState stocks;
};

/// Diagnostic check of every structural invariant. Never throws; a passing
/// report is required before any solve.
ValidationReport validate_economy(const EconomyTopology& topology,
                                  const ModelParameters& params,
                                  const StockState& stocks);

inline ValidationReport validate_economy(const Economy& economy) {
    return validate_economy(economy.topology, economy.params, economy.stocks);
}

}  // namespace rcge
