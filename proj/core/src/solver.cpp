#include <rcge/solver.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>

#include <rcge/ces.hpp>
#include <rcge/household.hpp>
#include <rcge/production.hpp>

namespace rcge {

namespace {

struct Ctx {
    const Economy& economy;
    const StockState& stocks;
    const PeriodPolicy& policy;

    int R, S, M, Rd, Sd;
    std::vector<std::pair<int, int>> cells;  // active domestic (s,r)
    std::vector<int> cell_of;                // s*R+r -> cell index or -1
    int n_price = 0, n_wage = 0, n_design = 0, n = 0;
    bool reverse = false;

    Ctx(const Economy& e, const StockState& st, const PeriodPolicy& pol, bool rev)
        : economy(e), stocks(st), policy(pol), reverse(rev) {
        R = e.topology.regions;
        S = e.topology.sectors;
        M = e.topology.countries;
        Rd = e.topology.domestic_regions();
        Sd = e.topology.domestic_sectors();
        cell_of.assign(static_cast<std::size_t>(S) * R, -1);
        for (int s = 0; s < Sd; ++s)
            for (int r = 0; r < Rd; ++r)
                if (st.firms(s, r, R) > 0.0) {
                    cell_of[static_cast<std::size_t>(s) * R + r] = static_cast<int>(cells.size());
                    cells.emplace_back(s, r);
                }
        n_price = static_cast<int>(cells.size());
        n_wage = kSkills * Rd;
        n_design = M;
        n = n_price + n_wage + n_design;
    }

    Real tau(int s, int from, int to) const { return policy.tau(s, from, to, R); }
    int country(int r) const { return economy.topology.country_of_region[r]; }

    int slot(int i) const { return reverse ? n - 1 - i : i; }

    std::vector<Real> pack(const Candidate& c) const {
        std::vector<Real> v(n);
        for (int i = 0; i < n_price; ++i)
            v[slot(i)] = std::log(
                c.goods_price[static_cast<std::size_t>(cells[i].first) * R + cells[i].second]);
        for (int i = 0; i < n_wage; ++i) v[slot(n_price + i)] = std::log(c.wage[i]);
        for (int m = 0; m < n_design; ++m)
            v[slot(n_price + n_wage + m)] = std::log(c.design_price[m]);
        return v;
    }

    Candidate unpack(const std::vector<Real>& v) const {
        Candidate c;
        c.goods_price.assign(static_cast<std::size_t>(S) * R, 0.0);
        c.goods_price[static_cast<std::size_t>(S - 1) * R + (R - 1)] = economy.params.foreign_price;
        for (int i = 0; i < n_price; ++i)
            c.goods_price[static_cast<std::size_t>(cells[i].first) * R + cells[i].second] =
                std::exp(v[slot(i)]);
        c.wage.resize(n_wage);
        for (int i = 0; i < n_wage; ++i) c.wage[i] = std::exp(v[slot(n_price + i)]);
        c.design_price.resize(n_design);
        for (int m = 0; m < n_design; ++m)
            c.design_price[m] = std::exp(v[slot(n_price + n_wage + m)]);
        return c;
    }

    std::string residual_name(int slot_index) const {
        const int i = reverse ? n - 1 - slot_index : slot_index;
        if (i < n_price)
            return "goods market (sector " + std::to_string(cells[i].first) + ", region " +
                   std::to_string(cells[i].second) + ")";
        if (i < n_price + n_wage) {
            const int k = i - n_price;
            return std::string("labour market (skill ") + skill_name(k / Rd) + ", region " +
                   std::to_string(k % Rd) + ")";
        }
        return "design market (country " + std::to_string(i - n_price - n_wage) + ")";
    }
};

constexpr Real kPhiIterTol = 1e-13;
constexpr int kPhiMaxPasses = 80;

void require_positive_candidate(const Ctx& ctx, const Candidate& c) {
    for (const auto& [s, r] : ctx.cells) {
        const Real p = c.goods_price[static_cast<std::size_t>(s) * ctx.R + r];
        if (!(p > 0.0) || !std::isfinite(p)) throw StepRejected("non-positive goods price");
    }
    for (Real w : c.wage)
        if (!(w > 0.0) || !std::isfinite(w)) throw StepRejected("non-positive wage");
    for (Real pj : c.design_price)
        if (!(pj > 0.0) || !std::isfinite(pj)) throw StepRejected("non-positive design price");
}

// Price-side quantities of a candidate: every index, rate and demand
// coefficient that does not depend on the output vector.
struct Prices {
    std::vector<Real> consumer_price, price_change, rental, durable_price, durable_index,
        labour_index;
    std::vector<Real> input_price;        // [u][r]
    std::vector<Real> value_added_price;  // per active cell
    std::vector<Real> marginal_cost;      // per active cell
    std::vector<Real> rnd_wage_index, new_designs, rnd_labour, rnd_wage_bill;
    std::vector<Real> rnd_labour_per_household;  // per region
    Real foreign_index = 0.0;
    std::vector<int> all_cells;  // flattened s*R+r, active domestic + the foreign cell
    std::vector<Real> psi;       // per (all-cell, q): quantity per unit of composite
    std::vector<Real> psi_f;     // per active cell: foreign household demand
    std::vector<Real> xi;        // labour demand coefficient [e][q]
    std::vector<Real> kg_eff;    // effective public capital
    std::vector<Real> eq_share;  // ownership share [q][r]
};

Prices price_block(const Ctx& ctx, const Candidate& cand) {
    const auto& topo = ctx.economy.topology;
    const auto& par = ctx.economy.params;
    const auto& st = ctx.stocks;
    const int R = ctx.R, S = ctx.S, Rd = ctx.Rd, M = ctx.M;
    const Real theta = par.goods_curvature;
    const Real rho = par.durables_curvature;
    const Real sigma = par.labour_curvature;

    Prices pr;
    pr.kg_eff.resize(Rd);
    for (int r = 0; r < Rd; ++r)
        pr.kg_eff[r] = st.public_capital[r] + ctx.policy.public_capital_add[r];

    pr.consumer_price.resize(Rd);
    for (int q = 0; q < Rd; ++q)
        pr.consumer_price[q] = consumer_price_index(topo, par, ctx.policy.trade_cost,
                                                    cand.goods_price, st.final_firms, q);

    pr.price_change.assign(Rd, 0.0);
    if (!st.prev_price_index.empty())
        for (int r = 0; r < Rd; ++r)
            pr.price_change[r] = pr.consumer_price[r] - st.prev_price_index[r];

    pr.rental.resize(Rd);
    pr.durable_price.resize(Rd);
    pr.durable_index.resize(Rd);
    for (int r = 0; r < Rd; ++r) {
        const Real rk =
            par.capital_depreciation +
            (par.foreign_return - (1.0 - par.capital_depreciation) * pr.price_change[r]) /
                pr.consumer_price[r];
        if (!(rk > 0.0)) throw StepRejected("arbitrage-implied rental rate non-positive");
        pr.rental[r] = rk;
        pr.durable_price[r] = rk * pr.consumer_price[r] / rho;
        pr.durable_index[r] = std::pow(st.durable_firms[r], (rho - 1.0) / rho) * pr.durable_price[r];
    }

    pr.labour_index.resize(Rd);
    pr.input_price.assign(static_cast<std::size_t>(S) * Rd, 0.0);
    for (int r = 0; r < Rd; ++r) {
        const std::array<Real, kSkills> w{cand.wage[0 * Rd + r], cand.wage[1 * Rd + r],
                                          cand.wage[2 * Rd + r]};
        const std::array<Real, kSkills> b{st.human_capital[0 * Rd + r],
                                          st.human_capital[1 * Rd + r],
                                          st.human_capital[2 * Rd + r]};
        auto idx = factor_price_indices(topo, par, ctx.policy.trade_cost, cand.goods_price,
                                        st.final_firms, pr.durable_price[r], st.durable_firms[r],
                                        w, b, topo.households[r], r);
        pr.labour_index[r] = idx.labour;
        for (int u = 0; u < S; ++u)
            pr.input_price[static_cast<std::size_t>(u) * Rd + r] = idx.intermediates[u];
    }

    pr.value_added_price.resize(ctx.cells.size());
    pr.marginal_cost.resize(ctx.cells.size());
    for (std::size_t i = 0; i < ctx.cells.size(); ++i) {
        const auto [s, r] = ctx.cells[i];
        pr.value_added_price[i] =
            value_added_price(pr.durable_index[r], pr.labour_index[r], pr.kg_eff[r],
                              par.capital_share[s], par.public_capital_elasticity);
        Real mc = pr.value_added_price[i];
        for (int u = 0; u < S; ++u)
            mc += par.input_coeff(ctx.country(r), s, u, S) *
                  pr.input_price[static_cast<std::size_t>(u) * Rd + r];
        pr.marginal_cost[i] = mc;
    }

    pr.rnd_wage_index.resize(M);
    pr.new_designs.resize(M);
    pr.rnd_labour.resize(M);
    pr.rnd_wage_bill.resize(M);
    pr.rnd_labour_per_household.assign(Rd, 0.0);
    Real union_designs = 0.0;
    for (int m = 0; m < M; ++m) union_designs += st.designs[m];
    const auto by_country = topo.regions_of_country();
    for (int m = 0; m < M; ++m) {
        std::vector<Real> hw, hb, hc;
        for (int q : by_country[m]) {
            hw.push_back(cand.wage[2 * Rd + q]);
            hb.push_back(st.human_capital[2 * Rd + q]);
            hc.push_back(topo.households[q]);
        }
        pr.rnd_wage_index[m] = rnd_wage_index(par, hw, hb, hc);
        const Real rate = par.subsidy_rnd[m] + ctx.policy.subsidy_rnd_eu[m];
        auto rd = rd_balance(union_designs, st.designs[m], cand.design_price[m], rate,
                             pr.rnd_wage_index[m], par);
        pr.new_designs[m] = rd.new_designs;
        pr.rnd_labour[m] = rd.labour_aggregate;
        pr.rnd_wage_bill[m] = rd.wage_bill;
        for (int q : by_country[m]) {
            const Real beff = effective_labour_units(st.human_capital[2 * Rd + q],
                                                     par.skill_productivity[2], sigma);
            pr.rnd_labour_per_household[q] = labour_variety_demand(
                cand.wage[2 * Rd + q], beff, pr.rnd_wage_index[m], rd.labour_aggregate, sigma);
        }
    }

    {
        std::vector<VarietyTerm> terms;
        for (const auto& [s, r] : ctx.cells)
            terms.push_back({st.firms(s, r, R), par.sector_weight[s],
                             ctx.tau(s, r, topo.rest_of_world()) *
                                 cand.goods_price[static_cast<std::size_t>(s) * R + r]});
        pr.foreign_index = ces_price_index(terms, theta);
    }

    pr.all_cells.reserve(ctx.cells.size() + 1);
    for (const auto& [s, r] : ctx.cells) pr.all_cells.push_back(s * R + r);
    pr.all_cells.push_back((S - 1) * R + (R - 1));
    pr.psi.assign(pr.all_cells.size() * Rd, 0.0);
    for (std::size_t i = 0; i < pr.all_cells.size(); ++i) {
        const int s = pr.all_cells[i] / R;
        const int r = pr.all_cells[i] % R;
        const Real p = cand.goods_price[static_cast<std::size_t>(s) * R + r];
        for (int q = 0; q < Rd; ++q) {
            const Real wedge =
                ctx.tau(s, r, q) * (1.0 + par.consumption_tax_rate(ctx.country(q), s, S)) * p;
            pr.psi[i * Rd + q] =
                std::pow(wedge / (par.sector_weight[s] * pr.consumer_price[q]),
                         1.0 / (theta - 1.0));
        }
    }
    const Real foreign_spending = par.foreign_expenditure_share * par.foreign_income;
    pr.psi_f.resize(ctx.cells.size());
    for (std::size_t i = 0; i < ctx.cells.size(); ++i) {
        const auto [s, r] = ctx.cells[i];
        const Real p = cand.goods_price[static_cast<std::size_t>(s) * R + r];
        pr.psi_f[i] = ces_demand(ctx.tau(s, r, topo.rest_of_world()) * p, par.sector_weight[s],
                                 pr.foreign_index, foreign_spending, theta);
    }

    pr.xi.assign(static_cast<std::size_t>(kSkills) * Rd, 0.0);
    for (int e = 0; e < kSkills; ++e)
        for (int q = 0; q < Rd; ++q) {
            const Real beff = effective_labour_units(st.human_capital[e * Rd + q],
                                                     par.skill_productivity[e], sigma);
            pr.xi[e * Rd + q] =
                std::pow(cand.wage[e * Rd + q] / (std::pow(beff, sigma) * pr.labour_index[q]),
                         1.0 / (sigma - 1.0));
        }

    pr.eq_share.assign(static_cast<std::size_t>(Rd) * Rd, 0.0);
    for (int r = 0; r < Rd; ++r) {
        Real total = 0.0;
        for (int q = 0; q < Rd; ++q)
            total += topo.households[q] * st.equity[static_cast<std::size_t>(q) * Rd + r];
        for (int q = 0; q < Rd; ++q)
            pr.eq_share[static_cast<std::size_t>(q) * Rd + r] =
                topo.households[q] * st.equity[static_cast<std::size_t>(q) * Rd + r] / total;
    }
    return pr;
}

// Demand-side quantities implied by a trial output vector at fixed prices
// and fixed success probabilities. Affine in the outputs.
struct XBlock {
    std::vector<Real> demand;  // total per active cell
    std::vector<Real> dem_households, dem_firms, dem_capital, dem_government;
    std::vector<Real> gross_va, durable_use, labour_use;  // per active cell
    std::vector<Real> durable_output;                     // z_r per firm
    std::vector<Real> aggregate_investment;               // real, per region
    std::vector<Real> capital_composite;                  // real, per region
    std::vector<Real> labour;                             // l[e][q]
    std::vector<Real> labour_income, wage_adjust, capital_income, disposable_income;
    std::vector<Real> household_composite;  // per household
    std::vector<Real> government_real;      // per region
    std::vector<Real> eu_transfer;          // currency, per region
    std::vector<Real> firm_profit;          // per firm, per active cell
    Real final_goods_profit_total = 0.0;
    std::vector<Real> durable_payout;  // per firm, per region
};

XBlock demand_given(const Ctx& ctx, const Candidate& cand, const Prices& pr,
                    const std::vector<Real>& phi, const std::vector<Real>& output) {
    const auto& topo = ctx.economy.topology;
    const auto& par = ctx.economy.params;
    const auto& st = ctx.stocks;
    const int R = ctx.R, S = ctx.S, Rd = ctx.Rd;
    const int nc = static_cast<int>(ctx.cells.size());
    const Real theta = par.goods_curvature;
    const Real rho = par.durables_curvature;

    XBlock xb;
    xb.gross_va.resize(nc);
    xb.durable_use.resize(nc);
    xb.labour_use.resize(nc);
    xb.firm_profit.resize(nc);
    for (int i = 0; i < nc; ++i) {
        const auto [s, r] = ctx.cells[i];
        const Real fc = par.fixed_cost_final[static_cast<std::size_t>(s) * Rd + r];
        xb.gross_va[i] = output[i] + fc;
        auto fa = factor_aggregates(xb.gross_va[i], pr.value_added_price[i], pr.durable_index[r],
                                    pr.labour_index[r], par.capital_share[s]);
        xb.durable_use[i] = fa.durables;
        xb.labour_use[i] = fa.labour;
        const Real n = st.firms(s, r, R);
        const Real sub = (par.subsidy_final[static_cast<std::size_t>(s) * Rd + r] +
                          ctx.policy.subsidy_final_eu[static_cast<std::size_t>(s) * Rd + r]) /
                         n;
        xb.firm_profit[i] = (1.0 - theta) / theta * pr.marginal_cost[i] * output[i] -
                            pr.value_added_price[i] * fc + sub;
        xb.final_goods_profit_total += n * xb.firm_profit[i];
    }

    // Durable-goods firms produce to demand; output equals capital in place.
    xb.durable_output.assign(Rd, 0.0);
    for (int i = 0; i < nc; ++i) {
        const auto [s, r] = ctx.cells[i];
        xb.durable_output[r] += st.firms(s, r, R) * xb.durable_use[i];
    }
    xb.aggregate_investment.resize(Rd);
    xb.capital_composite.resize(Rd);
    xb.durable_payout.resize(Rd);
    for (int r = 0; r < Rd; ++r) {
        const Real a_r = st.durable_firms[r];
        xb.durable_output[r] *= std::pow(a_r, -1.0 / rho);
        xb.aggregate_investment[r] =
            a_r * xb.durable_output[r] - (1.0 - par.capital_depreciation) * st.capital_carry[r];
        xb.capital_composite[r] =
            xb.aggregate_investment[r] + a_r * par.fixed_cost_durable[r] / pr.consumer_price[r];
        const Real sub = (par.subsidy_durable[r] + ctx.policy.subsidy_durable_eu[r]) / a_r;
        const int m = ctx.country(r);
        // Distributed surplus: each operating firm carries 1/phi design
        // purchases (failed attempts are mutualised within the sector).
        xb.durable_payout[r] =
            (1.0 - rho) / rho * pr.rental[r] * pr.consumer_price[r] * xb.durable_output[r] -
            cand.design_price[m] / phi[r] - par.fixed_cost_durable[r] + sub;
    }

    xb.labour.assign(static_cast<std::size_t>(kSkills) * Rd, 0.0);
    for (int q = 0; q < Rd; ++q) {
        Real labour_agg = 0.0;
        for (int s = 0; s < ctx.Sd; ++s) {
            const int i = ctx.cell_of[static_cast<std::size_t>(s) * R + q];
            if (i < 0) continue;
            labour_agg += st.firms(s, q, R) * xb.labour_use[i];
        }
        for (int e = 0; e < kSkills; ++e) {
            xb.labour[e * Rd + q] = pr.xi[e * Rd + q] * labour_agg;
            if (e == int(Skill::High)) xb.labour[e * Rd + q] += pr.rnd_labour_per_household[q];
        }
    }

    const Real total_households = topo.total_households();
    xb.labour_income.resize(Rd);
    xb.wage_adjust.resize(Rd);
    xb.capital_income.resize(Rd);
    xb.disposable_income.resize(Rd);
    xb.household_composite.resize(Rd);
    std::vector<Real> pool(Rd);
    for (int r = 0; r < Rd; ++r)
        pool[r] =
            pr.rental[r] * st.durable_firms[r] * pr.consumer_price[r] * xb.durable_output[r] +
            st.durable_firms[r] * xb.durable_payout[r];
    for (int q = 0; q < Rd; ++q) {
        const int m = ctx.country(q);
        Real ly = 0.0, gamma = 0.0;
        for (int e = 0; e < kSkills; ++e) {
            const Real w = cand.wage[e * Rd + q];
            const Real l = xb.labour[e * Rd + q];
            ly += w * l;
            if (par.wage_adjust_scale > 0.0 && !st.prev_wage.empty()) {
                const Real dw = w - st.prev_wage[e * Rd + q];
                if (dw != 0.0) gamma += 0.5 * par.wage_adjust_scale * l * dw * dw / w;
            }
        }
        Real ki = 0.0;
        for (int r = 0; r < Rd; ++r)
            ki += pr.eq_share[static_cast<std::size_t>(q) * Rd + r] * pool[r] / topo.households[q];
        for (int mm = 0; mm < ctx.M; ++mm)
            ki += par.foreign_return * st.bonds[static_cast<std::size_t>(q) * ctx.M + mm];
        ki += par.foreign_return * st.foreign_bonds[q];
        ki += xb.final_goods_profit_total / total_households;
        xb.labour_income[q] = ly;
        xb.wage_adjust[q] = gamma;
        xb.capital_income[q] = ki;
        const Real yc = (1.0 - par.wage_tax[m]) * ly - gamma + (1.0 - par.profit_tax[m]) * ki +
                        par.household_transfers[m] / topo.country_households(m);
        xb.disposable_income[q] = yc;
        // Wage-adjustment costs consume the same composite as consumption.
        xb.household_composite[q] = ((1.0 - par.saving_rate) * yc + gamma) / pr.consumer_price[q];
    }

    xb.government_real.resize(Rd);
    xb.eu_transfer.resize(Rd);
    for (int q = 0; q < Rd; ++q) {
        const int m = ctx.country(q);
        xb.eu_transfer[q] =
            ctx.policy.eu_transfer[q] + pr.consumer_price[q] * ctx.policy.public_capital_add[q];
        xb.government_real[q] =
            regional_budget(par.government_purchases[m], topo.households[q],
                            topo.country_households(m), xb.eu_transfer[q] / pr.consumer_price[q]);
    }

    xb.demand.assign(nc, 0.0);
    xb.dem_households.assign(nc, 0.0);
    xb.dem_firms.assign(nc, 0.0);
    xb.dem_capital.assign(nc, 0.0);
    xb.dem_government.assign(nc, 0.0);
    for (int i = 0; i < nc; ++i) {
        const auto [s, r] = ctx.cells[i];
        const Real p = cand.goods_price[static_cast<std::size_t>(s) * R + r];
        Real dh = pr.psi_f[i];
        Real dk = 0.0, dg = 0.0;
        for (int q = 0; q < Rd; ++q) {
            const Real psi = pr.psi[static_cast<std::size_t>(i) * Rd + q];
            dh += psi * topo.households[q] * xb.household_composite[q];
            dk += psi * xb.capital_composite[q];
            dg += psi * xb.government_real[q];
        }
        Real df = 0.0;
        for (int j = 0; j < nc; ++j) {
            const auto [u, q] = ctx.cells[j];
            const Real a = par.input_coeff(ctx.country(q), u, s, S);
            if (a == 0.0) continue;
            const Real coeff =
                std::pow(ctx.tau(s, r, q) * p /
                             pr.input_price[static_cast<std::size_t>(s) * Rd + q],
                         1.0 / (theta - 1.0));
            df += st.firms(u, q, R) * coeff * a * output[j];
        }
        xb.dem_households[i] = dh;
        xb.dem_firms[i] = df;
        xb.dem_capital[i] = dk;
        xb.dem_government[i] = dg;
        xb.demand[i] = dh + df + dk + dg;
    }
    return xb;
}

struct Cleared {
    XBlock block;
    std::vector<Real> output;
    std::vector<Real> phi;
    std::vector<Real> human_capital;
    bool floor_bound = false;
};

// Clears the goods markets exactly: solves the affine system X = D(X), then
// iterates the success probabilities (which only shift the constant part).
Cleared clear_quantities(const Ctx& ctx, const Candidate& cand, const Prices& pr) {
    const auto& topo = ctx.economy.topology;
    const auto& par = ctx.economy.params;
    const auto& st = ctx.stocks;
    const int Rd = ctx.Rd;
    const int nc = static_cast<int>(ctx.cells.size());
    const auto by_country = topo.regions_of_country();

    Cleared out;
    out.phi.assign(Rd, 1.0);
    auto update_phi = [&](const std::vector<Real>& hcv) {
        std::vector<Real> next(Rd);
        out.floor_bound = false;
        for (int m = 0; m < ctx.M; ++m) {
            Real ta = 0.0, th = 0.0;
            for (int r : by_country[m]) {
                ta += st.durable_firms[r];
                th += hcv[r];
            }
            for (int r : by_country[m]) {
                Real p = std::pow(st.durable_firms[r] / ta, par.innovation_weight) *
                         std::pow(hcv[r] / th, 1.0 - par.innovation_weight);
                if (p < par.phi_floor) {
                    p = par.phi_floor;
                    out.floor_bound = true;
                }
                next[r] = p;
            }
        }
        return next;
    };

    // Endowment shares seed the iteration.
    out.human_capital.resize(Rd);
    for (int r = 0; r < Rd; ++r)
        out.human_capital[r] = topo.households[r] * st.human_capital[2 * Rd + r];
    out.phi = update_phi(out.human_capital);

    // The matrix of marginal demand responses is independent of phi: factor
    // once, refresh only the constant part per pass.
    Eigen::MatrixXd mat(nc, nc);
    {
        const std::vector<Real> zero(nc, 0.0);
        XBlock base = demand_given(ctx, cand, pr, out.phi, zero);
        std::vector<Real> unit(nc, 0.0);
        for (int j = 0; j < nc; ++j) {
            unit[j] = 1.0;
            XBlock col = demand_given(ctx, cand, pr, out.phi, unit);
            for (int i = 0; i < nc; ++i)
                mat(i, j) = (i == j ? 1.0 : 0.0) - (col.demand[i] - base.demand[i]);
            unit[j] = 0.0;
        }
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(mat);

    out.output.assign(nc, 0.0);
    Eigen::VectorXd rhs(nc);
    const std::vector<Real> zero(nc, 0.0);
    for (int pass = 0; pass < kPhiMaxPasses; ++pass) {
        XBlock base = demand_given(ctx, cand, pr, out.phi, zero);
        for (int i = 0; i < nc; ++i) rhs(i) = base.demand[i];
        Eigen::VectorXd sol = lu.solve(rhs);
        for (int i = 0; i < nc; ++i) {
            if (!std::isfinite(sol(i)) || sol(i) <= 0.0)
                throw StepRejected("goods clearing yields non-positive output");
            out.output[i] = sol(i);
        }
        out.block = demand_given(ctx, cand, pr, out.phi, out.output);

        std::vector<Real> hc_new(Rd);
        for (int r = 0; r < Rd; ++r) {
            hc_new[r] =
                topo.households[r] * st.human_capital[2 * Rd + r] * out.block.labour[2 * Rd + r];
            if (!(hc_new[r] > 0.0)) throw StepRejected("no skilled labour employed");
        }
        std::vector<Real> phi_new = update_phi(hc_new);
        Real diff = 0.0;
        for (int r = 0; r < Rd; ++r) diff = std::max(diff, std::abs(phi_new[r] - out.phi[r]));
        out.phi = std::move(phi_new);
        out.human_capital = std::move(hc_new);
        if (diff < kPhiIterTol) break;
    }
    return out;
}

}  // namespace

PeriodFlows evaluate_flows(const Economy& economy, const StockState& stocks,
                           const PeriodPolicy& policy, const Candidate& candidate) {
    Ctx ctx(economy, stocks, policy, false);
    require_positive_candidate(ctx, candidate);
    const auto& topo = economy.topology;
    const auto& par = economy.params;
    const int R = ctx.R, S = ctx.S, M = ctx.M, Rd = ctx.Rd;
    const int nc = static_cast<int>(ctx.cells.size());

    Prices pr = price_block(ctx, candidate);
    Cleared cl = clear_quantities(ctx, candidate, pr);
    const XBlock& fin = cl.block;
    const std::vector<Real>& output = cl.output;

    PeriodFlows f;
    f.candidate = candidate;
    f.consumer_price = pr.consumer_price;
    f.consumer_price_change = pr.price_change;
    f.foreign_allocation_index = pr.foreign_index;
    f.rental_rate = pr.rental;
    f.durable_price = pr.durable_price;
    f.durable_index = pr.durable_index;
    f.labour_index = pr.labour_index;
    f.input_price = pr.input_price;
    f.rnd_wage_index = pr.rnd_wage_index;
    f.new_designs = pr.new_designs;
    f.rnd_labour = pr.rnd_labour;
    f.rnd_wage_bill = pr.rnd_wage_bill;
    f.rnd_labour_per_household = pr.rnd_labour_per_household;
    f.phi_floor_bound = cl.floor_bound;
    f.success_probability = cl.phi;
    f.human_capital_employed = cl.human_capital;

    const std::size_t grid = static_cast<std::size_t>(S) * R;
    f.value_added_price.assign(grid, 0.0);
    f.marginal_cost.assign(grid, 0.0);
    f.output.assign(grid, 0.0);
    f.gross_value_added.assign(grid, 0.0);
    f.durable_use.assign(grid, 0.0);
    f.labour_use.assign(grid, 0.0);
    f.firm_profit.assign(grid, 0.0);
    f.demand_households.assign(grid, 0.0);
    f.demand_firms.assign(grid, 0.0);
    f.demand_capital.assign(grid, 0.0);
    f.demand_government.assign(grid, 0.0);
    for (int i = 0; i < nc; ++i) {
        const auto [s, r] = ctx.cells[i];
        const std::size_t k = static_cast<std::size_t>(s) * R + r;
        f.value_added_price[k] = pr.value_added_price[i];
        f.marginal_cost[k] = pr.marginal_cost[i];
        f.output[k] = output[i];
        f.gross_value_added[k] = fin.gross_va[i];
        f.durable_use[k] = fin.durable_use[i];
        f.labour_use[k] = fin.labour_use[i];
        f.firm_profit[k] = fin.firm_profit[i];
        f.demand_households[k] = fin.dem_households[i];
        f.demand_firms[k] = fin.dem_firms[i];
        f.demand_capital[k] = fin.dem_capital[i];
        f.demand_government[k] = fin.dem_government[i];
    }
    f.final_goods_profit_total = fin.final_goods_profit_total;
    f.durable_output = fin.durable_output;
    f.aggregate_investment = fin.aggregate_investment;
    f.capital_composite = fin.capital_composite;
    f.labour = fin.labour;
    f.labour_income = fin.labour_income;
    f.wage_adjust = fin.wage_adjust;
    f.capital_income = fin.capital_income;
    f.disposable_income = fin.disposable_income;
    f.household_composite = fin.household_composite;
    f.government_real = fin.government_real;
    f.eu_transfer = fin.eu_transfer;
    f.durable_payout = fin.durable_payout;

    f.durable_expected_profit.resize(Rd);
    for (int r = 0; r < Rd; ++r) {
        const int m = ctx.country(r);
        const Real sub =
            (par.subsidy_durable[r] + policy.subsidy_durable_eu[r]) / stocks.durable_firms[r];
        auto dp = durable_pricing_profit(pr.rental[r], pr.consumer_price[r],
                                         candidate.design_price[m], par.fixed_cost_durable[r], sub,
                                         fin.durable_output[r], cl.phi[r], par.durables_curvature);
        f.durable_expected_profit[r] = dp.expected_profit;
    }

    f.wage_inflation.assign(static_cast<std::size_t>(kSkills) * Rd, 0.0);
    if (!stocks.prev_wage.empty())
        for (int k = 0; k < kSkills * Rd; ++k)
            f.wage_inflation[k] = (candidate.wage[k] - stocks.prev_wage[k]) / candidate.wage[k];

    f.savings.resize(Rd);
    f.total_savings = 0.0;
    for (int q = 0; q < Rd; ++q) {
        f.savings[q] = par.saving_rate * fin.disposable_income[q];
        f.total_savings += topo.households[q] * f.savings[q];
    }

    f.gdp.assign(Rd, 0.0);
    for (int i = 0; i < nc; ++i) {
        const auto [s, r] = ctx.cells[i];
        f.gdp[r] += stocks.firms(s, r, R) * pr.value_added_price[i] * output[i];
    }
    std::vector<Real> gdp_m(M, 0.0);
    f.gdp_total = 0.0;
    for (int r = 0; r < Rd; ++r) {
        gdp_m[ctx.country(r)] += f.gdp[r];
        f.gdp_total += f.gdp[r];
    }

    // Consumption-tax take on every wedge-bearing composite purchase, and
    // import values (payments to the rest of the world at pre-tax prices).
    std::vector<Real> ctax(M, 0.0);
    std::vector<Real> imports_q(Rd, 0.0);
    const Real theta = par.goods_curvature;
    for (std::size_t i = 0; i < pr.all_cells.size(); ++i) {
        const int s = pr.all_cells[i] / R;
        const int r = pr.all_cells[i] % R;
        const Real p = candidate.goods_price[static_cast<std::size_t>(s) * R + r];
        const bool foreign_cell = (s == S - 1 && r == R - 1);
        for (int q = 0; q < Rd; ++q) {
            const int m = ctx.country(q);
            const Real composite = topo.households[q] * fin.household_composite[q] +
                                   fin.government_real[q] + fin.capital_composite[q];
            const Real quantity = pr.psi[i * Rd + q] * composite;
            const Real pre_tax = ctx.tau(s, r, q) * p * quantity;
            ctax[m] += par.consumption_tax_rate(m, s, S) * pre_tax;
            if (foreign_cell) imports_q[q] += pre_tax;
        }
    }
    for (int j = 0; j < nc; ++j) {  // foreign intermediate inputs
        const auto [u, q] = ctx.cells[j];
        const Real a = par.input_coeff(ctx.country(q), u, S - 1, S);
        if (a == 0.0) continue;
        const Real delivered = ctx.tau(S - 1, R - 1, q) * par.foreign_price;
        const Real coeff = std::pow(
            delivered / pr.input_price[static_cast<std::size_t>(S - 1) * Rd + q],
            1.0 / (theta - 1.0));
        imports_q[q] += delivered * stocks.firms(u, q, R) * coeff * a * output[j];
    }

    f.exports.assign(M, 0.0);
    f.imports.assign(M, 0.0);
    for (int i = 0; i < nc; ++i) {
        const auto [s, r] = ctx.cells[i];
        const Real p = candidate.goods_price[static_cast<std::size_t>(s) * R + r];
        f.exports[ctx.country(r)] += stocks.firms(s, r, R) * ctx.tau(s, r, R - 1) * p * pr.psi_f[i];
    }
    for (int q = 0; q < Rd; ++q) f.imports[ctx.country(q)] += imports_q[q];
    f.imports_by_region = imports_q;
    f.trade_balance.resize(M);
    f.trade_balance_total = 0.0;
    for (int m = 0; m < M; ++m) {
        f.trade_balance[m] = f.exports[m] - f.imports[m];
        f.trade_balance_total += f.trade_balance[m];
    }

    f.cohesion_budget = 0.0;
    for (int q = 0; q < Rd; ++q) f.cohesion_budget += fin.eu_transfer[q];
    for (int m = 0; m < M; ++m) f.cohesion_budget += policy.subsidy_rnd_eu[m] * pr.new_designs[m];
    for (Real v : policy.subsidy_final_eu) f.cohesion_budget += v;
    for (Real v : policy.subsidy_durable_eu) f.cohesion_budget += v;

    f.tax_revenue.resize(M);
    f.subsidies.resize(M);
    f.eu_contribution.resize(M);
    f.deficit.resize(M);
    for (int m = 0; m < M; ++m) {
        Real wage_bill = 0.0, cap_income = 0.0, purchases = 0.0, received = 0.0;
        for (int q = 0; q < Rd; ++q)
            if (ctx.country(q) == m) {
                wage_bill += topo.households[q] * fin.labour_income[q];
                cap_income += topo.households[q] * fin.capital_income[q];
                purchases += pr.consumer_price[q] * fin.government_real[q];
                received += fin.eu_transfer[q];
            }
        f.tax_revenue[m] =
            tax_revenue({ctax[m], wage_bill, cap_income}, par.wage_tax[m], par.profit_tax[m]);

        Real sub = par.subsidy_rnd[m] * pr.new_designs[m];
        for (int r = 0; r < Rd; ++r)
            if (ctx.country(r) == m) {
                sub += par.subsidy_durable[r];
                for (int s = 0; s < ctx.Sd; ++s)
                    sub += par.subsidy_final[static_cast<std::size_t>(s) * Rd + r];
            }
        f.subsidies[m] = sub;
        f.eu_contribution[m] = eu_contribution(gdp_m[m], f.gdp_total, f.cohesion_budget);

        Real debt = 0.0;  // bonds of country m held across all regions
        for (int q = 0; q < Rd; ++q)
            debt += topo.households[q] * stocks.bonds[static_cast<std::size_t>(q) * M + m];
        f.deficit[m] =
            deficit({purchases, par.household_transfers[m], f.eu_contribution[m],
                     par.foreign_return * debt, f.subsidies[m], f.tax_revenue[m], received});
    }

    f.foreign_interest = 0.0;
    for (int q = 0; q < Rd; ++q)
        f.foreign_interest += par.foreign_return * topo.households[q] * stocks.foreign_bonds[q];

    Real uses = f.trade_balance_total + f.foreign_interest;
    for (int r = 0; r < Rd; ++r) uses += pr.consumer_price[r] * fin.aggregate_investment[r];
    for (int m = 0; m < M; ++m) uses += f.deficit[m];
    f.closure_residual = f.total_savings - uses;
    return f;
}

DemandBreakdown total_demand(const PeriodFlows& flows, int sector, int region) {
    const int R = static_cast<int>(flows.consumer_price.size()) + 1;
    const std::size_t k = static_cast<std::size_t>(sector) * R + region;
    DemandBreakdown d;
    d.households = flows.demand_households[k];
    d.firms = flows.demand_firms[k];
    d.capital = flows.demand_capital[k];
    d.government = flows.demand_government[k];
    d.total = d.households + d.firms + d.capital + d.government;
    return d;
}

Real labour_market_residual(const Economy& economy, const PeriodFlows& flows, int region,
                            int skill) {
    const auto& topo = economy.topology;
    const auto& par = economy.params;
    const int R = topo.regions;
    const int Rd = topo.domestic_regions();
    const Real sigma = par.labour_curvature;
    const Real beff = effective_labour_units(
        economy.stocks.human_capital[static_cast<std::size_t>(skill) * Rd + region],
        par.skill_productivity[skill], sigma);
    Real demand = 0.0;
    for (int s = 0; s < topo.domestic_sectors(); ++s) {
        const Real n = economy.stocks.firms(s, region, R);
        if (n == 0.0) continue;
        demand += n * labour_variety_demand(
                          flows.candidate.wage[static_cast<std::size_t>(skill) * Rd + region], beff,
                          flows.labour_index[region],
                          flows.labour_use[static_cast<std::size_t>(s) * R + region], sigma);
    }
    if (skill == int(Skill::High)) demand += flows.rnd_labour_per_household[region];
    return flows.labour[static_cast<std::size_t>(skill) * Rd + region] - demand;
}

Real design_market_residual(const Economy& economy, const StockState& stocks,
                            const PeriodFlows& flows, int country) {
    Real demand = 0.0;
    const int Rd = economy.topology.domestic_regions();
    for (int r = 0; r < Rd; ++r)
        if (economy.topology.country_of_region[r] == country)
            demand += stocks.durable_firms[r] / flows.success_probability[r];
    return flows.new_designs[country] - demand;
}

TradeBalances trade_balance(const PeriodFlows& flows) {
    TradeBalances t;
    t.exports = flows.exports;
    t.imports = flows.imports;
    t.balance = flows.trade_balance;
    t.total = flows.trade_balance_total;
    return t;
}

Real financial_closure_residual(const PeriodFlows& flows) { return flows.closure_residual; }

std::vector<Real> arbitrage_residuals(const Economy& economy, const PeriodFlows& flows) {
    const auto& par = economy.params;
    std::vector<Real> res;
    const int Rd = economy.topology.domestic_regions();
    for (int r = 0; r < Rd; ++r) {
        const Real net =
            (flows.rental_rate[r] - par.capital_depreciation) * flows.consumer_price[r] +
            (1.0 - par.capital_depreciation) * flows.consumer_price_change[r];
        res.push_back(net - par.foreign_return);
    }
    for (int m = 0; m < economy.topology.countries; ++m) res.push_back(0.0);  // r^G_m = r_F
    return res;
}

Real walras_residual(const EquilibriumSolution& solution) { return solution.walras_absolute; }

Real gdp(const EquilibriumSolution& solution, int region) { return solution.gdp[region]; }

namespace {

struct ResidualSet {
    std::vector<Real> values;
    Real max_abs = 0.0;
};

ResidualSet residuals(const Ctx& ctx, const PeriodFlows& flows) {
    const auto& par = ctx.economy.params;
    const int Rd = ctx.Rd, R = ctx.R;
    ResidualSet rs;
    rs.values.assign(ctx.n, 0.0);
    for (int i = 0; i < ctx.n_price; ++i) {
        const auto [s, r] = ctx.cells[i];
        const Real p = flows.candidate.goods_price[static_cast<std::size_t>(s) * R + r];
        const Real mc = flows.marginal_cost[static_cast<std::size_t>(s) * R + r];
        rs.values[ctx.slot(i)] = std::log(par.goods_curvature * p / mc);
    }
    for (int e = 0; e < kSkills; ++e)
        for (int q = 0; q < Rd; ++q) {
            const Real l = flows.labour[e * Rd + q];
            if (!(l < 1.0) || !(l > 0.0))
                throw StepRejected("labour demand outside the time endowment");
            const Real eta = wage_rule_markup(flows.wage_inflation[e * Rd + q],
                                              par.labour_curvature, par.saving_rate,
                                              par.wage_tax[ctx.country(q)], par.wage_adjust_scale);
            if (!(eta > 0.0)) throw StepRejected("singular wage markup");
            const Real lhs =
                par.leisure_weight[e] * std::pow(1.0 - l, -par.leisure_curvature) / eta;
            const Real rhs = (1.0 - par.wage_tax[ctx.country(q)]) *
                             flows.candidate.wage[e * Rd + q] / flows.consumer_price[q];
            rs.values[ctx.slot(ctx.n_price + e * Rd + q)] = std::log(lhs / rhs);
        }
    for (int m = 0; m < ctx.M; ++m) {
        Real demand = 0.0;
        for (int r = 0; r < Rd; ++r)
            if (ctx.country(r) == m)
                demand += ctx.stocks.durable_firms[r] / flows.success_probability[r];
        rs.values[ctx.slot(ctx.n_price + ctx.n_wage + m)] =
            std::log(flows.new_designs[m] / demand);
    }
    for (Real v : rs.values) {
        if (!std::isfinite(v)) throw StepRejected("non-finite residual");
        rs.max_abs = std::max(rs.max_abs, std::abs(v));
    }
    return rs;
}

Candidate default_start(const Ctx& ctx) {
    Candidate c;
    const int R = ctx.R, S = ctx.S, Rd = ctx.Rd;
    c.goods_price.assign(static_cast<std::size_t>(S) * R, 0.0);
    c.goods_price[static_cast<std::size_t>(S - 1) * R + (R - 1)] = ctx.economy.params.foreign_price;
    for (const auto& [s, r] : ctx.cells)
        c.goods_price[static_cast<std::size_t>(s) * R + r] = 1.0;
    c.wage.assign(static_cast<std::size_t>(kSkills) * Rd, 1.0);
    c.design_price.assign(ctx.M, 1.0);
    // Design price near the zero-profit level at a rough demand guess.
    const auto& par = ctx.economy.params;
    const auto by_country = ctx.economy.topology.regions_of_country();
    Real union_designs = 0.0;
    for (Real j : ctx.stocks.designs) union_designs += j;
    for (int m = 0; m < ctx.M; ++m) {
        std::vector<Real> hw(by_country[m].size(), 1.0), hb, hc;
        for (int q : by_country[m]) {
            hb.push_back(ctx.stocks.human_capital[2 * Rd + q]);
            hc.push_back(ctx.economy.topology.households[q]);
        }
        const Real wrd = rnd_wage_index(par, hw, hb, hc);
        const Real productivity = std::pow(union_designs, par.rnd_spillover_union) *
                                  std::pow(ctx.stocks.designs[m], par.rnd_spillover_national);
        Real demand_guess = 0.0;
        for (int q : by_country[m])
            demand_guess += ctx.stocks.durable_firms[q] * static_cast<Real>(by_country[m].size());
        demand_guess = std::max(demand_guess, 1.0);
        const Real eps = par.rnd_supply_elasticity;
        c.design_price[m] = wrd / productivity * std::pow(demand_guess, (1.0 - eps) / eps);
    }
    return c;
}

}  // namespace

EquilibriumSolution make_solution(const Economy& economy, const StockState& stocks,
                                  const PeriodPolicy& policy, const PeriodFlows& f, int iterations,
                                  Real max_residual, bool converged) {
    const auto& topo = economy.topology;
    const auto& par = economy.params;
    const int R = topo.regions, S = topo.sectors, M = topo.countries;
    const int Rd = topo.domestic_regions(), Sd = topo.domestic_sectors();

    EquilibriumSolution sol;
    sol.converged = converged;
    sol.iterations = iterations;
    sol.max_residual = max_residual;
    sol.goods_price = f.candidate.goods_price;
    sol.wage = f.candidate.wage;
    sol.design_price = f.candidate.design_price;
    sol.output = f.output;
    sol.value_added_price = f.value_added_price;
    sol.marginal_cost = f.marginal_cost;
    sol.firm_profit = f.firm_profit;
    sol.input_price = f.input_price;
    sol.consumer_price = f.consumer_price;
    sol.consumer_price_change = f.consumer_price_change;
    sol.wage_inflation = f.wage_inflation;
    sol.labour = f.labour;
    sol.labour_index = f.labour_index;
    sol.disposable_income = f.disposable_income;
    sol.savings = f.savings;
    sol.wage_adjust_cost = f.wage_adjust;
    sol.consumption.resize(Rd);
    for (int q = 0; q < Rd; ++q)
        sol.consumption[q] = (1.0 - par.saving_rate) * f.disposable_income[q] / f.consumer_price[q];
    sol.rental_rate = f.rental_rate;
    sol.durable_price = f.durable_price;
    sol.durable_index = f.durable_index;
    sol.durable_output = f.durable_output;
    sol.durable_profit = f.durable_expected_profit;
    sol.durable_payout = f.durable_payout;
    sol.investment.resize(Rd);
    sol.investment_value.resize(Rd);
    for (int r = 0; r < Rd; ++r) {
        sol.investment[r] = f.aggregate_investment[r] / stocks.durable_firms[r];
        sol.investment_value[r] = f.consumer_price[r] * f.aggregate_investment[r];
    }
    sol.success_probability = f.success_probability;
    sol.human_capital_employed = f.human_capital_employed;
    sol.new_designs = f.new_designs;
    sol.rnd_labour = f.rnd_labour;
    sol.rnd_wage_index = f.rnd_wage_index;
    sol.bond_rate.assign(M, par.foreign_return);
    sol.tax_revenue = f.tax_revenue;
    sol.deficit = f.deficit;
    sol.subsidies = f.subsidies;
    sol.eu_contribution = f.eu_contribution;
    sol.eu_transfers = f.eu_transfer;
    sol.government_demand = f.government_real;
    sol.cohesion_budget = f.cohesion_budget;
    sol.exports = f.exports;
    sol.imports = f.imports;
    sol.trade_balance = f.trade_balance;
    sol.trade_balance_total = f.trade_balance_total;
    sol.gdp = f.gdp;
    sol.gdp_total = f.gdp_total;
    sol.total_savings = f.total_savings;
    sol.foreign_price_index = f.foreign_allocation_index;
    sol.walras_absolute = f.closure_residual;
    sol.walras_relative = std::abs(f.closure_residual) / f.gdp_total;
    sol.phi_floor_bound = f.phi_floor_bound;

    sol.zero_profit_output.assign(static_cast<std::size_t>(S) * R, 0.0);
    sol.zero_profit_durable.assign(Rd, 0.0);
    const Real theta = par.goods_curvature;
    const Real rho = par.durables_curvature;
    for (int s = 0; s < Sd; ++s)
        for (int r = 0; r < Rd; ++r) {
            const std::size_t k = static_cast<std::size_t>(s) * R + r;
            const Real n = stocks.firms(s, r, R);
            if (n == 0.0) continue;
            const Real sub = (par.subsidy_final[static_cast<std::size_t>(s) * Rd + r] +
                              policy.subsidy_final_eu[static_cast<std::size_t>(s) * Rd + r]) /
                             n;
            sol.zero_profit_output[k] =
                theta *
                (f.value_added_price[k] *
                     par.fixed_cost_final[static_cast<std::size_t>(s) * Rd + r] -
                 sub) /
                ((1.0 - theta) * f.marginal_cost[k]);
        }
    for (int r = 0; r < Rd; ++r) {
        const int m = topo.country_of_region[r];
        const Real sub =
            (par.subsidy_durable[r] + policy.subsidy_durable_eu[r]) / stocks.durable_firms[r];
        sol.zero_profit_durable[r] =
            (f.candidate.design_price[m] + par.fixed_cost_durable[r] - sub) /
            ((1.0 - rho) / rho * f.rental_rate[r] * f.consumer_price[r]);
    }
    return sol;
}

PeriodFlows solution_flows(const Economy& economy, const StockState& stocks,
                           const PeriodPolicy& policy, const EquilibriumSolution& solution) {
    Candidate c;
    c.goods_price = solution.goods_price;
    c.wage = solution.wage;
    c.design_price = solution.design_price;
    return evaluate_flows(economy, stocks, policy, c);
}

EquilibriumSolution solve_period(const Economy& economy, const StockState& stocks,
                                 const PeriodPolicy& policy, const SolveOptions& options,
                                 const Candidate* warm_start) {
    Ctx ctx(economy, stocks, policy, options.reverse_unknown_ordering);
    if (ctx.n_price == 0) throw NonConvergence(std::numeric_limits<Real>::infinity(), 0);

    Candidate cand = warm_start ? *warm_start : default_start(ctx);
    std::vector<Real> v = ctx.pack(cand);

    PeriodFlows flows;
    ResidualSet rs;
    auto try_eval = [&](const std::vector<Real>& vec, PeriodFlows& flows_out,
                        ResidualSet& rs_out) -> bool {
        try {
            Candidate c = ctx.unpack(vec);
            flows_out = evaluate_flows(economy, stocks, policy, c);
            rs_out = residuals(ctx, flows_out);
            return true;
        } catch (const StepRejected&) {
            return false;
        }
    };

    {
        // A cold start can put labour demand beyond the endowment; raising
        // wages (and prices, mildly) moves the point inside.
        int guard = 0;
        while (!try_eval(v, flows, rs)) {
            if (++guard > 60) throw NonConvergence(std::numeric_limits<Real>::infinity(), 0);
            for (int i = 0; i < ctx.n_wage; ++i) v[ctx.slot(ctx.n_price + i)] += 0.4;
            for (int i = 0; i < ctx.n_price; ++i) v[ctx.slot(i)] += 0.2;
        }
    }

    Real best = rs.max_abs;
    int iter = 0;
    Eigen::MatrixXd jac(ctx.n, ctx.n);
    Eigen::VectorXd fvec(ctx.n), delta(ctx.n);

    while (true) {
        if (options.trace)
            *options.trace << "{\"iteration\":" << iter << ",\"max_residual\":" << rs.max_abs
                           << "}\n";
        if (rs.max_abs <= options.tol)
            return make_solution(economy, stocks, policy, flows, iter, rs.max_abs, true);
        if (iter >= options.max_iter) throw NonConvergence(best, iter);
        ++iter;

        bool jac_ok = true;
        for (int j = 0; j < ctx.n && jac_ok; ++j) {
            std::vector<Real> vj = v;
            vj[j] += options.fd_step;
            PeriodFlows fj;
            ResidualSet rj;
            if (try_eval(vj, fj, rj)) {
                for (int i = 0; i < ctx.n; ++i)
                    jac(i, j) = (rj.values[i] - rs.values[i]) / options.fd_step;
                continue;
            }
            vj[j] = v[j] - options.fd_step;  // backward difference fallback
            if (!try_eval(vj, fj, rj)) {
                jac_ok = false;
                break;
            }
            for (int i = 0; i < ctx.n; ++i)
                jac(i, j) = (rs.values[i] - rj.values[i]) / options.fd_step;
        }

        bool stepped = false;
        if (jac_ok) {
            for (int i = 0; i < ctx.n; ++i) fvec(i) = rs.values[i];
            Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
            lu.setThreshold(1e-13);
            if (!lu.isInvertible()) {
                int worst = 0;
                Real smallest = std::numeric_limits<Real>::infinity();
                for (int i = 0; i < ctx.n; ++i) {
                    const Real norm = jac.row(i).norm();
                    if (norm < smallest) {
                        smallest = norm;
                        worst = i;
                    }
                }
                throw SingularJacobian(ctx.residual_name(worst));
            }
            delta = lu.solve(-fvec);
            Real scale = 1.0;
            const Real inf_norm = delta.cwiseAbs().maxCoeff();
            if (inf_norm > 2.0) scale = 2.0 / inf_norm;  // log-space trust region

            for (Real alpha = options.damping * scale;
                 alpha > options.damping * scale / 512.0; alpha *= 0.5) {
                std::vector<Real> vt = v;
                for (int i = 0; i < ctx.n; ++i) vt[i] += alpha * delta(i);
                PeriodFlows ft;
                ResidualSet rt;
                if (!try_eval(vt, ft, rt)) continue;
                if (rt.max_abs < rs.max_abs * (1.0 - 1e-4 * alpha) || rt.max_abs <= options.tol) {
                    v = std::move(vt);
                    flows = std::move(ft);
                    rs = std::move(rt);
                    stepped = true;
                    break;
                }
            }
        }

        if (!stepped) {
            // Tatonnement fallback: prices follow the markup map, wages the
            // wage rule, design prices the market gap (all under-relaxed).
            bool improved = false;
            Real damp = 0.5;
            const Real eps = economy.params.rnd_supply_elasticity;
            for (int sweep = 0; sweep < 12 && !improved; ++sweep, damp *= 0.6) {
                std::vector<Real> vt = v;
                for (int i = 0; i < ctx.n_price; ++i)
                    vt[ctx.slot(i)] -= std::clamp(damp * rs.values[ctx.slot(i)], -0.5, 0.5);
                for (int i = 0; i < ctx.n_wage; ++i)
                    vt[ctx.slot(ctx.n_price + i)] +=
                        std::clamp(damp * rs.values[ctx.slot(ctx.n_price + i)], -0.5, 0.5);
                for (int m = 0; m < ctx.n_design; ++m)
                    vt[ctx.slot(ctx.n_price + ctx.n_wage + m)] -= std::clamp(
                        damp * (1.0 - eps) / eps *
                            rs.values[ctx.slot(ctx.n_price + ctx.n_wage + m)],
                        -0.5, 0.5);
                PeriodFlows ft;
                ResidualSet rt;
                if (!try_eval(vt, ft, rt)) continue;
                if (rt.max_abs < rs.max_abs) {
                    v = std::move(vt);
                    flows = std::move(ft);
                    rs = std::move(rt);
                    improved = true;
                }
            }
            if (!improved) throw NonConvergence(std::min(best, rs.max_abs), iter);
        }
        best = std::min(best, rs.max_abs);
    }
}

}  // namespace rcge
