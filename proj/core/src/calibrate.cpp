#include <algorithm>
#include <cmath>

#include <rcge/ces.hpp>
#include <rcge/household.hpp>
#include <rcge/production.hpp>
#include <rcge/scenario_io.hpp>

namespace rcge {

namespace {

// Intermediate-input price index for input sector s at buyer region q,
// straight from prices and counts.
Real input_index_at(const Economy& e, const std::vector<Real>& prices,
                    const std::vector<Real>& firms, int s, int q) {
    const int R = e.topology.regions;
    std::vector<VarietyTerm> terms;
    for (int r = 0; r < R; ++r) {
        const Real n = firms[static_cast<std::size_t>(s) * R + r];
        if (n == 0.0) continue;
        terms.push_back({n, 1.0,
                         e.topology.tau(s, r, q) * prices[static_cast<std::size_t>(s) * R + r]});
    }
    return ces_price_index(terms, e.params.goods_curvature);
}

Real consumer_index_at(const Economy& e, const std::vector<Real>& prices,
                       const std::vector<Real>& firms, int q) {
    return consumer_price_index(e.topology, e.params, e.topology.trade_cost, prices, firms, q);
}

Real rel_diff(Real a, Real b) {
    const Real scale = std::max({std::abs(a), std::abs(b), 1e-8});
    return std::abs(a - b) / scale;
}

}  // namespace

BaseYearFlows generate_base_year(const Economy& economy, const EquilibriumSolution& sol) {
    const auto& topo = economy.topology;
    const auto& par = economy.params;
    const auto& st = economy.stocks;
    const int R = topo.regions, S = topo.sectors, M = topo.countries;
    const int Rd = R - 1, Sd = S - 1;
    const Real theta = par.goods_curvature;

    BaseYearFlows f;
    f.prices = sol.goods_price;
    f.wages = sol.wage;
    f.output = sol.output;
    f.consumption.assign(static_cast<std::size_t>(Rd) * S * R, 0.0);
    for (int q = 0; q < Rd; ++q) {
        const int m = topo.country_of_region[q];
        for (int s = 0; s < S; ++s)
            for (int r = 0; r < R; ++r) {
                const Real n = st.firms(s, r, R);
                if (n == 0.0) continue;
                const Real wedge = topo.tau(s, r, q) *
                                   (1.0 + par.consumption_tax_rate(m, s, S)) *
                                   sol.goods_price[static_cast<std::size_t>(s) * R + r];
                const Real c = consumption_demand(wedge, par.sector_weight[s],
                                                  sol.consumer_price[q],
                                                  sol.disposable_income[q], par.saving_rate,
                                                  theta);
                f.consumption[(static_cast<std::size_t>(q) * S + s) * R + r] =
                    topo.households[q] * n * wedge * c;
            }
    }
    f.intermediates.assign(static_cast<std::size_t>(Rd) * Sd * S, 0.0);
    for (int q = 0; q < Rd; ++q) {
        const int m = topo.country_of_region[q];
        for (int u = 0; u < Sd; ++u) {
            const Real n = st.firms(u, q, R);
            if (n == 0.0) continue;
            for (int s = 0; s < S; ++s) {
                const Real a = par.input_coeff(m, u, s, S);
                if (a == 0.0) continue;
                const Real pu = sol.input_price[static_cast<std::size_t>(s) * Rd + q];
                f.intermediates[(static_cast<std::size_t>(q) * Sd + u) * S + s] =
                    n * pu * a * sol.output[static_cast<std::size_t>(u) * R + q];
            }
        }
    }
    f.labour_compensation.assign(static_cast<std::size_t>(kSkills) * Rd, 0.0);
    for (int e = 0; e < kSkills; ++e)
        for (int q = 0; q < Rd; ++q)
            f.labour_compensation[static_cast<std::size_t>(e) * Rd + q] =
                topo.households[q] * sol.wage[e * Rd + q] * sol.labour[e * Rd + q];
    f.rnd_wage_bill.resize(M);
    f.design_sales.resize(M);
    for (int m = 0; m < M; ++m) {
        f.rnd_wage_bill[m] = sol.rnd_wage_index[m] * sol.rnd_labour[m];
        f.design_sales[m] = sol.design_price[m] * sol.new_designs[m];
    }
    f.durable_sales.resize(Rd);
    f.rentals.resize(Rd);
    f.investment_value.resize(Rd);
    f.government_value.resize(Rd);
    f.adjustment_value.resize(Rd);
    f.durable_fixed_value.resize(Rd);
    for (int r = 0; r < Rd; ++r) {
        const Real a_r = st.durable_firms[r];
        f.durable_sales[r] = a_r * sol.durable_price[r] * sol.durable_output[r];
        f.rentals[r] =
            sol.rental_rate[r] * a_r * sol.consumer_price[r] * sol.durable_output[r];
        f.investment_value[r] = sol.investment_value[r];
        f.government_value[r] = sol.consumer_price[r] * sol.government_demand[r];
        f.adjustment_value[r] = topo.households[r] * sol.wage_adjust_cost[r];
        f.durable_fixed_value[r] = a_r * par.fixed_cost_durable[r];
    }
    f.exports.assign(static_cast<std::size_t>(S) * R, 0.0);
    const Real foreign_spending = par.foreign_expenditure_share * par.foreign_income;
    for (int s = 0; s < Sd; ++s)
        for (int r = 0; r < Rd; ++r) {
            const Real n = st.firms(s, r, R);
            if (n == 0.0) continue;
            const Real delivered = topo.tau(s, r, R - 1) *
                                   sol.goods_price[static_cast<std::size_t>(s) * R + r];
            const Real cf = ces_demand(delivered, par.sector_weight[s], sol.foreign_price_index,
                                       foreign_spending, theta);
            f.exports[static_cast<std::size_t>(s) * R + r] = n * delivered * cf;
        }
    PeriodPolicy baseline = baseline_policy(economy);
    PeriodFlows flows = solution_flows(economy, st, baseline, sol);
    f.imports = flows.imports_by_region;
    f.gdp = sol.gdp;
    return f;
}

namespace {

struct Inverted {
    std::vector<Real> sector_weight;
    std::vector<Real> input_coefficient;
    std::vector<Real> fixed_cost_final;
};

Inverted invert_flows(const Economy& economy, const BaseYearFlows& f) {
    const auto& topo = economy.topology;
    const auto& par = economy.params;
    const auto& st = economy.stocks;
    const int R = topo.regions, S = topo.sectors, M = topo.countries;
    const int Rd = R - 1, Sd = S - 1;
    const Real theta = par.goods_curvature;
    const Real rho = par.durables_curvature;

    Inverted out;

    // Sector weights from spending ratios within each buyer region; the
    // reference variety is the first active cell of sector 0.
    std::vector<Real> beta_ratio(S, 0.0);
    std::vector<int> ref_region(S, -1);
    for (int s = 0; s < S; ++s)
        for (int r = 0; r < R; ++r)
            if (st.firms(s, r, R) > 0.0) {
                ref_region[s] = r;
                break;
            }
    const int s0 = 0, r0 = ref_region[0];
    if (r0 < 0) throw InfeasibleCalibration("sector 0 has no firms anywhere");
    beta_ratio[s0] = 1.0;
    for (int s = 0; s < S; ++s) {
        if (s == s0) continue;
        const int r = ref_region[s];
        if (r < 0) throw InfeasibleCalibration("sector " + std::to_string(s) + " has no firms");
        Real acc = 0.0;
        int count = 0;
        Real first = 0.0;
        for (int q = 0; q < Rd; ++q) {
            const int m = topo.country_of_region[q];
            const Real v = f.consumption[(static_cast<std::size_t>(q) * S + s) * R + r];
            const Real v0 = f.consumption[(static_cast<std::size_t>(q) * S + s0) * R + r0];
            if (!(v > 0.0) || !(v0 > 0.0))
                throw InfeasibleCalibration("household spending missing for sector " +
                                            std::to_string(s) + " in region " + std::to_string(q));
            const Real pt = topo.tau(s, r, q) * (1.0 + par.consumption_tax_rate(m, s, S)) *
                            f.prices[static_cast<std::size_t>(s) * R + r];
            const Real pt0 = topo.tau(s0, r0, q) * (1.0 + par.consumption_tax_rate(m, s0, S)) *
                             f.prices[static_cast<std::size_t>(s0) * R + r0];
            const Real lhs = (v / v0) * (st.firms(s0, r0, R) / st.firms(s, r, R)) *
                             std::pow(pt0 / pt, theta / (theta - 1.0));
            const Real ratio = std::pow(lhs, 1.0 - theta);
            if (count == 0)
                first = ratio;
            else if (rel_diff(ratio, first) > 1e-6)
                throw InfeasibleCalibration(
                    "household spending shares are inconsistent across regions for sector " +
                    std::to_string(s));
            acc += ratio;
            ++count;
        }
        beta_ratio[s] = acc / count;
    }
    Real mean = 0.0;
    for (Real b : beta_ratio) mean += b;
    mean /= S;
    out.sector_weight.resize(S);
    for (int s = 0; s < S; ++s) out.sector_weight[s] = beta_ratio[s] / mean;

    // Technical coefficients: a = value / (N * P^u * X), country-common.
    out.input_coefficient.assign(static_cast<std::size_t>(M) * Sd * S, 0.0);
    for (int m = 0; m < M; ++m)
        for (int u = 0; u < Sd; ++u)
            for (int s = 0; s < S; ++s) {
                Real acc = 0.0, first = 0.0;
                int count = 0;
                for (int q = 0; q < Rd; ++q) {
                    if (topo.country_of_region[q] != m) continue;
                    const Real n = st.firms(u, q, R);
                    if (n == 0.0) continue;
                    const Real v = f.intermediates[(static_cast<std::size_t>(q) * Sd + u) * S + s];
                    const Real pu = input_index_at(economy, f.prices, st.final_firms, s, q);
                    const Real x = f.output[static_cast<std::size_t>(u) * R + q];
                    const Real a = v / (n * pu * x);
                    if (count == 0)
                        first = a;
                    else if (rel_diff(a, first) > 1e-6)
                        throw InfeasibleCalibration(
                            "intermediate coefficients differ across regions of country " +
                            std::to_string(m) + " (sectors " + std::to_string(u) + " <- " +
                            std::to_string(s) + ")");
                    acc += a;
                    ++count;
                }
                if (count > 0)
                    out.input_coefficient[(static_cast<std::size_t>(m) * Sd + u) * S + s] =
                        acc / count;
            }

    // Fixed costs from zero profit at base prices. The value-added price
    // needs the inverted weights for the consumer index behind r^k.
    Economy probe = economy;
    probe.params.sector_weight = out.sector_weight;
    out.fixed_cost_final.assign(static_cast<std::size_t>(Sd) * Rd, 0.0);
    for (int r = 0; r < Rd; ++r) {
        const Real pc = consumer_index_at(probe, f.prices, st.final_firms, r);
        const Real rk = par.capital_depreciation + par.foreign_return / pc;
        const Real pz = rk * pc / rho;
        const Real pz_index = std::pow(st.durable_firms[r], (rho - 1.0) / rho) * pz;
        const std::array<Real, kSkills> w{f.wages[0 * Rd + r], f.wages[1 * Rd + r],
                                          f.wages[2 * Rd + r]};
        const std::array<Real, kSkills> b{st.human_capital[0 * Rd + r],
                                          st.human_capital[1 * Rd + r],
                                          st.human_capital[2 * Rd + r]};
        const Real wi = labour_price_index(par, w, b, topo.households[r]);
        for (int s = 0; s < Sd; ++s) {
            const Real n = st.firms(s, r, R);
            if (n == 0.0) continue;
            const Real py = value_added_price(pz_index, wi, st.public_capital[r],
                                              par.capital_share[s],
                                              par.public_capital_elasticity);
            const Real sub = par.subsidy_final[static_cast<std::size_t>(s) * Rd + r] / n;
            const Real fc = ((1.0 - theta) * f.prices[static_cast<std::size_t>(s) * R + r] *
                                 f.output[static_cast<std::size_t>(s) * R + r] +
                             sub) /
                            py;
            if (!(fc > 0.0))
                throw InfeasibleCalibration("implied fixed cost non-positive at sector " +
                                            std::to_string(s) + ", region " + std::to_string(r));
            out.fixed_cost_final[static_cast<std::size_t>(s) * Rd + r] = fc;
        }
    }
    return out;
}

}  // namespace

void check_base_year_consistency(const Economy& economy, const BaseYearFlows& f) {
    const auto& topo = economy.topology;
    const auto& st = economy.stocks;
    const int R = topo.regions, S = topo.sectors;
    const int Rd = R - 1, Sd = S - 1;
    const Real theta = economy.params.goods_curvature;

    Inverted inv = invert_flows(economy, f);
    Economy probe = economy;
    probe.params.sector_weight = inv.sector_weight;

    // Composite absorption (everything bought through the consumer-type CES
    // besides household consumption) per region, tax-inclusive value.
    std::vector<Real> composite_value(Rd), pc(Rd);
    for (int q = 0; q < Rd; ++q) {
        composite_value[q] = f.government_value[q] + f.investment_value[q] +
                             f.adjustment_value[q] + f.durable_fixed_value[q];
        pc[q] = consumer_index_at(probe, f.prices, st.final_firms, q);
    }

    // Output disposition per active cell: producer revenue equals deliveries.
    for (int s = 0; s < Sd; ++s)
        for (int r = 0; r < Rd; ++r) {
            const Real n = st.firms(s, r, R);
            if (n == 0.0) continue;
            const Real p = f.prices[static_cast<std::size_t>(s) * R + r];
            const Real revenue = n * p * f.output[static_cast<std::size_t>(s) * R + r];
            Real uses = f.exports[static_cast<std::size_t>(s) * R + r];
            for (int q = 0; q < Rd; ++q) {
                const int m = topo.country_of_region[q];
                const Real tc = probe.params.consumption_tax_rate(m, s, S);
                uses += f.consumption[(static_cast<std::size_t>(q) * S + s) * R + r] / (1.0 + tc);
                const Real wedge = topo.tau(s, r, q) * (1.0 + tc) * p;
                const Real psi = std::pow(wedge / (inv.sector_weight[s] * pc[q]),
                                          1.0 / (theta - 1.0));
                uses += topo.tau(s, r, q) * p * psi * composite_value[q] / pc[q];
                for (int u = 0; u < Sd; ++u) {
                    const Real v = f.intermediates[(static_cast<std::size_t>(q) * Sd + u) * S + s];
                    if (v == 0.0) continue;
                    const Real pu = input_index_at(probe, f.prices, st.final_firms, s, q);
                    const Real share = n * std::pow(topo.tau(s, r, q) * p / pu,
                                                    theta / (theta - 1.0));
                    uses += v * share;
                }
            }
            if (rel_diff(revenue, uses) > 1e-6)
                throw InfeasibleCalibration(
                    "output disposition does not balance at sector " + std::to_string(s) +
                    ", region " + std::to_string(r) + " (revenue " + std::to_string(revenue) +
                    " vs uses " + std::to_string(uses) + ")");
        }
}

CalibrationReport calibrate(Economy& economy, const BaseYearFlows* flows,
                            const CalibrationOptions& options) {
    const auto& topo = economy.topology;
    auto& par = economy.params;
    auto& st = economy.stocks;
    const int R = topo.regions, S = topo.sectors, M = topo.countries;
    const int Rd = R - 1, Sd = S - 1;
    const Real theta = par.goods_curvature;
    const Real rho = par.durables_curvature;

    CalibrationReport report;

    if (flows) {
        check_base_year_consistency(economy, *flows);
        Inverted inv = invert_flows(economy, *flows);
        par.sector_weight = inv.sector_weight;
        par.input_coefficient = inv.input_coefficient;
        par.fixed_cost_final = inv.fixed_cost_final;
        report.notes.push_back("sector weights, input coefficients and fixed costs inverted "
                               "from base-year flows");
    }

    // Stationary education time and a fresh expectations history.
    par.education_time.assign(static_cast<std::size_t>(kSkills) * Rd,
                              std::log(1.0 + par.human_capital_depreciation));
    st.prev_wage.clear();
    st.prev_price_index.clear();

    const PeriodPolicy baseline = baseline_policy(economy);
    const Real relax = options.relax;
    auto blend = [&](Real old_value, Real new_value) {
        return (1.0 - relax) * old_value + relax * new_value;
    };

    EquilibriumSolution sol;
    Candidate warm;
    bool have_warm = false;
    Real drift = 0.0;
    int iter = 0;
    for (; iter < options.max_iter; ++iter) {
        sol = solve_period(economy, st, baseline, options.solver, have_warm ? &warm : nullptr);
        warm.goods_price = sol.goods_price;
        warm.wage = sol.wage;
        warm.design_price = sol.design_price;
        have_warm = true;

        // Distance from stationarity under the current items.
        StockState next = advance_stocks(economy, st, sol, baseline);
        drift = 0.0;
        auto acc = [&](const std::vector<Real>& a, const std::vector<Real>& b) {
            for (std::size_t i = 0; i < a.size(); ++i) drift = std::max(drift, rel_diff(a[i], b[i]));
        };
        acc(next.capital, st.capital);
        acc(next.capital_carry, st.capital_carry);
        acc(next.public_capital, st.public_capital);
        acc(next.human_capital, st.human_capital);
        acc(next.final_firms, st.final_firms);
        acc(next.durable_firms, st.durable_firms);
        acc(next.designs, st.designs);
        acc(next.equity, st.equity);
        acc(next.bonds, st.bonds);
        acc(next.foreign_bonds, st.foreign_bonds);
        if (drift <= options.tol) break;

        // Zero final-goods profit pins the fixed costs.
        for (int s = 0; s < Sd; ++s)
            for (int r = 0; r < Rd; ++r) {
                const Real n = st.firms(s, r, R);
                if (n == 0.0) continue;
                const std::size_t k = static_cast<std::size_t>(s) * R + r;
                const Real sub = par.subsidy_final[static_cast<std::size_t>(s) * Rd + r] / n;
                const Real target =
                    ((1.0 - theta) * sol.goods_price[k] * sol.output[k] + sub) /
                    sol.value_added_price[k];
                Real& fc = par.fixed_cost_final[static_cast<std::size_t>(s) * Rd + r];
                fc = blend(fc, target);
                if (!(fc > 0.0))
                    throw InfeasibleCalibration("fixed cost driven non-positive at sector " +
                                                std::to_string(s) + ", region " +
                                                std::to_string(r));
            }

        // Zero expected durable profit pins the durable fixed costs.
        for (int r = 0; r < Rd; ++r) {
            const int m = topo.country_of_region[r];
            const Real sub = par.subsidy_durable[r] / st.durable_firms[r];
            const Real target = (1.0 - rho) / rho * sol.rental_rate[r] * sol.consumer_price[r] *
                                    sol.durable_output[r] -
                                sol.design_price[m] + sub;
            Real& fc = par.fixed_cost_durable[r];
            fc = blend(fc, target);
            if (!(fc > 0.0))
                throw InfeasibleCalibration(
                    "durable fixed cost driven non-positive in region " + std::to_string(r) +
                    "; the benchmark scale cannot cover the design price");
        }

        // Foreign spending balances trade (net of foreign interest).
        {
            Real imports_total = 0.0, interest = 0.0;
            for (int m = 0; m < M; ++m) imports_total += sol.imports[m];
            for (int q = 0; q < Rd; ++q)
                interest += par.foreign_return * topo.households[q] * st.foreign_bonds[q];
            const Real target = (imports_total - interest) / par.foreign_expenditure_share;
            if (!(target > 0.0))
                throw InfeasibleCalibration("foreign interest exceeds import value");
            par.foreign_income = blend(par.foreign_income, target);
        }

        // Transfers balance each government budget.
        for (int m = 0; m < M; ++m) {
            Real purchases = 0.0, debt = 0.0;
            for (int q = 0; q < Rd; ++q) {
                if (topo.country_of_region[q] == m)
                    purchases += sol.consumer_price[q] * sol.government_demand[q];
                debt += topo.households[q] * st.bonds[static_cast<std::size_t>(q) * M + m];
            }
            const Real target = sol.tax_revenue[m] - purchases - sol.eu_contribution[m] -
                                par.foreign_return * debt - sol.subsidies[m];
            par.household_transfers[m] = blend(par.household_transfers[m], target);
        }

        // Design stocks reproduce themselves; capital follows solved demand;
        // public capital sits at the level public investment sustains.
        for (int m = 0; m < M; ++m) st.designs[m] = blend(st.designs[m], sol.new_designs[m]);
        for (int r = 0; r < Rd; ++r) {
            st.capital[r] = sol.durable_output[r];
            st.capital_carry[r] = st.durable_firms[r] * st.capital[r];
        }
        if (par.capital_depreciation > 0.0)
            for (int q = 0; q < Rd; ++q) {
                const int m = topo.country_of_region[q];
                const Real gi =
                    par.government_investment_share[m] * sol.government_demand[q];
                st.public_capital[q] =
                    blend(st.public_capital[q], gi / par.capital_depreciation);
            }

        // Equity spread in proportion to regional GDP.
        for (int r = 0; r < Rd; ++r) {
            const Real issued = sol.consumer_price[r] * st.durable_firms[r] * st.capital[r];
            for (int q = 0; q < Rd; ++q)
                st.equity[static_cast<std::size_t>(q) * Rd + r] =
                    (sol.gdp[q] / sol.gdp_total) * issued / topo.households[q];
        }

        // Optional leisure-weight tuning toward target labour supplies.
        if (options.labour_supply_target) {
            for (int e = 0; e < kSkills; ++e) {
                Real acc_target = 0.0;
                for (int q = 0; q < Rd; ++q) {
                    const int m = topo.country_of_region[q];
                    const Real eta = par.labour_curvature * (1.0 - par.saving_rate);
                    acc_target += eta * (1.0 - par.wage_tax[m]) * sol.wage[e * Rd + q] /
                                  sol.consumer_price[q] *
                                  std::pow(1.0 - (*options.labour_supply_target)[e],
                                           par.leisure_curvature);
                }
                par.leisure_weight[e] = blend(par.leisure_weight[e], acc_target / Rd);
            }
        }
    }

    if (drift > options.tol)
        throw InfeasibleCalibration("stationarity iteration stalled at drift " +
                                    std::to_string(drift));

    // Freeze the expectations history at the benchmark so the first simulated
    // period carries zero wage and price inflation.
    st.prev_wage = sol.wage;
    st.prev_price_index = sol.consumer_price;
    sol = solve_period(economy, st, baseline, options.solver, &warm);

    report.benchmark = sol;
    report.drift = drift;
    report.iterations = iter;
    report.notes.push_back("public capital set to the level sustained by public investment");
    report.notes.push_back("household transfers set to balance government budgets");
    report.notes.push_back("foreign spending set to balance trade net of foreign interest");
    return report;
}

}  // namespace rcge
