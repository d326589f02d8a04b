#include <rcge/synthetic.hpp>

#include <cmath>
#include <random>
#include <stdexcept>

namespace rcge::synthetic {

namespace {

void fill_common_parameters(Economy& e) {
    auto& par = e.params;
    const int M = e.topology.countries;
    const int Rd = e.topology.domestic_regions();
    const int Sd = e.topology.domestic_sectors();
    const int S = e.topology.sectors;

    par.goods_curvature = 0.6;
    par.durables_curvature = 0.5;
    par.labour_curvature = 0.55;
    par.leisure_curvature = 1.5;
    par.leisure_weight = {1.0, 1.0, 1.0};
    par.skill_productivity = {0.8, 1.0, 1.2};
    par.saving_rate = 0.2;

    par.sector_weight.assign(S, 1.05);
    par.sector_weight[S - 1] = static_cast<Real>(S) - 1.05 * Sd;

    par.capital_share.resize(Sd);
    for (int s = 0; s < Sd; ++s) par.capital_share[s] = 0.3 + 0.05 * (s % 3);
    par.public_capital_elasticity = 0.05;

    par.input_coefficient.assign(static_cast<std::size_t>(M) * Sd * S, 0.0);
    for (int m = 0; m < M; ++m)
        for (int u = 0; u < Sd; ++u)
            for (int s = 0; s < S; ++s) {
                Real a = 0.0;
                if (s == u)
                    a = 0.08;
                else if (s < Sd)
                    a = 0.04 / std::max(1, Sd - 1);
                else
                    a = 0.03;  // imported inputs
                par.input_coefficient[(static_cast<std::size_t>(m) * Sd + u) * S + s] = a;
            }

    par.fixed_cost_final.assign(static_cast<std::size_t>(Sd) * Rd, 1.0);
    par.fixed_cost_durable.assign(Rd, 0.5);
    par.capital_depreciation = 0.06;
    par.human_capital_depreciation = 0.02;
    par.rnd_spillover_union = 0.2;
    par.rnd_spillover_national = 0.3;
    par.rnd_supply_elasticity = 0.5;
    par.innovation_weight = 0.5;
    par.entry_speed = 0.4;

    par.consumption_tax.assign(static_cast<std::size_t>(M) * S, 0.1);
    par.wage_tax.assign(M, 0.25);
    par.profit_tax.assign(M, 0.2);

    par.foreign_price = 1.0;
    par.foreign_return = 0.03;
    par.foreign_income = 30.0;
    par.foreign_expenditure_share = 0.3;

    par.government_purchases.resize(M);
    for (int m = 0; m < M; ++m)
        par.government_purchases[m] = 0.08 * e.topology.country_households(m);
    par.government_investment_share.assign(M, 0.5);
    par.household_transfers.assign(M, 0.0);

    par.subsidy_final.assign(static_cast<std::size_t>(Sd) * Rd, 0.0);
    par.subsidy_durable.assign(Rd, 0.0);
    par.subsidy_rnd.assign(M, 0.0);
    par.education_time.assign(static_cast<std::size_t>(kSkills) * Rd,
                              std::log(1.0 + par.human_capital_depreciation));
}

void fill_stocks(Economy& e) {
    auto& st = e.stocks;
    const auto& topo = e.topology;
    const int R = topo.regions, S = topo.sectors, M = topo.countries;
    const int Rd = R - 1, Sd = S - 1;

    st.capital.assign(Rd, 5.0);
    st.public_capital.assign(Rd, 30.0);
    st.human_capital.assign(static_cast<std::size_t>(kSkills) * Rd, 1.0);
    st.final_firms.assign(static_cast<std::size_t>(S) * R, 0.0);
    for (int s = 0; s < Sd; ++s)
        for (int r = 0; r < Rd; ++r) st.firms(s, r, R) = 5.0;
    st.firms(S - 1, R - 1, R) = 1.0;
    st.durable_firms.assign(Rd, 3.0);
    st.capital_carry.resize(Rd);
    for (int r = 0; r < Rd; ++r) st.capital_carry[r] = st.durable_firms[r] * st.capital[r];
    st.designs.resize(M);
    const auto by_country = topo.regions_of_country();
    for (int m = 0; m < M; ++m) {
        Real d = 0.0;
        for (int r : by_country[m])
            d += st.durable_firms[r] * static_cast<Real>(by_country[m].size());
        st.designs[m] = d;
    }
    st.equity.assign(static_cast<std::size_t>(Rd) * Rd, 1.0);
    st.bonds.assign(static_cast<std::size_t>(Rd) * M, 0.0);
    st.foreign_bonds.assign(Rd, 0.0);
}

}  // namespace

Economy symmetric_economy(const SymmetricConfig& config) {
    Economy e;
    auto& topo = e.topology;
    topo.countries = 1;
    topo.country_names = {"union"};
    topo.regions = config.regions + 1;
    topo.sectors = config.sectors + 1;
    for (int r = 0; r < config.regions; ++r) {
        topo.region_names.push_back("r" + std::to_string(r + 1));
        topo.country_of_region.push_back(0);
        topo.households.push_back(config.households);
    }
    for (int s = 0; s < config.sectors; ++s)
        topo.sector_names.push_back("s" + std::to_string(s + 1));

    const int R = topo.regions, S = topo.sectors;
    topo.trade_cost.assign(static_cast<std::size_t>(S) * R * R, 1.0);
    for (int s = 0; s < S; ++s)
        for (int r = 0; r < R; ++r)
            for (int q = 0; q < R; ++q) {
                Real t;
                if (r == q)
                    t = config.internal_cost;
                else if (r < R - 1 && q < R - 1)
                    t = config.cross_cost;
                else
                    t = config.world_cost;
                topo.tau(s, r, q) = t;
            }

    fill_common_parameters(e);
    e.params.wage_adjust_scale = config.wage_rigidity;
    fill_stocks(e);
    return e;
}

Economy random_economy(std::uint64_t seed, const RandomConfig& config) {
    std::mt19937_64 rng(seed);
    auto uni = [&](Real lo, Real hi) {
        return std::uniform_real_distribution<Real>(lo, hi)(rng);
    };
    auto uni_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

    SymmetricConfig base;
    base.regions = uni_int(config.min_regions, config.max_regions);
    base.sectors = uni_int(config.min_sectors, config.max_sectors);
    base.households = static_cast<Real>(uni_int(6, 16));
    base.internal_cost = uni(1.02, 1.1);
    base.cross_cost = uni(1.12, 1.3);
    base.world_cost = uni(1.2, 1.4);
    base.wage_rigidity = uni(0.0, 1.0);
    Economy e = symmetric_economy(base);

    auto& topo = e.topology;
    const int R = topo.regions, S = topo.sectors;
    const int Rd = R - 1, Sd = S - 1;

    // Several countries when the map allows it.
    const int countries = std::min(config.max_countries, Rd);
    if (countries > 1) {
        topo.countries = countries;
        topo.country_names.clear();
        for (int m = 0; m < countries; ++m) topo.country_names.push_back("c" + std::to_string(m + 1));
        for (int r = 0; r < Rd; ++r) topo.country_of_region[r] = r % countries;
        fill_common_parameters(e);
        e.params.wage_adjust_scale = base.wage_rigidity;
        fill_stocks(e);
    }

    // Mild asymmetries.
    for (int r = 0; r < Rd; ++r) topo.households[r] = static_cast<Real>(uni_int(6, 16));
    for (int s = 0; s < S; ++s)
        for (int r = 0; r < R; ++r)
            for (int q = 0; q < R; ++q) topo.tau(s, r, q) *= uni(0.98, 1.02);
    for (int s = 0; s < S; ++s)
        for (int r = 0; r < R; ++r)
            for (int q = 0; q < R; ++q)
                if (topo.tau(s, r, q) < 1.0) topo.tau(s, r, q) = 1.0;

    auto& par = e.params;
    par.goods_curvature = uni(0.55, 0.65);
    par.durables_curvature = uni(0.45, 0.55);
    par.labour_curvature = uni(0.5, 0.6);
    par.leisure_curvature = uni(1.2, 1.8);
    par.saving_rate = uni(0.12, 0.25);
    par.public_capital_elasticity = uni(0.03, 0.08);
    par.rnd_spillover_union = uni(0.1, 0.3);
    par.rnd_spillover_national = uni(0.2, 0.4);
    par.rnd_supply_elasticity = uni(0.4, 0.6);
    par.innovation_weight = uni(0.35, 0.65);
    par.entry_speed = uni(0.3, 0.6);
    par.foreign_return = uni(0.02, 0.04);
    par.foreign_expenditure_share = uni(0.25, 0.35);
    for (int s = 0; s < Sd; ++s) par.capital_share[s] = uni(0.28, 0.4);
    {
        Real sum = 0.0;
        for (int s = 0; s < S; ++s) {
            par.sector_weight[s] = uni(0.85, 1.15);
            sum += par.sector_weight[s];
        }
        for (int s = 0; s < S; ++s) par.sector_weight[s] *= static_cast<Real>(S) / sum;
    }
    for (auto& a : par.input_coefficient) a *= uni(0.8, 1.2);
    for (int m = 0; m < topo.countries; ++m) {
        par.wage_tax[m] = uni(0.18, 0.3);
        par.profit_tax[m] = uni(0.12, 0.25);
        for (int s = 0; s < S; ++s)
            par.consumption_tax[static_cast<std::size_t>(m) * S + s] = uni(0.06, 0.14);
        par.government_purchases[m] = 0.08 * topo.country_households(m) * uni(0.8, 1.2);
        par.government_investment_share[m] = uni(0.4, 0.6);
    }
    for (int r = 0; r < Rd; ++r) {
        e.stocks.durable_firms[r] = static_cast<Real>(uni_int(2, 5));
        for (int s = 0; s < Sd; ++s) e.stocks.firms(s, r, R) = static_cast<Real>(uni_int(3, 8));
        e.stocks.public_capital[r] = uni(20.0, 50.0);
        for (int k = 0; k < kSkills; ++k)
            e.stocks.human_capital[static_cast<std::size_t>(k) * Rd + r] = uni(0.9, 1.1);
    }
    for (int r = 0; r < Rd; ++r)
        e.stocks.capital_carry[r] = e.stocks.durable_firms[r] * e.stocks.capital[r];
    {
        const auto by_country = topo.regions_of_country();
        for (int m = 0; m < topo.countries; ++m) {
            Real d = 0.0;
            for (int r : by_country[m])
                d += e.stocks.durable_firms[r] * static_cast<Real>(by_country[m].size());
            e.stocks.designs[m] = d;
        }
    }
    par.education_time.assign(static_cast<std::size_t>(kSkills) * Rd,
                              std::log(1.0 + par.human_capital_depreciation));

    ValidationReport check = validate_economy(e);
    if (!check.passed())
        throw std::logic_error("random economy invalid: " + check.summary());
    return e;
}

}  // namespace rcge::synthetic
