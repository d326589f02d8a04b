#include <rcge/scenario_io.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace rcge {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

std::string fmt12(Real v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

Real round12(Real v) { return std::strtod(fmt12(v).c_str(), nullptr); }

json vec_to_json(const std::vector<Real>& v) {
    json a = json::array();
    for (Real x : v) a.push_back(x);
    return a;
}

json nested2(const std::vector<Real>& v, int rows, int cols) {
    json a = json::array();
    for (int i = 0; i < rows; ++i) {
        json row = json::array();
        for (int j = 0; j < cols; ++j) row.push_back(v[static_cast<std::size_t>(i) * cols + j]);
        a.push_back(row);
    }
    return a;
}

json nested3(const std::vector<Real>& v, int d0, int d1, int d2) {
    json a = json::array();
    for (int i = 0; i < d0; ++i) {
        json mid = json::array();
        for (int j = 0; j < d1; ++j) {
            json row = json::array();
            for (int k = 0; k < d2; ++k)
                row.push_back(v[(static_cast<std::size_t>(i) * d1 + j) * d2 + k]);
            mid.push_back(row);
        }
        a.push_back(mid);
    }
    return a;
}

std::vector<Real> flat2(const json& a, int rows, int cols, const std::string& name) {
    if (!a.is_array() || static_cast<int>(a.size()) != rows)
        throw SchemaError(name + ": expected " + std::to_string(rows) + " rows");
    std::vector<Real> out(static_cast<std::size_t>(rows) * cols);
    for (int i = 0; i < rows; ++i) {
        const json& row = a[i];
        if (!row.is_array() || static_cast<int>(row.size()) != cols)
            throw SchemaError(name + ": row " + std::to_string(i) + " needs " +
                              std::to_string(cols) + " entries");
        for (int j = 0; j < cols; ++j) out[static_cast<std::size_t>(i) * cols + j] = row[j];
    }
    return out;
}

std::vector<Real> flat3(const json& a, int d0, int d1, int d2, const std::string& name) {
    if (!a.is_array() || static_cast<int>(a.size()) != d0)
        throw SchemaError(name + ": expected " + std::to_string(d0) + " outer entries");
    std::vector<Real> out(static_cast<std::size_t>(d0) * d1 * d2);
    for (int i = 0; i < d0; ++i) {
        const json& mid = a[i];
        if (!mid.is_array() || static_cast<int>(mid.size()) != d1)
            throw SchemaError(name + ": entry " + std::to_string(i) + " needs " +
                              std::to_string(d1) + " rows");
        for (int j = 0; j < d1; ++j) {
            const json& row = mid[j];
            if (!row.is_array() || static_cast<int>(row.size()) != d2)
                throw SchemaError(name + ": entry (" + std::to_string(i) + "," +
                                  std::to_string(j) + ") needs " + std::to_string(d2) +
                                  " values");
            for (int k = 0; k < d2; ++k)
                out[(static_cast<std::size_t>(i) * d1 + j) * d2 + k] = row[k];
        }
    }
    return out;
}

std::vector<Real> flat1(const json& a, int n, const std::string& name) {
    if (!a.is_array() || static_cast<int>(a.size()) != n)
        throw SchemaError(name + ": expected " + std::to_string(n) + " values");
    std::vector<Real> out(n);
    for (int i = 0; i < n; ++i) out[i] = a[i];
    return out;
}

const std::set<std::string> kParameterKeys = {
    "goods_curvature", "durables_curvature", "labour_curvature", "leisure_curvature",
    "leisure_weights", "skill_productivity", "wage_adjust_scale", "saving_rate",
    "sector_weights", "capital_shares", "public_capital_elasticity", "input_coefficients",
    "fixed_costs_final", "fixed_costs_durable", "capital_depreciation",
    "human_capital_depreciation", "rnd_spillover_union", "rnd_spillover_national",
    "rnd_supply_elasticity", "innovation_weight", "entry_speed", "consumption_tax", "wage_tax",
    "profit_tax", "foreign_price", "foreign_return", "foreign_income",
    "foreign_expenditure_share", "government_purchases", "government_investment_share",
    "household_transfers", "subsidies", "education_time", "phi_floor"};

const std::set<std::string> kStockKeys = {
    "capital_per_firm", "capital_carry", "public_capital", "human_capital", "final_firms",
    "durable_firms", "designs", "equity", "bonds", "foreign_bonds", "prev_wages",
    "prev_price_index"};

json flows_to_json(const Economy& e, const BaseYearFlows& f) {
    const int R = e.topology.regions, S = e.topology.sectors;
    const int Rd = R - 1, Sd = S - 1;
    json j;
    j["prices"] = nested2(f.prices, S, R);
    j["wages"] = nested2(f.wages, kSkills, Rd);
    j["output"] = nested2(f.output, S, R);
    j["consumption"] = nested3(f.consumption, Rd, S, R);
    j["intermediates"] = nested3(f.intermediates, Rd, Sd, S);
    j["labour_compensation"] = nested2(f.labour_compensation, kSkills, Rd);
    j["rnd_wage_bill"] = vec_to_json(f.rnd_wage_bill);
    j["durable_sales"] = vec_to_json(f.durable_sales);
    j["rentals"] = vec_to_json(f.rentals);
    j["design_sales"] = vec_to_json(f.design_sales);
    j["investment_value"] = vec_to_json(f.investment_value);
    j["government_value"] = vec_to_json(f.government_value);
    j["adjustment_value"] = vec_to_json(f.adjustment_value);
    j["durable_fixed_value"] = vec_to_json(f.durable_fixed_value);
    j["exports"] = nested2(f.exports, S, R);
    j["imports"] = vec_to_json(f.imports);
    j["gdp"] = vec_to_json(f.gdp);
    return j;
}

BaseYearFlows flows_from_json(const json& j, const Economy& e) {
    const int R = e.topology.regions, S = e.topology.sectors, M = e.topology.countries;
    const int Rd = R - 1, Sd = S - 1;
    BaseYearFlows f;
    f.prices = flat2(j.at("prices"), S, R, "base_year_flows.prices");
    f.wages = flat2(j.at("wages"), kSkills, Rd, "base_year_flows.wages");
    f.output = flat2(j.at("output"), S, R, "base_year_flows.output");
    f.consumption = flat3(j.at("consumption"), Rd, S, R, "base_year_flows.consumption");
    f.intermediates = flat3(j.at("intermediates"), Rd, Sd, S, "base_year_flows.intermediates");
    f.labour_compensation =
        flat2(j.at("labour_compensation"), kSkills, Rd, "base_year_flows.labour_compensation");
    f.rnd_wage_bill = flat1(j.at("rnd_wage_bill"), M, "base_year_flows.rnd_wage_bill");
    f.durable_sales = flat1(j.at("durable_sales"), Rd, "base_year_flows.durable_sales");
    f.rentals = flat1(j.at("rentals"), Rd, "base_year_flows.rentals");
    f.design_sales = flat1(j.at("design_sales"), M, "base_year_flows.design_sales");
    f.investment_value = flat1(j.at("investment_value"), Rd, "base_year_flows.investment_value");
    f.government_value = flat1(j.at("government_value"), Rd, "base_year_flows.government_value");
    f.adjustment_value = flat1(j.at("adjustment_value"), Rd, "base_year_flows.adjustment_value");
    f.durable_fixed_value =
        flat1(j.at("durable_fixed_value"), Rd, "base_year_flows.durable_fixed_value");
    f.exports = flat2(j.at("exports"), S, R, "base_year_flows.exports");
    f.imports = flat1(j.at("imports"), Rd, "base_year_flows.imports");
    f.gdp = flat1(j.at("gdp"), Rd, "base_year_flows.gdp");
    return f;
}

}  // namespace

Economy parse_economy(const std::string& text, LoadReport* report) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw SchemaError("economy document must be a JSON object");
    if (!doc.contains("format_version") || doc["format_version"].get<int>() != kFormatVersion)
        throw SchemaError("unsupported or missing format_version (expected 1)");

    for (const auto& [key, _] : doc.items())
        if (key != "format_version" && key != "topology" && key != "parameters" &&
            key != "trade_costs" && key != "stocks" && key != "base_year_flows")
            throw ParseError("unknown top-level key: " + key);

    Economy e;
    auto& topo = e.topology;
    const json& jt = doc.at("topology");
    for (const auto& [key, _] : jt.items())
        if (key != "countries" && key != "regions" && key != "sectors")
            throw ParseError("unknown topology key: " + key);

    for (const auto& c : jt.at("countries")) topo.country_names.push_back(c.get<std::string>());
    topo.countries = static_cast<int>(topo.country_names.size());
    for (const auto& r : jt.at("regions")) {
        topo.region_names.push_back(r.at("name").get<std::string>());
        const std::string country = r.at("country").get<std::string>();
        int m = -1;
        for (int i = 0; i < topo.countries; ++i)
            if (topo.country_names[i] == country) m = i;
        if (m < 0) throw SchemaError("region " + topo.region_names.back() +
                                     " references unknown country " + country);
        topo.country_of_region.push_back(m);
        topo.households.push_back(r.at("households").get<Real>());
    }
    for (const auto& s : jt.at("sectors")) topo.sector_names.push_back(s.get<std::string>());
    topo.regions = static_cast<int>(topo.region_names.size()) + 1;
    topo.sectors = static_cast<int>(topo.sector_names.size()) + 1;
    const int R = topo.regions, S = topo.sectors, M = topo.countries;
    const int Rd = R - 1, Sd = S - 1;
    if (Rd < 1) throw SchemaError("topology.regions: at least one domestic region required");
    if (Sd < 1) throw SchemaError("topology.sectors: at least one domestic sector required");

    // Trade costs: dense sectors x regions x regions.
    {
        const json& a = doc.at("trade_costs");
        if (!a.is_array() || static_cast<int>(a.size()) != S)
            throw SchemaError("trade_costs: expected one table per sector (incl. the foreign one)");
        topo.trade_cost.assign(static_cast<std::size_t>(S) * R * R, 0.0);
        for (int s = 0; s < S; ++s) {
            const json& bys = a[s];
            if (!bys.is_array() || static_cast<int>(bys.size()) != R)
                throw SchemaError("trade_costs: missing row at (s=" + std::to_string(s) + ")");
            for (int r = 0; r < R; ++r) {
                const json& row = bys[r];
                if (!row.is_array() || static_cast<int>(row.size()) != R)
                    throw SchemaError("trade_costs: missing entry at (s=" + std::to_string(s) +
                                      ",r=" + std::to_string(r) + ",q=" +
                                      std::to_string(row.is_array() ? row.size() : 0) + ")");
                for (int q = 0; q < R; ++q) topo.tau(s, r, q) = row[q];
            }
        }
    }

    auto& par = e.params;
    LoadReport local;
    LoadReport& rep = report ? *report : local;
    const json jp = doc.contains("parameters") ? doc.at("parameters") : json::object();
    for (const auto& [key, _] : jp.items())
        if (!kParameterKeys.count(key)) throw ParseError("unknown parameter key: " + key);

    auto opt_scalar = [&](const char* key, Real fallback) {
        if (jp.contains(key)) return jp.at(key).get<Real>();
        rep.defaulted_keys.push_back(std::string("parameters.") + key + " = " + fmt12(fallback));
        return fallback;
    };
    auto opt_vec = [&](const char* key, int n, Real fallback) {
        if (jp.contains(key)) return flat1(jp.at(key), n, std::string("parameters.") + key);
        rep.defaulted_keys.push_back(std::string("parameters.") + key + " = " + fmt12(fallback) +
                                     " (all entries)");
        return std::vector<Real>(n, fallback);
    };

    par.goods_curvature = opt_scalar("goods_curvature", par.goods_curvature);
    par.durables_curvature = opt_scalar("durables_curvature", par.durables_curvature);
    par.labour_curvature = opt_scalar("labour_curvature", par.labour_curvature);
    par.leisure_curvature = opt_scalar("leisure_curvature", par.leisure_curvature);
    if (jp.contains("leisure_weights")) {
        auto v = flat1(jp.at("leisure_weights"), kSkills, "parameters.leisure_weights");
        std::copy(v.begin(), v.end(), par.leisure_weight.begin());
    } else
        rep.defaulted_keys.push_back("parameters.leisure_weights = 1 (all skills)");
    if (jp.contains("skill_productivity")) {
        auto v = flat1(jp.at("skill_productivity"), kSkills, "parameters.skill_productivity");
        std::copy(v.begin(), v.end(), par.skill_productivity.begin());
    } else
        rep.defaulted_keys.push_back("parameters.skill_productivity = (0.8, 1.0, 1.2)");
    par.wage_adjust_scale = opt_scalar("wage_adjust_scale", par.wage_adjust_scale);
    par.saving_rate = opt_scalar("saving_rate", par.saving_rate);
    par.sector_weight = opt_vec("sector_weights", S, 1.0);
    par.capital_share = opt_vec("capital_shares", Sd, 0.35);
    par.public_capital_elasticity =
        opt_scalar("public_capital_elasticity", par.public_capital_elasticity);
    if (jp.contains("input_coefficients"))
        par.input_coefficient =
            flat3(jp.at("input_coefficients"), M, Sd, S, "parameters.input_coefficients");
    else {
        par.input_coefficient.assign(static_cast<std::size_t>(M) * Sd * S, 0.0);
        rep.defaulted_keys.push_back("parameters.input_coefficients = 0 (no intermediates)");
    }
    if (jp.contains("fixed_costs_final"))
        par.fixed_cost_final = flat2(jp.at("fixed_costs_final"), Sd, Rd, "parameters.fixed_costs_final");
    else {
        par.fixed_cost_final.assign(static_cast<std::size_t>(Sd) * Rd, 1.0);
        rep.defaulted_keys.push_back("parameters.fixed_costs_final = 1 (all cells)");
    }
    par.fixed_cost_durable = opt_vec("fixed_costs_durable", Rd, 1.0);
    par.capital_depreciation = opt_scalar("capital_depreciation", par.capital_depreciation);
    par.human_capital_depreciation =
        opt_scalar("human_capital_depreciation", par.human_capital_depreciation);
    par.rnd_spillover_union = opt_scalar("rnd_spillover_union", par.rnd_spillover_union);
    par.rnd_spillover_national = opt_scalar("rnd_spillover_national", par.rnd_spillover_national);
    par.rnd_supply_elasticity = opt_scalar("rnd_supply_elasticity", par.rnd_supply_elasticity);
    par.innovation_weight = opt_scalar("innovation_weight", par.innovation_weight);
    par.entry_speed = opt_scalar("entry_speed", par.entry_speed);
    if (jp.contains("consumption_tax"))
        par.consumption_tax = flat2(jp.at("consumption_tax"), M, S, "parameters.consumption_tax");
    else {
        par.consumption_tax.assign(static_cast<std::size_t>(M) * S, 0.0);
        rep.defaulted_keys.push_back("parameters.consumption_tax = 0 (all rates)");
    }
    par.wage_tax = opt_vec("wage_tax", M, 0.0);
    par.profit_tax = opt_vec("profit_tax", M, 0.0);
    par.foreign_price = opt_scalar("foreign_price", par.foreign_price);
    par.foreign_return = opt_scalar("foreign_return", par.foreign_return);
    par.foreign_income = opt_scalar("foreign_income", par.foreign_income);
    par.foreign_expenditure_share =
        opt_scalar("foreign_expenditure_share", par.foreign_expenditure_share);
    par.government_purchases = opt_vec("government_purchases", M, 1.0);
    par.government_investment_share = opt_vec("government_investment_share", M, 0.5);
    par.household_transfers = opt_vec("household_transfers", M, 0.0);
    if (jp.contains("subsidies")) {
        const json& js = jp.at("subsidies");
        for (const auto& [key, _] : js.items())
            if (key != "final" && key != "durable" && key != "rnd_rate")
                throw ParseError("unknown parameter key: subsidies." + key);
        par.subsidy_final = js.contains("final")
                                ? flat2(js.at("final"), Sd, Rd, "parameters.subsidies.final")
                                : std::vector<Real>(static_cast<std::size_t>(Sd) * Rd, 0.0);
        par.subsidy_durable = js.contains("durable")
                                  ? flat1(js.at("durable"), Rd, "parameters.subsidies.durable")
                                  : std::vector<Real>(Rd, 0.0);
        par.subsidy_rnd = js.contains("rnd_rate")
                              ? flat1(js.at("rnd_rate"), M, "parameters.subsidies.rnd_rate")
                              : std::vector<Real>(M, 0.0);
    } else {
        par.subsidy_final.assign(static_cast<std::size_t>(Sd) * Rd, 0.0);
        par.subsidy_durable.assign(Rd, 0.0);
        par.subsidy_rnd.assign(M, 0.0);
        rep.defaulted_keys.push_back("parameters.subsidies = 0 (all)");
    }
    if (jp.contains("education_time"))
        par.education_time = flat2(jp.at("education_time"), kSkills, Rd, "parameters.education_time");
    else {
        par.education_time.assign(static_cast<std::size_t>(kSkills) * Rd,
                                  std::log(1.0 + par.human_capital_depreciation));
        rep.defaulted_keys.push_back(
            "parameters.education_time = ln(1 + human_capital_depreciation)");
    }
    par.phi_floor = opt_scalar("phi_floor", par.phi_floor);

    auto& st = e.stocks;
    const json& jst = doc.at("stocks");
    for (const auto& [key, _] : jst.items())
        if (!kStockKeys.count(key)) throw ParseError("unknown stock key: " + key);
    st.capital = flat1(jst.at("capital_per_firm"), Rd, "stocks.capital_per_firm");
    st.public_capital = flat1(jst.at("public_capital"), Rd, "stocks.public_capital");
    st.human_capital = flat2(jst.at("human_capital"), kSkills, Rd, "stocks.human_capital");
    st.final_firms = flat2(jst.at("final_firms"), S, R, "stocks.final_firms");
    st.durable_firms = flat1(jst.at("durable_firms"), Rd, "stocks.durable_firms");
    st.designs = flat1(jst.at("designs"), M, "stocks.designs");
    st.equity = flat2(jst.at("equity"), Rd, Rd, "stocks.equity");
    st.bonds = flat2(jst.at("bonds"), Rd, M, "stocks.bonds");
    st.foreign_bonds = flat1(jst.at("foreign_bonds"), Rd, "stocks.foreign_bonds");
    if (jst.contains("capital_carry"))
        st.capital_carry = flat1(jst.at("capital_carry"), Rd, "stocks.capital_carry");
    else {
        st.capital_carry.resize(Rd);
        for (int r = 0; r < Rd; ++r) st.capital_carry[r] = st.durable_firms[r] * st.capital[r];
        rep.defaulted_keys.push_back("stocks.capital_carry = durable_firms * capital_per_firm");
    }
    if (jst.contains("prev_wages"))
        st.prev_wage = flat2(jst.at("prev_wages"), kSkills, Rd, "stocks.prev_wages");
    if (jst.contains("prev_price_index"))
        st.prev_price_index = flat1(jst.at("prev_price_index"), Rd, "stocks.prev_price_index");

    return e;
}

Economy load_economy(const std::filesystem::path& path, LoadReport* report) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot read economy file: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_economy(ss.str(), report);
}

std::string economy_to_json(const Economy& e) {
    const auto& topo = e.topology;
    const auto& par = e.params;
    const auto& st = e.stocks;
    const int R = topo.regions, S = topo.sectors, M = topo.countries;
    const int Rd = R - 1, Sd = S - 1;

    json doc;
    doc["format_version"] = kFormatVersion;
    json jt;
    jt["countries"] = topo.country_names;
    json regions = json::array();
    for (int r = 0; r < Rd; ++r)
        regions.push_back({{"name", topo.region_names[r]},
                           {"country", topo.country_names[topo.country_of_region[r]]},
                           {"households", topo.households[r]}});
    jt["regions"] = regions;
    jt["sectors"] = topo.sector_names;
    doc["topology"] = jt;
    doc["trade_costs"] = nested3(topo.trade_cost, S, R, R);

    json jp;
    jp["goods_curvature"] = par.goods_curvature;
    jp["durables_curvature"] = par.durables_curvature;
    jp["labour_curvature"] = par.labour_curvature;
    jp["leisure_curvature"] = par.leisure_curvature;
    jp["leisure_weights"] = std::vector<Real>(par.leisure_weight.begin(), par.leisure_weight.end());
    jp["skill_productivity"] =
        std::vector<Real>(par.skill_productivity.begin(), par.skill_productivity.end());
    jp["wage_adjust_scale"] = par.wage_adjust_scale;
    jp["saving_rate"] = par.saving_rate;
    jp["sector_weights"] = vec_to_json(par.sector_weight);
    jp["capital_shares"] = vec_to_json(par.capital_share);
    jp["public_capital_elasticity"] = par.public_capital_elasticity;
    jp["input_coefficients"] = nested3(par.input_coefficient, M, Sd, S);
    jp["fixed_costs_final"] = nested2(par.fixed_cost_final, Sd, Rd);
    jp["fixed_costs_durable"] = vec_to_json(par.fixed_cost_durable);
    jp["capital_depreciation"] = par.capital_depreciation;
    jp["human_capital_depreciation"] = par.human_capital_depreciation;
    jp["rnd_spillover_union"] = par.rnd_spillover_union;
    jp["rnd_spillover_national"] = par.rnd_spillover_national;
    jp["rnd_supply_elasticity"] = par.rnd_supply_elasticity;
    jp["innovation_weight"] = par.innovation_weight;
    jp["entry_speed"] = par.entry_speed;
    jp["consumption_tax"] = nested2(par.consumption_tax, M, S);
    jp["wage_tax"] = vec_to_json(par.wage_tax);
    jp["profit_tax"] = vec_to_json(par.profit_tax);
    jp["foreign_price"] = par.foreign_price;
    jp["foreign_return"] = par.foreign_return;
    jp["foreign_income"] = par.foreign_income;
    jp["foreign_expenditure_share"] = par.foreign_expenditure_share;
    jp["government_purchases"] = vec_to_json(par.government_purchases);
    jp["government_investment_share"] = vec_to_json(par.government_investment_share);
    jp["household_transfers"] = vec_to_json(par.household_transfers);
    jp["subsidies"] = {{"final", nested2(par.subsidy_final, Sd, Rd)},
                       {"durable", vec_to_json(par.subsidy_durable)},
                       {"rnd_rate", vec_to_json(par.subsidy_rnd)}};
    jp["education_time"] = nested2(par.education_time, kSkills, Rd);
    jp["phi_floor"] = par.phi_floor;
    doc["parameters"] = jp;

    json jst;
    jst["capital_per_firm"] = vec_to_json(st.capital);
    jst["capital_carry"] = vec_to_json(st.capital_carry);
    jst["public_capital"] = vec_to_json(st.public_capital);
    jst["human_capital"] = nested2(st.human_capital, kSkills, Rd);
    jst["final_firms"] = nested2(st.final_firms, S, R);
    jst["durable_firms"] = vec_to_json(st.durable_firms);
    jst["designs"] = vec_to_json(st.designs);
    jst["equity"] = nested2(st.equity, Rd, Rd);
    jst["bonds"] = nested2(st.bonds, Rd, M);
    jst["foreign_bonds"] = vec_to_json(st.foreign_bonds);
    if (!st.prev_wage.empty()) jst["prev_wages"] = nested2(st.prev_wage, kSkills, Rd);
    if (!st.prev_price_index.empty()) jst["prev_price_index"] = vec_to_json(st.prev_price_index);
    doc["stocks"] = jst;

    // Serialize doubles at full precision so load(save(e)) is exact.
    std::string out = doc.dump(2, ' ', false, json::error_handler_t::strict);
    return out;
}

void save_economy(const Economy& economy, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write economy file: " + path.string());
    out << economy_to_json(economy) << "\n";
}

namespace {

InstrumentKind kind_from_string(const std::string& s) {
    for (InstrumentKind k :
         {InstrumentKind::RtdSubsidy, InstrumentKind::HumanCapital,
          InstrumentKind::TradeCostReduction, InstrumentKind::PublicCapital,
          InstrumentKind::FinalGoodsSubsidy, InstrumentKind::DurableGoodsSubsidy,
          InstrumentKind::TechnicalAssistance})
        if (s == instrument_kind_name(k)) return k;
    throw SchemaError("unknown instrument kind: " + s);
}

}  // namespace

PolicyScenario parse_scenario(const std::string& text, const Economy& economy) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.contains("format_version") || doc["format_version"].get<int>() != kFormatVersion)
        throw SchemaError("unsupported or missing format_version (expected 1)");
    PolicyScenario sc;
    sc.name = doc.value("name", std::string("scenario"));
    sc.horizon = doc.at("horizon").get<int>();
    if (doc.contains("instruments"))
        for (const auto& ji : doc.at("instruments")) {
            PolicyInstrument inst;
            inst.kind = kind_from_string(ji.at("kind").get<std::string>());
            inst.region = ji.value("region", -1);
            inst.country = ji.value("country", -1);
            inst.sector = ji.value("sector", -1);
            inst.skill = ji.value("skill", -1);
            inst.from_region = ji.value("from", -1);
            inst.to_region = ji.value("to", -1);
            if (inst.kind == InstrumentKind::TradeCostReduction)
                inst.magnitude = ji.at("factor").get<Real>();
            else
                inst.magnitude = ji.value("magnitude", 0.0);
            inst.funding = ji.value("funding", 0.0);
            inst.start = ji.value("start", 1);
            inst.end = ji.value("end", sc.horizon);
            sc.instruments.push_back(inst);
        }
    auto problems = validate_scenario(economy, sc);
    if (!problems.empty()) {
        std::string msg = "scenario validation failed:";
        for (const auto& p : problems) msg += "\n  " + p;
        throw SchemaError(msg);
    }
    return sc;
}

PolicyScenario load_scenario(const std::filesystem::path& path, const Economy& economy) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot read scenario file: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), economy);
}

void save_scenario(const PolicyScenario& scenario, const Economy&,
                   const std::filesystem::path& path) {
    json doc;
    doc["format_version"] = kFormatVersion;
    doc["name"] = scenario.name;
    doc["horizon"] = scenario.horizon;
    json arr = json::array();
    for (const auto& inst : scenario.instruments) {
        json ji;
        ji["kind"] = instrument_kind_name(inst.kind);
        if (inst.region >= 0) ji["region"] = inst.region;
        if (inst.country >= 0) ji["country"] = inst.country;
        if (inst.sector >= 0) ji["sector"] = inst.sector;
        if (inst.skill >= 0) ji["skill"] = inst.skill;
        if (inst.from_region >= 0) ji["from"] = inst.from_region;
        if (inst.to_region >= 0) ji["to"] = inst.to_region;
        if (inst.kind == InstrumentKind::TradeCostReduction)
            ji["factor"] = inst.magnitude;
        else
            ji["magnitude"] = inst.magnitude;
        ji["funding"] = inst.funding;
        ji["start"] = inst.start;
        ji["end"] = inst.end;
        arr.push_back(ji);
    }
    doc["instruments"] = arr;
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write scenario file: " + path.string());
    out << doc.dump(2) << "\n";
}

namespace {

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Real>> rows;
};

void write_table(const Table& table, const std::filesystem::path& base, ExportFormat format,
                 std::vector<std::filesystem::path>& written) {
    if (format == ExportFormat::Csv) {
        const auto path = base.string() + ".csv";
        std::ofstream out(path);
        if (!out) throw ParseError("cannot write results file: " + path);
        for (std::size_t c = 0; c < table.columns.size(); ++c)
            out << (c ? "," : "") << table.columns[c];
        out << "\n";
        for (const auto& row : table.rows) {
            for (std::size_t c = 0; c < row.size(); ++c)
                out << (c ? "," : "") << fmt12(row[c]);
            out << "\n";
        }
        written.push_back(path);
    } else {
        const auto path = base.string() + ".json";
        std::ofstream out(path);
        if (!out) throw ParseError("cannot write results file: " + path);
        json arr = json::array();
        for (const auto& row : table.rows) {
            json obj;
            for (std::size_t c = 0; c < row.size(); ++c) obj[table.columns[c]] = round12(row[c]);
            arr.push_back(obj);
        }
        out << arr.dump(1) << "\n";
        written.push_back(path);
    }
}

}  // namespace

std::vector<std::filesystem::path> export_results(const Trajectory& trajectory,
                                                  const Economy& economy,
                                                  const std::filesystem::path& directory,
                                                  ExportFormat format) {
    if (trajectory.solutions.empty()) throw ParseError("cannot export an empty trajectory");
    std::filesystem::create_directories(directory);
    const auto& topo = economy.topology;
    const int R = topo.regions, S = topo.sectors, M = topo.countries;
    const int Rd = R - 1, Sd = S - 1;

    Table regions;
    regions.columns = {"period", "region", "consumer_price", "wage_lo", "wage_me", "wage_hi",
                       "labour_lo", "labour_me", "labour_hi", "gdp", "durable_firms",
                       "capital_per_firm", "durable_price", "rental_rate",
                       "success_probability", "public_capital", "investment_per_firm",
                       "disposable_income", "savings", "consumption", "eu_transfer",
                       "government_demand"};
    Table sectors;
    sectors.columns = {"period", "region", "sector", "price", "output", "firms",
                       "value_added_price", "marginal_cost", "profit", "zero_profit_output"};
    Table countries;
    countries.columns = {"period", "country", "design_price", "new_designs", "rnd_labour",
                         "tax_revenue", "deficit", "subsidies", "eu_contribution", "exports",
                         "imports", "trade_balance", "bond_rate"};
    Table diagnostics;
    diagnostics.columns = {"period", "iterations", "max_residual", "walras_absolute",
                           "walras_relative", "gdp_total", "total_savings",
                           "trade_balance_total", "cohesion_budget", "phi_floor_bound"};

    for (std::size_t t = 0; t < trajectory.solutions.size(); ++t) {
        const auto& sol = trajectory.solutions[t];
        const auto& st = trajectory.stocks[t];
        for (int r = 0; r < Rd; ++r)
            regions.rows.push_back(
                {static_cast<Real>(t), static_cast<Real>(r), sol.consumer_price[r],
                 sol.wage[0 * Rd + r], sol.wage[1 * Rd + r], sol.wage[2 * Rd + r],
                 sol.labour[0 * Rd + r], sol.labour[1 * Rd + r], sol.labour[2 * Rd + r],
                 sol.gdp[r], st.durable_firms[r], sol.durable_output[r], sol.durable_price[r],
                 sol.rental_rate[r], sol.success_probability[r], st.public_capital[r],
                 sol.investment[r], sol.disposable_income[r], sol.savings[r], sol.consumption[r],
                 sol.eu_transfers[r], sol.government_demand[r]});
        for (int s = 0; s < Sd; ++s)
            for (int r = 0; r < Rd; ++r) {
                const std::size_t k = static_cast<std::size_t>(s) * R + r;
                if (st.firms(s, r, R) == 0.0) continue;
                sectors.rows.push_back({static_cast<Real>(t), static_cast<Real>(r),
                                        static_cast<Real>(s), sol.goods_price[k], sol.output[k],
                                        st.firms(s, r, R), sol.value_added_price[k],
                                        sol.marginal_cost[k], sol.firm_profit[k],
                                        sol.zero_profit_output[k]});
            }
        for (int m = 0; m < M; ++m)
            countries.rows.push_back({static_cast<Real>(t), static_cast<Real>(m),
                                      sol.design_price[m], sol.new_designs[m], sol.rnd_labour[m],
                                      sol.tax_revenue[m], sol.deficit[m], sol.subsidies[m],
                                      sol.eu_contribution[m], sol.exports[m], sol.imports[m],
                                      sol.trade_balance[m], sol.bond_rate[m]});
        diagnostics.rows.push_back({static_cast<Real>(t), static_cast<Real>(sol.iterations),
                                    sol.max_residual, sol.walras_absolute, sol.walras_relative,
                                    sol.gdp_total, sol.total_savings, sol.trade_balance_total,
                                    sol.cohesion_budget,
                                    sol.phi_floor_bound ? 1.0 : 0.0});
    }

    std::vector<std::filesystem::path> written;
    write_table(regions, directory / "regions", format, written);
    write_table(sectors, directory / "sectors", format, written);
    write_table(countries, directory / "countries", format, written);
    write_table(diagnostics, directory / "diagnostics", format, written);
    return written;
}

std::optional<BaseYearFlows> load_base_year_flows(const std::filesystem::path& path,
                                                  const Economy& economy) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot read economy file: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    json doc = json::parse(ss.str());
    if (!doc.contains("base_year_flows")) return std::nullopt;
    return flows_from_json(doc.at("base_year_flows"), economy);
}

void save_economy_with_flows(const Economy& economy, const BaseYearFlows& flows,
                             const std::filesystem::path& path) {
    json doc = json::parse(economy_to_json(economy));
    doc["base_year_flows"] = flows_to_json(economy, flows);
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write economy file: " + path.string());
    out << doc.dump(2) << "\n";
}

}  // namespace rcge
