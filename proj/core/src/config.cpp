#include "hjbport/config.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "hjbport/errors.hpp"

namespace hjbport {

using nlohmann::json;

namespace {

json field(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) {
        throw ConfigError("missing field '" + where + "." + key + "'");
    }
    return j.at(key);
}

double number_field(const json& j, const std::string& key, const std::string& where) {
    const json v = field(j, key, where);
    if (!v.is_number()) throw ConfigError("field '" + where + "." + key + "' must be a number");
    return v.get<double>();
}

long integer_field(const json& j, const std::string& key, const std::string& where) {
    const json v = field(j, key, where);
    if (!v.is_number_integer()) {
        throw ConfigError("field '" + where + "." + key + "' must be an integer");
    }
    return v.get<long>();
}

std::string string_field(const json& j, const std::string& key, const std::string& where) {
    const json v = field(j, key, where);
    if (!v.is_string()) throw ConfigError("field '" + where + "." + key + "' must be a string");
    return v.get<std::string>();
}

std::vector<double> vector_field(const json& j, const std::string& key,
                                 const std::string& where) {
    const json v = field(j, key, where);
    if (!v.is_array()) throw ConfigError("field '" + where + "." + key + "' must be an array");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& e : v) {
        if (!e.is_number()) {
            throw ConfigError("field '" + where + "." + key + "' must hold numbers");
        }
        out.push_back(e.get<double>());
    }
    return out;
}

MarketParams parse_market(const json& j) {
    MarketParams m;
    m.risk_free = number_field(j, "risk_free", "market");
    const std::vector<double> drift = vector_field(j, "drift", "market");
    m.drift = Eigen::Map<const Eigen::VectorXd>(drift.data(), static_cast<long>(drift.size()));
    const json cov = field(j, "covariance", "market");
    if (!cov.is_array() || cov.size() != drift.size()) {
        throw ConfigError("field 'market.covariance' must be a square matrix matching drift");
    }
    m.covariance.resize(static_cast<long>(drift.size()), static_cast<long>(drift.size()));
    for (std::size_t r = 0; r < cov.size(); ++r) {
        if (!cov[r].is_array() || cov[r].size() != drift.size()) {
            throw ConfigError("field 'market.covariance' row " + std::to_string(r) +
                              " has the wrong length");
        }
        for (std::size_t c = 0; c < cov[r].size(); ++c) {
            if (!cov[r][c].is_number()) {
                throw ConfigError("field 'market.covariance' must hold numbers");
            }
            m.covariance(static_cast<long>(r), static_cast<long>(c)) = cov[r][c].get<double>();
        }
    }
    m.leverage_cap = number_field(j, "leverage_cap", "market");
    return m;
}

TargetSpec parse_target(const json& j) {
    TargetSpec t;
    const std::string kind = string_field(j, "kind", "target");
    t.horizon = number_field(j, "horizon", "target");
    if (kind == "affine") {
        t.variant = TargetVariant::Affine;
        t.initial_wealth = number_field(j, "initial_wealth", "target");
        t.required_return = number_field(j, "required_return", "target");
        t.margin_rate = number_field(j, "margin_rate", "target");
    } else if (kind == "tabulated") {
        t.variant = TargetVariant::Tabulated;
        t.knot_times = vector_field(j, "knot_times", "target");
        t.knot_levels = vector_field(j, "knot_levels", "target");
        t.scale = number_field(j, "scale", "target");
    } else {
        throw ConfigError("field 'target.kind' must be 'affine' or 'tabulated'");
    }
    return t;
}

GridSpec parse_grid(const json& j) {
    GridSpec g;
    g.h_x = number_field(j, "h_x", "grid");
    g.extra_nodes = static_cast<int>(integer_field(j, "extra_nodes", "grid"));
    g.time_steps = integer_field(j, "time_steps", "grid");
    g.shape_factor = number_field(j, "shape_factor", "grid");
    return g;
}

PolicyEval parse_policy_eval(const std::string& name) {
    if (name == "table-linear") return PolicyEval::TableLinear;
    if (name == "exact-qp") return PolicyEval::ExactQp;
    throw ConfigError("field 'sim.policy_eval' must be 'table-linear' or 'exact-qp'");
}

std::string to_string(PolicyEval p) {
    return p == PolicyEval::TableLinear ? "table-linear" : "exact-qp";
}

SimConfig parse_sim(const json& j) {
    SimConfig s;
    s.path_count = integer_field(j, "paths", "sim");
    s.rebalance = parse_rebalance(string_field(j, "rebalance", "sim"));
    const long seed = integer_field(j, "seed", "sim");
    s.seed = static_cast<std::uint64_t>(seed);
    const json anti = field(j, "antithetic", "sim");
    if (!anti.is_boolean()) throw ConfigError("field 'sim.antithetic' must be a boolean");
    s.antithetic = anti.get<bool>();
    s.policy_eval = parse_policy_eval(string_field(j, "policy_eval", "sim"));
    return s;
}

json market_to_json(const MarketParams& m) {
    json cov = json::array();
    for (long r = 0; r < m.covariance.rows(); ++r) {
        json row = json::array();
        for (long c = 0; c < m.covariance.cols(); ++c) row.push_back(m.covariance(r, c));
        cov.push_back(row);
    }
    return json{{"risk_free", m.risk_free},
                {"drift", std::vector<double>(m.drift.data(), m.drift.data() + m.drift.size())},
                {"covariance", cov},
                {"leverage_cap", m.leverage_cap}};
}

json target_to_json(const TargetSpec& t) {
    if (t.variant == TargetVariant::Affine) {
        return json{{"kind", "affine"},
                    {"horizon", t.horizon},
                    {"initial_wealth", t.initial_wealth},
                    {"required_return", t.required_return},
                    {"margin_rate", t.margin_rate}};
    }
    return json{{"kind", "tabulated"},
                {"horizon", t.horizon},
                {"knot_times", t.knot_times},
                {"knot_levels", t.knot_levels},
                {"scale", t.scale}};
}

json grid_to_json(const GridSpec& g) {
    return json{{"h_x", g.h_x},
                {"extra_nodes", g.extra_nodes},
                {"time_steps", g.time_steps},
                {"shape_factor", g.shape_factor}};
}

json sim_to_json(const SimConfig& s) {
    return json{{"paths", s.path_count},
                {"rebalance", to_string(s.rebalance)},
                {"seed", static_cast<long>(s.seed)},
                {"antithetic", s.antithetic},
                {"policy_eval", to_string(s.policy_eval)}};
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const char ch : bytes) {
        h ^= static_cast<unsigned char>(ch);
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (schema_version != 1) {
        throw ConfigError("unsupported schema_version " + std::to_string(schema_version));
    }
    if (name.empty()) throw ConfigError("name must be nonempty");
    market.validate();
    target.validate();
    grid.validate();
    sim.validate();
    store_stride();  // throws when rebalance dates cannot align with stored rows
}

long ExperimentConfig::store_stride() const {
    const double exact = target.horizon * intervals_per_year(sim.rebalance);
    const long n_intervals = static_cast<long>(std::llround(exact));
    if (n_intervals < 1 || std::abs(exact - static_cast<double>(n_intervals)) > 1e-9) {
        throw ConfigError("horizon is not a whole number of rebalance intervals");
    }
    if (grid.time_steps % n_intervals != 0) {
        throw ConfigError("grid.time_steps must be a multiple of " + std::to_string(n_intervals) +
                          " (" + hjbport::to_string(sim.rebalance) + " rebalance dates)");
    }
    return grid.time_steps / n_intervals;
}

ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    ExperimentConfig cfg;
    cfg.schema_version = static_cast<int>(integer_field(j, "schema_version", "config"));
    cfg.name = string_field(j, "name", "config");
    cfg.output_dir = j.contains("output_dir") ? string_field(j, "output_dir", "config")
                                              : std::string("out");
    cfg.market = parse_market(field(j, "market", "config"));
    cfg.target = parse_target(field(j, "target", "config"));
    cfg.grid = parse_grid(field(j, "grid", "config"));
    cfg.sim = parse_sim(field(j, "sim", "config"));
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
    const json j{{"schema_version", cfg.schema_version},
                 {"name", cfg.name},
                 {"output_dir", cfg.output_dir},
                 {"market", market_to_json(cfg.market)},
                 {"target", target_to_json(cfg.target)},
                 {"grid", grid_to_json(cfg.grid)},
                 {"sim", sim_to_json(cfg.sim)}};
    return j.dump(2);
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    const json j{{"market", market_to_json(cfg.market)},
                 {"target", target_to_json(cfg.target)},
                 {"grid", grid_to_json(cfg.grid)},
                 {"rebalance", to_string(cfg.sim.rebalance)}};
    return fnv1a64(j.dump());
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

namespace {

// Two-asset test market: vol 1% and 20%, correlation -0.3.
MarketParams artificial_market(double cap) {
    MarketParams m;
    m.risk_free = 1e-4;
    m.drift = Eigen::Vector2d(0.01, 0.05);
    m.covariance.resize(2, 2);
    m.covariance << 1e-4, -6e-4, -6e-4, 4e-2;
    m.leverage_cap = cap;
    return m;
}

// Four-asset market estimated from Japanese pension-fund data: domestic
// bonds/stocks, foreign bonds/stocks. Covariance entries are in units of 1e-4.
MarketParams pension_market(double cap) {
    MarketParams m;
    m.risk_free = 1e-5;
    m.drift = Eigen::Vector4d(0.03, 0.048, 0.035, 0.05);
    m.covariance.resize(4, 4);
    m.covariance << 29.7, 18.2, -4.39, -5.41,
                    18.2, 495.0, -77.8, 119.0,
                    -4.39, -77.8, 181.0, 147.0,
                    -5.41, 119.0, 147.0, 394.0;
    m.covariance *= 1e-4;
    m.leverage_cap = cap;
    return m;
}

// Projected pension benefit payments and contribution income per year; the
// funding gap benefit - contribution is the wealth target.
const std::vector<double> kBenefit = {67.286, 68.861, 70.414, 71.943, 73.445, 74.918,
                                      76.358, 77.763, 79.129, 80.455, 81.743, 82.997,
                                      84.219, 85.411, 86.885, 90.322};
const std::vector<double> kContribution = {61.993, 63.444, 64.868, 66.263, 67.623, 68.946,
                                           70.228, 71.466, 72.657, 73.800, 74.895, 75.940,
                                           76.942, 77.908, 78.529, 74.490};

TargetSpec affine_target(double horizon, double required_return, double margin_rate) {
    TargetSpec t;
    t.variant = TargetVariant::Affine;
    t.horizon = horizon;
    t.initial_wealth = 100.0;
    t.required_return = required_return;
    t.margin_rate = margin_rate;
    return t;
}

TargetSpec pension_target() {
    TargetSpec t;
    t.variant = TargetVariant::Tabulated;
    t.horizon = 15.0;
    t.knot_times.resize(kBenefit.size());
    t.knot_levels.resize(kBenefit.size());
    for (std::size_t i = 0; i < kBenefit.size(); ++i) {
        t.knot_times[i] = static_cast<double>(i);
        t.knot_levels[i] = kBenefit[i] - kContribution[i];
    }
    t.scale = 1.1;
    return t;
}

GridSpec grid_with_steps(long steps) {
    GridSpec g;
    g.h_x = 0.5;
    g.extra_nodes = 5;
    g.time_steps = steps;
    g.shape_factor = 0.5;
    return g;
}

SimConfig monthly_sim() {
    SimConfig s;
    s.path_count = 10000;
    s.rebalance = Rebalance::Monthly;
    s.seed = 12345;
    return s;
}

// Reference-scale step counts: 500 steps per month. The margin sweep and the
// low-diffusion leverage cells stay accurate at a tenth of that (desk scale),
// which the preset table reflects; high-diffusion cells need the full count
// or the explicit march sits at its stability edge and the extracted policy
// degrades.
constexpr long kDeskStepsT10 = 6000;     // 10y, monthly x 50
constexpr long kPaperStepsT10 = 60000;   // 10y, monthly x 500

struct LeverageCell {
    int ret_pct;
    int cap;
    long steps;
};

const LeverageCell kLeverageCells[] = {
    {1, 1, kDeskStepsT10},  {1, 2, kDeskStepsT10},  {1, 5, kPaperStepsT10},
    {2, 1, kDeskStepsT10},  {2, 2, kDeskStepsT10},  {2, 5, kPaperStepsT10},
    {3, 1, kDeskStepsT10},  {3, 2, kPaperStepsT10}, {3, 5, kPaperStepsT10},
};

ExperimentConfig margin_preset(int basis_points) {
    ExperimentConfig cfg;
    cfg.name = "margin-" + std::string(basis_points < 10 ? "0" : "") +
               std::to_string(basis_points) + "bp";
    cfg.market = artificial_market(1.0);
    cfg.target = affine_target(10.0, 0.01, static_cast<double>(basis_points) * 1e-4);
    cfg.grid = grid_with_steps(kDeskStepsT10);
    cfg.sim = monthly_sim();
    return cfg;
}

ExperimentConfig leverage_preset(const LeverageCell& cell) {
    ExperimentConfig cfg;
    cfg.name = "leverage-r" + std::to_string(cell.ret_pct) + "-cap" + std::to_string(cell.cap);
    cfg.market = artificial_market(static_cast<double>(cell.cap));
    cfg.target = affine_target(10.0, static_cast<double>(cell.ret_pct) * 0.01, 0.0);
    cfg.grid = grid_with_steps(cell.steps);
    cfg.sim = monthly_sim();
    return cfg;
}

long rebalance_steps(Rebalance r, double horizon) {
    // Smallest multiple of the rebalance-date count at or above the
    // reference-scale step count.
    const long intervals =
        static_cast<long>(std::llround(horizon * intervals_per_year(r)));
    const long base = kPaperStepsT10 / 10 * static_cast<long>(std::llround(horizon));
    return ((base + intervals - 1) / intervals) * intervals;
}

ExperimentConfig rebalance_preset(double horizon, double margin, Rebalance r) {
    ExperimentConfig cfg;
    const int t_int = static_cast<int>(std::llround(horizon));
    cfg.name = "rebalance-t" + std::to_string(t_int) + "-" + hjbport::to_string(r);
    cfg.market = artificial_market(2.0);
    cfg.target = affine_target(horizon, 0.02, margin);
    cfg.grid = grid_with_steps(rebalance_steps(r, horizon));
    cfg.sim = monthly_sim();
    cfg.sim.rebalance = r;
    return cfg;
}

ExperimentConfig pension_preset(int cap) {
    ExperimentConfig cfg;
    cfg.name = "pension-cap" + std::to_string(cap);
    cfg.market = pension_market(static_cast<double>(cap));
    cfg.target = pension_target();
    cfg.grid = grid_with_steps(9000);  // 15y, monthly x 50
    cfg.sim = monthly_sim();
    return cfg;
}

}  // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (int bp : {0, 10, 20, 30, 40, 50}) {
        names.push_back(margin_preset(bp).name);
    }
    for (const auto& cell : kLeverageCells) {
        names.push_back(leverage_preset(cell).name);
    }
    for (Rebalance r : {Rebalance::Daily, Rebalance::Weekly, Rebalance::Monthly,
                        Rebalance::Quarterly, Rebalance::Yearly}) {
        names.push_back(rebalance_preset(10.0, 0.002, r).name);
    }
    for (Rebalance r : {Rebalance::Daily, Rebalance::Weekly, Rebalance::Monthly,
                        Rebalance::Quarterly, Rebalance::Yearly}) {
        names.push_back(rebalance_preset(2.0, 0.02, r).name);
    }
    for (int cap : {1, 2, 3, 4, 5, 7, 10}) {
        names.push_back(pension_preset(cap).name);
    }
    return names;
}

ExperimentConfig preset(const std::string& name) {
    for (int bp : {0, 10, 20, 30, 40, 50}) {
        ExperimentConfig cfg = margin_preset(bp);
        if (cfg.name == name) {
            cfg.validate();
            return cfg;
        }
    }
    for (const auto& cell : kLeverageCells) {
        ExperimentConfig cfg = leverage_preset(cell);
        if (cfg.name == name) {
            cfg.validate();
            return cfg;
        }
    }
    for (double horizon : {10.0, 2.0}) {
        for (Rebalance r : {Rebalance::Daily, Rebalance::Weekly, Rebalance::Monthly,
                            Rebalance::Quarterly, Rebalance::Yearly}) {
            ExperimentConfig cfg = rebalance_preset(horizon, horizon == 10.0 ? 0.002 : 0.02, r);
            if (cfg.name == name) {
                cfg.validate();
                return cfg;
            }
        }
    }
    for (int cap : {1, 2, 3, 4, 5, 7, 10}) {
        ExperimentConfig cfg = pension_preset(cap);
        if (cfg.name == name) {
            cfg.validate();
            return cfg;
        }
    }
    throw ConfigError("unknown preset '" + name + "'; run 'tables' with no name to list presets");
}

}  // namespace hjbport
