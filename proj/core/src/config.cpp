#include "see/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace see {

namespace {

using nlohmann::json;

std::string join(const std::vector<std::string>& items, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) out += (i ? sep : "") + items[i];
    return out;
}

struct Named {
    const char* name;
    int value;
};

constexpr Named kSystems[] = {{"double_integrator", static_cast<int>(SystemKind::double_integrator)},
                              {"pendulum", static_cast<int>(SystemKind::pendulum)},
                              {"unicycle", static_cast<int>(SystemKind::unicycle)},
                              {"custom", static_cast<int>(SystemKind::custom_table)}};
constexpr Named kIntegrators[] = {{"semi_implicit", static_cast<int>(PendulumIntegrator::semi_implicit)},
                                  {"explicit_euler", static_cast<int>(PendulumIntegrator::explicit_euler)}};
constexpr Named kBoundaries[] = {{"violate", static_cast<int>(BoundaryMode::violate)},
                                 {"clip", static_cast<int>(BoundaryMode::clip)}};
constexpr Named kScopes[] = {{"zone", static_cast<int>(WitnessScope::zone)},
                             {"all", static_cast<int>(WitnessScope::all)}};
constexpr Named kMethods[] = {{"sweep", static_cast<int>(PruneMethod::sweep)},
                              {"exact", static_cast<int>(PruneMethod::exact)}};

template <std::size_t N>
const char* name_of(const Named (&table)[N], int value) {
    for (const auto& n : table)
        if (n.value == value) return n.name;
    return "?";
}

template <std::size_t N>
std::optional<int> value_of(const Named (&table)[N], const std::string& name) {
    for (const auto& n : table)
        if (name == n.name) return n.value;
    return std::nullopt;
}

template <std::size_t N>
std::string names(const Named (&table)[N]) {
    std::vector<std::string> v;
    for (const auto& n : table) v.emplace_back(n.name);
    return join(v, ", ");
}

// Reads typed fields out of a JSON object, collecting every problem.
class Reader {
public:
    Reader(const json& j, std::vector<std::string>& errors) : j_(j), errors_(errors) {}

    void number(const char* key, double& out) {
        if (!j_.contains(key)) return;
        const json& v = j_.at(key);
        if (!v.is_number()) return bad(key, "a number");
        out = v.get<double>();
    }
    void optional_number(const char* key, std::optional<double>& out) {
        if (!j_.contains(key)) return;
        const json& v = j_.at(key);
        if (v.is_null()) {
            out.reset();
            return;
        }
        if (!v.is_number()) return bad(key, "a number or null");
        out = v.get<double>();
    }
    void optional_int(const char* key, std::optional<int>& out) {
        if (!j_.contains(key)) return;
        const json& v = j_.at(key);
        if (v.is_null()) {
            out.reset();
            return;
        }
        if (!v.is_number_integer()) return bad(key, "an integer or null");
        out = v.get<int>();
    }
    void count(const char* key, std::size_t& out) {
        if (!j_.contains(key)) return;
        const json& v = j_.at(key);
        if (!v.is_number_integer() || v.get<long long>() < 0) return bad(key, "a non-negative integer");
        out = v.get<std::size_t>();
    }
    void boolean(const char* key, bool& out) {
        if (!j_.contains(key)) return;
        const json& v = j_.at(key);
        if (!v.is_boolean()) return bad(key, "true or false");
        out = v.get<bool>();
    }
    void string(const char* key, std::string& out) {
        if (!j_.contains(key)) return;
        const json& v = j_.at(key);
        if (!v.is_string()) return bad(key, "a string");
        out = v.get<std::string>();
    }
    template <typename E, std::size_t N>
    void choice(const char* key, const Named (&table)[N], E& out) {
        if (!j_.contains(key)) return;
        const json& v = j_.at(key);
        std::optional<int> parsed;
        if (v.is_string()) parsed = value_of(table, v.get<std::string>());
        if (!parsed) return bad(key, "one of: " + names(table));
        out = static_cast<E>(*parsed);
    }
    void obstacle(const char* key, DimRange& y, DimRange& z) {
        if (!j_.contains(key)) return;
        const json& v = j_.at(key);
        auto range = [&](const char* axis, DimRange& out) {
            if (!v.contains(axis)) return false;
            const json& r = v.at(axis);
            if (!r.is_array() || r.size() != 2 || !r[0].is_number_integer() || !r[1].is_number_integer())
                return false;
            out = {r[0].get<int>(), r[1].get<int>()};
            return true;
        };
        if (!v.is_object() || v.size() != 2 || !range("y", y) || !range("z", z))
            bad(key, "an object {\"y\": [lo, hi], \"z\": [lo, hi]} of integers");
    }

private:
    void bad(const char* key, const std::string& expected) {
        errors_.push_back(std::string("key '") + key + "': expected " + expected + ", got " + j_.at(key).dump());
    }

    const json& j_;
    std::vector<std::string>& errors_;
};

double quoted_upper(double value, const std::optional<int>& decimals) {
    if (!decimals) return value;
    return value + 0.5 * std::pow(10.0, -*decimals);
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error("invalid configuration:\n  " + join(problems, "\n  ")), problems_(std::move(problems)) {}

const char* system_name(SystemKind kind) { return name_of(kSystems, static_cast<int>(kind)); }

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "system",        "table",        "r0",          "rx",
        "ru",            "known_region", "L",           "Lx",
        "Lu",            "lipschitz_rounding", "witness_scope", "prune_method",
        "distance_cache", "oracle_max_pairs", "oracle_max_candidates", "gamma",
        "max_iterations", "integrator",  "mass",        "length",
        "gravity",       "dt",           "velocity",    "obstacle",
        "boundary",      "export_csv",   "export_model", "export_pgm",
        "audit_log"};
    return keys;
}

SeeConfig default_config(SystemKind system) {
    SeeConfig c;
    c.system = system;
    switch (system) {
        case SystemKind::double_integrator: break;
        case SystemKind::pendulum:
            c.r0 = 3.0;
            c.rx = 3.0;
            c.ru = 2.0;
            c.L = 3.0;
            c.Lx = 3.0;
            c.Lu = 2.0;
            c.dt = 0.3;
            break;
        case SystemKind::unicycle:
            c.r0 = 2.0;
            c.rx = 0.0;
            c.ru = 0.0;
            c.known_region = false;
            c.L = 3.0;
            c.Lx = 1.85;
            c.Lu = 1.0;
            c.dt = 0.2;
            c.boundary = BoundaryMode::clip;
            break;
        case SystemKind::custom_table:
            c.r0 = 0.0;
            c.rx = 0.0;
            c.ru = 0.0;
            c.known_region = false;
            break;
    }
    return c;
}

void apply_override(json& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError({"override '" + assignment + "': expected key=value"});
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    const auto& keys = config_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
        throw ConfigError({"override '" + assignment + "': unknown key '" + key + "'"});
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    config[key] = std::move(value);
}

SeeConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw ConfigError({"configuration must be a JSON object"});
    std::vector<std::string> errors;
    const auto& keys = config_keys();
    for (const auto& [key, _] : j.items())
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            errors.push_back("unknown key '" + key + "' (valid keys: " + join(keys, ", ") + ")");

    SystemKind kind = SystemKind::double_integrator;
    Reader r(j, errors);
    r.choice("system", kSystems, kind);
    SeeConfig c = default_config(kind);
    r.string("table", c.table);
    r.number("r0", c.r0);
    r.number("rx", c.rx);
    r.number("ru", c.ru);
    r.boolean("known_region", c.known_region);
    r.number("L", c.L);
    r.optional_number("Lx", c.Lx);
    r.optional_number("Lu", c.Lu);
    r.optional_int("lipschitz_rounding", c.lipschitz_rounding);
    r.choice("witness_scope", kScopes, c.witness_scope);
    r.choice("prune_method", kMethods, c.prune_method);
    r.boolean("distance_cache", c.distance_cache);
    r.count("oracle_max_pairs", c.oracle_max_pairs);
    r.count("oracle_max_candidates", c.oracle_max_candidates);
    r.number("gamma", c.gamma);
    r.count("max_iterations", c.max_iterations);
    r.choice("integrator", kIntegrators, c.integrator);
    r.number("mass", c.mass);
    r.number("length", c.length);
    r.number("gravity", c.gravity);
    r.number("dt", c.dt);
    r.number("velocity", c.velocity);
    r.obstacle("obstacle", c.obstacle_y, c.obstacle_z);
    r.choice("boundary", kBoundaries, c.boundary);
    r.boolean("export_csv", c.export_csv);
    r.boolean("export_model", c.export_model);
    r.boolean("export_pgm", c.export_pgm);
    r.boolean("audit_log", c.audit_log);

    if (!c.table.empty() && !base_dir.empty() && std::filesystem::path(c.table).is_relative())
        c.table = (base_dir / c.table).lexically_normal().string();

    for (auto& e : validate_config(c)) errors.push_back(std::move(e));
    if (!errors.empty()) throw ConfigError(std::move(errors));
    return c;
}

SeeConfig parse_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot open config file " + path.string()});
    std::stringstream buffer;
    buffer << in.rdbuf();
    json j;
    try {
        j = json::parse(buffer.str());
    } catch (const json::parse_error& e) {
        // Translate the byte offset into a line number.
        const std::string text = buffer.str();
        const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
        throw ConfigError({path.string() + ":" + std::to_string(line) + ": " + e.what()});
    }
    if (!j.is_object()) throw ConfigError({path.string() + ": configuration must be a JSON object"});
    for (const auto& o : overrides) apply_override(j, o);
    return config_from_json(j, path.parent_path());
}

json config_to_json(const SeeConfig& c) {
    auto opt = [](const auto& v) { return v ? json(*v) : json(nullptr); };
    json j = json::object();
    j["system"] = system_name(c.system);
    j["table"] = c.table;
    j["r0"] = c.r0;
    j["rx"] = c.rx;
    j["ru"] = c.ru;
    j["known_region"] = c.known_region;
    j["L"] = c.L;
    j["Lx"] = opt(c.Lx);
    j["Lu"] = opt(c.Lu);
    j["lipschitz_rounding"] = opt(c.lipschitz_rounding);
    j["witness_scope"] = name_of(kScopes, static_cast<int>(c.witness_scope));
    j["prune_method"] = name_of(kMethods, static_cast<int>(c.prune_method));
    j["distance_cache"] = c.distance_cache;
    j["oracle_max_pairs"] = c.oracle_max_pairs;
    j["oracle_max_candidates"] = c.oracle_max_candidates;
    j["gamma"] = c.gamma;
    j["max_iterations"] = c.max_iterations;
    j["integrator"] = name_of(kIntegrators, static_cast<int>(c.integrator));
    j["mass"] = c.mass;
    j["length"] = c.length;
    j["gravity"] = c.gravity;
    j["dt"] = c.dt;
    j["velocity"] = c.velocity;
    j["obstacle"] = {{"y", {c.obstacle_y.lo, c.obstacle_y.hi}}, {"z", {c.obstacle_z.lo, c.obstacle_z.hi}}};
    j["boundary"] = name_of(kBoundaries, static_cast<int>(c.boundary));
    j["export_csv"] = c.export_csv;
    j["export_model"] = c.export_model;
    j["export_pgm"] = c.export_pgm;
    j["audit_log"] = c.audit_log;
    return j;
}

std::vector<std::string> validate_config(const SeeConfig& c) {
    std::vector<std::string> e;
    auto finite = [](double v) { return std::isfinite(v); };
    if (!(c.r0 >= 0) || !finite(c.r0)) e.push_back("r0 must be a finite number >= 0");
    if (!(c.rx >= 0) || !finite(c.rx)) e.push_back("rx must be a finite number >= 0");
    if (!(c.ru >= 0) || !finite(c.ru)) e.push_back("ru must be a finite number >= 0");
    if (!(c.L > 0) || !finite(c.L)) e.push_back("L must be > 0");
    if (c.Lx.has_value() != c.Lu.has_value()) e.push_back("Lx and Lu must both be set or both be null");
    if (c.Lx && (!(*c.Lx > 0) || !finite(*c.Lx))) e.push_back("Lx must be > 0");
    if (c.Lu && (!(*c.Lu >= 0) || !finite(*c.Lu))) e.push_back("Lu must be >= 0");
    if (c.lipschitz_rounding && (*c.lipschitz_rounding < 0 || *c.lipschitz_rounding > 9))
        e.push_back("lipschitz_rounding must lie in [0, 9] or be null");
    if (!(c.gamma > 0 && c.gamma < 1)) e.push_back("gamma must lie in (0, 1)");
    if (c.max_iterations < 1) e.push_back("max_iterations must be >= 1");
    if (c.oracle_max_pairs < 1) e.push_back("oracle_max_pairs must be >= 1");
    if (c.oracle_max_candidates < 1) e.push_back("oracle_max_candidates must be >= 1");
    if (!(c.mass > 0) || !finite(c.mass)) e.push_back("mass must be > 0");
    if (!(c.length > 0) || !finite(c.length)) e.push_back("length must be > 0");
    if (!(c.gravity >= 0) || !finite(c.gravity)) e.push_back("gravity must be >= 0");
    if (!(c.dt > 0) || !finite(c.dt)) e.push_back("dt must be > 0");
    if (!(c.velocity > 0) || !finite(c.velocity)) e.push_back("velocity must be > 0");
    if (c.obstacle_y.hi < c.obstacle_y.lo || c.obstacle_z.hi < c.obstacle_z.lo)
        e.push_back("obstacle ranges must satisfy lo <= hi");
    if (c.system == SystemKind::custom_table && c.table.empty()) e.push_back("system 'custom' requires 'table'");
    if (c.system != SystemKind::custom_table && !c.table.empty())
        e.push_back("'table' is only valid with system 'custom'");
    if (c.boundary == BoundaryMode::clip && c.system != SystemKind::unicycle)
        e.push_back("boundary 'clip' is only supported for the unicycle");
    return e;
}

DiscreteSystem make_system(const SeeConfig& c) {
    switch (c.system) {
        case SystemKind::double_integrator: return DiscreteSystem::double_integrator();
        case SystemKind::pendulum: {
            PendulumParams p;
            p.mass = c.mass;
            p.length = c.length;
            p.gravity = c.gravity;
            p.dt = c.dt;
            p.integrator = c.integrator;
            return DiscreteSystem::pendulum(p);
        }
        case SystemKind::unicycle: {
            UnicycleParams p;
            p.velocity = c.velocity;
            p.dt = c.dt;
            p.obstacle_y = c.obstacle_y;
            p.obstacle_z = c.obstacle_z;
            return DiscreteSystem::unicycle(p, c.boundary);
        }
        case SystemKind::custom_table: return DiscreteSystem::load_table_json(c.table);
    }
    throw std::logic_error("unknown system kind");
}

LipschitzSpec effective_lipschitz(const SeeConfig& c) {
    LipschitzSpec spec;
    spec.L = quoted_upper(c.L, c.lipschitz_rounding);
    if (c.Lx) spec.Lx = quoted_upper(*c.Lx, c.lipschitz_rounding);
    if (c.Lu) spec.Lu = quoted_upper(*c.Lu, c.lipschitz_rounding);
    return spec;
}

InitialModelSpec initial_spec(const SeeConfig& c) { return {c.r0, c.rx, c.ru, c.known_region}; }

RunOptions run_options(const SeeConfig& c, unsigned threads) {
    RunOptions o;
    o.initial = initial_spec(c);
    o.lipschitz = effective_lipschitz(c);
    o.max_iterations = c.max_iterations;
    o.method = c.prune_method;
    o.witnesses = c.witness_scope;
    o.oracle = {c.oracle_max_pairs, c.oracle_max_candidates};
    o.threads = threads;
    o.distance_cache = c.distance_cache;
    return o;
}

}  // namespace see
