#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "see/pruning.hpp"
#include "see/see_driver.hpp"
#include "see/system.hpp"
#include "see/uncertain_model.hpp"

namespace see {

/// Experiment parameters. Field names follow the JSON keys.
struct SeeConfig {
    SystemKind system = SystemKind::double_integrator;
    std::string table;  // custom transition table, resolved against the config directory

    double r0 = 2.0;
    double rx = 2.0;
    double ru = 1.0;
    bool known_region = true;

    double L = 1.73;
    std::optional<double> Lx;
    std::optional<double> Lu;
    /// Decimal places the Lipschitz constants are quoted to; the effective
    /// constant is the upper end of the rounding interval. Empty = literal.
    std::optional<int> lipschitz_rounding = 2;
    WitnessScope witness_scope = WitnessScope::zone;
    PruneMethod prune_method = PruneMethod::sweep;
    bool distance_cache = true;
    std::size_t oracle_max_pairs = 10;
    std::size_t oracle_max_candidates = 4;

    double gamma = 0.9;
    std::size_t max_iterations = 50;

    PendulumIntegrator integrator = PendulumIntegrator::semi_implicit;
    double mass = 1.0;
    double length = 1.0;
    double gravity = 9.8;
    double dt = 0.3;
    double velocity = 1.0;
    DimRange obstacle_y{6, 9};
    DimRange obstacle_z{-3, 3};
    BoundaryMode boundary = BoundaryMode::violate;

    bool export_csv = true;
    bool export_model = true;
    bool export_pgm = false;
    bool audit_log = false;

    friend bool operator==(const SeeConfig&, const SeeConfig&) = default;
};

/// Every problem found while reading or validating a configuration.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

SeeConfig default_config(SystemKind system);

/// Keys accepted in a config file, in canonical order.
const std::vector<std::string>& config_keys();

/// Applies one "key=value" override. The value is parsed as JSON when
/// possible and taken as a string otherwise.
void apply_override(nlohmann::json& config, const std::string& assignment);

SeeConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
SeeConfig parse_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});
nlohmann::json config_to_json(const SeeConfig& config);

/// Lists every violated invariant; empty when the config is valid.
std::vector<std::string> validate_config(const SeeConfig& config);

DiscreteSystem make_system(const SeeConfig& config);
LipschitzSpec effective_lipschitz(const SeeConfig& config);
InitialModelSpec initial_spec(const SeeConfig& config);
RunOptions run_options(const SeeConfig& config, unsigned threads);

const char* system_name(SystemKind kind);

}  // namespace see
