#pragma once

#include "lqmfg/model.hpp"
#include "lqmfg/simulate.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lqmfg {

/// Parsed scenario file: the model plus optional task-specific sections.
/// Parsing is strict; unknown keys anywhere are rejected.
struct ScenarioConfig {
    GameModel model;
    Eigen::VectorXd x0;
    bool qf_stationary = false;  // Qf was requested as the stationary weight

    std::vector<int> finite_n_Ns;

    struct Sim {
        int N = 0;
        int paths = 0;
        double dt = 0;
        std::uint64_t seed = 0;
        std::string profile = "exact_nash";
        InitialLaw initial_law;
    };
    std::optional<Sim> sim;

    int kappa_nodes = 401;
};

/// Throws std::invalid_argument with a diagnostic on any schema violation.
ScenarioConfig load_config(const std::string& file);
ScenarioConfig parse_config(const std::string& json_text);

/// Canonical serialization; parse(serialize(m)) reproduces the model
/// field-exactly.
std::string serialize_model(const GameModel& m, const Eigen::VectorXd& x0);

}  // namespace lqmfg
