#ifndef PORESIM_CONFIG_HPP
#define PORESIM_CONFIG_HPP

#include "poresim/integrator.hpp"
#include "poresim/kinetics.hpp"
#include "poresim/oracle.hpp"
#include "poresim/scenario.hpp"

#include <optional>
#include <string>

namespace poresim {

struct AnalysisConfig {
    double mb_extinction_fraction = 1e-3;   // of the initial total carbon
    double trailing_window_days = 90.0;
    double max_conservation_drift = 1e-8;   // audit gate for simulate/batch exit codes
};

/// Everything the CLI reads from a config file. Defaults are embedded; a
/// config file overrides them field by field, and flags override the file.
/// The DOM diffusion coefficient has no defensible default, so it stays
/// unset until a file or flag provides it.
struct RunConfig {
    BioParams bio;
    std::optional<double> dom_diffusion_um2_day;
    SolverConfig solver;
    ScenarioSpec scenario;
    AnalysisConfig analysis;
    OracleFixture oracle;

    /// bio with d_dom filled in; throws InputError when it was never set.
    BioParams bio_resolved() const;
};

/// Parses a config JSON over the defaults. Unknown keys are rejected so typos
/// fail loudly. Throws InputError on malformed input.
RunConfig load_config(const std::string& path);

/// The built-in defaults as a config JSON string (pretty-printed), suitable
/// as a starting point for users.
std::string default_config_json();

} // namespace poresim

#endif
