#ifndef PORESIM_SCENARIO_HPP
#define PORESIM_SCENARIO_HPP

#include "poresim/integrator.hpp"
#include "poresim/network.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace poresim {

enum class DomMode { Homogeneous, Heterogeneous };

/// Randomized initial-condition recipe. DOM: a density drawn from
/// dom_density_range (ug per voxel volume) times the total pore volume,
/// spread uniformly by volume (homogeneous) or by per-node random weights
/// (heterogeneous). MB: a fraction of the DOM total drawn from
/// mb_fraction_range, split over randomly placed patches of graph radius
/// patch_radius_hops. All draws come from a single SplitMix64 stream seeded
/// with `seed`, in the documented order: density, DOM weights, MB fraction,
/// patch count, patch centers.
struct ScenarioSpec {
    DomMode dom_mode = DomMode::Heterogeneous;
    std::array<double, 2> dom_density_range{1e-7, 9e-4};  // ug per voxel volume
    std::array<double, 2> mb_fraction_range{0.0005, 0.0015};
    std::array<int, 2> patch_count_range{3, 10};
    int patch_radius_hops = 1;
    std::uint64_t seed = 0;
    double initial_som_per_node = 0.0;  // ugC, same mass at every node
    double initial_fom_per_node = 0.0;
    double initial_co2_per_node = 0.0;

    void validate() const;
};

struct ScenarioSummary {
    std::uint64_t seed = 0;
    double initial_mb_ugc = 0.0;
    double initial_dom_ugc = 0.0;
    double mb_fraction = 0.0;
    int patch_count = 0;
    std::vector<int> patch_centers;
};

/// Generates the initial state on the network; deterministic for a given
/// (network, spec). Fills `summary` when given. Throws InputError on an
/// empty network or a bad spec.
SystemState generate(const PoreNetwork& net, const ScenarioSpec& spec,
                     ScenarioSummary* summary = nullptr);

/// `count` independent scenarios seeded base_seed, base_seed+1, ...; the
/// summaries report the initial masses per scenario.
std::pair<std::vector<SystemState>, std::vector<ScenarioSummary>> batch(
    const PoreNetwork& net, const ScenarioSpec& spec_template, int count,
    std::uint64_t base_seed);

/// Initial-state JSON (node id -> five masses) and its inverse.
void export_state(const SystemState& state, const std::string& path);
SystemState import_state(const std::string& path);

} // namespace poresim

#endif
