#include "poresim/scenario.hpp"

#include "poresim/errors.hpp"
#include "poresim/rng.hpp"

#include <json.hpp>

#include <deque>
#include <fstream>

namespace poresim {

void ScenarioSpec::validate() const {
    if (!(dom_density_range[0] >= 0.0) || dom_density_range[1] < dom_density_range[0])
        throw InputError("ScenarioSpec: bad DOM density range");
    if (mb_fraction_range[0] < 0.0 || mb_fraction_range[1] > 1.0 ||
        mb_fraction_range[1] < mb_fraction_range[0])
        throw InputError("ScenarioSpec: MB fraction range must lie in [0,1]");
    if (patch_count_range[0] < 1 || patch_count_range[1] < patch_count_range[0])
        throw InputError("ScenarioSpec: bad patch count range");
    if (patch_radius_hops < 0) throw InputError("ScenarioSpec: negative patch radius");
    if (initial_som_per_node < 0.0 || initial_fom_per_node < 0.0 || initial_co2_per_node < 0.0)
        throw InputError("ScenarioSpec: negative initial masses");
}

namespace {

// nodes within `hops` edges of `center`, by breadth-first search
std::vector<int> patch_nodes(const std::vector<std::vector<int>>& adj, int center, int hops) {
    std::vector<int> dist(adj.size(), -1);
    std::vector<int> nodes{center};
    dist[center] = 0;
    std::deque<int> queue{center};
    while (!queue.empty()) {
        const int u = queue.front();
        queue.pop_front();
        if (dist[u] == hops) continue;
        for (const int w : adj[u])
            if (dist[w] < 0) {
                dist[w] = dist[u] + 1;
                nodes.push_back(w);
                queue.push_back(w);
            }
    }
    return nodes;
}

} // namespace

SystemState generate(const PoreNetwork& net, const ScenarioSpec& spec,
                     ScenarioSummary* summary) {
    spec.validate();
    const int n = net.node_count();
    if (n < 1) throw InputError("generate: empty network");
    if (!(net.resolution_um > 0.0)) throw InputError("generate: network lacks a resolution");

    SplitMix64 rng(spec.seed);
    SystemState state = SystemState::zero(n);

    const double voxel_volume = net.resolution_um * net.resolution_um * net.resolution_um;
    const double total_volume = net.total_volume_um3();

    // (1) DOM total from a density per voxel volume
    const double density = rng.uniform(spec.dom_density_range[0], spec.dom_density_range[1]);
    const double dom_total = density * (total_volume / voxel_volume);

    // (2) spatial distribution of DOM
    if (spec.dom_mode == DomMode::Homogeneous) {
        for (int i = 0; i < n; ++i)
            state.dom[i] = dom_total * (net.balls[i].volume_um3 / total_volume);
    } else {
        Eigen::VectorXd w(n);
        for (int i = 0; i < n; ++i) w[i] = rng.next_double();
        const double wsum = w.sum();
        if (wsum == 0.0) {
            w.setOnes();
            state.dom = (dom_total / n) * w;
        } else {
            state.dom = (dom_total / wsum) * w;
        }
    }

    // (3) MB total as a fraction of DOM, placed in patches
    const double fraction = rng.uniform(spec.mb_fraction_range[0], spec.mb_fraction_range[1]);
    const double mb_total = fraction * dom_total;
    const int patches = static_cast<int>(rng.uniform_int(
        static_cast<std::uint64_t>(spec.patch_count_range[0]),
        static_cast<std::uint64_t>(spec.patch_count_range[1])));

    const auto adj = adjacency(net);
    const double mb_per_patch = mb_total / patches;
    std::vector<int> centers;
    centers.reserve(patches);
    for (int p = 0; p < patches; ++p) {
        const int center = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n)));
        centers.push_back(center);
        const auto nodes = patch_nodes(adj, center, spec.patch_radius_hops);
        double vol = 0.0;
        for (const int i : nodes) vol += net.balls[i].volume_um3;
        for (const int i : nodes)
            state.mb[i] += mb_per_patch * (net.balls[i].volume_um3 / vol);
    }

    state.som.setConstant(spec.initial_som_per_node);
    state.fom.setConstant(spec.initial_fom_per_node);
    state.co2.setConstant(spec.initial_co2_per_node);

    if (summary) {
        summary->seed = spec.seed;
        summary->initial_mb_ugc = state.mb.sum();
        summary->initial_dom_ugc = state.dom.sum();
        summary->mb_fraction =
            summary->initial_dom_ugc > 0.0 ? summary->initial_mb_ugc / summary->initial_dom_ugc : 0.0;
        summary->patch_count = patches;
        summary->patch_centers = centers;
    }
    return state;
}

std::pair<std::vector<SystemState>, std::vector<ScenarioSummary>> batch(
    const PoreNetwork& net, const ScenarioSpec& spec_template, int count,
    std::uint64_t base_seed) {
    if (count < 1) throw InputError("batch: count must be >= 1");

    std::vector<SystemState> states;
    std::vector<ScenarioSummary> summaries;
    states.reserve(count);
    summaries.reserve(count);
    for (int k = 0; k < count; ++k) {
        ScenarioSpec spec = spec_template;
        spec.seed = base_seed + static_cast<std::uint64_t>(k);
        ScenarioSummary sum;
        states.push_back(generate(net, spec, &sum));
        summaries.push_back(sum);
    }
    return {std::move(states), std::move(summaries)};
}

void export_state(const SystemState& state, const std::string& path) {
    nlohmann::json nodes = nlohmann::json::array();
    for (int i = 0; i < state.node_count(); ++i)
        nodes.push_back({{"id", i},
                         {"mb", state.mb[i]},
                         {"dom", state.dom[i]},
                         {"som", state.som[i]},
                         {"fom", state.fom[i]},
                         {"co2", state.co2[i]}});
    nlohmann::json j{{"time_days", state.time_days}, {"nodes", nodes}};
    std::ofstream out(path);
    if (!out) throw InputError("cannot write state file: " + path);
    out << j.dump(2) << '\n';
}

SystemState import_state(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open state file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InputError("malformed state file " + path + ": " + e.what());
    }
    try {
        const auto& nodes = j.at("nodes");
        SystemState state = SystemState::zero(static_cast<int>(nodes.size()));
        state.time_days = j.value("time_days", 0.0);
        std::vector<bool> seen(nodes.size(), false);
        for (const auto& nd : nodes) {
            const int id = nd.at("id").get<int>();
            if (id < 0 || id >= state.node_count() || seen[id])
                throw InputError("state file: bad or duplicate node id " + std::to_string(id));
            seen[id] = true;
            state.mb[id] = nd.at("mb").get<double>();
            state.dom[id] = nd.at("dom").get<double>();
            state.som[id] = nd.at("som").get<double>();
            state.fom[id] = nd.at("fom").get<double>();
            state.co2[id] = nd.at("co2").get<double>();
        }
        return state;
    } catch (const nlohmann::json::exception& e) {
        throw InputError("state file " + path + ": " + e.what());
    }
}

} // namespace poresim
