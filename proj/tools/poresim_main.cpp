// poresim command line: extract pore networks from binary volumes, generate
// seeded scenarios, run long-horizon simulations and batches, compare the
// network solver against the voxel-grid reference, and post-process
// trajectories. Every command is deterministic given its flags and seed.

#include "poresim/analysis.hpp"
#include "poresim/config.hpp"
#include "poresim/errors.hpp"
#include "poresim/integrator.hpp"
#include "poresim/network.hpp"
#include "poresim/oracle.hpp"
#include "poresim/scenario.hpp"
#include "poresim/volume.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

namespace fs = std::filesystem;
using namespace poresim;

namespace {

CropRegion parse_crop(const std::string& text) {
    // format: x0:x1,y0:y1,z0:z1
    CropRegion region;
    int axis = 0;
    std::size_t pos = 0;
    while (axis < 3) {
        const auto colon = text.find(':', pos);
        const auto comma = text.find(',', pos);
        const auto end = (axis < 2) ? comma : text.size();
        if (colon == std::string::npos || (axis < 2 && comma == std::string::npos) || colon > end)
            throw InputError("bad --crop format, expected x0:x1,y0:y1,z0:z1");
        region.lo[axis] = std::stoi(text.substr(pos, colon - pos));
        region.hi[axis] = std::stoi(text.substr(colon + 1, end - colon - 1));
        pos = end + 1;
        ++axis;
    }
    return region;
}

RunConfig load_or_default(const std::string& config_path) {
    if (config_path.empty()) return RunConfig{};
    return load_config(config_path);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write: " + path.string());
    out << text;
}

struct SimulateResult {
    Trajectory traj;
    std::optional<AttractorReport> report;  // absent for trajectories too short to judge
    double audit = 0.0;
    ScenarioSummary scenario;
};

SimulateResult simulate_one(const PoreNetwork& net, const RunConfig& cfg,
                            const std::optional<SystemState>& initial,
                            std::uint64_t seed) {
    ScenarioSpec spec = cfg.scenario;
    spec.seed = seed;

    SimulateResult res;
    SystemState state0 =
        initial ? *initial : generate(net, spec, &res.scenario);
    if (initial) {
        res.scenario.seed = seed;
        res.scenario.initial_mb_ugc = state0.mb.sum();
        res.scenario.initial_dom_ugc = state0.dom.sum();
        res.scenario.mb_fraction = res.scenario.initial_dom_ugc > 0.0
                                       ? res.scenario.initial_mb_ugc / res.scenario.initial_dom_ugc
                                       : 0.0;
    }

    res.traj = run(state0, net, cfg.bio_resolved(), cfg.solver);
    if (res.traj.records.size() >= 2) {
        res.audit = conservation_audit(res.traj);
        res.report = attractor_report(res.traj, cfg.analysis.mb_extinction_fraction,
                                      std::min(cfg.analysis.trailing_window_days,
                                               res.traj.duration_days()));
    }
    return res;
}

void write_report_or_stub(const std::optional<AttractorReport>& report, const fs::path& path) {
    if (report) {
        export_report(*report, path.string());
    } else {
        write_text(path, "{\n  \"converged\": false,\n  \"note\": \"trajectory too short to analyze\"\n}\n");
    }
}

// --- subcommands -------------------------------------------------------------

int cmd_synth(const std::string& shape, Index3 dims, double resolution, double radius,
              double separation, int length, int count, double r_min, double r_max,
              std::uint64_t seed, const std::string& out_base) {
    SynthSpec spec;
    // midpoint snapped to a voxel center
    const std::array<double, 3> mid = {dims[0] / 2 + 0.5, dims[1] / 2 + 0.5, dims[2] / 2 + 0.5};
    if (shape == "sphere") {
        spec = SynthSpec::sphere(dims, mid, radius, resolution);
    } else if (shape == "dumbbell") {
        spec.dims = dims;
        spec.resolution_um = resolution;
        spec.spheres.push_back({{mid[0] - separation / 2.0, mid[1], mid[2]}, radius});
        spec.spheres.push_back({{mid[0] + separation / 2.0, mid[1], mid[2]}, radius});
    } else if (shape == "tube") {
        const int y = dims[1] / 2, z = dims[2] / 2;
        const int x0 = (dims[0] - length) / 2;
        spec = SynthSpec::tube_x(dims, y, z, x0, x0 + length - 1, resolution);
    } else if (shape == "blobs") {
        spec = SynthSpec::random_blobs(dims, count, r_min, r_max, seed, resolution);
    } else {
        throw InputError("unknown shape '" + shape + "' (sphere|dumbbell|tube|blobs)");
    }
    const VolumeImage img = synth_volume(spec);
    save_volume(img, out_base + ".raw", out_base + ".json");
    std::cout << "wrote " << out_base << ".raw/.json  dims=" << img.dims[0] << "x" << img.dims[1]
              << "x" << img.dims[2] << "  pore_voxels=" << img.pore_count()
              << "  porosity=" << porosity(img) << "\n";
    return 0;
}

int cmd_extract(const std::string& image, const std::string& meta, const std::string& crop_flag,
                const std::string& out) {
    VolumeImage img = load_volume(image, meta);
    if (!crop_flag.empty()) img = crop(img, parse_crop(crop_flag));
    const PoreNetwork net = extract_network(img, fs::path(image).filename().string());
    export_network(net, out);
    std::cout << "nodes=" << net.node_count() << " edges=" << net.edges.size()
              << " porosity=" << porosity(img) << " total_volume_um3=" << net.total_volume_um3()
              << "\n";
    return 0;
}

int cmd_scenario(const std::string& network, const std::string& config,
                 std::optional<std::uint64_t> seed, const std::string& out) {
    const PoreNetwork net = import_network(network);
    RunConfig cfg = load_or_default(config);
    if (seed) cfg.scenario.seed = *seed;
    ScenarioSummary sum;
    const SystemState state = generate(net, cfg.scenario, &sum);
    export_state(state, out);
    std::cout << "seed=" << sum.seed << " dom_ugc=" << sum.initial_dom_ugc
              << " mb_ugc=" << sum.initial_mb_ugc << " mb_fraction=" << sum.mb_fraction
              << " patches=" << sum.patch_count << "\n";
    return 0;
}

int cmd_simulate(const std::string& network, const std::string& config,
                 const std::string& state_path, std::optional<std::uint64_t> seed,
                 std::optional<double> dt, std::optional<double> t_end,
                 std::optional<double> dom_diffusion, const std::string& out_dir) {
    const PoreNetwork net = import_network(network);
    RunConfig cfg = load_or_default(config);
    if (seed) cfg.scenario.seed = *seed;
    if (dt) cfg.solver.dt_days = *dt;
    if (t_end) cfg.solver.t_end_days = *t_end;
    if (dom_diffusion) cfg.dom_diffusion_um2_day = *dom_diffusion;

    std::optional<SystemState> initial;
    if (!state_path.empty()) initial = import_state(state_path);

    fs::create_directories(out_dir);
    const SimulateResult res = simulate_one(net, cfg, initial, cfg.scenario.seed);
    export_trajectory(res.traj, (fs::path(out_dir) / "trajectory.csv").string());
    write_report_or_stub(res.report, fs::path(out_dir) / "attractor.json");

    std::cout << "records=" << res.traj.records.size() << " t_end=" << cfg.solver.t_end_days
              << " conservation_drift=" << res.audit << " converged="
              << (res.report && res.report->converged ? "true" : "false") << "\n";
    if (res.audit > cfg.analysis.max_conservation_drift) {
        std::cerr << "conservation audit failed: drift " << res.audit << " above "
                  << cfg.analysis.max_conservation_drift << "\n";
        return 4;
    }
    return 0;
}

int cmd_batch(const std::string& network, const std::string& config, int count,
              std::uint64_t base_seed, int jobs, std::optional<double> dom_diffusion,
              const std::string& out_dir) {
    if (count < 1) throw InputError("--count must be >= 1");
    if (jobs < 1) throw InputError("--jobs must be >= 1");
    const PoreNetwork net = import_network(network);
    RunConfig cfg = load_or_default(config);
    if (dom_diffusion) cfg.dom_diffusion_um2_day = *dom_diffusion;
    cfg.bio_resolved();  // fail before spawning workers if D_n is missing

    fs::create_directories(out_dir);

    struct Row {
        bool ok = false;
        std::string error;
        SimulateResult res;
    };
    std::vector<Row> rows(count);
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (int k; (k = next.fetch_add(1)) < count;) {
            Row& row = rows[k];
            try {
                const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(k);
                row.res = simulate_one(net, cfg, std::nullopt, seed);
                const fs::path dir = fs::path(out_dir) / ("scenario_" + std::to_string(k));
                fs::create_directories(dir);
                export_trajectory(row.res.traj, (dir / "trajectory.csv").string());
                write_report_or_stub(row.res.report, dir / "attractor.json");
                if (row.res.audit > cfg.analysis.max_conservation_drift)
                    row.error = "conservation audit failed: drift " +
                                std::to_string(row.res.audit);
                else
                    row.ok = true;
            } catch (const std::exception& e) {
                row.error = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < std::min(jobs, count); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    nlohmann::json summary = nlohmann::json::array();
    bool any_failed = false;
    std::cout << "scenario seed dom_ugc mb_ugc mb_fraction extinction_days converged drift\n";
    for (int k = 0; k < count; ++k) {
        const Row& row = rows[k];
        if (!row.ok) {
            any_failed = true;
            std::cout << k << " FAILED: " << row.error << "\n";
            summary.push_back({{"scenario", k}, {"error", row.error}});
            continue;
        }
        const auto& s = row.res.scenario;
        const AttractorReport rep = row.res.report.value_or(AttractorReport{});
        std::cout << k << " " << s.seed << " " << s.initial_dom_ugc << " " << s.initial_mb_ugc
                  << " " << s.mb_fraction << " " << rep.time_to_mb_extinction_days << " "
                  << (rep.converged ? "true" : "false") << " " << row.res.audit << "\n";
        summary.push_back({{"scenario", k},
                           {"seed", s.seed},
                           {"initial_dom_ugc", s.initial_dom_ugc},
                           {"initial_mb_ugc", s.initial_mb_ugc},
                           {"mb_fraction", s.mb_fraction},
                           {"patch_count", s.patch_count},
                           {"time_to_mb_extinction_days", rep.time_to_mb_extinction_days},
                           {"terminal_agg2", rep.terminal_point},
                           {"converged", rep.converged},
                           {"conservation_drift", row.res.audit}});
    }
    write_text(fs::path(out_dir) / "summary.json", nlohmann::json(summary).dump(2) + "\n");
    return any_failed ? 1 : 0;
}

int cmd_oracle(const std::string& image, const std::string& meta, const std::string& config,
               const std::string& out) {
    const VolumeImage img = load_volume(image, meta);
    const RunConfig cfg = load_or_default(config);
    BioParams params = cfg.bio_resolved();
    const ComparisonReport rep = compare_with_network(img, params, cfg.oracle);
    export_comparison(rep, out);
    std::cout << "nodes=" << rep.network_nodes << " pore_voxels=" << rep.pore_voxels
              << " max_rel_l1=" << rep.max_rel_l1 << " max_rel_mb=" << rep.max_rel_mb
              << " max_rel_dom=" << rep.max_rel_dom << "\n";
    return 0;
}

int cmd_analyze(const std::string& trajectory, const std::string& config,
                std::optional<double> threshold, std::optional<double> window,
                const std::string& out) {
    const RunConfig cfg = load_or_default(config);
    const Trajectory traj = import_trajectory(trajectory);
    const double frac = threshold.value_or(cfg.analysis.mb_extinction_fraction);
    const double win = window.value_or(cfg.analysis.trailing_window_days);
    const AttractorReport rep = attractor_report(traj, frac, win);
    export_report(rep, out);
    std::cout << "records=" << traj.records.size()
              << " conservation_drift=" << conservation_audit(traj)
              << " converged=" << (rep.converged ? "true" : "false") << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pore-network simulator for microbial decomposition of organic matter"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic binary volume");
    std::string shape = "sphere", out_base = "volume";
    std::vector<int> dims_flag = {32, 32, 32};
    double resolution = 1.0, radius = 10.0, separation = 10.0, r_min = 2.0, r_max = 5.0;
    int length = 20, count = 20;
    std::uint64_t synth_seed = 1;
    synth->add_option("--shape", shape, "sphere|dumbbell|tube|blobs");
    synth->add_option("--dims", dims_flag, "nx ny nz")->expected(3);
    synth->add_option("--resolution", resolution, "voxel edge in um");
    synth->add_option("--radius", radius, "sphere radius in voxels");
    synth->add_option("--separation", separation, "dumbbell center separation in voxels");
    synth->add_option("--length", length, "tube length in voxels");
    synth->add_option("--count", count, "number of random blobs");
    synth->add_option("--rmin", r_min, "min blob radius");
    synth->add_option("--rmax", r_max, "max blob radius");
    synth->add_option("--seed", synth_seed, "blob placement seed");
    synth->add_option("--out", out_base, "output base path (writes .raw and .json)");

    // extract
    auto* extract = app.add_subcommand("extract", "build the ball network from a volume");
    std::string image, meta, crop_flag, net_out = "network.json";
    extract->add_option("--image", image, "raw volume path")->required();
    extract->add_option("--meta", meta, "JSON sidecar path")->required();
    extract->add_option("--crop", crop_flag, "x0:x1,y0:y1,z0:z1 (half-open)");
    extract->add_option("--out", net_out, "network JSON output");

    // scenario
    auto* scenario = app.add_subcommand("scenario", "generate a seeded initial state");
    std::string network, config, state_out = "state.json";
    std::optional<std::uint64_t> seed;
    scenario->add_option("--network", network, "network JSON")->required();
    scenario->add_option("--config", config, "config JSON (defaults when omitted)");
    scenario->add_option("--seed", seed, "overrides the config seed");
    scenario->add_option("--out", state_out, "initial state JSON output");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "run one simulation");
    std::string sim_network, sim_config, sim_state, sim_out = "out";
    std::optional<std::uint64_t> sim_seed;
    std::optional<double> sim_dt, sim_t_end;
    simulate->add_option("--network", sim_network, "network JSON")->required();
    simulate->add_option("--config", sim_config, "config JSON");
    simulate->add_option("--state", sim_state, "initial state JSON (skips scenario generation)");
    simulate->add_option("--seed", sim_seed, "scenario seed override");
    simulate->add_option("--dt", sim_dt, "time step in days");
    simulate->add_option("--t-end", sim_t_end, "horizon in days");
    std::optional<double> sim_dom_diffusion;
    simulate->add_option("--dom-diffusion", sim_dom_diffusion,
                         "DOM diffusion coefficient in um^2/day (overrides the config)");
    simulate->add_option("--out", sim_out, "output directory");

    // batch
    auto* batch_cmd = app.add_subcommand("batch", "run many seeded scenarios");
    std::string batch_network, batch_config, batch_out = "batch";
    int batch_count = 1, jobs = 1;
    std::uint64_t base_seed = 1;
    batch_cmd->add_option("--network", batch_network, "network JSON")->required();
    batch_cmd->add_option("--config", batch_config, "config JSON");
    batch_cmd->add_option("--count", batch_count, "number of scenarios")->required();
    batch_cmd->add_option("--base-seed", base_seed, "seeds are base, base+1, ...");
    batch_cmd->add_option("--jobs", jobs, "concurrent scenarios");
    std::optional<double> batch_dom_diffusion;
    batch_cmd->add_option("--dom-diffusion", batch_dom_diffusion,
                          "DOM diffusion coefficient in um^2/day (overrides the config)");
    batch_cmd->add_option("--out", batch_out, "output directory");

    // oracle
    auto* oracle = app.add_subcommand("oracle", "cross-validate against the voxel-grid solver");
    std::string or_image, or_meta, or_config, or_out = "comparison.json";
    oracle->add_option("--image", or_image, "raw volume path (max 64^3)")->required();
    oracle->add_option("--meta", or_meta, "JSON sidecar path")->required();
    oracle->add_option("--config", or_config, "config JSON with the oracle block");
    oracle->add_option("--out", or_out, "comparison report output");

    // analyze
    auto* analyze = app.add_subcommand("analyze", "attractor report from a trajectory CSV");
    std::string an_traj, an_config, an_out = "attractor.json";
    std::optional<double> an_threshold, an_window;
    analyze->add_option("--trajectory", an_traj, "trajectory CSV")->required();
    analyze->add_option("--config", an_config, "config JSON");
    analyze->add_option("--threshold", an_threshold, "MB extinction fraction of initial carbon");
    analyze->add_option("--window", an_window, "trailing window in days");
    analyze->add_option("--out", an_out, "report JSON output");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed())
            return cmd_synth(shape, {dims_flag[0], dims_flag[1], dims_flag[2]}, resolution,
                             radius, separation, length, count, r_min, r_max, synth_seed,
                             out_base);
        if (extract->parsed()) return cmd_extract(image, meta, crop_flag, net_out);
        if (scenario->parsed()) return cmd_scenario(network, config, seed, state_out);
        if (simulate->parsed())
            return cmd_simulate(sim_network, sim_config, sim_state, sim_seed, sim_dt, sim_t_end,
                                sim_dom_diffusion, sim_out);
        if (batch_cmd->parsed())
            return cmd_batch(batch_network, batch_config, batch_count, base_seed, jobs,
                             batch_dom_diffusion, batch_out);
        if (oracle->parsed()) return cmd_oracle(or_image, or_meta, or_config, or_out);
        if (analyze->parsed()) return cmd_analyze(an_traj, an_config, an_threshold, an_window, an_out);
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
