#include "poresim/config.hpp"

#include "poresim/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <set>

namespace poresim {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
    for (const auto& [key, value] : j.items())
        if (!known.contains(key))
            throw InputError("config: unknown key '" + key + "' in " + where);
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void read_range(const json& j, const char* key, std::array<double, 2>& out) {
    if (!j.contains(key)) return;
    const auto& a = j.at(key);
    if (!a.is_array() || a.size() != 2)
        throw InputError(std::string("config: '") + key + "' must be a [lo, hi] pair");
    out = {a[0].get<double>(), a[1].get<double>()};
}

void read_range(const json& j, const char* key, std::array<int, 2>& out) {
    if (!j.contains(key)) return;
    const auto& a = j.at(key);
    if (!a.is_array() || a.size() != 2)
        throw InputError(std::string("config: '") + key + "' must be a [lo, hi] pair");
    out = {a[0].get<int>(), a[1].get<int>()};
}

} // namespace

BioParams RunConfig::bio_resolved() const {
    if (!dom_diffusion_um2_day)
        throw InputError(
            "config: bio.dom_diffusion_um2_day is required (the DOM molecular diffusion "
            "coefficient has no built-in default); set it in the config file or with a flag");
    BioParams p = bio;
    p.d_dom = *dom_diffusion_um2_day;
    p.validate();
    return p;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError("malformed config " + path + ": " + e.what());
    }

    RunConfig cfg;
    try {
        reject_unknown(j, {"bio", "solver", "scenario", "analysis", "oracle"}, "top level");

        if (j.contains("bio")) {
            const auto& b = j.at("bio");
            reject_unknown(b,
                           {"growth_rate_max", "half_saturation", "mortality_rate",
                            "respiration_rate", "recycled_fraction", "som_decay_rate",
                            "fom_decay_rate", "dom_diffusion_um2_day", "mb_diffusion_um2_day",
                            "co2_diffusion_um2_day"},
                           "bio");
            read(b, "growth_rate_max", cfg.bio.growth_rate_max);
            read(b, "half_saturation", cfg.bio.half_saturation);
            read(b, "mortality_rate", cfg.bio.mortality_rate);
            read(b, "respiration_rate", cfg.bio.respiration_rate);
            read(b, "recycled_fraction", cfg.bio.recycled_fraction);
            read(b, "som_decay_rate", cfg.bio.som_decay_rate);
            read(b, "fom_decay_rate", cfg.bio.fom_decay_rate);
            read(b, "mb_diffusion_um2_day", cfg.bio.d_mb);
            read(b, "co2_diffusion_um2_day", cfg.bio.d_co2);
            if (b.contains("dom_diffusion_um2_day"))
                cfg.dom_diffusion_um2_day = b.at("dom_diffusion_um2_day").get<double>();
        }
        if (j.contains("solver")) {
            const auto& s = j.at("solver");
            reject_unknown(s,
                           {"dt_days", "t_end_days", "newton_tol", "newton_max_iter",
                            "linear_tol", "record_stride", "snapshot_stride"},
                           "solver");
            read(s, "dt_days", cfg.solver.dt_days);
            read(s, "t_end_days", cfg.solver.t_end_days);
            read(s, "newton_tol", cfg.solver.newton_tol);
            read(s, "newton_max_iter", cfg.solver.newton_max_iter);
            read(s, "linear_tol", cfg.solver.linear_tol);
            read(s, "record_stride", cfg.solver.record_stride);
            read(s, "snapshot_stride", cfg.solver.snapshot_stride);
        }
        if (j.contains("scenario")) {
            const auto& s = j.at("scenario");
            reject_unknown(s,
                           {"dom_mode", "dom_density_range_ug_per_voxel", "mb_fraction_range",
                            "patch_count_range", "patch_radius_hops", "seed",
                            "initial_som_per_node", "initial_fom_per_node",
                            "initial_co2_per_node"},
                           "scenario");
            if (s.contains("dom_mode")) {
                const auto mode = s.at("dom_mode").get<std::string>();
                if (mode == "homogeneous")
                    cfg.scenario.dom_mode = DomMode::Homogeneous;
                else if (mode == "heterogeneous")
                    cfg.scenario.dom_mode = DomMode::Heterogeneous;
                else
                    throw InputError("config: dom_mode must be 'homogeneous' or 'heterogeneous'");
            }
            read_range(s, "dom_density_range_ug_per_voxel", cfg.scenario.dom_density_range);
            read_range(s, "mb_fraction_range", cfg.scenario.mb_fraction_range);
            read_range(s, "patch_count_range", cfg.scenario.patch_count_range);
            read(s, "patch_radius_hops", cfg.scenario.patch_radius_hops);
            read(s, "seed", cfg.scenario.seed);
            read(s, "initial_som_per_node", cfg.scenario.initial_som_per_node);
            read(s, "initial_fom_per_node", cfg.scenario.initial_fom_per_node);
            read(s, "initial_co2_per_node", cfg.scenario.initial_co2_per_node);
        }
        if (j.contains("analysis")) {
            const auto& a = j.at("analysis");
            reject_unknown(a,
                           {"mb_extinction_fraction", "trailing_window_days",
                            "max_conservation_drift"},
                           "analysis");
            read(a, "mb_extinction_fraction", cfg.analysis.mb_extinction_fraction);
            read(a, "trailing_window_days", cfg.analysis.trailing_window_days);
            read(a, "max_conservation_drift", cfg.analysis.max_conservation_drift);
        }
        if (j.contains("oracle")) {
            const auto& o = j.at("oracle");
            reject_unknown(o,
                           {"dom_density_ug_um3", "mb_density_ug_um3", "fom_density_ug_um3",
                            "mb_region", "t_end_days", "network_dt_days", "record_every_days",
                            "oracle_dt_days"},
                           "oracle");
            read(o, "dom_density_ug_um3", cfg.oracle.dom_density_ug_um3);
            read(o, "mb_density_ug_um3", cfg.oracle.mb_density_ug_um3);
            read(o, "fom_density_ug_um3", cfg.oracle.fom_density_ug_um3);
            if (o.contains("mb_region")) {
                const auto region = o.at("mb_region").get<std::string>();
                if (region == "all")
                    cfg.oracle.mb_region = OracleFixture::MbRegion::All;
                else if (region == "half_x")
                    cfg.oracle.mb_region = OracleFixture::MbRegion::HalfX;
                else
                    throw InputError("config: oracle.mb_region must be 'all' or 'half_x'");
            }
            read(o, "t_end_days", cfg.oracle.t_end_days);
            read(o, "network_dt_days", cfg.oracle.network_dt_days);
            read(o, "record_every_days", cfg.oracle.record_every_days);
            read(o, "oracle_dt_days", cfg.oracle.oracle_dt_days);
        }
    } catch (const json::exception& e) {
        throw InputError("config " + path + ": " + e.what());
    }
    return cfg;
}

std::string default_config_json() {
    const RunConfig cfg;
    json j{
        {"bio",
         {{"growth_rate_max", cfg.bio.growth_rate_max},
          {"half_saturation", cfg.bio.half_saturation},
          {"mortality_rate", cfg.bio.mortality_rate},
          {"respiration_rate", cfg.bio.respiration_rate},
          {"recycled_fraction", cfg.bio.recycled_fraction},
          {"som_decay_rate", cfg.bio.som_decay_rate},
          {"fom_decay_rate", cfg.bio.fom_decay_rate},
          {"mb_diffusion_um2_day", cfg.bio.d_mb},
          {"co2_diffusion_um2_day", cfg.bio.d_co2}}},
        {"solver",
         {{"dt_days", cfg.solver.dt_days},
          {"t_end_days", cfg.solver.t_end_days},
          {"newton_tol", cfg.solver.newton_tol},
          {"newton_max_iter", cfg.solver.newton_max_iter},
          {"linear_tol", cfg.solver.linear_tol},
          {"record_stride", cfg.solver.record_stride},
          {"snapshot_stride", cfg.solver.snapshot_stride}}},
        {"scenario",
         {{"dom_mode",
           cfg.scenario.dom_mode == DomMode::Homogeneous ? "homogeneous" : "heterogeneous"},
          {"dom_density_range_ug_per_voxel", cfg.scenario.dom_density_range},
          {"mb_fraction_range", cfg.scenario.mb_fraction_range},
          {"patch_count_range", cfg.scenario.patch_count_range},
          {"patch_radius_hops", cfg.scenario.patch_radius_hops},
          {"seed", cfg.scenario.seed},
          {"initial_som_per_node", cfg.scenario.initial_som_per_node},
          {"initial_fom_per_node", cfg.scenario.initial_fom_per_node},
          {"initial_co2_per_node", cfg.scenario.initial_co2_per_node}}},
        {"analysis",
         {{"mb_extinction_fraction", cfg.analysis.mb_extinction_fraction},
          {"trailing_window_days", cfg.analysis.trailing_window_days},
          {"max_conservation_drift", cfg.analysis.max_conservation_drift}}},
    };
    return j.dump(2);
}

} // namespace poresim
