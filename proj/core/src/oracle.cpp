#include "poresim/oracle.hpp"

#include "poresim/diffusion.hpp"
#include "poresim/errors.hpp"
#include "poresim/integrator.hpp"
#include "poresim/network.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>

namespace poresim {

GridState GridState::zero(const VolumeImage& img) {
    GridState gs;
    gs.geometry = img;
    const std::size_t n = img.voxel_count();
    gs.mb.assign(n, 0.0);
    gs.dom.assign(n, 0.0);
    gs.som.assign(n, 0.0);
    gs.fom.assign(n, 0.0);
    gs.co2.assign(n, 0.0);
    return gs;
}

Agg1 GridState::totals() const {
    const double h = geometry.resolution_um;
    const double voxel_vol = h * h * h;
    Agg1 t{};
    for (std::size_t i = 0; i < geometry.voxels.size(); ++i) {
        if (!geometry.voxels[i]) continue;
        t[kMb] += mb[i];
        t[kDom] += dom[i];
        t[kSom] += som[i];
        t[kFom] += fom[i];
        t[kCo2] += co2[i];
    }
    for (double& v : t) v *= voxel_vol;
    return t;
}

std::vector<double> fd_laplacian(const std::vector<double>& field, const VolumeImage& img) {
    if (field.size() != img.voxel_count())
        throw InputError("fd_laplacian: field size does not match the image");
    const auto [nx, ny, nz] = img.dims;
    const double inv_h2 = 1.0 / (img.resolution_um * img.resolution_um);

    std::vector<double> out(field.size(), 0.0);
    for (int z = 0; z < nz; ++z)
        for (int y = 0; y < ny; ++y)
            for (int x = 0; x < nx; ++x) {
                const std::size_t i = img.index(x, y, z);
                if (!img.voxels[i]) continue;
                double acc = 0.0;
                const int nbr[6][3] = {{x - 1, y, z}, {x + 1, y, z}, {x, y - 1, z},
                                       {x, y + 1, z}, {x, y, z - 1}, {x, y, z + 1}};
                for (const auto& q : nbr) {
                    if (q[0] < 0 || q[0] >= nx || q[1] < 0 || q[1] >= ny || q[2] < 0 ||
                        q[2] >= nz)
                        continue;  // image face: no flux
                    const std::size_t j = img.index(q[0], q[1], q[2]);
                    if (!img.voxels[j]) continue;  // solid face: no flux
                    acc += field[j] - field[i];
                }
                out[i] = acc * inv_h2;
            }
    return out;
}

double stable_dt(const VolumeImage& img, const BioParams& p) {
    const double max_d = std::max({p.d_mb, p.d_dom, p.d_co2});
    if (max_d <= 0.0) return std::numeric_limits<double>::infinity();
    const double h = img.resolution_um;
    return 0.9 * h * h / (6.0 * max_d);
}

namespace {

void oracle_step_inplace(GridState& gs, const BioParams& p, double dt,
                         const std::vector<std::size_t>& pore_indices,
                         std::vector<double>& lap_buf) {
    struct Species {
        std::vector<double>* field;
        double d;
        int comp;
    };
    const Species species[5] = {{&gs.mb, p.d_mb, kMb},
                                {&gs.dom, p.d_dom, kDom},
                                {&gs.som, 0.0, kSom},
                                {&gs.fom, 0.0, kFom},
                                {&gs.co2, p.d_co2, kCo2}};

    // reaction first (reads the pre-step fields), then add the diffusion terms
    // computed from the same pre-step fields: plain explicit Euler
    std::vector<double> reaction(pore_indices.size() * 5);
    for (std::size_t k = 0; k < pore_indices.size(); ++k) {
        const std::size_t i = pore_indices[k];
        NodeVec s;
        s << gs.mb[i], gs.dom[i], gs.som[i], gs.fom[i], gs.co2[i];
        const NodeVec f = reaction_rhs(s, p);
        for (int c = 0; c < 5; ++c) reaction[k * 5 + c] = f[c];
    }

    for (const auto& sp : species) {
        if (sp.d > 0.0) {
            lap_buf = fd_laplacian(*sp.field, gs.geometry);
            for (const std::size_t i : pore_indices) (*sp.field)[i] += dt * sp.d * lap_buf[i];
        }
    }
    for (std::size_t k = 0; k < pore_indices.size(); ++k) {
        const std::size_t i = pore_indices[k];
        gs.mb[i] += dt * reaction[k * 5 + kMb];
        gs.dom[i] += dt * reaction[k * 5 + kDom];
        gs.som[i] += dt * reaction[k * 5 + kSom];
        gs.fom[i] += dt * reaction[k * 5 + kFom];
        gs.co2[i] += dt * reaction[k * 5 + kCo2];
    }
    gs.time_days += dt;
}

std::vector<std::size_t> pore_index_list(const VolumeImage& img) {
    std::vector<std::size_t> idx;
    idx.reserve(img.pore_count());
    for (std::size_t i = 0; i < img.voxels.size(); ++i)
        if (img.voxels[i]) idx.push_back(i);
    return idx;
}

} // namespace

GridState oracle_step(const GridState& gs, const BioParams& p, double dt) {
    if (!(dt > 0.0)) throw InputError("oracle_step: dt must be positive");
    if (dt > stable_dt(gs.geometry, p))
        throw InputError("oracle_step: dt " + std::to_string(dt) +
                         " above the explicit stability bound " +
                         std::to_string(stable_dt(gs.geometry, p)));
    GridState next = gs;
    const auto pores = pore_index_list(gs.geometry);
    std::vector<double> lap_buf;
    oracle_step_inplace(next, p, dt, pores, lap_buf);
    return next;
}

ComparisonReport compare_with_network(const VolumeImage& img, const BioParams& params,
                                      const OracleFixture& fixture) {
    if (img.dims[0] > 64 || img.dims[1] > 64 || img.dims[2] > 64)
        throw InputError("compare_with_network: geometry above the 64^3 oracle limit");
    if (!(fixture.t_end_days > 0.0) || !(fixture.network_dt_days > 0.0) ||
        !(fixture.record_every_days > 0.0))
        throw InputError("compare_with_network: times must be positive");

    const double h = img.resolution_um;
    const double voxel_vol = h * h * h;
    const auto pores = pore_index_list(img);
    if (pores.empty()) throw InputError("compare_with_network: image has no pore voxels");

    const PoreNetwork net = extract_network(img, "oracle-comparison");

    // grid initial condition: uniform densities, MB confined to its region
    GridState grid = GridState::zero(img);
    const auto [nx, ny, nz] = img.dims;
    const double x_mid = nx / 2.0;
    std::size_t mb_voxels = 0;
    for (const std::size_t i : pores) {
        grid.dom[i] = fixture.dom_density_ug_um3;
        grid.fom[i] = fixture.fom_density_ug_um3;
        const int x = static_cast<int>(i % nx);
        const bool in_region = fixture.mb_region == OracleFixture::MbRegion::All ||
                               (x + 0.5) < x_mid;
        if (in_region) {
            grid.mb[i] = fixture.mb_density_ug_um3;
            ++mb_voxels;
        }
    }

    // mass-form Monod on the network vs density-form Monod on the grid: match
    // the half saturation over the MB-bearing volume
    const double kb_volume =
        voxel_vol * static_cast<double>(fixture.mb_density_ug_um3 > 0.0 ? mb_voxels : pores.size());
    BioParams grid_params = params;
    grid_params.half_saturation = params.half_saturation / kb_volume;

    // network initial condition: each voxel's mass goes to the nearest
    // covering ball, ties to the larger ball
    SystemState net_state = SystemState::zero(net.node_count());
    for (const std::size_t i : pores) {
        const int x = static_cast<int>(i % nx);
        const int y = static_cast<int>((i / nx) % ny);
        const int z = static_cast<int>(i / (static_cast<std::size_t>(nx) * ny));
        const double px = (x + 0.5) * h, py = (y + 0.5) * h, pz = (z + 0.5) * h;
        int best = -1;
        double best_dist = 0.0;
        for (int b = 0; b < net.node_count(); ++b) {
            const auto& ball = net.balls[b];
            const double dx = px - ball.center_um[0];
            const double dy = py - ball.center_um[1];
            const double dz = pz - ball.center_um[2];
            const double dist = std::sqrt(dx * dx + dy * dy + dz * dz);
            if (dist > ball.radius_um) continue;
            if (best < 0 || dist < best_dist ||
                (dist == best_dist && ball.radius_um > net.balls[best].radius_um)) {
                best = b;
                best_dist = dist;
            }
        }
        if (best < 0)
            throw NumericalError("compare_with_network: pore voxel not covered by any ball");
        net_state.mb[best] += grid.mb[i] * voxel_vol;
        net_state.dom[best] += grid.dom[i] * voxel_vol;
        net_state.fom[best] += grid.fom[i] * voxel_vol;
    }

    // step sizes that land exactly on the record times
    const int records = static_cast<int>(std::llround(fixture.t_end_days / fixture.record_every_days));
    if (records < 1 || std::abs(records * fixture.record_every_days - fixture.t_end_days) >
                           1e-9 * fixture.t_end_days)
        throw InputError("compare_with_network: t_end must be a multiple of record_every");
    const long long net_steps_per_record = std::llround(fixture.record_every_days / fixture.network_dt_days);
    if (net_steps_per_record < 1 ||
        std::abs(net_steps_per_record * fixture.network_dt_days - fixture.record_every_days) >
            1e-9 * fixture.record_every_days)
        throw InputError("compare_with_network: record_every must be a multiple of the network dt");

    double dt_grid = fixture.oracle_dt_days > 0.0 ? fixture.oracle_dt_days
                                                  : stable_dt(img, grid_params);
    long long grid_steps_per_record =
        static_cast<long long>(std::ceil(fixture.record_every_days / std::min(dt_grid, fixture.record_every_days) - 1e-12));
    dt_grid = fixture.record_every_days / static_cast<double>(grid_steps_per_record);
    if (dt_grid > stable_dt(img, grid_params))
        throw InputError("compare_with_network: oracle dt above the stability bound");

    const SolverConfig net_cfg{.dt_days = fixture.network_dt_days,
                               .t_end_days = fixture.t_end_days,
                               .record_stride = static_cast<int>(net_steps_per_record)};
    const Stepper stepper(net, params, net_cfg);

    ComparisonReport rep;
    rep.network_nodes = net.node_count();
    rep.network_edges = static_cast<int>(net.edges.size());
    rep.pore_voxels = pores.size();
    rep.kb_bridge_volume_um3 = kb_volume;

    std::vector<double> lap_buf;
    auto push_record = [&](double t) {
        ComparisonRecord rec;
        rec.t_days = t;
        rec.network = agg1(net_state);
        rec.grid = grid.totals();
        double num = 0.0, den = 0.0;
        for (int c = 0; c < 5; ++c) {
            num += std::abs(rec.network[c] - rec.grid[c]);
            den += std::abs(rec.grid[c]);
        }
        rec.rel_l1 = den > 0.0 ? num / den : 0.0;
        rep.max_rel_l1 = std::max(rep.max_rel_l1, rec.rel_l1);
        auto rel = [](double a, double b) {
            const double d = std::max(std::abs(a), std::abs(b));
            return d > 0.0 ? std::abs(a - b) / d : 0.0;
        };
        rep.max_rel_mb = std::max(rep.max_rel_mb, rel(rec.network[kMb], rec.grid[kMb]));
        rep.max_rel_dom = std::max(rep.max_rel_dom, rel(rec.network[kDom], rec.grid[kDom]));
        rep.series.push_back(rec);
    };

    push_record(0.0);
    for (int r = 1; r <= records; ++r) {
        for (long long s = 0; s < net_steps_per_record; ++s) stepper.advance(net_state);
        for (long long s = 0; s < grid_steps_per_record; ++s)
            oracle_step_inplace(grid, grid_params, dt_grid, pores, lap_buf);
        push_record(r * fixture.record_every_days);
    }
    return rep;
}

void export_comparison(const ComparisonReport& rep, const std::string& path) {
    nlohmann::json series = nlohmann::json::array();
    for (const auto& rec : rep.series)
        series.push_back({{"t_days", rec.t_days},
                          {"network", rec.network},
                          {"grid", rec.grid},
                          {"rel_l1", rec.rel_l1}});
    nlohmann::json j{{"series", series},
                     {"max_rel_l1", rep.max_rel_l1},
                     {"max_rel_mb", rep.max_rel_mb},
                     {"max_rel_dom", rep.max_rel_dom},
                     {"network_nodes", rep.network_nodes},
                     {"network_edges", rep.network_edges},
                     {"pore_voxels", rep.pore_voxels},
                     {"kb_bridge_volume_um3", rep.kb_bridge_volume_um3}};
    std::ofstream out(path);
    if (!out) throw InputError("cannot write comparison report: " + path);
    out << j.dump(2) << '\n';
}

} // namespace poresim
