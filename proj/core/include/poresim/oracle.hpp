#ifndef PORESIM_ORACLE_HPP
#define PORESIM_ORACLE_HPP

#include "poresim/analysis.hpp"
#include "poresim/kinetics.hpp"
#include "poresim/volume.hpp"

#include <string>
#include <vector>

namespace poresim {

/// Continuum state on the voxel grid: compound densities in ugC/um^3 over the
/// pore voxels, zero (and never read) at solid voxels.
struct GridState {
    double time_days = 0.0;
    VolumeImage geometry;
    std::vector<double> mb, dom, som, fom, co2;

    static GridState zero(const VolumeImage& img);
    /// Totals in ugC: density sums times the voxel volume.
    Agg1 totals() const;
};

/// 7-point finite-volume Laplacian with zero-flux (Neumann) faces: a face
/// towards a solid voxel or outside the image carries nothing. Output in
/// field units per um^2; zero at solid voxels; sums to zero over the pore
/// space up to roundoff.
std::vector<double> fd_laplacian(const std::vector<double>& field, const VolumeImage& img);

/// Largest stable explicit time step, 0.9 * h^2 / (6 * maxD). Infinite when
/// nothing diffuses.
double stable_dt(const VolumeImage& img, const BioParams& p);

/// One explicit Euler step of the continuum system: densities advance by
/// dt * (D * laplacian + reaction). The reaction terms are the node kinetics
/// applied to densities, so the params' half_saturation must be expressed in
/// density units here. Throws InputError when dt exceeds the stability bound.
GridState oracle_step(const GridState& gs, const BioParams& p, double dt);

// --- cross-validation against the pore-network solver -----------------------

struct OracleFixture {
    double dom_density_ug_um3 = 0.0;
    double mb_density_ug_um3 = 0.0;
    double fom_density_ug_um3 = 0.0;
    enum class MbRegion { All, HalfX } mb_region = MbRegion::All;  // HalfX: voxels with x below the midplane
    double t_end_days = 30.0;
    double network_dt_days = 0.01;
    double record_every_days = 1.0;
    double oracle_dt_days = 0.0;  // 0 = auto from the stability bound
};

struct ComparisonRecord {
    double t_days = 0.0;
    Agg1 network{};
    Agg1 grid{};
    double rel_l1 = 0.0;  // |network - grid|_1 / |grid|_1
};

struct ComparisonReport {
    std::vector<ComparisonRecord> series;
    double max_rel_l1 = 0.0;
    double max_rel_mb = 0.0;   // worst per-record relative MB deviation
    double max_rel_dom = 0.0;
    int network_nodes = 0;
    int network_edges = 0;
    std::size_t pore_voxels = 0;
    double kb_bridge_volume_um3 = 0.0;
};

/// Runs the pore-network solver and the grid solver from matched initial
/// conditions and reports the AGG1 discrepancy over time. The grid starts
/// from the fixture's uniform densities; the network receives each pore
/// voxel's mass assigned to the nearest covering ball (ties to the larger
/// ball). The grid kinetics use params with the half saturation divided by
/// the volume of the MB-bearing pore region, which makes the mass-based and
/// density-based Monod terms agree there. MB and CO2 do not diffuse on
/// either side unless params say otherwise. Geometry is limited to 64^3.
ComparisonReport compare_with_network(const VolumeImage& img, const BioParams& params,
                                      const OracleFixture& fixture);

void export_comparison(const ComparisonReport& rep, const std::string& path);

} // namespace poresim

#endif
