#ifndef PORESIM_ANALYSIS_HPP
#define PORESIM_ANALYSIS_HPP

#include "poresim/kinetics.hpp"

#include <array>
#include <string>
#include <vector>

namespace poresim {

struct SystemState;

/// Totals of the five compounds over all nodes, in ugC.
using Agg1 = std::array<double, 5>;

/// Aggregated observables along a run.
struct TrajectoryRecord {
    double t_days = 0.0;
    Agg1 totals{};                    // [MB, DOM, SOM, FOM, CO2]
    double conservation_error = 0.0;  // |sum(t) - sum(0)| / sum(0)
};

struct Trajectory {
    std::vector<TrajectoryRecord> records;
    std::vector<SystemState> snapshots;  // optional full states, may be empty

    bool empty() const { return records.empty(); }
    double duration_days() const {
        return records.empty() ? 0.0 : records.back().t_days - records.front().t_days;
    }
};

/// Componentwise totals over nodes.
Agg1 agg1(const SystemState& state);

/// Carbon total of an aggregate vector.
inline double agg_total(const Agg1& v) { return v[0] + v[1] + v[2] + v[3] + v[4]; }

/// [MB, DOM + SOM + FOM, CO2]: microbes, total organic matter, respired carbon.
std::array<double, 3> agg2(const Agg1& v);

/// [MB, DOM, CO2] projection.
std::array<double, 3> proj(const Agg1& v);

struct AttractorReport {
    bool converged = false;
    double time_to_mb_extinction_days = -1.0;  // first record with MB below threshold; -1 if never
    std::array<double, 3> terminal_point{};    // agg2 of the last record
    std::array<double, 3> box_lo{};            // agg2 bounding box over the trailing window
    std::array<double, 3> box_hi{};
    double mb_threshold = 0.0;                 // absolute threshold used, ugC
};

/// Attractor diagnostics: converged means the final MB total is at or below
/// mb_threshold_fraction of the initial total carbon and MB is nonincreasing
/// over the trailing window (increases up to 1e-6 of the initial total carbon
/// are treated as jitter). Throws InputError when the trajectory spans less
/// than the window.
AttractorReport attractor_report(const Trajectory& traj, double mb_threshold_fraction = 1e-3,
                                 double window_days = 90.0);

/// Max over records of the relative drift of the carbon total. Throws
/// InputError on fewer than two records.
double conservation_audit(const Trajectory& traj);

/// CSV with header t,B,N,M1,M2,C,conservation_error; shortest round-trip
/// number formatting, locale independent.
void export_trajectory(const Trajectory& traj, const std::string& path);

/// Parses a CSV produced by export_trajectory. Throws InputError on malformed
/// rows or a wrong header.
Trajectory import_trajectory(const std::string& path);

/// AttractorReport as JSON.
void export_report(const AttractorReport& report, const std::string& path);

} // namespace poresim

#endif
