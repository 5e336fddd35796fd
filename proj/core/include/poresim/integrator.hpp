#ifndef PORESIM_INTEGRATOR_HPP
#define PORESIM_INTEGRATOR_HPP

#include "poresim/analysis.hpp"
#include "poresim/diffusion.hpp"
#include "poresim/kinetics.hpp"
#include "poresim/network.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace poresim {

/// Per-node compound masses over the whole network, struct-of-arrays.
struct SystemState {
    double time_days = 0.0;
    Eigen::VectorXd mb, dom, som, fom, co2;

    static SystemState zero(int node_count);
    int node_count() const { return static_cast<int>(mb.size()); }

    NodeVec node(int i) const;
    void set_node(int i, const NodeVec& v);

    double total_carbon() const;
    double min_component() const;
};

struct SolverConfig {
    double dt_days = 0.01;
    double t_end_days = 918.0;
    double newton_tol = 1e-10;   // acceptance gate for the per-node Newton solve
    int newton_max_iter = 50;
    double linear_tol = 1e-10;   // relative residual bound for the diffusion solve
    int record_stride = 100;     // steps between trajectory records
    int snapshot_stride = 0;     // steps between full-state snapshots; 0 disables

    void validate() const;
};

/// Advances the coupled system by Lie splitting: a backward-Euler reaction
/// substep solved per node by damped Newton, then one implicit diffusion step
/// of the DOM component (the other compounds do not move between pores).
/// Holds the factorized diffusion system so repeated steps are cheap; the
/// result is bit-identical to constructing a fresh Stepper per step.
class Stepper {
public:
    Stepper(const PoreNetwork& net, const BioParams& params, const SolverConfig& cfg);

    // the diffusion solver references the operator member
    Stepper(const Stepper&) = delete;
    Stepper& operator=(const Stepper&) = delete;

    /// One step of length cfg.dt_days. Throws NumericalError on Newton
    /// failure (with node index and residual) or if any component drops
    /// below -1e-14 times the total carbon; negative values are never
    /// silently repaired.
    void advance(SystemState& state) const;

    const SolverConfig& config() const { return cfg_; }
    const BioParams& params() const { return params_; }

private:
    NodeVec reaction_substep(const NodeVec& s, int node_index) const;

    BioParams params_;
    SolverConfig cfg_;
    DiffusionOperator op_;
    std::optional<DiffusionSolver> dom_solver_;
};

/// Single step with the stated configuration (builds a Stepper internally).
SystemState step(const SystemState& state, const PoreNetwork& net, const BioParams& params,
                 const SolverConfig& cfg);

using Observer = std::function<void(const SystemState&)>;

/// Integrates from state.time_days over t_end_days, recording aggregate
/// totals and the conservation drift every record_stride steps (plus the
/// initial and final states). Observers run at every record point.
/// Deterministic for fixed inputs.
Trajectory run(const SystemState& initial, const PoreNetwork& net, const BioParams& params,
               const SolverConfig& cfg, std::span<const Observer> observers = {});

/// Observed temporal order from solutions at >= 3 dt values in geometric
/// progression: the mean of log(|u_k - u_{k+1}| / |u_{k+1} - u_{k+2}|) / log(r)
/// over successive triples. Throws InputError on fewer than three dts or a
/// non-geometric sequence.
double convergence_order(const std::function<Eigen::VectorXd(double)>& solution_at_dt,
                         std::span<const double> dts);

} // namespace poresim

#endif
