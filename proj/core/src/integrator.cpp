#include "poresim/integrator.hpp"

#include "poresim/errors.hpp"

#include <cmath>
#include <string>

namespace poresim {

SystemState SystemState::zero(int node_count) {
    SystemState s;
    s.mb = Eigen::VectorXd::Zero(node_count);
    s.dom = Eigen::VectorXd::Zero(node_count);
    s.som = Eigen::VectorXd::Zero(node_count);
    s.fom = Eigen::VectorXd::Zero(node_count);
    s.co2 = Eigen::VectorXd::Zero(node_count);
    return s;
}

NodeVec SystemState::node(int i) const {
    NodeVec v;
    v << mb[i], dom[i], som[i], fom[i], co2[i];
    return v;
}

void SystemState::set_node(int i, const NodeVec& v) {
    mb[i] = v[kMb];
    dom[i] = v[kDom];
    som[i] = v[kSom];
    fom[i] = v[kFom];
    co2[i] = v[kCo2];
}

double SystemState::total_carbon() const {
    return mb.sum() + dom.sum() + som.sum() + fom.sum() + co2.sum();
}

double SystemState::min_component() const {
    return std::min({mb.minCoeff(), dom.minCoeff(), som.minCoeff(), fom.minCoeff(),
                     co2.minCoeff()});
}

void SolverConfig::validate() const {
    if (!(dt_days > 0.0)) throw InputError("SolverConfig: dt must be positive");
    if (t_end_days < 0.0) throw InputError("SolverConfig: t_end must be nonnegative");
    if (!(newton_tol > 0.0 && newton_tol < 1.0))
        throw InputError("SolverConfig: newton_tol must lie in (0,1)");
    if (!(linear_tol > 0.0 && linear_tol < 1.0))
        throw InputError("SolverConfig: linear_tol must lie in (0,1)");
    if (newton_max_iter < 1) throw InputError("SolverConfig: newton_max_iter must be >= 1");
    if (record_stride < 1) throw InputError("SolverConfig: record_stride must be >= 1");
    if (snapshot_stride < 0) throw InputError("SolverConfig: snapshot_stride must be >= 0");
}

Stepper::Stepper(const PoreNetwork& net, const BioParams& params, const SolverConfig& cfg)
    : params_(params), cfg_(cfg), op_(assemble(net)) {
    params_.validate();
    cfg_.validate();
    if (params_.d_dom > 0.0 && !op_.edges.empty())
        dom_solver_.emplace(op_, params_.d_dom, cfg_.dt_days, cfg_.linear_tol);
}

NodeVec Stepper::reaction_substep(const NodeVec& s, int node_index) const {
    const double dt = cfg_.dt_days;
    const double scale = std::max(s.lpNorm<1>(), 1e-300);
    // newton_tol is the acceptance gate; iteration continues to the polish
    // level while it makes progress, so the solve lands at machine precision
    // and the carbon total is preserved to roundoff rather than to newton_tol
    const double polish = 1e-15 * scale;

    NodeVec x = s;
    NodeVec r = -dt * reaction_rhs(x, params_);
    double rnorm = r.lpNorm<Eigen::Infinity>();

    for (int it = 0; it < cfg_.newton_max_iter && rnorm > polish; ++it) {
        const NodeMat jac = NodeMat::Identity() - dt * reaction_jacobian(x, params_);
        NodeVec dx = jac.partialPivLu().solve(-r);

        // the sought root is nonnegative and the Monod term has a pole at
        // negative DOM, so cap the step at the orthant boundary: crossing it
        // lets Newton escape to spurious negative roots
        double damp = 1.0;
        for (int k = 0; k < 5; ++k) {
            if (std::abs(dx[k]) < 1e-16 * scale) dx[k] = 0.0;  // roundoff floor
            if (dx[k] < 0.0 && x[k] + damp * dx[k] < 0.0) damp = x[k] / -dx[k];
        }

        NodeVec x_next, r_next;
        double rnorm_next;
        for (int halving = 0;; ++halving) {
            x_next = x + damp * dx;
            r_next = x_next - s - dt * reaction_rhs(x_next, params_);
            rnorm_next = r_next.lpNorm<Eigen::Infinity>();
            if (rnorm_next < rnorm || halving >= 5) break;
            damp *= 0.5;
        }
        if (rnorm_next >= rnorm) break;  // stagnated
        x = x_next;
        r = r_next;
        rnorm = rnorm_next;
    }
    if (rnorm > cfg_.newton_tol * scale)
        throw NumericalError("reaction substep: Newton failed at node " +
                             std::to_string(node_index) + ", residual " + std::to_string(rnorm) +
                             " (tolerance " + std::to_string(cfg_.newton_tol * scale) + ")");
    return x;
}

void Stepper::advance(SystemState& state) const {
    const double scale = state.total_carbon();

    for (int i = 0; i < state.node_count(); ++i)
        state.set_node(i, reaction_substep(state.node(i), i));

    if (dom_solver_) state.dom = dom_solver_->solve(state.dom);

    state.time_days += cfg_.dt_days;

    const double floor = -1e-14 * std::max(scale, 0.0);
    if (state.min_component() < floor)
        throw NumericalError("integrator invariant violation: component " +
                             std::to_string(state.min_component()) + " below " +
                             std::to_string(floor) + " at t = " +
                             std::to_string(state.time_days));
}

SystemState step(const SystemState& state, const PoreNetwork& net, const BioParams& params,
                 const SolverConfig& cfg) {
    if (state.node_count() != net.node_count())
        throw InputError("step: state size does not match the network");
    if (state.min_component() < 0.0)
        throw InputError("step: state has negative components");
    Stepper stepper(net, params, cfg);
    SystemState next = state;
    stepper.advance(next);
    return next;
}

Trajectory run(const SystemState& initial, const PoreNetwork& net, const BioParams& params,
               const SolverConfig& cfg, std::span<const Observer> observers) {
    if (initial.node_count() != net.node_count())
        throw InputError("run: state size does not match the network");
    if (initial.min_component() < 0.0) throw InputError("run: state has negative components");
    cfg.validate();

    const double t0 = initial.time_days;
    const long long full_steps =
        static_cast<long long>(std::floor(cfg.t_end_days / cfg.dt_days + 1e-9));
    const double remainder = cfg.t_end_days - static_cast<double>(full_steps) * cfg.dt_days;
    const bool has_remainder = remainder > 1e-12 * cfg.dt_days;

    SystemState state = initial;
    const double sum0 = agg_total(agg1(state));

    Trajectory traj;
    auto record = [&](const SystemState& s) {
        TrajectoryRecord rec;
        rec.t_days = s.time_days;
        rec.totals = agg1(s);
        const double sum = agg_total(rec.totals);
        rec.conservation_error = sum0 > 0.0 ? std::abs(sum - sum0) / sum0 : std::abs(sum);
        traj.records.push_back(rec);
        for (const auto& obs : observers) obs(s);
    };

    record(state);
    if (cfg.snapshot_stride > 0) traj.snapshots.push_back(state);

    Stepper stepper(net, params, cfg);
    for (long long i = 1; i <= full_steps; ++i) {
        try {
            stepper.advance(state);
        } catch (const NumericalError& e) {
            throw NumericalError("run failed at t = " +
                                 std::to_string(t0 + static_cast<double>(i) * cfg.dt_days) +
                                 " days: " + e.what());
        }
        state.time_days = t0 + static_cast<double>(i) * cfg.dt_days;  // avoid accumulation drift
        const bool last = (i == full_steps) && !has_remainder;
        if (i % cfg.record_stride == 0 || last) record(state);
        if (cfg.snapshot_stride > 0 && (i % cfg.snapshot_stride == 0 || last))
            traj.snapshots.push_back(state);
    }

    if (has_remainder) {
        SolverConfig tail_cfg = cfg;
        tail_cfg.dt_days = remainder;
        Stepper tail(net, params, tail_cfg);
        tail.advance(state);
        state.time_days = t0 + cfg.t_end_days;
        record(state);
        if (cfg.snapshot_stride > 0) traj.snapshots.push_back(state);
    }
    return traj;
}

double convergence_order(const std::function<Eigen::VectorXd(double)>& solution_at_dt,
                         std::span<const double> dts) {
    if (dts.size() < 3)
        throw InputError("convergence_order: need at least 3 dt values");
    const double ratio = dts[0] / dts[1];
    if (!(ratio > 1.0)) throw InputError("convergence_order: dts must decrease");
    for (std::size_t k = 0; k + 1 < dts.size(); ++k) {
        const double r = dts[k] / dts[k + 1];
        if (std::abs(r - ratio) > 1e-9 * ratio)
            throw InputError("convergence_order: dts must form a geometric progression");
    }

    std::vector<Eigen::VectorXd> sols;
    sols.reserve(dts.size());
    for (const double dt : dts) sols.push_back(solution_at_dt(dt));

    double sum = 0.0;
    int count = 0;
    for (std::size_t k = 0; k + 2 < sols.size(); ++k) {
        const double d1 = (sols[k] - sols[k + 1]).norm();
        const double d2 = (sols[k + 1] - sols[k + 2]).norm();
        if (d1 == 0.0 || d2 == 0.0)
            throw NumericalError("convergence_order: solutions at successive dts coincide");
        sum += std::log(d1 / d2) / std::log(ratio);
        ++count;
    }
    return sum / count;
}

} // namespace poresim
