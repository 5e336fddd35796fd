#include "poresim/diffusion.hpp"
#include "poresim/errors.hpp"
#include "poresim/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace poresim;

namespace {

Ball make_ball(double x, double y, double z, double r) {
    return {{x, y, z}, r, 4.0 / 3.0 * std::numbers::pi * r * r * r};
}

PoreNetwork two_node_network(double volume, double conductance) {
    PoreNetwork net;
    const double r = std::cbrt(volume * 3.0 / (4.0 * std::numbers::pi));
    net.balls = {make_ball(0, 0, 0, r), make_ball(1.5 * r, 0, 0, r)};
    net.balls[0].volume_um3 = net.balls[1].volume_um3 = volume;
    net.edges.push_back({0, 1, conductance * 1.5 * r, 1.5 * r, conductance});
    net.resolution_um = 1.0;
    return net;
}

/// random connected network with random volumes and conductances
PoreNetwork random_network(int n, std::uint64_t seed) {
    SplitMix64 rng(seed);
    PoreNetwork net;
    net.resolution_um = 1.0;
    for (int i = 0; i < n; ++i) {
        Ball b = make_ball(3.0 * i, 0, 0, 1.0);
        b.volume_um3 = rng.uniform(0.5, 5.0);
        net.balls.push_back(b);
    }
    for (int i = 1; i < n; ++i) {
        const int j = static_cast<int>(rng.uniform_below(i));  // spanning tree
        net.edges.push_back({j, i, 1.0, 1.0, rng.uniform(0.1, 2.0)});
    }
    for (int extra = 0; extra < n / 2; ++extra) {
        const int i = static_cast<int>(rng.uniform_below(n));
        const int j = static_cast<int>(rng.uniform_below(n));
        if (i != j) net.edges.push_back({std::min(i, j), std::max(i, j), 1.0, 1.0,
                                         rng.uniform(0.1, 2.0)});
    }
    return net;
}

Eigen::VectorXd random_masses(int n, std::uint64_t seed) {
    SplitMix64 rng(seed);
    Eigen::VectorXd m(n);
    for (int i = 0; i < n; ++i) m[i] = rng.uniform(0.0, 3.0);
    return m;
}

} // namespace

TEST_CASE("assemble: isolated node gives the 1x1 zero matrix") {
    PoreNetwork net;
    net.balls = {make_ball(0, 0, 0, 1.0)};
    net.resolution_um = 1.0;
    const DiffusionOperator op = assemble(net);
    CHECK(op.size() == 1);
    CHECK(Eigen::MatrixXd(op.mass_op).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("assemble: hand-checked two-node operator") {
    const double V = 2.0, Q = 0.7;
    const DiffusionOperator op = assemble(two_node_network(V, Q));
    const Eigen::MatrixXd m(op.mass_op);
    CHECK(m(0, 0) == doctest::Approx(-Q / V).epsilon(1e-15));
    CHECK(m(1, 1) == doctest::Approx(-Q / V).epsilon(1e-15));
    CHECK(m(0, 1) == doctest::Approx(Q / V).epsilon(1e-15));
    CHECK(m(1, 0) == doctest::Approx(Q / V).epsilon(1e-15));
}

TEST_CASE("assemble: columns sum to zero and signs follow the Metzler structure") {
    const PoreNetwork net = random_network(40, 31);
    const DiffusionOperator op = assemble(net);
    const Eigen::MatrixXd m(op.mass_op);
    for (int j = 0; j < op.size(); ++j) {
        const double scale = m.col(j).cwiseAbs().maxCoeff();
        CHECK(std::abs(m.col(j).sum()) <= 1e-12 * std::max(scale, 1e-300));
        CHECK(m(j, j) <= 0.0);
        for (int i = 0; i < op.size(); ++i)
            if (i != j) CHECK(m(i, j) >= 0.0);
    }
}

TEST_CASE("assemble: zero-volume node is rejected") {
    PoreNetwork net = two_node_network(1.0, 1.0);
    net.balls[1].volume_um3 = 0.0;
    CHECK_THROWS_AS(assemble(net), InputError);
}

TEST_CASE("apply: uniform concentration has no flux") {
    const PoreNetwork net = random_network(25, 32);
    const DiffusionOperator op = assemble(net);
    const Eigen::VectorXd masses = 0.37 * op.volumes;  // m_i proportional to v_i
    const Eigen::VectorXd rates = apply(op, masses, 2.0);
    CHECK(rates.cwiseAbs().maxCoeff() <= 1e-12 * masses.maxCoeff());
}

TEST_CASE("apply: hand-checked two-node rates") {
    const double V = 2.0, Q = 0.7, D = 3.0, m = 1.1;
    const DiffusionOperator op = assemble(two_node_network(V, Q));
    Eigen::VectorXd masses(2);
    masses << m, 0.0;
    const Eigen::VectorXd rates = apply(op, masses, D);
    CHECK(rates[0] == doctest::Approx(-D * Q * m / V).epsilon(1e-14));
    CHECK(rates[1] == doctest::Approx(D * Q * m / V).epsilon(1e-14));
}

TEST_CASE("apply: fluxes balance on random networks") {
    for (const std::uint64_t seed : {33ull, 34ull, 35ull}) {
        const PoreNetwork net = random_network(30, seed);
        const DiffusionOperator op = assemble(net);
        const Eigen::VectorXd rates = apply(op, random_masses(30, seed + 100), 1.7);
        CHECK(std::abs(rates.sum()) <= 1e-12 * rates.cwiseAbs().sum());
    }
}

TEST_CASE("implicit step: zero diffusion is the identity") {
    const DiffusionOperator op = assemble(two_node_network(1.0, 1.0));
    Eigen::VectorXd m(2);
    m << 0.4, 1.9;
    CHECK(implicit_diffusion_step(op, m, 0.0, 0.1) == m);
}

TEST_CASE("implicit step matches the closed-form 2x2 solve") {
    const double V = 2.0, Q = 0.7, D = 3.0, dt = 0.05;
    const DiffusionOperator op = assemble(two_node_network(V, Q));
    Eigen::VectorXd m(2);
    m << 1.3, 0.2;
    const Eigen::VectorXd got = implicit_diffusion_step(op, m, D, dt);
    // (I - dt D op)^-1 for the symmetric two-node case
    const double a = dt * D * Q / V;
    const Eigen::Vector2d want{((1 + a) * m[0] + a * m[1]) / (1 + 2 * a),
                               (a * m[0] + (1 + a) * m[1]) / (1 + 2 * a)};
    CHECK(got[0] == doctest::Approx(want[0]).epsilon(1e-12));
    CHECK(got[1] == doctest::Approx(want[1]).epsilon(1e-12));
}

TEST_CASE("implicit step: uniform concentration is a fixed point") {
    const PoreNetwork net = random_network(20, 36);
    const DiffusionOperator op = assemble(net);
    const Eigen::VectorXd m = 0.8 * op.volumes;
    const Eigen::VectorXd out = implicit_diffusion_step(op, m, 2.5, 0.3);
    CHECK((out - m).cwiseAbs().maxCoeff() <= 1e-12 * m.maxCoeff());
}

TEST_CASE("implicit step preserves positivity and total mass, even at large dt") {
    SplitMix64 rng(37);
    for (int trial = 0; trial < 20; ++trial) {
        const PoreNetwork net = random_network(30, 40 + trial);
        const DiffusionOperator op = assemble(net);
        const Eigen::VectorXd m = random_masses(30, 50 + trial);
        const double dt = rng.uniform(1e-4, 50.0);
        const Eigen::VectorXd out = implicit_diffusion_step(op, m, 4.0, dt);
        CHECK(out.minCoeff() >= -1e-14 * m.sum());
        CHECK(std::abs(out.sum() - m.sum()) <= 1e-9 * m.sum());
    }
}

TEST_CASE("repeated implicit steps equilibrate concentrations") {
    const PoreNetwork net = random_network(15, 60);
    const DiffusionOperator op = assemble(net);
    Eigen::VectorXd m = random_masses(15, 61);
    const double total = m.sum(), vol = op.volumes.sum();
    const DiffusionSolver solver(op, 1.0, 0.5);
    for (int step = 0; step < 2000; ++step) m = solver.solve(m);
    const Eigen::VectorXd conc = m.cwiseQuotient(op.volumes);
    CHECK(conc.maxCoeff() - conc.minCoeff() <= 1e-9 * (total / vol));
    CHECK(conc[0] == doctest::Approx(total / vol).epsilon(1e-9));
}

TEST_CASE("implicit step error against the two-ball decay law is first order") {
    const double V = 2.0, Q = 0.7, D = 3.0, t_end = 1.0;
    const DiffusionOperator op = assemble(two_node_network(V, Q));
    Eigen::VectorXd m0(2);
    m0 << 1.0, 0.0;
    const double exact_diff = (m0[0] - m0[1]) * std::exp(-2.0 * D * Q * t_end / V);

    auto diff_error = [&](double dt) {
        const DiffusionSolver solver(op, D, dt);
        Eigen::VectorXd m = m0;
        const long long steps = std::llround(t_end / dt);
        for (long long s = 0; s < steps; ++s) m = solver.solve(m);
        return std::abs((m[0] - m[1]) - exact_diff);
    };
    const double e1 = diff_error(0.01), e2 = diff_error(0.005);
    CHECK(std::log2(e1 / e2) == doctest::Approx(1.0).epsilon(0.1));
}
