#include "poresim/errors.hpp"
#include "poresim/kinetics.hpp"
#include "poresim/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace poresim;

namespace {

NodeVec random_state(SplitMix64& rng) {
    NodeVec s;
    for (int k = 0; k < 5; ++k) s[k] = rng.next_double();
    return s;
}

} // namespace

TEST_CASE("monod: zero substrate, half saturation, literature point") {
    BioParams p;  // defaults: K = 9.6, K_b = 0.001
    CHECK(monod(0.0, p) == 0.0);
    CHECK(monod(p.half_saturation, p) == doctest::Approx(p.growth_rate_max / 2.0).epsilon(1e-15));
    CHECK(monod(0.001, p) == doctest::Approx(4.8).epsilon(1e-12));
}

TEST_CASE("monod is nondecreasing and bounded by the maximal rate") {
    BioParams p;
    SplitMix64 rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        const double a = rng.uniform(0.0, 10.0), b = rng.uniform(0.0, 10.0);
        const double lo = std::min(a, b), hi = std::max(a, b);
        CHECK(monod(lo, p) <= monod(hi, p));
        CHECK(monod(hi, p) <= p.growth_rate_max);
    }
}

TEST_CASE("reaction_rhs: the equilibrium family (0, n, 0, 0, c) is stationary") {
    BioParams p;
    for (const double n : {0.0, 1e-6, 0.37, 12.0})
        for (const double c : {0.0, 4.2}) {
            NodeVec s;
            s << 0.0, n, 0.0, 0.0, c;
            CHECK(reaction_rhs(s, p).cwiseAbs().maxCoeff() == 0.0);
        }
}

TEST_CASE("reaction_rhs: hand-evaluated point at (1,0,0,0,0)") {
    BioParams p;  // eta=0.2, mu=0.5, rho=0.55
    NodeVec s;
    s << 1.0, 0.0, 0.0, 0.0, 0.0;
    const NodeVec f = reaction_rhs(s, p);
    CHECK(f[kMb] == doctest::Approx(-0.7).epsilon(1e-15));
    CHECK(f[kDom] == doctest::Approx(0.275).epsilon(1e-15));
    CHECK(f[kSom] == doctest::Approx(0.225).epsilon(1e-15));
    CHECK(f[kFom] == 0.0);
    CHECK(f[kCo2] == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("reaction_rhs conserves carbon to a few ulps") {
    BioParams p;
    SplitMix64 rng(22);
    for (int trial = 0; trial < 500; ++trial) {
        const NodeVec s = random_state(rng);
        const NodeVec f = reaction_rhs(s, p);
        const double scale = f.cwiseAbs().sum();
        CHECK(std::abs(f.sum()) <= 4.0 * std::numeric_limits<double>::epsilon() * scale);
    }
}

TEST_CASE("reaction_rhs is quasi-positive: zeroed components cannot go negative") {
    BioParams p;
    SplitMix64 rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        NodeVec s = random_state(rng);
        const int zeroed = static_cast<int>(rng.uniform_below(5));
        s[zeroed] = 0.0;
        CHECK(reaction_rhs(s, p)[zeroed] >= 0.0);
    }
}

TEST_CASE("reaction_rhs: FOM decays alone, CO2 only grows") {
    BioParams p;
    SplitMix64 rng(24);
    for (int trial = 0; trial < 100; ++trial) {
        const NodeVec s = random_state(rng);
        const NodeVec f = reaction_rhs(s, p);
        CHECK(f[kFom] == -p.fom_decay_rate * s[kFom]);
        CHECK(f[kCo2] >= 0.0);
    }
}

TEST_CASE("reaction_jacobian: linear rows at b = 0") {
    BioParams p;
    NodeVec s;
    s << 0.0, 0.2, 0.1, 0.4, 0.0;
    const NodeMat j = reaction_jacobian(s, p);
    CHECK(j(kFom, kFom) == -p.fom_decay_rate);
    CHECK(j(kSom, kSom) == -p.som_decay_rate);
    CHECK(j(kMb, kDom) == 0.0);  // the Monod derivative is scaled by b
}

TEST_CASE("reaction_jacobian matches central finite differences") {
    BioParams p;
    SplitMix64 rng(25);
    const double step = 1e-6;
    for (int trial = 0; trial < 100; ++trial) {
        const NodeVec s = random_state(rng);
        const NodeMat j = reaction_jacobian(s, p);
        NodeMat fd;
        for (int col = 0; col < 5; ++col) {
            NodeVec up = s, dn = s;
            up[col] += step;
            dn[col] -= step;
            fd.col(col) = (reaction_rhs(up, p) - reaction_rhs(dn, p)) / (2.0 * step);
        }
        const double denom = std::max(j.norm(), 1e-12);
        CHECK((j - fd).norm() / denom <= 1e-6);
    }
}

TEST_CASE("reaction_jacobian columns sum to zero") {
    BioParams p;
    SplitMix64 rng(26);
    for (int trial = 0; trial < 100; ++trial) {
        const NodeMat j = reaction_jacobian(random_state(rng), p);
        for (int col = 0; col < 5; ++col) {
            const double scale = j.col(col).cwiseAbs().sum();
            CHECK(std::abs(j.col(col).sum()) <=
                  4.0 * std::numeric_limits<double>::epsilon() * std::max(scale, 1.0));
        }
    }
}

TEST_CASE("BioParams validation") {
    BioParams p;
    CHECK_NOTHROW(p.validate());
    p.recycled_fraction = 1.2;
    CHECK_THROWS_AS(p.validate(), InputError);
    p = BioParams{};
    p.half_saturation = 0.0;
    CHECK_THROWS_AS(p.validate(), InputError);
    p = BioParams{};
    p.mortality_rate = -0.1;
    CHECK_THROWS_AS(p.validate(), InputError);
}
