#include "poresim/errors.hpp"
#include "poresim/oracle.hpp"
#include "poresim/rng.hpp"
#include "poresim/volume.hpp"

#include <doctest.h>

#include <cmath>

using namespace poresim;

namespace {

VolumeImage open_box(int n) {
    VolumeImage img;
    img.dims = {n, n, n};
    img.resolution_um = 2.0;
    img.voxels.assign(img.voxel_count(), 1);
    return img;
}

GridState random_pore_state(const VolumeImage& img, std::uint64_t seed) {
    GridState gs = GridState::zero(img);
    SplitMix64 rng(seed);
    for (std::size_t i = 0; i < img.voxels.size(); ++i) {
        if (!img.voxels[i]) continue;
        gs.mb[i] = rng.next_double();
        gs.dom[i] = rng.next_double();
        gs.som[i] = rng.next_double();
        gs.fom[i] = rng.next_double();
        gs.co2[i] = rng.next_double();
    }
    return gs;
}

} // namespace

TEST_CASE("fd_laplacian: constant field is in Neumann equilibrium") {
    const VolumeImage img = synth_volume(SynthSpec::random_blobs({12, 12, 12}, 4, 2.0, 4.0, 3, 2.0));
    std::vector<double> field(img.voxel_count(), 0.0);
    for (std::size_t i = 0; i < field.size(); ++i)
        if (img.voxels[i]) field[i] = 3.7;
    for (const double v : fd_laplacian(field, img)) CHECK(v == 0.0);
}

TEST_CASE("fd_laplacian: interior spike spreads with the 7-point stencil") {
    const VolumeImage img = open_box(7);
    const double h = img.resolution_um;
    std::vector<double> field(img.voxel_count(), 0.0);
    field[img.index(3, 3, 3)] = 1.0;
    const auto lap = fd_laplacian(field, img);
    CHECK(lap[img.index(3, 3, 3)] == doctest::Approx(-6.0 / (h * h)).epsilon(1e-15));
    CHECK(lap[img.index(2, 3, 3)] == doctest::Approx(1.0 / (h * h)).epsilon(1e-15));
    CHECK(lap[img.index(3, 4, 3)] == doctest::Approx(1.0 / (h * h)).epsilon(1e-15));
    CHECK(lap[img.index(3, 3, 2)] == doctest::Approx(1.0 / (h * h)).epsilon(1e-15));
    CHECK(lap[img.index(1, 3, 3)] == 0.0);
}

TEST_CASE("fd_laplacian: solid and boundary faces carry no flux") {
    VolumeImage img;
    img.dims = {3, 1, 1};
    img.resolution_um = 1.0;
    img.voxels = {1, 1, 0};  // pore, pore, solid
    std::vector<double> field = {2.0, 0.0, 9.0};  // the 9 must never leak in
    const auto lap = fd_laplacian(field, img);
    CHECK(lap[0] == doctest::Approx(-2.0));
    CHECK(lap[1] == doctest::Approx(2.0));
    CHECK(lap[2] == 0.0);
}

TEST_CASE("fd_laplacian: flux sums to zero on random fields") {
    const VolumeImage img = synth_volume(SynthSpec::random_blobs({14, 14, 14}, 5, 2.0, 4.5, 4, 1.5));
    SplitMix64 rng(5);
    std::vector<double> field(img.voxel_count(), 0.0);
    double scale = 0.0;
    for (std::size_t i = 0; i < field.size(); ++i)
        if (img.voxels[i]) {
            field[i] = rng.next_double();
            scale += field[i];
        }
    const auto lap = fd_laplacian(field, img);
    double sum = 0.0, abs_sum = 0.0;
    for (const double v : lap) {
        sum += v;
        abs_sum += std::abs(v);
    }
    CHECK(std::abs(sum) <= 1e-10 * std::max(abs_sum, 1.0));
}

TEST_CASE("oracle_step: the stability bound is enforced") {
    const VolumeImage img = open_box(6);
    BioParams p;
    p.d_dom = 10.0;
    const GridState gs = random_pore_state(img, 6);
    const double bound = stable_dt(img, p);
    CHECK(bound == doctest::Approx(0.9 * 4.0 / 60.0));
    CHECK_THROWS_AS(oracle_step(gs, p, bound * 1.5), InputError);
    CHECK_NOTHROW(oracle_step(gs, p, bound * 0.5));
}

TEST_CASE("oracle_step: equilibrium density fields stay put") {
    const VolumeImage img = synth_volume(SynthSpec::random_blobs({10, 10, 10}, 3, 2.0, 3.5, 7, 1.0));
    BioParams p;
    p.d_dom = 1.0;
    GridState gs = GridState::zero(img);
    for (std::size_t i = 0; i < img.voxels.size(); ++i)
        if (img.voxels[i]) {
            gs.dom[i] = 0.25;
            gs.co2[i] = 1.5;
        }
    const GridState next = oracle_step(gs, p, 0.01);
    for (std::size_t i = 0; i < img.voxels.size(); ++i) {
        CHECK(next.dom[i] == doctest::Approx(gs.dom[i]).epsilon(1e-14));
        CHECK(next.co2[i] == gs.co2[i]);
        CHECK(next.mb[i] == 0.0);
    }
}

TEST_CASE("oracle_step: pure FOM decay matches the closed form per voxel") {
    const VolumeImage img = open_box(5);
    BioParams p;  // fom_decay_rate = 0.3, no diffusion configured
    GridState gs = GridState::zero(img);
    for (std::size_t i = 0; i < img.voxels.size(); ++i) gs.fom[i] = 2.0;

    const double dt = 1e-4;
    const long long steps = 10000;  // t = 1 day
    for (long long s = 0; s < steps; ++s) gs = oracle_step(gs, p, dt);
    const double expected = 2.0 * std::exp(-0.3);
    for (std::size_t i = 0; i < img.voxels.size(); ++i)
        CHECK(gs.fom[i] == doctest::Approx(expected).epsilon(1e-4));  // explicit Euler error
}

TEST_CASE("oracle_step: carbon is conserved over many steps") {
    const VolumeImage img = synth_volume(SynthSpec::random_blobs({10, 10, 10}, 3, 2.0, 3.5, 8, 1.0));
    BioParams p;
    p.d_dom = 5.0;
    GridState gs = random_pore_state(img, 9);
    for (std::size_t i = 0; i < img.voxels.size(); ++i) {
        if (!img.voxels[i]) {
            gs.mb[i] = gs.dom[i] = gs.som[i] = gs.fom[i] = gs.co2[i] = 0.0;
        } else {
            // densities around 1e-3 keep the reaction part of the system well
            // inside the explicit stability region that the bound covers for
            // diffusion alone
            gs.mb[i] *= 1e-3;
            gs.dom[i] *= 1e-3;
            gs.som[i] *= 1e-3;
            gs.fom[i] *= 1e-3;
            gs.co2[i] *= 1e-3;
        }
    }
    const double total0 = agg_total(gs.totals());
    const double dt = 0.9 * stable_dt(img, p);
    for (int s = 0; s < 2000; ++s) gs = oracle_step(gs, p, dt);
    CHECK(std::abs(agg_total(gs.totals()) - total0) <= 1e-8 * total0);
    // nonnegativity in the stable regime
    for (std::size_t i = 0; i < img.voxels.size(); ++i) {
        CHECK(gs.mb[i] >= 0.0);
        CHECK(gs.dom[i] >= -1e-14 * total0);
    }
}

TEST_CASE("compare_with_network: zero initial state gives zero discrepancy") {
    const VolumeImage img = synth_volume(SynthSpec::sphere({16, 16, 16}, {8.5, 8.5, 8.5}, 5.0));
    BioParams p;
    p.d_dom = 1.0;
    OracleFixture fixture;
    fixture.t_end_days = 1.0;
    fixture.network_dt_days = 0.1;
    fixture.record_every_days = 0.5;
    const ComparisonReport rep = compare_with_network(img, p, fixture);
    CHECK(rep.max_rel_l1 == 0.0);
    CHECK(rep.network_nodes == 1);
}

TEST_CASE("compare_with_network: reaction-only single pore matches the network closely") {
    const VolumeImage img = synth_volume(SynthSpec::sphere({16, 16, 16}, {8.5, 8.5, 8.5}, 6.0));
    BioParams p;
    p.d_dom = 0.0;
    OracleFixture fixture;
    fixture.dom_density_ug_um3 = 1e-3;
    fixture.mb_density_ug_um3 = 1e-4;
    fixture.t_end_days = 0.5;
    fixture.network_dt_days = 1e-5;
    fixture.oracle_dt_days = 1e-5;
    fixture.record_every_days = 0.1;
    const ComparisonReport rep = compare_with_network(img, p, fixture);
    CHECK(rep.network_nodes == 1);
    CHECK(rep.max_rel_l1 <= 1e-3);
}

TEST_CASE("compare_with_network: oversized geometry is refused") {
    VolumeImage img;
    img.dims = {70, 4, 4};
    img.resolution_um = 1.0;
    img.voxels.assign(img.voxel_count(), 1);
    CHECK_THROWS_AS(compare_with_network(img, BioParams{}, OracleFixture{}), InputError);
}
