#include "poresim/network.hpp"

#include "poresim/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>

namespace poresim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1D lower envelope of parabolas (Felzenszwalb & Huttenlocher). f holds the
// squared distances from the previous pass; out receives min_v (q-v)^2 + f[v].
void edt_1d(const std::vector<double>& f, std::vector<double>& out, int n,
            std::vector<int>& v, std::vector<double>& z) {
    int k = 0;
    v[0] = 0;
    z[0] = -kInf;
    z[1] = kInf;
    for (int q = 1; q < n; ++q) {
        if (f[q] == kInf) continue;
        double s;
        while (true) {
            if (f[v[k]] == kInf) {
                // previous vertex is a hole; replace it outright
                --k;
                if (k < 0) break;
                continue;
            }
            s = ((f[q] + q * double(q)) - (f[v[k]] + v[k] * double(v[k]))) / (2.0 * (q - v[k]));
            if (s > z[k]) break;
            --k;
            if (k < 0) break;
        }
        ++k;
        v[k] = q;
        z[k] = (k == 0) ? -kInf : s;
        z[k + 1] = kInf;
    }
    if (f[v[0]] == kInf) {
        // no site in this line at all
        std::fill(out.begin(), out.begin() + n, kInf);
        return;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const double d = q - double(v[k]);
        out[q] = d * d + f[v[k]];
    }
}

// Squared Euclidean distance (voxel units) from each voxel center to the
// nearest solid voxel center; INF where the image has no solid voxel.
// All finite values are integers held exactly in doubles.
std::vector<double> edt_squared(const VolumeImage& img) {
    const auto [nx, ny, nz] = img.dims;
    const std::size_t n = img.voxel_count();

    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = img.voxels[i] ? kInf : 0.0;

    const int nmax = std::max({nx, ny, nz});
    std::vector<double> line(nmax), out(nmax), z(nmax + 1);
    std::vector<int> v(nmax);

    // pass along x
    for (int zc = 0; zc < nz; ++zc)
        for (int yc = 0; yc < ny; ++yc) {
            for (int x = 0; x < nx; ++x) line[x] = sq[img.index(x, yc, zc)];
            edt_1d(line, out, nx, v, z);
            for (int x = 0; x < nx; ++x) sq[img.index(x, yc, zc)] = out[x];
        }
    // pass along y
    for (int zc = 0; zc < nz; ++zc)
        for (int x = 0; x < nx; ++x) {
            for (int y = 0; y < ny; ++y) line[y] = sq[img.index(x, y, zc)];
            edt_1d(line, out, ny, v, z);
            for (int y = 0; y < ny; ++y) sq[img.index(x, y, zc)] = out[y];
        }
    // pass along z
    for (int yc = 0; yc < ny; ++yc)
        for (int x = 0; x < nx; ++x) {
            for (int zc = 0; zc < nz; ++zc) line[zc] = sq[img.index(x, yc, zc)];
            edt_1d(line, out, nz, v, z);
            for (int zc = 0; zc < nz; ++zc) sq[img.index(x, yc, zc)] = out[zc];
        }
    return sq;
}

// Squared radius of the maximal inscribed ball at each pore voxel, in voxel
// units: min of the squared distance to the nearest solid center and the
// squared distance to the nearest image face. Both candidates are exactly
// representable, so coverage comparisons against integer squared offsets
// are tie-free and deterministic.
std::vector<double> inscribed_r2(const VolumeImage& img, const std::vector<double>& sq) {
    const auto [nx, ny, nz] = img.dims;
    std::vector<double> r2(img.voxel_count(), 0.0);
    for (int zc = 0; zc < nz; ++zc)
        for (int yc = 0; yc < ny; ++yc)
            for (int x = 0; x < nx; ++x) {
                const std::size_t i = img.index(x, yc, zc);
                if (!img.voxels[i]) continue;
                const double fm =
                    std::min({double(x), double(nx - 1 - x), double(yc),
                              double(ny - 1 - yc), double(zc), double(nz - 1 - zc)}) +
                    0.5;
                r2[i] = std::min(sq[i], fm * fm);
            }
    return r2;
}

} // namespace

double PoreNetwork::total_volume_um3() const {
    double s = 0.0;
    for (const auto& b : balls) s += b.volume_um3;
    return s;
}

std::vector<double> distance_transform(const VolumeImage& img) {
    const double h = img.resolution_um;
    const std::vector<double> r2 = inscribed_r2(img, edt_squared(img));
    std::vector<double> dist(img.voxel_count(), 0.0);
    for (std::size_t i = 0; i < dist.size(); ++i)
        if (img.voxels[i]) dist[i] = h * std::sqrt(r2[i]);
    return dist;
}

std::vector<Ball> extract_balls(const VolumeImage& img) {
    const auto [nx, ny, nz] = img.dims;
    const double h = img.resolution_um;
    const std::vector<double> r2 = inscribed_r2(img, edt_squared(img));

    std::vector<std::size_t> pore;
    pore.reserve(img.pore_count());
    for (std::size_t i = 0; i < img.voxels.size(); ++i)
        if (img.voxels[i]) pore.push_back(i);
    if (pore.empty()) throw InputError("extract_balls: image has no pore voxels");

    std::stable_sort(pore.begin(), pore.end(), [&](std::size_t a, std::size_t b) {
        if (r2[a] != r2[b]) return r2[a] > r2[b];
        return a < b;
    });

    // coverage multiplicity per voxel; a voxel counts as covered by a ball when
    // it lies strictly inside it
    std::vector<int> cover(img.voxels.size(), 0);

    struct Picked {
        int x, y, z;
        double r2_vox;
        std::vector<std::size_t> covered;
    };
    std::vector<Picked> picked;

    auto covered_voxels = [&](int cx, int cy, int cz, double r2_vox) {
        std::vector<std::size_t> res;
        const int ir = static_cast<int>(std::ceil(std::sqrt(r2_vox)));
        for (int zc = std::max(0, cz - ir); zc <= std::min(nz - 1, cz + ir); ++zc)
            for (int yc = std::max(0, cy - ir); yc <= std::min(ny - 1, cy + ir); ++yc)
                for (int x = std::max(0, cx - ir); x <= std::min(nx - 1, cx + ir); ++x) {
                    const std::size_t q = img.index(x, yc, zc);
                    if (!img.voxels[q]) continue;
                    const double dx = x - cx, dy = yc - cy, dz = zc - cz;
                    if (dx * dx + dy * dy + dz * dz < r2_vox) res.push_back(q);
                }
        return res;
    };

    for (const std::size_t p : pore) {
        if (cover[p] > 0) continue;
        const int x = static_cast<int>(p % nx);
        const int y = static_cast<int>((p / nx) % ny);
        const int zc = static_cast<int>(p / (static_cast<std::size_t>(nx) * ny));
        Picked pk{x, y, zc, r2[p], covered_voxels(x, y, zc, r2[p])};
        for (const std::size_t q : pk.covered) ++cover[q];
        picked.push_back(std::move(pk));
    }

    // prune balls that cover nothing privately, smallest (= last picked) first
    std::vector<bool> removed(picked.size(), false);
    for (std::size_t k = picked.size(); k-- > 0;) {
        bool redundant = true;
        for (const std::size_t q : picked[k].covered)
            if (cover[q] < 2) {
                redundant = false;
                break;
            }
        if (redundant) {
            removed[k] = true;
            for (const std::size_t q : picked[k].covered) --cover[q];
        }
    }

    std::vector<Ball> balls;
    balls.reserve(picked.size());
    for (std::size_t k = 0; k < picked.size(); ++k) {
        if (removed[k]) continue;
        const auto& pk = picked[k];
        Ball b;
        b.center_um = {(pk.x + 0.5) * h, (pk.y + 0.5) * h, (pk.z + 0.5) * h};
        b.radius_um = std::sqrt(pk.r2_vox) * h;
        b.volume_um3 = 4.0 / 3.0 * std::numbers::pi * b.radius_um * b.radius_um * b.radius_um;
        balls.push_back(b);
    }
    return balls;
}

std::vector<PoreEdge> build_edges(const std::vector<Ball>& balls) {
    if (balls.empty()) throw InputError("build_edges: no balls");
    const int n = static_cast<int>(balls.size());

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (balls[a].center_um[0] != balls[b].center_um[0])
            return balls[a].center_um[0] < balls[b].center_um[0];
        return a < b;
    });
    double r_max = 0.0;
    for (const auto& b : balls) r_max = std::max(r_max, b.radius_um);

    std::vector<PoreEdge> edges;
    for (int a = 0; a < n; ++a) {
        const int i = order[a];
        const auto& bi = balls[i];
        for (int b = a + 1; b < n; ++b) {
            const int j = order[b];
            const auto& bj = balls[j];
            if (bj.center_um[0] - bi.center_um[0] >= bi.radius_um + r_max) break;
            const double dx = bi.center_um[0] - bj.center_um[0];
            const double dy = bi.center_um[1] - bj.center_um[1];
            const double dz = bi.center_um[2] - bj.center_um[2];
            const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
            if (d >= bi.radius_um + bj.radius_um) continue;
            if (d <= 0.0) throw InputError("build_edges: coincident ball centers");

            const double x = (d * d - bj.radius_um * bj.radius_um + bi.radius_um * bi.radius_um) /
                             (2.0 * d);
            double area;
            if (x < -bi.radius_um || x > bi.radius_um) {
                const double rm = std::min(bi.radius_um, bj.radius_um);
                area = std::numbers::pi * rm * rm;
            } else {
                area = std::numbers::pi * (bi.radius_um * bi.radius_um - x * x);
            }
            if (!(area > 0.0)) continue;

            PoreEdge e;
            e.i = std::min(i, j);
            e.j = std::max(i, j);
            e.contact_area_um2 = area;
            e.center_distance_um = d;
            e.conductance_um = area / d;
            edges.push_back(e);
        }
    }
    std::sort(edges.begin(), edges.end(), [](const PoreEdge& a, const PoreEdge& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    return edges;
}

PoreNetwork extract_network(const VolumeImage& img, const std::string& source) {
    PoreNetwork net;
    net.balls = extract_balls(img);
    net.edges = build_edges(net.balls);
    net.resolution_um = img.resolution_um;
    net.source = source;
    return net;
}

void export_network(const PoreNetwork& net, const std::string& path) {
    nlohmann::json nodes = nlohmann::json::array();
    for (int i = 0; i < net.node_count(); ++i) {
        const auto& b = net.balls[i];
        nodes.push_back({{"id", i},
                         {"x", b.center_um[0]},
                         {"y", b.center_um[1]},
                         {"z", b.center_um[2]},
                         {"r", b.radius_um},
                         {"v", b.volume_um3}});
    }
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : net.edges)
        edges.push_back({{"i", e.i},
                         {"j", e.j},
                         {"area", e.contact_area_um2},
                         {"dist", e.center_distance_um},
                         {"q", e.conductance_um}});
    nlohmann::json j{{"nodes", nodes},
                     {"edges", edges},
                     {"meta", {{"resolution_um", net.resolution_um}, {"source", net.source}}}};
    std::ofstream out(path);
    if (!out) throw InputError("cannot write network file: " + path);
    out << j.dump(2) << '\n';
}

PoreNetwork import_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open network file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InputError("malformed network file " + path + ": " + e.what());
    }

    PoreNetwork net;
    try {
        net.resolution_um = j.at("meta").at("resolution_um").get<double>();
        net.source = j.at("meta").value("source", "");
        const auto& nodes = j.at("nodes");
        net.balls.resize(nodes.size());
        std::vector<bool> seen(nodes.size(), false);
        for (const auto& nd : nodes) {
            const int id = nd.at("id").get<int>();
            if (id < 0 || id >= static_cast<int>(nodes.size()) || seen[id])
                throw InputError("network file: bad or duplicate node id " + std::to_string(id));
            seen[id] = true;
            Ball& b = net.balls[id];
            b.center_um = {nd.at("x").get<double>(), nd.at("y").get<double>(),
                           nd.at("z").get<double>()};
            b.radius_um = nd.at("r").get<double>();
            b.volume_um3 = nd.at("v").get<double>();
            if (!(b.radius_um > 0.0))
                throw InputError("network file: node " + std::to_string(id) +
                                 " has non-positive radius");
        }
        for (std::size_t a = 0; a < net.balls.size(); ++a)
            for (std::size_t b = a + 1; b < net.balls.size(); ++b)
                if (net.balls[a].center_um == net.balls[b].center_um)
                    throw InputError("network file: duplicate ball centers at nodes " +
                                     std::to_string(a) + " and " + std::to_string(b));
        std::set<std::pair<int, int>> seen_edges;
        for (const auto& ed : j.at("edges")) {
            PoreEdge e;
            e.i = ed.at("i").get<int>();
            e.j = ed.at("j").get<int>();
            e.contact_area_um2 = ed.at("area").get<double>();
            e.center_distance_um = ed.at("dist").get<double>();
            e.conductance_um = ed.at("q").get<double>();
            if (e.i < 0 || e.j < 0 || e.i >= net.node_count() || e.j >= net.node_count())
                throw InputError("network file: edge references missing node");
            if (e.i == e.j) throw InputError("network file: self edge on node " + std::to_string(e.i));
            if (!seen_edges.insert({std::min(e.i, e.j), std::max(e.i, e.j)}).second)
                throw InputError("network file: duplicate edge " + std::to_string(e.i) + "-" +
                                 std::to_string(e.j));
            if (!(e.center_distance_um > 0.0))
                throw InputError("network file: edge with non-positive center distance");
            if (e.contact_area_um2 < 0.0)
                throw InputError("network file: edge with negative contact area");
            const double q_expected = e.contact_area_um2 / e.center_distance_um;
            if (std::abs(e.conductance_um - q_expected) >
                1e-6 * std::max(1.0, std::abs(q_expected)))
                throw InputError("network file: conductance inconsistent with area/dist");
            net.edges.push_back(e);
        }
    } catch (const nlohmann::json::exception& e) {
        throw InputError("network file " + path + ": " + e.what());
    }
    return net;
}

std::vector<std::vector<int>> adjacency(const PoreNetwork& net) {
    std::vector<std::vector<int>> adj(net.node_count());
    for (const auto& e : net.edges) {
        adj[e.i].push_back(e.j);
        adj[e.j].push_back(e.i);
    }
    return adj;
}

std::pair<std::vector<int>, int> graph_components(const PoreNetwork& net) {
    const auto adj = adjacency(net);
    std::vector<int> labels(net.node_count(), 0);
    int count = 0;
    std::vector<int> stack;
    for (int s = 0; s < net.node_count(); ++s) {
        if (labels[s] != 0) continue;
        ++count;
        labels[s] = count;
        stack.push_back(s);
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (const int w : adj[u])
                if (labels[w] == 0) {
                    labels[w] = count;
                    stack.push_back(w);
                }
        }
    }
    return {std::move(labels), count};
}

} // namespace poresim
