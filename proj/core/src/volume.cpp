#include "poresim/volume.hpp"

#include "poresim/errors.hpp"
#include "poresim/rng.hpp"

#include <json.hpp>

#include <fstream>

namespace poresim {

namespace {

void check_dims(const Index3& dims, double resolution_um) {
    if (dims[0] < 1 || dims[1] < 1 || dims[2] < 1)
        throw InputError("volume dims must be >= 1 in every direction");
    if (!(resolution_um > 0.0))
        throw InputError("volume resolution must be positive");
}

} // namespace

std::size_t VolumeImage::pore_count() const {
    std::size_t n = 0;
    for (auto v : voxels) n += (v != 0);
    return n;
}

VolumeImage load_volume(const std::string& raw_path, const std::string& meta_path) {
    std::ifstream meta(meta_path);
    if (!meta) throw InputError("cannot open sidecar: " + meta_path);
    nlohmann::json j;
    try {
        meta >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InputError("malformed sidecar " + meta_path + ": " + e.what());
    }
    for (const char* field : {"nx", "ny", "nz", "resolution_um", "pore_value"}) {
        if (!j.contains(field))
            throw InputError("sidecar " + meta_path + " missing field '" + field + "'");
    }

    VolumeImage img;
    img.dims = {j.at("nx").get<int>(), j.at("ny").get<int>(), j.at("nz").get<int>()};
    img.resolution_um = j.at("resolution_um").get<double>();
    const auto pore_value = j.at("pore_value").get<int>();
    check_dims(img.dims, img.resolution_um);

    std::ifstream raw(raw_path, std::ios::binary);
    if (!raw) throw InputError("cannot open raw volume: " + raw_path);
    std::vector<char> bytes((std::istreambuf_iterator<char>(raw)),
                            std::istreambuf_iterator<char>());
    if (bytes.size() != img.voxel_count())
        throw InputError("raw size mismatch: " + raw_path + " has " +
                         std::to_string(bytes.size()) + " bytes, sidecar declares " +
                         std::to_string(img.voxel_count()));

    img.voxels.resize(bytes.size());
    for (std::size_t i = 0; i < bytes.size(); ++i)
        img.voxels[i] = (static_cast<std::uint8_t>(bytes[i]) == pore_value) ? 1 : 0;
    return img;
}

void save_volume(const VolumeImage& img, const std::string& raw_path,
                 const std::string& meta_path, std::uint8_t pore_value) {
    check_dims(img.dims, img.resolution_um);
    if (pore_value == 0) throw InputError("pore_value 0 would be indistinguishable from solid");

    std::ofstream raw(raw_path, std::ios::binary);
    if (!raw) throw InputError("cannot write raw volume: " + raw_path);
    std::vector<char> bytes(img.voxels.size());
    for (std::size_t i = 0; i < bytes.size(); ++i)
        bytes[i] = static_cast<char>(img.voxels[i] ? pore_value : 0);
    raw.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!raw) throw InputError("short write: " + raw_path);

    nlohmann::json j{{"nx", img.dims[0]},
                     {"ny", img.dims[1]},
                     {"nz", img.dims[2]},
                     {"resolution_um", img.resolution_um},
                     {"pore_value", static_cast<int>(pore_value)}};
    std::ofstream meta(meta_path);
    if (!meta) throw InputError("cannot write sidecar: " + meta_path);
    meta << j.dump(2) << '\n';
}

VolumeImage crop(const VolumeImage& img, const CropRegion& region) {
    for (int a = 0; a < 3; ++a) {
        if (region.lo[a] < 0 || region.lo[a] >= region.hi[a] || region.hi[a] > img.dims[a])
            throw InputError("crop region out of bounds on axis " + std::to_string(a));
    }
    VolumeImage out;
    out.dims = {region.hi[0] - region.lo[0], region.hi[1] - region.lo[1],
                region.hi[2] - region.lo[2]};
    out.resolution_um = img.resolution_um;
    out.voxels.resize(out.voxel_count());
    for (int z = 0; z < out.dims[2]; ++z)
        for (int y = 0; y < out.dims[1]; ++y)
            for (int x = 0; x < out.dims[0]; ++x)
                out.voxels[out.index(x, y, z)] =
                    img.voxels[img.index(region.lo[0] + x, region.lo[1] + y, region.lo[2] + z)];
    return out;
}

double porosity(const VolumeImage& img) {
    return static_cast<double>(img.pore_count()) / static_cast<double>(img.voxel_count());
}

SynthSpec SynthSpec::sphere(Index3 dims, std::array<double, 3> c, double r,
                            double resolution_um) {
    SynthSpec s;
    s.dims = dims;
    s.resolution_um = resolution_um;
    s.spheres.push_back({c, r});
    return s;
}

SynthSpec SynthSpec::tube_x(Index3 dims, int y, int z, int x0, int x1,
                            double resolution_um) {
    // A chain of radius-0.49 spheres marks exactly one voxel per x position.
    SynthSpec s;
    s.dims = dims;
    s.resolution_um = resolution_um;
    for (int x = x0; x <= x1; ++x)
        s.spheres.push_back({{x + 0.5, y + 0.5, z + 0.5}, 0.49});
    return s;
}

SynthSpec SynthSpec::random_blobs(Index3 dims, int count, double r_min, double r_max,
                                  std::uint64_t seed, double resolution_um) {
    if (count < 1) throw InputError("random_blobs: count must be >= 1");
    if (!(r_min > 0.0) || r_max < r_min) throw InputError("random_blobs: bad radius range");
    SynthSpec s;
    s.dims = dims;
    s.resolution_um = resolution_um;
    SplitMix64 rng(seed);
    for (int i = 0; i < count; ++i) {
        const double r = rng.uniform(r_min, r_max);
        std::array<double, 3> c;
        for (int a = 0; a < 3; ++a) c[a] = rng.uniform(r, dims[a] - r);
        s.spheres.push_back({c, r});
    }
    return s;
}

VolumeImage synth_volume(const SynthSpec& spec) {
    check_dims(spec.dims, spec.resolution_um);
    for (const auto& sp : spec.spheres) {
        if (!(sp.radius_vox > 0.0)) throw InputError("synth sphere with non-positive radius");
        for (int a = 0; a < 3; ++a)
            if (sp.center_vox[a] - sp.radius_vox < 0.0 ||
                sp.center_vox[a] + sp.radius_vox > spec.dims[a])
                throw InputError("synth sphere does not fit inside the image");
    }

    VolumeImage img;
    img.dims = spec.dims;
    img.resolution_um = spec.resolution_um;
    img.voxels.assign(img.voxel_count(), 0);
    for (const auto& sp : spec.spheres) {
        const double r2 = sp.radius_vox * sp.radius_vox;
        const int x0 = std::max(0, static_cast<int>(sp.center_vox[0] - sp.radius_vox - 1));
        const int x1 = std::min(spec.dims[0] - 1, static_cast<int>(sp.center_vox[0] + sp.radius_vox + 1));
        const int y0 = std::max(0, static_cast<int>(sp.center_vox[1] - sp.radius_vox - 1));
        const int y1 = std::min(spec.dims[1] - 1, static_cast<int>(sp.center_vox[1] + sp.radius_vox + 1));
        const int z0 = std::max(0, static_cast<int>(sp.center_vox[2] - sp.radius_vox - 1));
        const int z1 = std::min(spec.dims[2] - 1, static_cast<int>(sp.center_vox[2] + sp.radius_vox + 1));
        for (int z = z0; z <= z1; ++z)
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) {
                    const double dx = x + 0.5 - sp.center_vox[0];
                    const double dy = y + 0.5 - sp.center_vox[1];
                    const double dz = z + 0.5 - sp.center_vox[2];
                    if (dx * dx + dy * dy + dz * dz <= r2) img.voxels[img.index(x, y, z)] = 1;
                }
    }
    return img;
}

std::pair<std::vector<int>, int> flood_fill_components(const VolumeImage& img) {
    std::vector<int> labels(img.voxel_count(), 0);
    int count = 0;
    std::vector<std::size_t> stack;
    const auto [nx, ny, nz] = img.dims;
    for (std::size_t seed = 0; seed < img.voxels.size(); ++seed) {
        if (!img.voxels[seed] || labels[seed] != 0) continue;
        ++count;
        labels[seed] = count;
        stack.push_back(seed);
        while (!stack.empty()) {
            const std::size_t v = stack.back();
            stack.pop_back();
            const int x = static_cast<int>(v % nx);
            const int y = static_cast<int>((v / nx) % ny);
            const int z = static_cast<int>(v / (static_cast<std::size_t>(nx) * ny));
            const int nbr[6][3] = {{x - 1, y, z}, {x + 1, y, z}, {x, y - 1, z},
                                   {x, y + 1, z}, {x, y, z - 1}, {x, y, z + 1}};
            for (const auto& q : nbr) {
                if (q[0] < 0 || q[0] >= nx || q[1] < 0 || q[1] >= ny || q[2] < 0 || q[2] >= nz)
                    continue;
                const std::size_t w = img.index(q[0], q[1], q[2]);
                if (img.voxels[w] && labels[w] == 0) {
                    labels[w] = count;
                    stack.push_back(w);
                }
            }
        }
    }
    return {std::move(labels), count};
}

} // namespace poresim
