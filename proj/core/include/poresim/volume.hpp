#ifndef PORESIM_VOLUME_HPP
#define PORESIM_VOLUME_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace poresim {

using Index3 = std::array<int, 3>;

/// 3D binary pore-space image. Voxels are stored x-fastest (x, then y, then z),
/// one byte per voxel, 1 = pore, 0 = solid. Immutable by convention once built;
/// all operations return new images.
struct VolumeImage {
    Index3 dims{0, 0, 0};        // nx, ny, nz
    double resolution_um = 0.0;  // edge length of one voxel
    std::vector<std::uint8_t> voxels;

    std::size_t index(int x, int y, int z) const {
        return static_cast<std::size_t>(x) +
               static_cast<std::size_t>(dims[0]) *
                   (static_cast<std::size_t>(y) +
                    static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(z));
    }
    bool is_pore(int x, int y, int z) const { return voxels[index(x, y, z)] != 0; }
    std::size_t voxel_count() const {
        return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
               static_cast<std::size_t>(dims[2]);
    }
    std::size_t pore_count() const;
};

/// Half-open crop box: lo inclusive, hi exclusive, in voxel indices.
struct CropRegion {
    Index3 lo{0, 0, 0};
    Index3 hi{0, 0, 0};
};

/// Reads a raw 8-bit volume plus its JSON sidecar
/// {"nx","ny","nz","resolution_um","pore_value"}. Bytes equal to pore_value
/// become pore, everything else solid. Throws InputError on size mismatch or
/// missing metadata fields.
VolumeImage load_volume(const std::string& raw_path, const std::string& meta_path);

/// Writes the raw bytes (pore = pore_value, solid = 0) and the sidecar.
/// load_volume(save_volume(img)) round-trips bit-exactly.
void save_volume(const VolumeImage& img, const std::string& raw_path,
                 const std::string& meta_path, std::uint8_t pore_value = 1);

/// Extracts the half-open box `region`; resolution preserved.
VolumeImage crop(const VolumeImage& img, const CropRegion& region);

/// Pore voxel fraction in [0, 1].
double porosity(const VolumeImage& img);

// --- synthetic test volumes -------------------------------------------------

struct SphereSpec {
    std::array<double, 3> center_vox;  // voxel coordinates, not scaled by resolution
    double radius_vox;
};

struct SynthSpec {
    Index3 dims{32, 32, 32};
    double resolution_um = 1.0;
    std::vector<SphereSpec> spheres;  // empty list -> all-solid volume

    static SynthSpec sphere(Index3 dims, std::array<double, 3> c, double r,
                            double resolution_um = 1.0);
    /// Straight 1-voxel-wide tube along x at (y, z), x in [x0, x1] inclusive.
    static SynthSpec tube_x(Index3 dims, int y, int z, int x0, int x1,
                            double resolution_um = 1.0);
    /// `count` random spheres with radii in [r_min, r_max], fully inside the image.
    static SynthSpec random_blobs(Index3 dims, int count, double r_min, double r_max,
                                  std::uint64_t seed, double resolution_um = 1.0);
};

/// Voxelizes the spec: a voxel is pore iff its center lies inside some sphere
/// (|center - c| <= r, in voxel units). Deterministic for a given spec.
/// Throws InputError for non-positive radii or dims.
VolumeImage synth_volume(const SynthSpec& spec);

/// Connected components of the pore space under 6-connectivity; label 0 at
/// solid voxels, components numbered from 1. Returns (labels, component count).
/// This is the flood-fill oracle used to cross-check network connectivity.
std::pair<std::vector<int>, int> flood_fill_components(const VolumeImage& img);

} // namespace poresim

#endif
