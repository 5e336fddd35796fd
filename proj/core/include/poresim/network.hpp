#ifndef PORESIM_NETWORK_HPP
#define PORESIM_NETWORK_HPP

#include "poresim/volume.hpp"

#include <array>
#include <string>
#include <vector>

namespace poresim {

/// Maximal inscribed ball. Center and radius in micrometers; the volume is the
/// analytic (4/3)*pi*r^3, not a voxel count.
struct Ball {
    std::array<double, 3> center_um;
    double radius_um = 0.0;
    double volume_um3 = 0.0;
};

/// Contact between two intersecting balls. conductance = contact_area /
/// center_distance, the geometric factor of the Fick flux between the pores.
struct PoreEdge {
    int i = 0;
    int j = 0;
    double contact_area_um2 = 0.0;
    double center_distance_um = 0.0;
    double conductance_um = 0.0;
};

/// Ball-and-contact model of the pore space. Undirected: every unordered pair
/// appears at most once, stored with i < j.
struct PoreNetwork {
    std::vector<Ball> balls;
    std::vector<PoreEdge> edges;
    double resolution_um = 0.0;
    std::string source;

    int node_count() const { return static_cast<int>(balls.size()); }
    double total_volume_um3() const;
};

/// Exact Euclidean distance field over the image, in micrometers: at each pore
/// voxel, the distance from the voxel center to the nearest solid voxel center
/// or to the nearest image face, whichever is closer (the sample faces are
/// treated as closed). Zero at solid voxels. Layout matches img.index().
std::vector<double> distance_transform(const VolumeImage& img);

/// Greedy maximal-ball covering: repeatedly pick the uncovered pore voxel with
/// the largest distance-transform value (ties broken by smallest linear index),
/// emit the inscribed ball centered there with radius equal to the distance
/// value, and mark every pore voxel strictly inside it as covered. A final
/// pruning pass removes balls whose covered voxels are all covered by other
/// balls, so each surviving ball covers at least one voxel privately.
/// Throws InputError when the image has no pore voxels.
std::vector<Ball> extract_balls(const VolumeImage& img);

/// Contact edges between all intersecting ball pairs. For centers at distance
/// d < r_i + r_j the contact area is the sphere-sphere intersection disk,
/// A = pi*(r_i^2 - x^2) with x = (d^2 - r_j^2 + r_i^2) / (2d); when one ball
/// engulfs the other (x outside [-r_i, r_i]) the area is clamped to the smaller
/// ball's great-circle disk. Tangent and disjoint pairs produce no edge.
/// Throws InputError on coincident centers.
std::vector<PoreEdge> build_edges(const std::vector<Ball>& balls);

/// Full pipeline: distance transform, greedy covering, contact edges.
PoreNetwork extract_network(const VolumeImage& img, const std::string& source = "");

/// JSON round trip:
/// {"nodes":[{id,x,y,z,r,v}],"edges":[{i,j,area,dist,q}],
///  "meta":{"resolution_um","source"}}  (units um, um^2, um^3).
void export_network(const PoreNetwork& net, const std::string& path);
PoreNetwork import_network(const std::string& path);

/// Neighbor lists per node.
std::vector<std::vector<int>> adjacency(const PoreNetwork& net);

/// Connected components of the contact graph: (labels from 1, count).
std::pair<std::vector<int>, int> graph_components(const PoreNetwork& net);

} // namespace poresim

#endif
