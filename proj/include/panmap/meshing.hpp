#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "panmap/image.hpp"
#include "panmap/integration.hpp"
#include "panmap/label.hpp"
#include "panmap/voxel_map.hpp"

namespace panmap {

struct LabeledMesh {
  std::vector<Eigen::Vector3f> vertices;
  std::vector<std::array<uint32_t, 3>> triangles;
  std::vector<Rgb8> colors;               // per vertex
  std::vector<PanopticLabel> labels;      // per vertex
  std::vector<ClassId> class_ids;         // restored class, 0 if unknown
};

// Zero-isosurface of the TSDF via marching cubes over all observed blocks.
// Vertices interpolate position and color along cell edges; the panoptic
// label comes from the edge endpoint with the larger label weight, and
// instance labels carry their restored class from the registry. Cells with
// any unobserved corner (weight_d = 0) are skipped, including across block
// boundaries.
LabeledMesh extract_mesh(const VolumetricMap& map,
                         const InstanceRegistry& registry);

// Integer vertex-label encoding used in the PLY export: 0 = unknown, stuff
// classes take 1..K in ascending class-ID order, instance z takes K+1+z.
int32_t encode_panoptic_id(PanopticLabel label, const LabelSchema& schema);
PanopticLabel decode_panoptic_id(int32_t id, const LabelSchema& schema);

// Binary little-endian PLY with per-vertex x, y, z, red, green, blue,
// panoptic_id, class_id.
void export_ply(const LabeledMesh& mesh, const LabelSchema& schema,
                const std::string& path);
LabeledMesh import_ply(const std::string& path, const LabelSchema& schema);

// Sidecar text table: one line per panoptic_id present in the mesh with its
// kind, class or instance ID, restored class name, and probability.
void write_label_sidecar(const LabeledMesh& mesh, const LabelSchema& schema,
                         const InstanceRegistry& registry,
                         const std::string& path);

}  // namespace panmap
