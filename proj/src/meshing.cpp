#include "panmap/meshing.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "panmap/mc_tables.hpp"

namespace panmap {

namespace {

struct LocalMesh {
  std::vector<Eigen::Vector3f> vertices;
  std::vector<std::array<uint32_t, 3>> triangles;
  std::vector<Rgb8> colors;
  std::vector<PanopticLabel> labels;
  std::vector<ClassId> class_ids;
};

struct EdgeKey {
  int64_t x, y, z;  // global index of the lower voxel of the edge
  int axis;
  friend bool operator==(const EdgeKey& a, const EdgeKey& b) {
    return a.x == b.x && a.y == b.y && a.z == b.z && a.axis == b.axis;
  }
};

struct EdgeKeyHash {
  size_t operator()(const EdgeKey& k) const {
    uint64_t h = static_cast<uint64_t>(k.x) * 73856093ull ^
                 static_cast<uint64_t>(k.y) * 19349669ull ^
                 static_cast<uint64_t>(k.z) * 83492791ull;
    return static_cast<size_t>(h ^ (static_cast<uint64_t>(k.axis) << 61));
  }
};

// Voxel lookup spanning into +1 neighbor blocks; local coords in [0, side].
const Voxel* corner_voxel(const VolumetricMap& map, const BlockIndex& base,
                          const VoxelBlock* const neighbors[2][2][2], int x,
                          int y, int z) {
  const int side = map.block_side();
  const int bx = x / side, by = y / side, bz = z / side;
  const VoxelBlock* block = neighbors[bx][by][bz];
  if (!block) return nullptr;
  return &block->voxel(x - bx * side, y - by * side, z - bz * side);
}

ClassId restored_class(PanopticLabel label,
                       const std::unordered_map<InstanceId, ClassId>& restored) {
  if (label.is_stuff()) return label.stuff_class();
  if (label.is_instance()) {
    auto it = restored.find(label.instance_id());
    return it == restored.end() ? 0 : it->second;
  }
  return 0;
}

LocalMesh extract_block(const VolumetricMap& map, const BlockIndex& index,
                        const std::unordered_map<InstanceId, ClassId>& restored) {
  LocalMesh mesh;
  const int side = map.block_side();

  const VoxelBlock* neighbors[2][2][2];
  for (int bx = 0; bx < 2; ++bx)
    for (int by = 0; by < 2; ++by)
      for (int bz = 0; bz < 2; ++bz)
        neighbors[bx][by][bz] = map.find_block(
            {index.x + bx, index.y + by, index.z + bz});

  std::unordered_map<EdgeKey, uint32_t, EdgeKeyHash> edge_vertices;

  const Voxel* corners[8];
  Eigen::Vector3<int64_t> corner_global[8];
  for (int z = 0; z < side; ++z) {
    for (int y = 0; y < side; ++y) {
      for (int x = 0; x < side; ++x) {
        bool observed = true;
        int config = 0;
        for (int c = 0; c < 8; ++c) {
          const int cx = x + kMcCornerOffsets[c][0];
          const int cy = y + kMcCornerOffsets[c][1];
          const int cz = z + kMcCornerOffsets[c][2];
          const Voxel* v = corner_voxel(map, index, neighbors, cx, cy, cz);
          if (!v || v->weight_d <= 0.0f) {
            observed = false;
            break;
          }
          corners[c] = v;
          corner_global[c] = {static_cast<int64_t>(index.x) * side + cx,
                              static_cast<int64_t>(index.y) * side + cy,
                              static_cast<int64_t>(index.z) * side + cz};
          if (v->tsdf < 0.0f) config |= 1 << c;
        }
        if (!observed || config == 0 || config == 255) continue;

        const int8_t* tris = kMcTriangleTable[config];
        uint32_t edge_index[12];
        for (int t = 0; tris[t] != -1; ++t) {
          const int edge = tris[t];
          const int ca = kMcEdgeCorners[edge][0];
          const int cb = kMcEdgeCorners[edge][1];

          // Canonical global edge identity for vertex sharing.
          const auto& ga = corner_global[ca];
          const auto& gb = corner_global[cb];
          int axis = 0;
          for (int d = 0; d < 3; ++d)
            if (ga[d] != gb[d]) axis = d;
          const bool a_lower = ga[axis] < gb[axis];
          const auto& lower = a_lower ? ga : gb;
          const EdgeKey key{lower.x(), lower.y(), lower.z(), axis};

          auto found = edge_vertices.find(key);
          if (found != edge_vertices.end()) {
            edge_index[edge] = found->second;
          } else {
            const Voxel* va = corners[ca];
            const Voxel* vb = corners[cb];
            const double da = va->tsdf, db = vb->tsdf;
            const double frac = da / (da - db);
            const Eigen::Vector3d pa = map.voxel_center(corner_global[ca]);
            const Eigen::Vector3d pb = map.voxel_center(corner_global[cb]);
            const Eigen::Vector3d p = pa + frac * (pb - pa);

            Rgb8 color;
            color.r = static_cast<uint8_t>(std::clamp(
                std::lround(va->color[0] + frac * (vb->color[0] - va->color[0])),
                0l, 255l));
            color.g = static_cast<uint8_t>(std::clamp(
                std::lround(va->color[1] + frac * (vb->color[1] - va->color[1])),
                0l, 255l));
            color.b = static_cast<uint8_t>(std::clamp(
                std::lround(va->color[2] + frac * (vb->color[2] - va->color[2])),
                0l, 255l));

            // Discrete label from the more confident endpoint.
            const PanopticLabel label =
                va->weight_l >= vb->weight_l ? va->label : vb->label;

            edge_index[edge] = static_cast<uint32_t>(mesh.vertices.size());
            edge_vertices.emplace(key, edge_index[edge]);
            mesh.vertices.push_back(p.cast<float>());
            mesh.colors.push_back(color);
            mesh.labels.push_back(label);
            mesh.class_ids.push_back(restored_class(label, restored));
          }
          if (t % 3 == 2)
            mesh.triangles.push_back(
                {edge_index[tris[t - 2]], edge_index[tris[t - 1]],
                 edge_index[tris[t]]});
        }
      }
    }
  }
  return mesh;
}

}  // namespace

LabeledMesh extract_mesh(const VolumetricMap& map,
                         const InstanceRegistry& registry) {
  std::unordered_map<InstanceId, ClassId> restored;
  for (const auto& [id, entry] : registry.entries()) {
    if (entry.denominator > 0.0)
      restored[id] = restore_thing_class(registry, id).first;
  }

  const std::vector<BlockIndex> blocks = map.sorted_block_indices();
  std::vector<LocalMesh> parts(blocks.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (size_t i = 0; i < blocks.size(); ++i)
    parts[i] = extract_block(map, blocks[i], restored);

  LabeledMesh mesh;
  for (const LocalMesh& part : parts) {
    const uint32_t offset = static_cast<uint32_t>(mesh.vertices.size());
    mesh.vertices.insert(mesh.vertices.end(), part.vertices.begin(),
                         part.vertices.end());
    mesh.colors.insert(mesh.colors.end(), part.colors.begin(),
                       part.colors.end());
    mesh.labels.insert(mesh.labels.end(), part.labels.begin(),
                       part.labels.end());
    mesh.class_ids.insert(mesh.class_ids.end(), part.class_ids.begin(),
                          part.class_ids.end());
    for (const auto& tri : part.triangles)
      mesh.triangles.push_back(
          {tri[0] + offset, tri[1] + offset, tri[2] + offset});
  }
  return mesh;
}

int32_t encode_panoptic_id(PanopticLabel label, const LabelSchema& schema) {
  if (label.is_unknown()) return 0;
  const auto& stuff = schema.stuff_classes();
  if (label.is_stuff()) {
    int32_t ordinal = 1;
    for (const auto& [cls, name] : stuff) {
      if (cls == label.stuff_class()) return ordinal;
      ++ordinal;
    }
    throw std::invalid_argument("stuff class not in schema");
  }
  return static_cast<int32_t>(stuff.size()) + 1 +
         static_cast<int32_t>(label.instance_id());
}

PanopticLabel decode_panoptic_id(int32_t id, const LabelSchema& schema) {
  if (id <= 0) return PanopticLabel::unknown();
  const auto& stuff = schema.stuff_classes();
  const int32_t k = static_cast<int32_t>(stuff.size());
  if (id <= k) {
    auto it = stuff.begin();
    std::advance(it, id - 1);
    return PanopticLabel::stuff(it->first);
  }
  const int32_t z = id - k - 1;
  if (z <= 0) return PanopticLabel::unknown();
  return PanopticLabel::instance(static_cast<InstanceId>(z));
}

namespace {

template <typename T>
void write_raw(std::ostream& os, const T& value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream& is) {
  T value;
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}

}  // namespace

void export_ply(const LabeledMesh& mesh, const LabelSchema& schema,
                const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");

  os << "ply\n"
     << "format binary_little_endian 1.0\n"
     << "comment panmap labeled mesh\n"
     << "element vertex " << mesh.vertices.size() << "\n"
     << "property float x\n"
     << "property float y\n"
     << "property float z\n"
     << "property uchar red\n"
     << "property uchar green\n"
     << "property uchar blue\n"
     << "property int panoptic_id\n"
     << "property int class_id\n"
     << "element face " << mesh.triangles.size() << "\n"
     << "property list uchar int vertex_indices\n"
     << "end_header\n";

  for (size_t i = 0; i < mesh.vertices.size(); ++i) {
    write_raw(os, mesh.vertices[i].x());
    write_raw(os, mesh.vertices[i].y());
    write_raw(os, mesh.vertices[i].z());
    write_raw(os, mesh.colors[i].r);
    write_raw(os, mesh.colors[i].g);
    write_raw(os, mesh.colors[i].b);
    write_raw(os, encode_panoptic_id(mesh.labels[i], schema));
    write_raw(os, static_cast<int32_t>(mesh.class_ids[i]));
  }
  for (const auto& tri : mesh.triangles) {
    write_raw(os, static_cast<uint8_t>(3));
    for (uint32_t idx : tri) write_raw(os, static_cast<int32_t>(idx));
  }
  if (!os) throw std::runtime_error("write failure on " + path);
}

LabeledMesh import_ply(const std::string& path, const LabelSchema& schema) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);

  std::string line;
  size_t num_vertices = 0, num_faces = 0;
  bool header_done = false;
  if (!std::getline(is, line) || line != "ply")
    throw std::runtime_error(path + ": not a PLY file");
  while (std::getline(is, line)) {
    std::istringstream ss(line);
    std::string token;
    ss >> token;
    if (token == "element") {
      std::string kind;
      size_t count;
      ss >> kind >> count;
      if (kind == "vertex") num_vertices = count;
      if (kind == "face") num_faces = count;
    } else if (token == "format") {
      std::string fmt;
      ss >> fmt;
      if (fmt != "binary_little_endian")
        throw std::runtime_error(path + ": unsupported PLY format " + fmt);
    } else if (token == "end_header") {
      header_done = true;
      break;
    }
  }
  if (!header_done) throw std::runtime_error(path + ": missing end_header");

  LabeledMesh mesh;
  mesh.vertices.resize(num_vertices);
  mesh.colors.resize(num_vertices);
  mesh.labels.resize(num_vertices);
  mesh.class_ids.resize(num_vertices);
  for (size_t i = 0; i < num_vertices; ++i) {
    mesh.vertices[i].x() = read_raw<float>(is);
    mesh.vertices[i].y() = read_raw<float>(is);
    mesh.vertices[i].z() = read_raw<float>(is);
    mesh.colors[i].r = read_raw<uint8_t>(is);
    mesh.colors[i].g = read_raw<uint8_t>(is);
    mesh.colors[i].b = read_raw<uint8_t>(is);
    mesh.labels[i] = decode_panoptic_id(read_raw<int32_t>(is), schema);
    mesh.class_ids[i] = static_cast<ClassId>(read_raw<int32_t>(is));
  }
  mesh.triangles.resize(num_faces);
  for (size_t i = 0; i < num_faces; ++i) {
    const uint8_t n = read_raw<uint8_t>(is);
    if (n != 3) throw std::runtime_error(path + ": non-triangle face");
    for (int k = 0; k < 3; ++k)
      mesh.triangles[i][k] = static_cast<uint32_t>(read_raw<int32_t>(is));
  }
  if (!is) throw std::runtime_error(path + ": truncated PLY payload");
  return mesh;
}

void write_label_sidecar(const LabeledMesh& mesh, const LabelSchema& schema,
                         const InstanceRegistry& registry,
                         const std::string& path) {
  std::set<PanopticLabel> present(mesh.labels.begin(), mesh.labels.end());

  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << "# panoptic_id kind id class_name probability\n";
  for (PanopticLabel label : present) {
    const int32_t id = encode_panoptic_id(label, schema);
    if (label.is_unknown()) {
      os << id << " unknown 0 unknown 0\n";
    } else if (label.is_stuff()) {
      os << id << " stuff " << label.stuff_class() << " "
         << schema.class_name(label.stuff_class()) << " 1\n";
    } else {
      std::string name = "unknown";
      double prob = 0.0;
      if (registry.contains(label.instance_id())) {
        const auto [cls, p] = restore_thing_class(registry, label.instance_id());
        name = schema.class_name(cls);
        prob = p;
      }
      os << id << " thing " << label.instance_id() << " " << name << " "
         << prob << "\n";
    }
  }
}

}  // namespace panmap
