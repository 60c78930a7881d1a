#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <memory>
#include <unordered_map>
#include <vector>

#include "panmap/label.hpp"

namespace panmap {

struct BlockIndex {
  int32_t x = 0, y = 0, z = 0;

  friend bool operator==(const BlockIndex& a, const BlockIndex& b) {
    return a.x == b.x && a.y == b.y && a.z == b.z;
  }
  friend bool operator!=(const BlockIndex& a, const BlockIndex& b) {
    return !(a == b);
  }
  friend bool operator<(const BlockIndex& a, const BlockIndex& b) {
    if (a.x != b.x) return a.x < b.x;
    if (a.y != b.y) return a.y < b.y;
    return a.z < b.z;
  }
};

struct BlockIndexHash {
  size_t operator()(const BlockIndex& b) const {
    return static_cast<size_t>(b.x) * 73856093u ^
           static_cast<size_t>(b.y) * 19349669u ^
           static_cast<size_t>(b.z) * 83492791u;
  }
};

struct Voxel {
  float tsdf = 0.0f;       // signed distance, |tsdf| <= truncation
  float weight_d = 0.0f;   // distance weight; 0 means unobserved
  std::array<float, 3> color = {0.0f, 0.0f, 0.0f};  // RGB in [0, 255]
  PanopticLabel label;     // unknown until first integration
  float weight_l = 0.0f;   // label weight; weight_l <= weight_d
};

// Dense cube of side^3 voxels, linearized x-fastest:
// linear = x + side * (y + side * z).
class VoxelBlock {
 public:
  VoxelBlock(const BlockIndex& index, int side, float default_tsdf)
      : index_(index), side_(side),
        voxels_(static_cast<size_t>(side) * side * side) {
    for (auto& v : voxels_) v.tsdf = default_tsdf;
  }

  const BlockIndex& index() const { return index_; }
  int side() const { return side_; }
  size_t num_voxels() const { return voxels_.size(); }

  Voxel& voxel(int linear) { return voxels_[linear]; }
  const Voxel& voxel(int linear) const { return voxels_[linear]; }
  Voxel& voxel(int x, int y, int z) {
    return voxels_[x + side_ * (y + side_ * z)];
  }
  const Voxel& voxel(int x, int y, int z) const {
    return voxels_[x + side_ * (y + side_ * z)];
  }

 private:
  BlockIndex index_;
  int side_;
  std::vector<Voxel> voxels_;
};

// Spatially hashed TSDF map: voxel blocks keyed by their block index, plus
// the map-wide instance ID allocator.
//
// Concurrency: single writer. Read-only access from multiple threads is safe
// between mutations; no internal locking.
class VolumetricMap {
 public:
  struct Config {
    float voxel_size = 0.024f;        // meters
    float truncation = 4 * 0.024f;    // meters
    int block_side = 16;              // voxels per block side
  };

  explicit VolumetricMap(const Config& config);

  float voxel_size() const { return config_.voxel_size; }
  float truncation() const { return config_.truncation; }
  int block_side() const { return config_.block_side; }
  float block_extent() const { return config_.voxel_size * config_.block_side; }

  // Global voxel index: floor(p / voxel_size) per axis. Block and intra-block
  // indices are derived from it so the pair is always consistent.
  Eigen::Vector3<int64_t> world_to_global_voxel(const Eigen::Vector3d& p) const;
  std::pair<BlockIndex, int> world_to_voxel(const Eigen::Vector3d& p) const;
  static std::pair<BlockIndex, int> global_to_block_voxel(
      const Eigen::Vector3<int64_t>& g, int block_side);

  // Center of the addressed voxel.
  Eigen::Vector3d voxel_center(const BlockIndex& block, int linear) const;
  Eigen::Vector3d voxel_center(const Eigen::Vector3<int64_t>& global) const;

  VoxelBlock& get_or_allocate_block(const BlockIndex& index);
  VoxelBlock* find_block(const BlockIndex& index);
  const VoxelBlock* find_block(const BlockIndex& index) const;

  // Voxel containing p, or nullptr if its block was never allocated.
  const Voxel* voxel_at(const Eigen::Vector3d& p) const;
  Voxel* voxel_at(const Eigen::Vector3d& p);

  InstanceId allocate_instance_id() { return next_instance_id_++; }
  InstanceId peek_next_instance_id() const { return next_instance_id_; }

  size_t num_blocks() const { return blocks_.size(); }
  // Allocated block indices in ascending (x, y, z) order.
  std::vector<BlockIndex> sorted_block_indices() const;

  const std::unordered_map<BlockIndex, std::unique_ptr<VoxelBlock>,
                           BlockIndexHash>& blocks() const {
    return blocks_;
  }

 private:
  Config config_;
  std::unordered_map<BlockIndex, std::unique_ptr<VoxelBlock>, BlockIndexHash>
      blocks_;
  InstanceId next_instance_id_ = 1;
};

}  // namespace panmap
