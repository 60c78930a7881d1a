#include "panmap/voxel_map.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace panmap {

VolumetricMap::VolumetricMap(const Config& config) : config_(config) {
  if (config.voxel_size <= 0.0f)
    throw std::invalid_argument("voxel_size must be positive");
  if (config.truncation <= config.voxel_size)
    throw std::invalid_argument("truncation must exceed voxel_size");
  if (config.block_side < 1)
    throw std::invalid_argument("block_side must be >= 1");
}

Eigen::Vector3<int64_t> VolumetricMap::world_to_global_voxel(
    const Eigen::Vector3d& p) const {
  const double inv = 1.0 / config_.voxel_size;
  return {static_cast<int64_t>(std::floor(p.x() * inv)),
          static_cast<int64_t>(std::floor(p.y() * inv)),
          static_cast<int64_t>(std::floor(p.z() * inv))};
}

std::pair<BlockIndex, int> VolumetricMap::global_to_block_voxel(
    const Eigen::Vector3<int64_t>& g, int block_side) {
  const int64_t side = block_side;
  auto floor_div = [side](int64_t v) {
    int64_t q = v / side;
    if (v % side != 0 && ((v < 0) != (side < 0))) --q;
    return q;
  };
  const int64_t bx = floor_div(g.x()), by = floor_div(g.y()), bz = floor_div(g.z());
  const int ix = static_cast<int>(g.x() - bx * side);
  const int iy = static_cast<int>(g.y() - by * side);
  const int iz = static_cast<int>(g.z() - bz * side);
  BlockIndex block{static_cast<int32_t>(bx), static_cast<int32_t>(by),
                   static_cast<int32_t>(bz)};
  return {block, ix + block_side * (iy + block_side * iz)};
}

std::pair<BlockIndex, int> VolumetricMap::world_to_voxel(
    const Eigen::Vector3d& p) const {
  return global_to_block_voxel(world_to_global_voxel(p), config_.block_side);
}

Eigen::Vector3d VolumetricMap::voxel_center(const BlockIndex& block,
                                            int linear) const {
  const int side = config_.block_side;
  const int x = linear % side;
  const int y = (linear / side) % side;
  const int z = linear / (side * side);
  Eigen::Vector3<int64_t> g{
      static_cast<int64_t>(block.x) * side + x,
      static_cast<int64_t>(block.y) * side + y,
      static_cast<int64_t>(block.z) * side + z};
  return voxel_center(g);
}

Eigen::Vector3d VolumetricMap::voxel_center(
    const Eigen::Vector3<int64_t>& global) const {
  const double s = config_.voxel_size;
  return {(static_cast<double>(global.x()) + 0.5) * s,
          (static_cast<double>(global.y()) + 0.5) * s,
          (static_cast<double>(global.z()) + 0.5) * s};
}

VoxelBlock& VolumetricMap::get_or_allocate_block(const BlockIndex& index) {
  auto it = blocks_.find(index);
  if (it != blocks_.end()) return *it->second;
  auto block = std::make_unique<VoxelBlock>(index, config_.block_side,
                                            config_.truncation);
  auto [inserted, ok] = blocks_.emplace(index, std::move(block));
  return *inserted->second;
}

VoxelBlock* VolumetricMap::find_block(const BlockIndex& index) {
  auto it = blocks_.find(index);
  return it == blocks_.end() ? nullptr : it->second.get();
}

const VoxelBlock* VolumetricMap::find_block(const BlockIndex& index) const {
  auto it = blocks_.find(index);
  return it == blocks_.end() ? nullptr : it->second.get();
}

const Voxel* VolumetricMap::voxel_at(const Eigen::Vector3d& p) const {
  auto [block_idx, linear] = world_to_voxel(p);
  const VoxelBlock* block = find_block(block_idx);
  return block ? &block->voxel(linear) : nullptr;
}

Voxel* VolumetricMap::voxel_at(const Eigen::Vector3d& p) {
  auto [block_idx, linear] = world_to_voxel(p);
  VoxelBlock* block = find_block(block_idx);
  return block ? &block->voxel(linear) : nullptr;
}

std::vector<BlockIndex> VolumetricMap::sorted_block_indices() const {
  std::vector<BlockIndex> indices;
  indices.reserve(blocks_.size());
  for (const auto& [index, block] : blocks_) indices.push_back(index);
  std::sort(indices.begin(), indices.end());
  return indices;
}

}  // namespace panmap
