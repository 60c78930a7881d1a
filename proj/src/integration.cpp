#include "panmap/integration.hpp"

#include <omp.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace panmap {

float compute_weight(float depth, WeightMode mode) {
  if (depth <= 0.0f)
    throw std::invalid_argument("compute_weight requires positive depth");
  switch (mode) {
    case WeightMode::kConstant: return 1.0f;
    case WeightMode::kQuadric: return 1.0f / (depth * depth);
  }
  return 1.0f;
}

double compute_projective_distance(const Eigen::Vector3d& voxel_center,
                                   const Eigen::Vector3d& surface_point,
                                   const Eigen::Vector3d& sensor_origin,
                                   double truncation) {
  const Eigen::Vector3d ray = surface_point - sensor_origin;
  const double len = ray.norm();
  if (len <= 0.0) return 0.0;
  const Eigen::Vector3d dir = ray / len;
  const double t_voxel = (voxel_center - sensor_origin).dot(dir);
  return std::clamp(len - t_voxel, -truncation, truncation);
}

void apply_voxel_update(Voxel& voxel, float dist, float weight,
                        const std::array<float, 3>& color, PanopticLabel label,
                        float truncation) {
  const float w_old = voxel.weight_d;
  const float w_new = w_old + weight;
  voxel.tsdf = std::clamp((w_old * voxel.tsdf + weight * dist) / w_new,
                          -truncation, truncation);
  for (int c = 0; c < 3; ++c)
    voxel.color[c] = std::clamp(
        (w_old * voxel.color[c] + weight * color[c]) / w_new, 0.0f, 255.0f);
  voxel.weight_d = w_new;

  if (label == voxel.label) {
    voxel.weight_l += weight;
  } else if (weight > voxel.weight_l) {
    voxel.weight_l = weight - voxel.weight_l;
    voxel.label = label;
  } else {
    voxel.weight_l -= weight;
  }
}

namespace {

struct GlobalVoxelKey {
  int64_t x, y, z;
  friend bool operator==(const GlobalVoxelKey& a, const GlobalVoxelKey& b) {
    return a.x == b.x && a.y == b.y && a.z == b.z;
  }
  friend bool operator<(const GlobalVoxelKey& a, const GlobalVoxelKey& b) {
    if (a.x != b.x) return a.x < b.x;
    if (a.y != b.y) return a.y < b.y;
    return a.z < b.z;
  }
};

struct Contribution {
  float dist;
  float weight;
  uint32_t label_code;
  uint16_t voxel;  // linear index within its block
  Rgb8 color;
};

struct RaySetup {
  Eigen::Vector3d origin;
  Eigen::Matrix3d rotation;
};

// Global voxel index -> (block, intra-block linear) with a shift fast path
// for power-of-two block sides.
struct BlockMapper {
  int side;
  int shift;
  int64_t mask;

  explicit BlockMapper(int block_side)
      : side(block_side),
        shift((block_side & (block_side - 1)) == 0
                  ? std::countr_zero(static_cast<unsigned>(block_side))
                  : -1),
        mask(block_side - 1) {}

  std::pair<BlockIndex, int> map(const Eigen::Vector3<int64_t>& g) const {
    if (shift >= 0) {
      const BlockIndex block{static_cast<int32_t>(g.x() >> shift),
                             static_cast<int32_t>(g.y() >> shift),
                             static_cast<int32_t>(g.z() >> shift)};
      const int linear =
          static_cast<int>((g.x() & mask) +
                           ((g.y() & mask) + (g.z() & mask) * side) * side);
      return {block, linear};
    }
    return VolumetricMap::global_to_block_voxel(g, side);
  }
};

// Walks the truncation band around the surface point of one pixel and hands
// every visited voxel (deduplicated) to `emit`.
template <typename Emit>
void walk_ray(const VolumetricMap& map, const RaySetup& ray,
              const PinholeIntrinsics& intr, int x, int y, float depth,
              const IntegrationConfig& cfg, Emit&& emit) {
  const Eigen::Vector3d p_cam = intr.backproject(x, y, depth);
  const Eigen::Vector3d p_world = ray.rotation * p_cam + ray.origin;
  const Eigen::Vector3d delta = p_world - ray.origin;
  const double surface_t = delta.norm();
  if (surface_t <= 0.0) return;
  const Eigen::Vector3d dir = delta / surface_t;

  const double step = 0.5 * map.voxel_size();
  const double inv_voxel = 1.0 / map.voxel_size();
  const double t_begin = std::max(surface_t - cfg.truncation, 0.0);
  const double t_end = surface_t + cfg.behind_band();

  GlobalVoxelKey previous{INT64_MIN, INT64_MIN, INT64_MIN};
  for (double t = t_begin; t <= t_end; t += step) {
    const Eigen::Vector3d point = ray.origin + t * dir;
    const GlobalVoxelKey key{
        static_cast<int64_t>(std::floor(point.x() * inv_voxel)),
        static_cast<int64_t>(std::floor(point.y() * inv_voxel)),
        static_cast<int64_t>(std::floor(point.z() * inv_voxel))};
    if (key == previous) continue;
    previous = key;
    const Eigen::Vector3d center(
        (static_cast<double>(key.x) + 0.5) * map.voxel_size(),
        (static_cast<double>(key.y) + 0.5) * map.voxel_size(),
        (static_cast<double>(key.z) + 0.5) * map.voxel_size());
    // Same quantity as compute_projective_distance with dir and surface_t
    // hoisted out of the per-voxel path.
    const double t_voxel = (center - ray.origin).dot(dir);
    const double dist = std::clamp(surface_t - t_voxel,
                                   -static_cast<double>(cfg.truncation),
                                   static_cast<double>(cfg.truncation));
    emit(key, static_cast<float>(dist));
  }
}

using BlockBuckets =
    std::unordered_map<BlockIndex, std::vector<Contribution>, BlockIndexHash>;

// Accessed through a function so every OpenMP worker constructs its own
// instance on first use.
BlockBuckets& integration_scratch() {
  static thread_local BlockBuckets buckets;
  return buckets;
}

IntegrationStats check_inputs(const VolumetricMap& map, const CameraFrame& cam,
                              const PanopticImage& resolved) {
  if (!cam.pose_is_rigid())
    throw std::invalid_argument("integrate_frame: camera pose is not rigid");
  if (!resolved.same_size(cam.depth))
    throw std::invalid_argument("integrate_frame: label/depth size mismatch");
  (void)map;
  return {};
}

std::array<float, 3> pixel_color(const CameraFrame& cam, int x, int y) {
  if (cam.color.empty()) return {0.0f, 0.0f, 0.0f};
  const Rgb8 c = cam.color.at(x, y);
  return {static_cast<float>(c.r), static_cast<float>(c.g),
          static_cast<float>(c.b)};
}

}  // namespace

IntegrationStats integrate_frame_serial(VolumetricMap& map,
                                        const CameraFrame& cam,
                                        const PanopticImage& resolved,
                                        const IntegrationConfig& cfg) {
  IntegrationStats stats = check_inputs(map, cam, resolved);
  const RaySetup ray{cam.translation(), cam.rotation()};
  const BlockMapper mapper(map.block_side());
  const size_t blocks_before = map.num_blocks();

  for (int y = 0; y < cam.depth.height(); ++y) {
    for (int x = 0; x < cam.depth.width(); ++x) {
      const float depth = cam.depth.at(x, y);
      if (depth <= 0.0f || depth > cfg.max_ray_length) continue;
      ++stats.rays;
      const float weight = compute_weight(depth, cfg.weight_mode);
      const std::array<float, 3> color = pixel_color(cam, x, y);
      const PanopticLabel label = resolved.at(x, y);
      walk_ray(map, ray, cam.intrinsics, x, y, depth, cfg,
               [&](const GlobalVoxelKey& key, float dist) {
                 auto [block_idx, linear] = mapper.map({key.x, key.y, key.z});
                 Voxel& voxel =
                     map.get_or_allocate_block(block_idx).voxel(linear);
                 apply_voxel_update(voxel, dist, weight, color, label,
                                    cfg.truncation);
                 ++stats.voxel_updates;
               });
    }
  }
  stats.blocks_allocated = map.num_blocks() - blocks_before;
  return stats;
}

IntegrationStats integrate_frame(VolumetricMap& map, const CameraFrame& cam,
                                 const PanopticImage& resolved,
                                 const IntegrationConfig& cfg) {
  IntegrationStats stats = check_inputs(map, cam, resolved);
  const RaySetup ray{cam.translation(), cam.rotation()};
  const BlockMapper mapper(map.block_side());
  const size_t blocks_before = map.num_blocks();
  const int w = cam.depth.width(), h = cam.depth.height();
  const int voxels_per_block =
      map.block_side() * map.block_side() * map.block_side();


  // Phase 1: per-pixel band walks bucketed by block, per thread. With a
  // static row schedule the per-thread buckets hold pixel-ordered runs and
  // the thread chunks cover ascending pixel ranges. Bucket storage is
  // thread-local and persists across frames; revisited blocks reuse their
  // capacity instead of cycling it through the allocator every frame.
  std::vector<BlockBuckets*> thread_buckets;
  size_t rays = 0;
#pragma omp parallel reduction(+ : rays)
  {
#pragma omp single
    thread_buckets.resize(omp_get_num_threads());
    BlockBuckets& local = integration_scratch();
    size_t held = 0;
    for (auto& [index, bucket] : local) held += bucket.capacity();
    if (held * sizeof(Contribution) > (64u << 20)) {
      local.clear();
    } else {
      for (auto& [index, bucket] : local) bucket.clear();
    }
    thread_buckets[omp_get_thread_num()] = &local;
    BlockIndex last_block{INT32_MIN, INT32_MIN, INT32_MIN};
    std::vector<Contribution>* last_bucket = nullptr;
#pragma omp for schedule(static)
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const float depth = cam.depth.at(x, y);
        if (depth <= 0.0f || depth > cfg.max_ray_length) continue;
        ++rays;
        const float weight = compute_weight(depth, cfg.weight_mode);
        const Rgb8 color = cam.color.empty() ? Rgb8{} : cam.color.at(x, y);
        const uint32_t label_code = resolved.at(x, y).code();
        walk_ray(map, ray, cam.intrinsics, x, y, depth, cfg,
                 [&](const GlobalVoxelKey& key, float dist) {
                   auto [block_idx, linear] = mapper.map({key.x, key.y, key.z});
                   if (last_bucket == nullptr || !(block_idx == last_block)) {
                     last_bucket = &local[block_idx];
                     last_block = block_idx;
                     if (last_bucket->capacity() == 0)
                       last_bucket->reserve(2048);
                   }
                   last_bucket->push_back({dist, weight, label_code,
                                           static_cast<uint16_t>(linear),
                                           color});
                 });
      }
    }
  }
  stats.rays = rays;

  // Phase 2 (serial): allocate the touched blocks and line up each block's
  // per-thread contribution runs in thread order, i.e. ascending pixel order.
  std::vector<BlockIndex> touched;
  for (const BlockBuckets* buckets : thread_buckets)
    for (const auto& [index, contribs] : *buckets)
      if (!contribs.empty()) touched.push_back(index);
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());

  std::vector<VoxelBlock*> blocks(touched.size());
  std::vector<std::vector<const std::vector<Contribution>*>> spans(touched.size());
  for (size_t b = 0; b < touched.size(); ++b) {
    blocks[b] = &map.get_or_allocate_block(touched[b]);
    for (const BlockBuckets* buckets : thread_buckets) {
      auto it = buckets->find(touched[b]);
      if (it != buckets->end() && !it->second.empty())
        spans[b].push_back(&it->second);
    }
  }

  // Phase 3: blocks are disjoint, so they update in parallel; a stable
  // counting sort by voxel preserves pixel order within each voxel, which
  // matches the serial path bit for bit.
  size_t updates = 0;
#pragma omp parallel reduction(+ : updates)
  {
    std::vector<uint32_t> starts(voxels_per_block + 1);
    std::vector<uint32_t> cursor(voxels_per_block);
    std::vector<const Contribution*> order;
#pragma omp for schedule(dynamic, 4)
    for (size_t b = 0; b < touched.size(); ++b) {
      std::fill(starts.begin(), starts.end(), 0u);
      size_t total = 0;
      for (const auto* span : spans[b]) {
        total += span->size();
        for (const Contribution& c : *span) ++starts[c.voxel + 1];
      }
      for (int v = 0; v < voxels_per_block; ++v) starts[v + 1] += starts[v];
      std::copy(starts.begin(), starts.end() - 1, cursor.begin());
      order.resize(total);
      for (const auto* span : spans[b])
        for (const Contribution& c : *span) order[cursor[c.voxel]++] = &c;

      VoxelBlock& block = *blocks[b];
      for (const Contribution* c : order) {
        const std::array<float, 3> color = {static_cast<float>(c->color.r),
                                            static_cast<float>(c->color.g),
                                            static_cast<float>(c->color.b)};
        apply_voxel_update(block.voxel(c->voxel), c->dist, c->weight, color,
                           PanopticLabel::from_code(c->label_code),
                           cfg.truncation);
      }
      updates += total;
    }
  }
  stats.voxel_updates = updates;
  stats.blocks_allocated = map.num_blocks() - blocks_before;
  return stats;
}

void InstanceRegistry::accumulate(InstanceId id, float confidence,
                                  const std::map<ClassId, float>& distribution) {
  Entry& e = entries_[id];
  for (const auto& [cls, p] : distribution)
    e.numerator[cls] += static_cast<double>(confidence) * p;
  e.denominator += confidence;
}

const InstanceRegistry::Entry& InstanceRegistry::entry(InstanceId id) const {
  auto it = entries_.find(id);
  if (it == entries_.end())
    throw std::out_of_range("instance " + std::to_string(id) +
                            " not in registry");
  return it->second;
}

std::map<ClassId, double> InstanceRegistry::distribution(InstanceId id) const {
  const Entry& e = entry(id);
  std::map<ClassId, double> out;
  if (e.denominator <= 0.0) return out;
  for (const auto& [cls, num] : e.numerator) out[cls] = num / e.denominator;
  return out;
}

void integrate_thing_probabilities(InstanceRegistry& registry,
                                   const std::map<uint16_t, InstanceId>& assignment,
                                   const SegmentationFrame& frame) {
  std::map<uint16_t, const Detection*> by_id;
  for (const auto& det : frame.detections) by_id[det.id] = &det;
  for (const auto& [local, mapped] : assignment) {
    auto it = by_id.find(local);
    if (it == by_id.end())
      throw std::invalid_argument("assigned instance " + std::to_string(local) +
                                  " missing from detections");
    registry.accumulate(mapped, it->second->confidence,
                        it->second->distribution);
  }
}

std::pair<ClassId, double> restore_thing_class(const InstanceRegistry& registry,
                                               InstanceId id) {
  const auto dist = registry.distribution(id);
  if (dist.empty())
    throw std::out_of_range("instance " + std::to_string(id) +
                            " has no accumulated distribution");
  ClassId best_class = 0;
  double best_p = -1.0;
  for (const auto& [cls, p] : dist) {  // ascending class ID; ties keep lowest
    if (p > best_p) {
      best_p = p;
      best_class = cls;
    }
  }
  return {best_class, best_p};
}

}  // namespace panmap
