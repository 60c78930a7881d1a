#pragma once

#include <map>
#include <utility>
#include <vector>

#include "panmap/camera.hpp"
#include "panmap/image.hpp"
#include "panmap/voxel_map.hpp"

namespace panmap {

struct TrackingConfig {
  float iou_threshold = 0.25f;  // association fires on IoU strictly above this
};

// Sparse IoU table between reference (map) instances and raw (frame-local)
// instances, plus mask areas of both sides.
class IouTable {
 public:
  void add_intersection(InstanceId ref, uint16_t raw, size_t count) {
    intersections_[{ref, raw}] += count;
  }
  void set_ref_area(InstanceId ref, size_t area) { ref_areas_[ref] = area; }
  void set_raw_area(uint16_t raw, size_t area) { raw_areas_[raw] = area; }

  double iou(InstanceId ref, uint16_t raw) const;
  size_t raw_area(uint16_t raw) const;

  const std::map<InstanceId, size_t>& ref_areas() const { return ref_areas_; }
  const std::map<uint16_t, size_t>& raw_areas() const { return raw_areas_; }

  // Best reference match for a raw instance: (ref ID, IoU). Ties in IoU are
  // broken by ascending reference ID. Returns {0, 0.0} when the table holds
  // no reference instances.
  std::pair<InstanceId, double> best_reference(uint16_t raw) const;

 private:
  std::map<std::pair<InstanceId, uint16_t>, size_t> intersections_;
  std::map<InstanceId, size_t> ref_areas_;
  std::map<uint16_t, size_t> raw_areas_;
};

struct TrackResult {
  PanopticImage resolved;
  std::map<uint16_t, InstanceId> assignment;  // frame-local -> map instance
};

// Projects every valid-depth pixel into the map and reads back the stored
// panoptic label; invalid depth and unallocated space give unknown.
PanopticImage render_reference_labels(const VolumetricMap& map,
                                      const CameraFrame& cam);

// IoU between every (reference instance, raw instance) mask pair.
IouTable compute_iou_matrix(const PanopticImage& raw,
                            const PanopticImage& reference);

// Greedy exclusive association in descending raw mask area (ties by
// ascending frame-local ID). A raw instance takes its best reference match
// when that IoU strictly exceeds the threshold and the reference is still
// unconsumed; otherwise it receives a fresh map instance ID.
TrackResult track_labels(const PanopticImage& raw,
                         const PanopticImage& reference, VolumetricMap& map,
                         const TrackingConfig& cfg);

}  // namespace panmap
