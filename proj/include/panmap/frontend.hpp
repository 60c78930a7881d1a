#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "panmap/image.hpp"
#include "panmap/label.hpp"

namespace panmap {

// One detector output for a frame-local instance: mask ID, foreground
// confidence, and a class distribution over the thing classes.
struct Detection {
  uint16_t id = 0;                       // frame-local, matches instance_map
  float confidence = 0.0f;               // in [0, 1]
  std::map<ClassId, float> distribution; // sums to 1 over thing classes
};

// Per-pixel semantic + instance segmentation for one frame. Instance IDs are
// frame-local; value 0 in instance_map means "no instance".
struct SegmentationFrame {
  Image<uint16_t> class_map;     // 0 = no class
  Image<uint16_t> instance_map;  // 0 = no instance
  std::vector<Detection> detections;

  // Checks structural invariants: aligned dimensions, every instance value
  // backed by exactly one detection, valid confidences and distributions.
  void validate(const LabelSchema& schema) const;
};

// Per-pixel label fusion of semantic and instance outputs: instances take
// precedence, then stuff classes, everything else is unknown. Pure function.
PanopticImage fuse_panoptic(const SegmentationFrame& frame,
                            const LabelSchema& schema);

}  // namespace panmap
