#include "panmap/frontend.hpp"

#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

#include "panmap/logging.hpp"

namespace panmap {

void SegmentationFrame::validate(const LabelSchema& schema) const {
  if (!class_map.same_size(instance_map))
    throw std::invalid_argument("class_map/instance_map dimension mismatch");

  std::set<uint16_t> detection_ids;
  for (const auto& det : detections) {
    if (det.id == 0)
      throw std::invalid_argument("detection with reserved instance ID 0");
    if (!detection_ids.insert(det.id).second)
      throw std::invalid_argument("duplicate detection ID " +
                                  std::to_string(det.id));
    if (det.confidence < 0.0f || det.confidence > 1.0f)
      throw std::invalid_argument("detection confidence outside [0, 1]");
    double sum = 0.0;
    for (const auto& [cls, p] : det.distribution) {
      if (p < 0.0f) throw std::invalid_argument("negative class probability");
      if (!schema.is_thing(cls))
        throw std::invalid_argument("distribution over non-thing class " +
                                    std::to_string(cls));
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6)
      throw std::invalid_argument("class distribution does not sum to 1");
  }

  std::set<uint16_t> present;
  for (size_t i = 0; i < instance_map.size(); ++i)
    if (instance_map[i] != 0) present.insert(instance_map[i]);
  for (uint16_t id : present)
    if (!detection_ids.count(id))
      throw std::invalid_argument("instance " + std::to_string(id) +
                                  " has no detection entry");
}

PanopticImage fuse_panoptic(const SegmentationFrame& frame,
                            const LabelSchema& schema) {
  if (!frame.class_map.same_size(frame.instance_map))
    throw std::invalid_argument("class_map/instance_map dimension mismatch");

  PanopticImage out(frame.class_map.width(), frame.class_map.height());
  size_t unknown_classes = 0;
  for (size_t i = 0; i < out.size(); ++i) {
    const uint16_t z = frame.instance_map[i];
    if (z != 0) {
      out[i] = PanopticLabel::instance(z);
      continue;
    }
    const ClassId c = frame.class_map[i];
    if (c != 0 && schema.is_stuff(c)) {
      out[i] = PanopticLabel::stuff(c);
    } else {
      if (c != 0 && !schema.is_known(c)) ++unknown_classes;
      out[i] = PanopticLabel::unknown();
    }
  }
  if (unknown_classes > 0)
    PANMAP_LOG_WARN("fuse_panoptic: %zu pixels with class IDs absent from the "
                    "schema, treated as unknown",
                    unknown_classes);
  return out;
}

}  // namespace panmap
