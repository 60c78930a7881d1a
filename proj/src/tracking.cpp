#include "panmap/tracking.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace panmap {

double IouTable::iou(InstanceId ref, uint16_t raw) const {
  auto ref_it = ref_areas_.find(ref);
  auto raw_it = raw_areas_.find(raw);
  if (ref_it == ref_areas_.end() || raw_it == raw_areas_.end()) return 0.0;
  size_t inter = 0;
  auto it = intersections_.find({ref, raw});
  if (it != intersections_.end()) inter = it->second;
  const size_t uni = ref_it->second + raw_it->second - inter;
  if (uni == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

size_t IouTable::raw_area(uint16_t raw) const {
  auto it = raw_areas_.find(raw);
  return it == raw_areas_.end() ? 0 : it->second;
}

std::pair<InstanceId, double> IouTable::best_reference(uint16_t raw) const {
  InstanceId best_ref = 0;
  double best = -1.0;
  for (const auto& [ref, area] : ref_areas_) {
    const double u = iou(ref, raw);
    if (u > best) {  // strict: ties keep the lowest reference ID
      best = u;
      best_ref = ref;
    }
  }
  if (best < 0.0) return {0, 0.0};
  return {best_ref, best};
}

PanopticImage render_reference_labels(const VolumetricMap& map,
                                      const CameraFrame& cam) {
  const int w = cam.depth.width(), h = cam.depth.height();
  PanopticImage out(w, h);
  const Eigen::Matrix3d rot = cam.rotation();
  const Eigen::Vector3d trans = cam.translation();

#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const float d = cam.depth.at(x, y);
      if (d <= 0.0f) continue;  // stays unknown
      const Eigen::Vector3d p_cam = cam.intrinsics.backproject(x, y, d);
      const Eigen::Vector3d p_world = rot * p_cam + trans;
      const Voxel* voxel = map.voxel_at(p_world);
      if (voxel != nullptr) out.at(x, y) = voxel->label;
    }
  }
  return out;
}

IouTable compute_iou_matrix(const PanopticImage& raw,
                            const PanopticImage& reference) {
  if (!raw.same_size(reference))
    throw std::invalid_argument("raw/reference dimension mismatch");

  IouTable table;
  std::map<InstanceId, size_t> ref_areas;
  std::map<uint16_t, size_t> raw_areas;
  std::map<std::pair<InstanceId, uint16_t>, size_t> inter;
  for (size_t i = 0; i < raw.size(); ++i) {
    const bool raw_inst = raw[i].is_instance();
    const bool ref_inst = reference[i].is_instance();
    if (raw_inst) ++raw_areas[static_cast<uint16_t>(raw[i].instance_id())];
    if (ref_inst) ++ref_areas[reference[i].instance_id()];
    if (raw_inst && ref_inst)
      ++inter[{reference[i].instance_id(),
               static_cast<uint16_t>(raw[i].instance_id())}];
  }
  for (const auto& [ref, area] : ref_areas) table.set_ref_area(ref, area);
  for (const auto& [id, area] : raw_areas) table.set_raw_area(id, area);
  for (const auto& [key, count] : inter)
    table.add_intersection(key.first, key.second, count);
  return table;
}

TrackResult track_labels(const PanopticImage& raw,
                         const PanopticImage& reference, VolumetricMap& map,
                         const TrackingConfig& cfg) {
  if (!raw.same_size(reference))
    throw std::invalid_argument("raw/reference dimension mismatch");

  const IouTable table = compute_iou_matrix(raw, reference);

  // Descending mask area, ties by ascending frame-local ID.
  std::vector<uint16_t> order;
  order.reserve(table.raw_areas().size());
  for (const auto& [id, area] : table.raw_areas()) order.push_back(id);
  std::sort(order.begin(), order.end(), [&](uint16_t a, uint16_t b) {
    const size_t area_a = table.raw_area(a), area_b = table.raw_area(b);
    if (area_a != area_b) return area_a > area_b;
    return a < b;
  });

  TrackResult result;
  std::set<InstanceId> consumed;
  for (uint16_t z : order) {
    const auto [ref, best_iou] = table.best_reference(z);
    if (ref != 0 && best_iou > cfg.iou_threshold && !consumed.count(ref)) {
      result.assignment[z] = ref;
      consumed.insert(ref);
    } else {
      result.assignment[z] = map.allocate_instance_id();
    }
  }

  result.resolved = PanopticImage(raw.width(), raw.height());
  for (size_t i = 0; i < raw.size(); ++i) {
    if (raw[i].is_stuff()) {
      result.resolved[i] = raw[i];
    } else if (raw[i].is_instance()) {
      result.resolved[i] = PanopticLabel::instance(
          result.assignment.at(static_cast<uint16_t>(raw[i].instance_id())));
    }  // otherwise unknown
  }
  return result;
}

}  // namespace panmap
