#include "panmap/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace panmap {

namespace {

struct CellKey {
  int64_t x, y, z;
  friend bool operator==(const CellKey& a, const CellKey& b) {
    return a.x == b.x && a.y == b.y && a.z == b.z;
  }
};
struct CellKeyHash {
  size_t operator()(const CellKey& k) const {
    return static_cast<size_t>(static_cast<uint64_t>(k.x) * 73856093ull ^
                               static_cast<uint64_t>(k.y) * 19349669ull ^
                               static_cast<uint64_t>(k.z) * 83492791ull);
  }
};

}  // namespace

TransferredLabels associate_vertices(const LabeledMesh& pred,
                                     const LabeledPointSet& gt, float radius) {
  if (radius <= 0.0f) throw std::invalid_argument("radius must be positive");
  if (gt.labels.size() != gt.points.size() ||
      gt.class_ids.size() != gt.points.size())
    throw std::invalid_argument("ground-truth field sizes mismatch");

  TransferredLabels out;
  out.labels.assign(gt.size(), PanopticLabel::unknown());
  out.class_ids.assign(gt.size(), 0);
  if (pred.vertices.empty()) return out;

  // Hash grid over predicted vertices with cell size = radius, so the
  // nearest in-range vertex lies in the 27 surrounding cells.
  const double cell = radius;
  std::unordered_map<CellKey, std::vector<uint32_t>, CellKeyHash> grid;
  grid.reserve(pred.vertices.size());
  auto key_of = [cell](const Eigen::Vector3f& p) {
    return CellKey{static_cast<int64_t>(std::floor(p.x() / cell)),
                   static_cast<int64_t>(std::floor(p.y() / cell)),
                   static_cast<int64_t>(std::floor(p.z() / cell))};
  };
  for (uint32_t i = 0; i < pred.vertices.size(); ++i)
    grid[key_of(pred.vertices[i])].push_back(i);

  const double radius_sq = static_cast<double>(radius) * radius;
#pragma omp parallel for schedule(static)
  for (size_t i = 0; i < gt.size(); ++i) {
    const Eigen::Vector3f p = gt.points[i];
    const CellKey center = key_of(p);
    double best_d2 = std::numeric_limits<double>::infinity();
    int64_t best_vertex = -1;
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dz = -1; dz <= 1; ++dz) {
          auto it = grid.find({center.x + dx, center.y + dy, center.z + dz});
          if (it == grid.end()) continue;
          for (uint32_t v : it->second) {
            const double d2 = (pred.vertices[v] - p).squaredNorm();
            if (d2 > radius_sq) continue;
            if (d2 < best_d2 ||
                (d2 == best_d2 && static_cast<int64_t>(v) < best_vertex)) {
              best_d2 = d2;
              best_vertex = v;
            }
          }
        }
      }
    }
    if (best_vertex >= 0) {
      out.labels[i] = pred.labels[best_vertex];
      out.class_ids[i] = pred.class_ids[best_vertex];
    }
  }
  return out;
}

PanopticQuality panoptic_quality(const TransferredLabels& pred,
                                 const LabeledPointSet& gt,
                                 const LabelSchema& schema, int min_vertices) {
  if (pred.labels.size() != gt.size())
    throw std::invalid_argument("prediction/ground-truth size mismatch");

  PanopticQuality result;
  if (gt.size() == 0) return result;  // undefined

  // Segment identity is the panoptic label itself; a thing segment's class
  // comes from its (restored) class ID. Unknown GT points are excluded.
  std::map<PanopticLabel, ClassId> gt_segment_class, pred_segment_class;
  std::map<PanopticLabel, std::vector<uint32_t>> gt_segments, pred_segments;

  bool any_known_gt = false;
  for (uint32_t i = 0; i < gt.size(); ++i) {
    if (gt.labels[i].is_unknown()) continue;
    any_known_gt = true;
    gt_segments[gt.labels[i]].push_back(i);
    gt_segment_class[gt.labels[i]] =
        gt.labels[i].is_stuff() ? gt.labels[i].stuff_class() : gt.class_ids[i];
    if (!pred.labels[i].is_unknown()) {
      pred_segments[pred.labels[i]].push_back(i);
      pred_segment_class[pred.labels[i]] = pred.labels[i].is_stuff()
                                               ? pred.labels[i].stuff_class()
                                               : pred.class_ids[i];
    }
  }
  if (!any_known_gt) return result;  // undefined

  // Drop small predicted thing segments before matching.
  for (auto it = pred_segments.begin(); it != pred_segments.end();) {
    if (it->first.is_instance() &&
        it->second.size() < static_cast<size_t>(min_vertices)) {
      pred_segment_class.erase(it->first);
      it = pred_segments.erase(it);
    } else {
      ++it;
    }
  }

  // Classes present in ground truth define the aggregation set.
  std::set<ClassId> gt_classes;
  for (const auto& [seg, cls] : gt_segment_class) gt_classes.insert(cls);

  std::map<ClassId, PanopticQuality::ClassEntry> table;
  for (ClassId c : gt_classes) table[c];

  // Match per class by IoU > 0.5 (such matches are unique by construction).
  std::set<PanopticLabel> matched_pred;
  for (const auto& [gt_label, gt_points] : gt_segments) {
    const ClassId cls = gt_segment_class[gt_label];
    double best_iou = 0.0;
    PanopticLabel best_pred;
    for (const auto& [pred_label, pred_points] : pred_segments) {
      if (pred_segment_class[pred_label] != cls) continue;
      size_t inter = 0;
      // Both index lists are ascending.
      auto a = gt_points.begin();
      auto b = pred_points.begin();
      while (a != gt_points.end() && b != pred_points.end()) {
        if (*a < *b) ++a;
        else if (*b < *a) ++b;
        else { ++inter; ++a; ++b; }
      }
      const size_t uni = gt_points.size() + pred_points.size() - inter;
      const double iou = uni == 0 ? 0.0 : static_cast<double>(inter) / uni;
      if (iou > best_iou) {
        best_iou = iou;
        best_pred = pred_label;
      }
    }
    auto& entry = table[cls];
    if (best_iou > 0.5) {
      ++entry.tp;
      entry.iou_sum += best_iou;
      matched_pred.insert(best_pred);
    } else {
      ++entry.fn;
    }
  }
  for (const auto& [pred_label, pred_points] : pred_segments) {
    if (matched_pred.count(pred_label)) continue;
    const ClassId cls = pred_segment_class[pred_label];
    if (table.count(cls)) ++table[cls].fp;  // classes absent from GT ignored
  }

  double pq_sum = 0.0, sq_sum = 0.0, rq_sum = 0.0;
  for (auto& [cls, entry] : table) {
    const double denom = entry.tp + 0.5 * entry.fp + 0.5 * entry.fn;
    entry.pq = denom > 0.0 ? entry.iou_sum / denom : 0.0;
    entry.sq = entry.tp > 0 ? entry.iou_sum / entry.tp : 0.0;
    entry.rq = denom > 0.0 ? entry.tp / denom : 0.0;
    pq_sum += entry.pq;
    sq_sum += entry.sq;
    rq_sum += entry.rq;
  }
  result.per_class = std::move(table);
  const double n = static_cast<double>(result.per_class.size());
  result.pq = pq_sum / n;
  result.sq = sq_sum / n;
  result.rq = rq_sum / n;
  result.defined = true;
  return result;
}

SemanticIou semantic_iou(const std::vector<ClassId>& pred,
                         const std::vector<ClassId>& gt,
                         const LabelSchema& schema) {
  if (pred.size() != gt.size())
    throw std::invalid_argument("prediction/ground-truth size mismatch");
  (void)schema;

  std::map<ClassId, size_t> inter, pred_count, gt_count;
  for (size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] != 0) ++pred_count[pred[i]];
    if (gt[i] != 0) ++gt_count[gt[i]];
    if (pred[i] != 0 && pred[i] == gt[i]) ++inter[pred[i]];
  }

  SemanticIou result;
  std::set<ClassId> classes;
  for (const auto& [c, n] : pred_count) classes.insert(c);
  for (const auto& [c, n] : gt_count) classes.insert(c);

  double sum = 0.0;
  size_t gt_classes = 0;
  for (ClassId c : classes) {
    const size_t i = inter.count(c) ? inter[c] : 0;
    const size_t p = pred_count.count(c) ? pred_count[c] : 0;
    const size_t g = gt_count.count(c) ? gt_count[c] : 0;
    const size_t uni = p + g - i;
    const double iou = uni == 0 ? 0.0 : static_cast<double>(i) / uni;
    result.per_class[c] = iou;
    if (g > 0) {
      sum += iou;
      ++gt_classes;
    }
  }
  if (gt_classes > 0) {
    result.mean = sum / gt_classes;
    result.defined = true;
  }
  return result;
}

}  // namespace panmap
