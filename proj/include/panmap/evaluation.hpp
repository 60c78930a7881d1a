#pragma once

#include <Eigen/Core>
#include <map>
#include <vector>

#include "panmap/label.hpp"
#include "panmap/meshing.hpp"

namespace panmap {

struct LabeledPointSet {
  std::vector<Eigen::Vector3f> points;
  std::vector<PanopticLabel> labels;
  std::vector<ClassId> class_ids;

  size_t size() const { return points.size(); }
};

// Predicted labels transferred onto the ground-truth points.
struct TransferredLabels {
  std::vector<PanopticLabel> labels;
  std::vector<ClassId> class_ids;
};

// Each ground-truth point takes the labels of the nearest predicted vertex
// within `radius`; points with no vertex in range stay unknown. Distance
// ties resolve to the lowest vertex index.
TransferredLabels associate_vertices(const LabeledMesh& pred,
                                     const LabeledPointSet& gt, float radius);

struct PanopticQuality {
  struct ClassEntry {
    double pq = 0.0, sq = 0.0, rq = 0.0;
    int tp = 0, fp = 0, fn = 0;
    double iou_sum = 0.0;
  };
  std::map<ClassId, ClassEntry> per_class;  // classes present in ground truth
  double pq = 0.0, sq = 0.0, rq = 0.0;      // means over per_class
  bool defined = false;                     // false when ground truth is empty
};

// Vertex-level panoptic quality: segments are matched per class by IoU > 0.5;
// predicted thing segments smaller than min_vertices are dropped before
// matching; unknown ground-truth points are excluded.
PanopticQuality panoptic_quality(const TransferredLabels& pred,
                                 const LabeledPointSet& gt,
                                 const LabelSchema& schema,
                                 int min_vertices = 100);

struct SemanticIou {
  std::map<ClassId, double> per_class;  // classes present in either side
  double mean = 0.0;                    // over classes present in ground truth
  bool defined = false;
};

// Per-class intersection over union of the class labels on aligned points.
SemanticIou semantic_iou(const std::vector<ClassId>& pred,
                         const std::vector<ClassId>& gt,
                         const LabelSchema& schema);

}  // namespace panmap
