#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "panmap/camera.hpp"
#include "panmap/evaluation.hpp"
#include "panmap/frontend.hpp"
#include "panmap/label.hpp"
#include "panmap/synthetic.hpp"

namespace panmap {

// Reads a {"stuff": {...}, "things": {...}} schema JSON file.
LabelSchema load_schema(const std::string& path);

// On-disk replay dataset layout, all lossless and inspectable:
//   intrinsics.txt               "fx fy cx cy"
//   poses.txt                    4x4 row-major per frame, 4 lines of 4
//   schema.json                  {"stuff": {...}, "things": {...}}
//   frames/NNNNNN.depth.png      16-bit grayscale, millimeters
//   frames/NNNNNN.color.png      8-bit RGB
//   frames/NNNNNN.class.png      16-bit class IDs, 0 = none
//   frames/NNNNNN.instance.png   16-bit frame-local instance IDs, 0 = none
//   frames/NNNNNN.detections.json
//   gt_points.ply                optional labeled ground-truth points
class DatasetWriter {
 public:
  DatasetWriter(const std::string& dir, const LabelSchema& schema,
                const PinholeIntrinsics& intrinsics);

  void write_frame(size_t index, const CameraFrame& cam,
                   const SegmentationFrame& seg);
  void write_ground_truth(const LabeledPointSet& points);
  // Writes poses.txt; call once after the last frame.
  void finalize();

 private:
  std::string dir_;
  LabelSchema schema_;
  std::vector<Eigen::Matrix4d> poses_;
};

class Dataset {
 public:
  explicit Dataset(const std::string& dir);

  size_t num_frames() const { return poses_.size(); }
  const LabelSchema& schema() const { return schema_; }
  const PinholeIntrinsics& intrinsics() const { return intrinsics_; }

  // Decodes and validates one frame; throws std::runtime_error with the
  // frame index on any decode failure or invariant violation.
  std::pair<CameraFrame, SegmentationFrame> load_frame(size_t index) const;

  std::optional<LabeledPointSet> ground_truth() const;

 private:
  std::string frame_stem(size_t index) const;

  std::string dir_;
  LabelSchema schema_;
  PinholeIntrinsics intrinsics_;
  std::vector<Eigen::Matrix4d> poses_;
};

// Renders every trajectory frame of the scene into `dir`, including the
// ground-truth point set and a copy of the scene itself.
void generate_dataset(const SceneSpec& spec, uint64_t seed,
                      const std::string& dir, double gt_density = 2000.0);

}  // namespace panmap
