#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "panmap/camera.hpp"
#include "panmap/evaluation.hpp"
#include "panmap/frontend.hpp"
#include "panmap/label.hpp"

namespace panmap {

// Noise applied on top of the analytic render when deriving the
// segmentation inputs.
struct NoiseModel {
  // Depth noise sigma(z) = sigma_base + sigma_quadratic * z^2, meters.
  float depth_sigma_base = 0.0f;
  float depth_sigma_quadratic = 0.0f;
  // Probability that a labeled pixel is reassigned to another label present
  // in the frame.
  float label_flip_rate = 0.0f;
  // Morphology on instance masks, pixels: positive dilates, negative erodes.
  int mask_morph_px = 0;
  // Detection confidence drawn uniformly from [conf_min, conf_max].
  float conf_min = 1.0f;
  float conf_max = 1.0f;
  // Probability mass spread uniformly over the other thing classes.
  float class_smoothing = 0.0f;
  // Shuffle frame-local instance IDs per frame.
  bool permute_instance_ids = false;
};

// Axis-aligned rectangle carrying a stuff class: the plane x[axis] = offset
// restricted to [lo, hi] in the two remaining axes (in axis order).
struct StuffSurface {
  int axis = 2;
  float offset = 0.0f;
  Eigen::Vector2f lo{0.0f, 0.0f};
  Eigen::Vector2f hi{1.0f, 1.0f};
  ClassId cls = 0;
};

struct ThingPrimitive {
  enum class Shape { kBox, kSphere };
  Shape shape = Shape::kSphere;
  ClassId cls = 0;
  Eigen::Vector3f center{0.0f, 0.0f, 0.0f};
  Eigen::Vector3f half_extent{0.1f, 0.1f, 0.1f};  // boxes
  float radius = 0.1f;                            // spheres
};

struct SceneSpec {
  LabelSchema schema;
  Eigen::Vector3f room_min{0.0f, 0.0f, 0.0f};
  Eigen::Vector3f room_max{4.0f, 4.0f, 3.0f};
  std::vector<StuffSurface> surfaces;
  std::vector<ThingPrimitive> things;  // thing k gets GT instance ID k+1
  std::vector<Eigen::Matrix4d> trajectory;  // camera -> world poses
  PinholeIntrinsics intrinsics;
  int width = 160, height = 120;
  NoiseModel noise;

  void validate() const;
};

struct RenderedFrame {
  CameraFrame camera;
  SegmentationFrame segmentation;
  PanopticImage ground_truth;  // GT instance IDs, noise-free
  // Frame-local instance ID -> scene thing index, for oracles.
  std::map<uint16_t, int> local_to_thing;
};

// Analytic ray casting of the scene from one trajectory pose, then the noise
// model. Deterministic for a given (seed, frame_index).
RenderedFrame render_frame(const SceneSpec& spec, size_t frame_index,
                           uint64_t seed);

// Uniform surface sampling of all primitives at `density` points per square
// meter, labeled with ground truth.
LabeledPointSet ground_truth_points(const SceneSpec& spec, double density,
                                    uint64_t seed);

// Scene specs load from / save to a JSON file; the schema is documented in
// the README.
SceneSpec load_scene(const std::string& path);
void save_scene(const SceneSpec& spec, const std::string& path);

// Deterministic per-frame RNG stream seeds.
uint64_t mix_seed(uint64_t seed, uint64_t stream);

// Canonical flat color for a label, shared by the renderer and tests.
Rgb8 label_color(PanopticLabel label);

// Convenience: camera orbit around a point, poses looking at the target.
std::vector<Eigen::Matrix4d> orbit_trajectory(const Eigen::Vector3f& target,
                                              float radius, float height,
                                              int frames, float revolutions = 1.0f);

}  // namespace panmap
