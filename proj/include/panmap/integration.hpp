#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <utility>

#include "panmap/camera.hpp"
#include "panmap/frontend.hpp"
#include "panmap/image.hpp"
#include "panmap/voxel_map.hpp"

namespace panmap {

enum class WeightMode { kConstant, kQuadric };

struct IntegrationConfig {
  float truncation = 4 * 0.024f;   // meters, front band; kept equal to the map's
  float behind_truncation = 0.0f;  // meters behind the surface; 0 = symmetric
  float max_ray_length = 5.0f;     // meters
  WeightMode weight_mode = WeightMode::kQuadric;

  float behind_band() const {
    return behind_truncation > 0.0f ? behind_truncation : truncation;
  }
};

struct IntegrationStats {
  size_t rays = 0;            // valid-depth rays cast
  size_t voxel_updates = 0;   // voxel update operations applied
  size_t blocks_allocated = 0;
};

// Observation weight for a depth measurement: 1 (constant) or 1/z^2 (quadric).
float compute_weight(float depth, WeightMode mode);

// Signed distance from a voxel center to the surface point, measured along
// the ray from the sensor origin; positive on the sensor side, clamped to
// [-truncation, truncation].
double compute_projective_distance(const Eigen::Vector3d& voxel_center,
                                   const Eigen::Vector3d& surface_point,
                                   const Eigen::Vector3d& sensor_origin,
                                   double truncation);

// One voxel update step: TSDF/color weighted averaging plus the label
// increment/decrement/replace rule. Shared by both integrator paths and by
// the test oracles.
void apply_voxel_update(Voxel& voxel, float dist, float weight,
                        const std::array<float, 3>& color, PanopticLabel label,
                        float truncation);

// Integrates one frame into the map by casting a ray per valid pixel and
// updating every voxel whose center lies in the truncation band around the
// surface point. The two entry points are bit-identical: the serial one
// applies updates immediately in pixel order; the parallel one builds the
// per-voxel update lists concurrently, orders them by pixel, and applies
// voxel groups across threads.
IntegrationStats integrate_frame(VolumetricMap& map, const CameraFrame& cam,
                                 const PanopticImage& resolved,
                                 const IntegrationConfig& cfg);
IntegrationStats integrate_frame_serial(VolumetricMap& map,
                                        const CameraFrame& cam,
                                        const PanopticImage& resolved,
                                        const IntegrationConfig& cfg);

// Per map-instance accumulator of detection-confidence-weighted class
// distributions.
class InstanceRegistry {
 public:
  struct Entry {
    std::map<ClassId, double> numerator;
    double denominator = 0.0;
  };

  void accumulate(InstanceId id, float confidence,
                  const std::map<ClassId, float>& distribution);
  bool contains(InstanceId id) const { return entries_.count(id) != 0; }
  const Entry& entry(InstanceId id) const;

  // Normalized class distribution for an instance.
  std::map<ClassId, double> distribution(InstanceId id) const;

  const std::map<InstanceId, Entry>& entries() const { return entries_; }

 private:
  std::map<InstanceId, Entry> entries_;
};

// Folds the frame's detections into the registry through the frame-local ->
// map instance assignment.
void integrate_thing_probabilities(InstanceRegistry& registry,
                                   const std::map<uint16_t, InstanceId>& assignment,
                                   const SegmentationFrame& frame);

// Most probable thing class of a map instance with its probability; ties go
// to the lowest class ID. Throws std::out_of_range for unseen instances.
std::pair<ClassId, double> restore_thing_class(const InstanceRegistry& registry,
                                               InstanceId id);

}  // namespace panmap
