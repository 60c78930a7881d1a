#pragma once

#include <map>
#include <optional>
#include <string>

#include "panmap/crf.hpp"
#include "panmap/dataset.hpp"
#include "panmap/evaluation.hpp"
#include "panmap/integration.hpp"
#include "panmap/tracking.hpp"
#include "panmap/voxel_map.hpp"

namespace panmap {

struct ScheduleConfig {
  int regularize_every = 20;  // frames; 0 disables periodic regularization
  int mesh_every = 0;         // frames; 0 extracts only at the end
};

struct RunConfig {
  std::string dataset_dir;
  std::string output_dir;
  uint64_t seed = 0;
  int max_frames = -1;  // -1 = all

  VolumetricMap::Config map;
  IntegrationConfig integration;
  TrackingConfig tracking;
  CrfConfig crf;
  bool crf_enabled = true;
  ScheduleConfig schedule;

  float association_radius = 0.0f;  // 0 = 2 * voxel_size
  int min_vertices = 100;

  float effective_association_radius() const {
    return association_radius > 0.0f ? association_radius
                                     : 2.0f * map.voxel_size;
  }
};

// Parses and validates a JSON run configuration; unknown keys are rejected.
RunConfig load_run_config(const std::string& path);

struct StageTiming {
  double seconds = 0.0;
  size_t count = 0;
};

struct RunReport {
  size_t frames_processed = 0;
  size_t frames_skipped = 0;
  size_t blocks = 0;
  size_t mesh_vertices = 0;
  size_t mesh_triangles = 0;
  size_t regularize_runs = 0;
  size_t labels_changed = 0;
  std::map<std::string, StageTiming> stages;
  std::optional<PanopticQuality> panoptic;
  std::optional<SemanticIou> iou;
  std::string metrics_json;  // byte-deterministic for a fixed config and seed
};

// Full replay: per frame label fusion, reference rendering, tracking,
// integration and probability integration; scheduled regularization and
// meshing; final mesh + sidecar export, metrics JSON (when the dataset
// carries ground truth) and a per-stage timing CSV under output_dir.
RunReport run_replay(const RunConfig& config);

}  // namespace panmap
