#include "panmap/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json_util.hpp"
#include "panmap/frontend.hpp"
#include "panmap/logging.hpp"
#include "panmap/meshing.hpp"

namespace fs = std::filesystem;

namespace panmap {

namespace {

class StageClock {
 public:
  explicit StageClock(StageTiming& timing) : timing_(timing) {
    start_ = std::chrono::steady_clock::now();
  }
  ~StageClock() {
    timing_.seconds += std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - start_)
                           .count();
    ++timing_.count;
  }

 private:
  StageTiming& timing_;
  std::chrono::steady_clock::time_point start_;
};

nlohmann::json pq_to_json(const PanopticQuality& pq) {
  nlohmann::json per_class = nlohmann::json::object();
  for (const auto& [cls, entry] : pq.per_class) {
    per_class[std::to_string(cls)] = {{"pq", entry.pq}, {"sq", entry.sq},
                                      {"rq", entry.rq}, {"tp", entry.tp},
                                      {"fp", entry.fp}, {"fn", entry.fn}};
  }
  return {{"pq", pq.pq}, {"sq", pq.sq}, {"rq", pq.rq},
          {"per_class", per_class}};
}

nlohmann::json iou_to_json(const SemanticIou& iou) {
  nlohmann::json per_class = nlohmann::json::object();
  for (const auto& [cls, value] : iou.per_class)
    per_class[std::to_string(cls)] = value;
  return {{"mean", iou.mean}, {"per_class", per_class}};
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config " + path);
  nlohmann::json j;
  is >> j;

  require_known_keys(j,
                     {"dataset", "output", "seed", "max_frames", "map",
                      "integration", "tracking", "crf", "schedule",
                      "evaluation"},
                     "config");
  RunConfig cfg;
  cfg.dataset_dir = j.at("dataset").get<std::string>();
  cfg.output_dir = j.at("output").get<std::string>();
  cfg.seed = json_get<uint64_t>(j, "seed", 0);
  cfg.max_frames = json_get(j, "max_frames", -1);

  if (j.contains("map")) {
    const auto& jm = j.at("map");
    require_known_keys(jm, {"voxel_size", "truncation", "block_side"},
                       "config.map");
    cfg.map.voxel_size = json_get(jm, "voxel_size", 0.024f);
    cfg.map.truncation = json_get(jm, "truncation", 4.0f * cfg.map.voxel_size);
    cfg.map.block_side = json_get(jm, "block_side", 16);
  }
  cfg.integration.truncation = cfg.map.truncation;

  if (j.contains("integration")) {
    const auto& ji = j.at("integration");
    require_known_keys(ji,
                       {"max_ray_length", "weight_mode", "behind_truncation"},
                       "config.integration");
    cfg.integration.max_ray_length = json_get(ji, "max_ray_length", 5.0f);
    cfg.integration.behind_truncation = json_get(ji, "behind_truncation", 0.0f);
    const std::string mode = json_get<std::string>(ji, "weight_mode", "quadric");
    if (mode == "constant") cfg.integration.weight_mode = WeightMode::kConstant;
    else if (mode == "quadric") cfg.integration.weight_mode = WeightMode::kQuadric;
    else throw std::invalid_argument("unknown weight_mode " + mode);
  }

  if (j.contains("tracking")) {
    const auto& jt = j.at("tracking");
    require_known_keys(jt, {"iou_threshold"}, "config.tracking");
    cfg.tracking.iou_threshold = json_get(jt, "iou_threshold", 0.25f);
    if (cfg.tracking.iou_threshold < 0.0f || cfg.tracking.iou_threshold > 1.0f)
      throw std::invalid_argument("iou_threshold outside [0, 1]");
  }

  if (j.contains("crf")) {
    const auto& jc = j.at("crf");
    require_known_keys(jc,
                       {"enabled", "w1", "w2", "theta_alpha", "theta_beta",
                        "iterations", "max_blocks_per_submap"},
                       "config.crf");
    cfg.crf_enabled = json_get(jc, "enabled", true);
    cfg.crf.w1 = json_get(jc, "w1", 10.0f);
    cfg.crf.w2 = json_get(jc, "w2", 15.0f);
    cfg.crf.theta_alpha = json_get(jc, "theta_alpha", 0.05f);
    cfg.crf.theta_beta = json_get(jc, "theta_beta", 20.0f);
    cfg.crf.iterations = json_get(jc, "iterations", 5);
    cfg.crf.max_blocks_per_submap = json_get(jc, "max_blocks_per_submap", 25);
  }

  if (j.contains("schedule")) {
    const auto& js = j.at("schedule");
    require_known_keys(js, {"regularize_every", "mesh_every"},
                       "config.schedule");
    cfg.schedule.regularize_every = json_get(js, "regularize_every", 20);
    cfg.schedule.mesh_every = json_get(js, "mesh_every", 0);
  }

  if (j.contains("evaluation")) {
    const auto& je = j.at("evaluation");
    require_known_keys(je, {"association_radius", "min_vertices"},
                       "config.evaluation");
    cfg.association_radius = json_get(je, "association_radius", 0.0f);
    cfg.min_vertices = json_get(je, "min_vertices", 100);
  }
  return cfg;
}

RunReport run_replay(const RunConfig& config) {
  const Dataset dataset(config.dataset_dir);
  fs::create_directories(config.output_dir);

  VolumetricMap map(config.map);
  InstanceRegistry registry;
  RunReport report;

  const size_t total = config.max_frames < 0
                           ? dataset.num_frames()
                           : std::min<size_t>(config.max_frames,
                                              dataset.num_frames());
  const int reg_every = config.schedule.regularize_every;
  bool regularized_at = false;  // true when the last frame boundary ran it

  for (size_t i = 0; i < total; ++i) {
    CameraFrame cam;
    SegmentationFrame seg;
    try {
      StageClock clock(report.stages["frame_load"]);
      std::tie(cam, seg) = dataset.load_frame(i);
    } catch (const std::exception& e) {
      PANMAP_LOG_WARN("skipping frame %zu: %s", i, e.what());
      ++report.frames_skipped;
      continue;
    }

    PanopticImage raw;
    {
      StageClock clock(report.stages["label_fusion"]);
      raw = fuse_panoptic(seg, dataset.schema());
    }
    PanopticImage reference;
    {
      StageClock clock(report.stages["reference_render"]);
      reference = render_reference_labels(map, cam);
    }
    TrackResult tracked;
    {
      StageClock clock(report.stages["tracking"]);
      tracked = track_labels(raw, reference, map, config.tracking);
    }
    {
      StageClock clock(report.stages["integration"]);
      integrate_frame(map, cam, tracked.resolved, config.integration);
    }
    {
      StageClock clock(report.stages["probability_integration"]);
      integrate_thing_probabilities(registry, tracked.assignment, seg);
    }
    ++report.frames_processed;

    regularized_at = false;
    if (config.crf_enabled && reg_every > 0 &&
        report.frames_processed % reg_every == 0) {
      StageClock clock(report.stages["regularization"]);
      const RegularizeStats stats = regularize(map, config.crf);
      ++report.regularize_runs;
      report.labels_changed += stats.labels_changed;
      regularized_at = true;
    }
    if (config.schedule.mesh_every > 0 &&
        report.frames_processed % config.schedule.mesh_every == 0) {
      StageClock clock(report.stages["meshing"]);
      extract_mesh(map, registry);
    }
  }

  if (config.crf_enabled && reg_every > 0 && !regularized_at &&
      report.frames_processed > 0) {
    StageClock clock(report.stages["regularization"]);
    const RegularizeStats stats = regularize(map, config.crf);
    ++report.regularize_runs;
    report.labels_changed += stats.labels_changed;
  }

  LabeledMesh mesh;
  {
    StageClock clock(report.stages["meshing"]);
    mesh = extract_mesh(map, registry);
  }
  report.blocks = map.num_blocks();
  report.mesh_vertices = mesh.vertices.size();
  report.mesh_triangles = mesh.triangles.size();

  export_ply(mesh, dataset.schema(), (fs::path(config.output_dir) / "mesh.ply").string());
  write_label_sidecar(mesh, dataset.schema(), registry,
                      (fs::path(config.output_dir) / "mesh_labels.txt").string());

  nlohmann::json metrics = {
      {"frames", report.frames_processed},
      {"frames_skipped", report.frames_skipped},
      {"map", {{"blocks", report.blocks},
               {"next_instance_id", map.peek_next_instance_id()}}},
      {"mesh", {{"vertices", report.mesh_vertices},
                {"triangles", report.mesh_triangles}}},
      {"regularization", {{"runs", report.regularize_runs},
                          {"labels_changed", report.labels_changed}}},
  };

  if (const auto gt = dataset.ground_truth()) {
    StageClock clock(report.stages["evaluation"]);
    const TransferredLabels transferred =
        associate_vertices(mesh, *gt, config.effective_association_radius());
    report.panoptic = panoptic_quality(transferred, *gt, dataset.schema(),
                                       config.min_vertices);
    report.iou = semantic_iou(transferred.class_ids, gt->class_ids,
                              dataset.schema());
    if (report.panoptic->defined)
      metrics["panoptic_quality"] = pq_to_json(*report.panoptic);
    if (report.iou->defined)
      metrics["semantic_iou"] = iou_to_json(*report.iou);
  }

  report.metrics_json = metrics.dump(2) + "\n";
  {
    std::ofstream os(fs::path(config.output_dir) / "metrics.json");
    if (!os) throw std::runtime_error("cannot write metrics.json");
    os << report.metrics_json;
  }
  {
    std::ofstream os(fs::path(config.output_dir) / "timings.csv");
    if (!os) throw std::runtime_error("cannot write timings.csv");
    os << "stage,calls,total_seconds,mean_seconds\n";
    for (const auto& [name, timing] : report.stages) {
      os << name << "," << timing.count << "," << timing.seconds << ","
         << (timing.count ? timing.seconds / timing.count : 0.0) << "\n";
    }
  }
  return report;
}

}  // namespace panmap
