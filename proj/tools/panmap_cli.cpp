#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <exception>
#include <fstream>
#include <string>

#include "panmap/dataset.hpp"
#include "panmap/logging.hpp"
#include "panmap/meshing.hpp"
#include "panmap/pipeline.hpp"
#include "panmap/synthetic.hpp"

namespace {

void print_metrics(const panmap::RunReport& report) {
  std::printf("frames processed: %zu (skipped %zu)\n", report.frames_processed,
              report.frames_skipped);
  std::printf("map blocks: %zu, mesh: %zu vertices / %zu triangles\n",
              report.blocks, report.mesh_vertices, report.mesh_triangles);
  if (report.panoptic && report.panoptic->defined)
    std::printf("PQ %.4f  SQ %.4f  RQ %.4f\n", report.panoptic->pq,
                report.panoptic->sq, report.panoptic->rq);
  if (report.iou && report.iou->defined)
    std::printf("mean IoU %.4f\n", report.iou->mean);
  std::printf("%-24s %8s %12s\n", "stage", "calls", "seconds");
  for (const auto& [name, timing] : report.stages)
    std::printf("%-24s %8zu %12.3f\n", name.c_str(), timing.count,
                timing.seconds);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"panmap: online panoptic TSDF mapping"};
  app.require_subcommand(1);

  // replay
  auto* replay = app.add_subcommand("replay", "replay a dataset into a map");
  std::string config_path, dataset_override, out_override;
  uint64_t seed_override = 0;
  bool has_seed = false, no_crf = false;
  int frames_override = -1, max_blocks_override = 0;
  replay->add_option("--config", config_path, "run configuration JSON")
      ->required();
  replay->add_option("--dataset", dataset_override, "override dataset path");
  replay->add_option("--out", out_override, "override output directory");
  replay->add_option("--seed", seed_override, "override seed")
      ->each([&](const std::string&) { has_seed = true; });
  replay->add_option("--frames", frames_override, "limit processed frames");
  replay->add_flag("--no-crf", no_crf, "disable CRF regularization");
  replay->add_option("--max-blocks", max_blocks_override,
                     "override CRF max blocks per submap");

  // gen-scene
  auto* gen = app.add_subcommand("gen-scene",
                                 "render a synthetic scene to a dataset");
  std::string scene_path, gen_out;
  uint64_t gen_seed = 0;
  double gt_density = 2000.0;
  gen->add_option("--spec", scene_path, "scene spec JSON")->required();
  gen->add_option("--out", gen_out, "output dataset directory")->required();
  gen->add_option("--seed", gen_seed, "render seed");
  gen->add_option("--gt-density", gt_density,
                  "ground-truth sampling density, points per square meter");

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a mesh against GT points");
  std::string eval_pred, eval_gt, eval_schema, eval_out;
  float eval_radius = 0.048f;
  int eval_min_vertices = 100;
  eval->add_option("--pred", eval_pred, "predicted mesh PLY")->required();
  eval->add_option("--gt", eval_gt, "ground-truth points PLY")->required();
  eval->add_option("--schema", eval_schema, "label schema JSON")->required();
  eval->add_option("--out", eval_out, "metrics JSON output path");
  eval->add_option("--radius", eval_radius, "association radius, meters");
  eval->add_option("--min-vertices", eval_min_vertices,
                   "minimum predicted thing segment size");

  // mesh-export
  auto* mesh_cmd = app.add_subcommand(
      "mesh-export", "replay a dataset and export only the mesh");
  std::string mesh_config, mesh_out;
  mesh_cmd->add_option("--config", mesh_config, "run configuration JSON")
      ->required();
  mesh_cmd->add_option("--out", mesh_out, "output directory override");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*replay || *mesh_cmd) {
      panmap::RunConfig cfg = panmap::load_run_config(
          *replay ? config_path : mesh_config);
      if (!dataset_override.empty()) cfg.dataset_dir = dataset_override;
      if (!out_override.empty()) cfg.output_dir = out_override;
      if (*mesh_cmd && !mesh_out.empty()) cfg.output_dir = mesh_out;
      if (has_seed) cfg.seed = seed_override;
      if (frames_override >= 0) cfg.max_frames = frames_override;
      if (no_crf) cfg.crf_enabled = false;
      if (max_blocks_override > 0)
        cfg.crf.max_blocks_per_submap = max_blocks_override;

      const panmap::RunReport report = panmap::run_replay(cfg);
      if (*replay) print_metrics(report);
      else
        std::printf("mesh.ply written to %s (%zu vertices)\n",
                    cfg.output_dir.c_str(), report.mesh_vertices);
      return 0;
    }

    if (*gen) {
      const panmap::SceneSpec spec = panmap::load_scene(scene_path);
      panmap::generate_dataset(spec, gen_seed, gen_out, gt_density);
      return 0;
    }

    if (*eval) {
      const panmap::LabelSchema schema = panmap::load_schema(eval_schema);
      const panmap::LabeledMesh pred = panmap::import_ply(eval_pred, schema);
      const panmap::LabeledMesh gt_mesh = panmap::import_ply(eval_gt, schema);
      panmap::LabeledPointSet gt;
      gt.points = gt_mesh.vertices;
      gt.labels = gt_mesh.labels;
      gt.class_ids = gt_mesh.class_ids;

      const panmap::TransferredLabels transferred =
          panmap::associate_vertices(pred, gt, eval_radius);
      const panmap::PanopticQuality pq =
          panmap::panoptic_quality(transferred, gt, schema, eval_min_vertices);
      const panmap::SemanticIou iou =
          panmap::semantic_iou(transferred.class_ids, gt.class_ids, schema);

      std::printf("%-8s %8s %8s %8s\n", "class", "PQ", "SQ", "RQ");
      for (const auto& [cls, entry] : pq.per_class)
        std::printf("%-8u %8.4f %8.4f %8.4f\n", cls, entry.pq, entry.sq,
                    entry.rq);
      if (pq.defined)
        std::printf("%-8s %8.4f %8.4f %8.4f\n", "all", pq.pq, pq.sq, pq.rq);
      if (iou.defined) std::printf("mean IoU %.4f\n", iou.mean);

      if (!eval_out.empty()) {
        nlohmann::json out;
        if (pq.defined) {
          nlohmann::json per_class = nlohmann::json::object();
          for (const auto& [cls, entry] : pq.per_class)
            per_class[std::to_string(cls)] = {{"pq", entry.pq},
                                              {"sq", entry.sq},
                                              {"rq", entry.rq}};
          out["panoptic_quality"] = {{"pq", pq.pq}, {"sq", pq.sq},
                                     {"rq", pq.rq}, {"per_class", per_class}};
        }
        if (iou.defined) {
          nlohmann::json per_class = nlohmann::json::object();
          for (const auto& [cls, value] : iou.per_class)
            per_class[std::to_string(cls)] = value;
          out["semantic_iou"] = {{"mean", iou.mean}, {"per_class", per_class}};
        }
        std::ofstream os(eval_out);
        if (!os) throw std::runtime_error("cannot write " + eval_out);
        os << out.dump(2) << "\n";
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
