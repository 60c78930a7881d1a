// Serial-vs-OpenMP comparison for the hot kernels, plus brute-vs-fast
// mean-field. Run on an idle machine; numbers are wall clock.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <random>

#include "panmap/crf.hpp"
#include "panmap/integration.hpp"
#include "panmap/meshing.hpp"
#include "panmap/synthetic.hpp"
#include "panmap/tracking.hpp"

using namespace panmap;

namespace {

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

SceneSpec bench_scene() {
  LabelSchema schema({{1, "floor"}, {2, "wall"}}, {{10, "crate"}, {11, "ball"}});
  SceneSpec spec;
  spec.schema = schema;
  spec.room_min = {0, 0, 0};
  spec.room_max = {4, 4, 3};
  spec.surfaces.push_back({2, 0.0f, {0, 0}, {4, 4}, 1});
  spec.surfaces.push_back({0, 0.0f, {0, 0}, {4, 3}, 2});
  spec.things.push_back({ThingPrimitive::Shape::kSphere, 11, {2.0f, 2.0f, 0.4f},
                         {0, 0, 0}, 0.4f});
  spec.things.push_back({ThingPrimitive::Shape::kBox, 10, {1.2f, 2.8f, 0.25f},
                         {0.25f, 0.25f, 0.25f}, 0});
  spec.width = 320;
  spec.height = 240;
  spec.intrinsics = {240.0, 240.0, 159.5, 119.5};
  spec.trajectory = orbit_trajectory({2.0f, 2.0f, 0.3f}, 1.8f, 1.4f, 24);
  return spec;
}

CrfSubmap random_submap(int n, int labels, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  CrfSubmap submap;
  for (int i = 0; i < n; ++i) {
    CrfNode node;
    node.position = {unit(rng) * 0.8f, unit(rng) * 0.8f, unit(rng) * 0.8f};
    const int label = static_cast<int>(unit(rng) * labels) % labels;
    node.label = PanopticLabel::instance(label + 1);
    const Rgb8 c = label_color(node.label);
    node.color = {static_cast<float>(c.r), static_cast<float>(c.g),
                  static_cast<float>(c.b)};
    node.weight_d = 1.0f;
    node.weight_l = unit(rng);
    submap.nodes.push_back(node);
  }
  for (int l = 0; l < labels; ++l)
    submap.label_set.push_back(PanopticLabel::instance(l + 1));
  return submap;
}

}  // namespace

int main() {
  const int threads = omp_get_max_threads();
  std::printf("threads available: %d\n\n", threads);

  // Integration: serial reference vs sorted scatter-gather kernel.
  {
    const SceneSpec spec = bench_scene();
    std::vector<RenderedFrame> frames;
    for (size_t i = 0; i < spec.trajectory.size(); ++i)
      frames.push_back(render_frame(spec, i, 7));

    IntegrationConfig cfg;
    VolumetricMap::Config map_cfg;
    cfg.truncation = map_cfg.truncation;

    VolumetricMap map_serial(map_cfg);
    const double t0 = now_s();
    for (const auto& f : frames) {
      const PanopticImage raw = fuse_panoptic(f.segmentation, spec.schema);
      integrate_frame_serial(map_serial, f.camera, raw, cfg);
    }
    const double serial_s = now_s() - t0;

    VolumetricMap map_parallel(map_cfg);
    const double t1 = now_s();
    for (const auto& f : frames) {
      const PanopticImage raw = fuse_panoptic(f.segmentation, spec.schema);
      integrate_frame(map_parallel, f.camera, raw, cfg);
    }
    const double parallel_s = now_s() - t1;

    std::printf("integration (%zu frames @ %dx%d)\n", frames.size(), spec.width,
                spec.height);
    std::printf("  serial reference : %8.3f s\n", serial_s);
    std::printf("  openmp kernel    : %8.3f s  (%.2fx)\n", parallel_s,
                serial_s / parallel_s);

    InstanceRegistry registry;
    const double t2 = now_s();
    const LabeledMesh mesh = extract_mesh(map_parallel, registry);
    std::printf("  meshing          : %8.3f s (%zu vertices)\n\n",
                now_s() - t2, mesh.vertices.size());
  }

  // Brute mean-field: 1 thread vs all threads, then the fast path.
  {
    CrfConfig cfg;
    const CrfSubmap submap = random_submap(4000, 6, 11);

    omp_set_num_threads(1);
    const double t0 = now_s();
    const auto serial_labels = mean_field_brute(submap, cfg);
    const double serial_s = now_s() - t0;

    omp_set_num_threads(threads);
    const double t1 = now_s();
    const auto parallel_labels = mean_field_brute(submap, cfg);
    const double parallel_s = now_s() - t1;

    const double t2 = now_s();
    const auto fast_labels = mean_field_fast(submap, cfg);
    const double fast_s = now_s() - t2;

    size_t same_sp = 0, same_fast = 0;
    for (size_t i = 0; i < serial_labels.size(); ++i) {
      same_sp += serial_labels[i] == parallel_labels[i];
      same_fast += serial_labels[i] == fast_labels[i];
    }
    std::printf("mean-field, %zu nodes, %zu labels\n", submap.nodes.size(),
                submap.label_set.size());
    std::printf("  brute, 1 thread  : %8.3f s\n", serial_s);
    std::printf("  brute, %d threads: %8.3f s  (%.2fx, labels identical: %s)\n",
                threads, parallel_s, serial_s / parallel_s,
                same_sp == serial_labels.size() ? "yes" : "NO");
    std::printf("  fast filter      : %8.3f s  (%.2fx vs brute, %.1f%% label "
                "agreement)\n",
                fast_s, serial_s / fast_s,
                100.0 * same_fast / serial_labels.size());
  }
  return 0;
}
