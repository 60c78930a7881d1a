#include <doctest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "panmap/integration.hpp"
#include "panmap/synthetic.hpp"

using namespace panmap;

namespace {

constexpr float kTrunc = 0.096f;

std::vector<oracle::Observation> random_observations(std::mt19937_64& rng,
                                                     int count, int num_labels) {
  std::uniform_real_distribution<float> dist(-kTrunc, kTrunc);
  std::uniform_real_distribution<float> weight(0.05f, 3.0f);
  std::uniform_int_distribution<int> label(0, num_labels - 1);
  std::vector<oracle::Observation> log;
  for (int i = 0; i < count; ++i) {
    oracle::Observation obs;
    obs.dist = dist(rng);
    obs.weight = weight(rng);
    const int l = label(rng);
    obs.label = l == 0 ? PanopticLabel::unknown() : PanopticLabel::instance(l);
    log.push_back(obs);
  }
  return log;
}

void apply_log(Voxel& voxel, const std::vector<oracle::Observation>& log) {
  for (const auto& obs : log)
    apply_voxel_update(voxel, obs.dist, obs.weight, {0, 0, 0}, obs.label,
                       kTrunc);
}

SceneSpec small_scene() {
  LabelSchema schema({{1, "floor"}, {2, "wall"}}, {{10, "box"}, {11, "ball"}});
  SceneSpec spec;
  spec.schema = schema;
  spec.room_min = {0, 0, 0};
  spec.room_max = {3, 3, 2.5};
  spec.surfaces.push_back({2, 0.0f, {0, 0}, {3, 3}, 1});
  spec.surfaces.push_back({0, 0.0f, {0, 0}, {3, 2.5f}, 2});
  spec.things.push_back({ThingPrimitive::Shape::kSphere, 11,
                         {1.5f, 1.5f, 0.3f}, {0, 0, 0}, 0.3f});
  spec.things.push_back({ThingPrimitive::Shape::kBox, 10, {0.8f, 2.2f, 0.2f},
                         {0.2f, 0.2f, 0.2f}, 0});
  spec.width = 80;
  spec.height = 60;
  spec.intrinsics = {60.0, 60.0, 39.5, 29.5};
  spec.trajectory = orbit_trajectory({1.5f, 1.5f, 0.2f}, 1.2f, 1.0f, 6);
  return spec;
}

bool voxel_equal(const Voxel& a, const Voxel& b) {
  return a.tsdf == b.tsdf && a.weight_d == b.weight_d && a.color == b.color &&
         a.label == b.label && a.weight_l == b.weight_l;
}

}  // namespace

TEST_SUITE("integration") {

TEST_CASE("observation weights") {
  CHECK(compute_weight(1.0f, WeightMode::kQuadric) == doctest::Approx(1.0));
  CHECK(compute_weight(2.0f, WeightMode::kQuadric) == doctest::Approx(0.25));
  CHECK(compute_weight(7.3f, WeightMode::kConstant) == doctest::Approx(1.0));
  CHECK_THROWS_AS(compute_weight(0.0f, WeightMode::kQuadric),
                  std::invalid_argument);
  CHECK_THROWS_AS(compute_weight(-1.0f, WeightMode::kConstant),
                  std::invalid_argument);
}

TEST_CASE("projective distance along the ray") {
  const Eigen::Vector3d sensor(0, 0, 0);
  const Eigen::Vector3d surface(0, 0, 2.0);

  CHECK(compute_projective_distance(surface, surface, sensor, 0.096) ==
        doctest::Approx(0.0));

  // One voxel_size in front of the surface (sensor side).
  const Eigen::Vector3d in_front(0, 0, 2.0 - 0.024);
  CHECK(compute_projective_distance(in_front, surface, sensor, 0.096) ==
        doctest::Approx(0.024).epsilon(1e-9));

  // Far behind the surface clamps to -truncation.
  const Eigen::Vector3d behind(0, 0, 3.0);
  CHECK(compute_projective_distance(behind, surface, sensor, 0.096) ==
        doctest::Approx(-0.096));

  // Oblique ray: distance is measured along the ray direction.
  const Eigen::Vector3d surface2(1.0, 1.0, 1.0);
  const Eigen::Vector3d dir = surface2.normalized();
  const Eigen::Vector3d v = surface2 - 0.05 * dir;
  CHECK(compute_projective_distance(v, surface2, sensor, 0.096) ==
        doctest::Approx(0.05).epsilon(1e-9));
}

TEST_CASE("first integration initializes distance, weight and label") {
  Voxel v;
  v.tsdf = kTrunc;
  apply_voxel_update(v, 0.03f, 0.5f, {10, 20, 30}, PanopticLabel::stuff(2),
                     kTrunc);
  CHECK(v.tsdf == doctest::Approx(0.03));
  CHECK(v.weight_d == doctest::Approx(0.5));
  CHECK(v.label == PanopticLabel::stuff(2));
  CHECK(v.weight_l == doctest::Approx(0.5));
  CHECK(v.color[0] == doctest::Approx(10.0));
}

TEST_CASE("weighted averaging of the distance") {
  Voxel v;
  apply_voxel_update(v, 0.01f, 1.0f, {0, 0, 0}, PanopticLabel::stuff(1), kTrunc);
  apply_voxel_update(v, 0.03f, 1.0f, {0, 0, 0}, PanopticLabel::stuff(1), kTrunc);
  CHECK(v.tsdf == doctest::Approx(0.02));
  CHECK(v.weight_d == doctest::Approx(2.0));
}

TEST_CASE("matching labels increment the label weight") {
  Voxel v;
  v.label = PanopticLabel::stuff(1);
  v.weight_l = 2.0f;
  v.weight_d = 2.0f;
  apply_voxel_update(v, 0.0f, 1.0f, {0, 0, 0}, PanopticLabel::stuff(1), kTrunc);
  CHECK(v.label == PanopticLabel::stuff(1));
  CHECK(v.weight_l == doctest::Approx(3.0));
}

TEST_CASE("a stronger conflicting label replaces the stored one") {
  Voxel v;
  v.label = PanopticLabel::stuff(1);
  v.weight_l = 0.5f;
  v.weight_d = 0.5f;
  apply_voxel_update(v, 0.0f, 1.0f, {0, 0, 0}, PanopticLabel::instance(3),
                     kTrunc);
  CHECK(v.label == PanopticLabel::instance(3));
  CHECK(v.weight_l == doctest::Approx(0.5));  // 1 - 0.5
}

TEST_CASE("an equal-weight conflict decrements to zero and keeps the label") {
  Voxel v;
  v.label = PanopticLabel::stuff(1);
  v.weight_l = 1.0f;
  v.weight_d = 1.0f;
  apply_voxel_update(v, 0.0f, 1.0f, {0, 0, 0}, PanopticLabel::instance(3),
                     kTrunc);
  CHECK(v.label == PanopticLabel::stuff(1));
  CHECK(v.weight_l == doctest::Approx(0.0));
}

TEST_CASE("fuzzed sequences match the scalar replay oracle exactly") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> count(1, 60);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto log = random_observations(rng, count(rng), 4);
    Voxel v;
    v.tsdf = kTrunc;
    apply_log(v, log);

    oracle::VoxelReplay replay;
    replay.tsdf = kTrunc;
    for (const auto& obs : log) replay.observe(obs);

    REQUIRE(v.label == replay.label);
    REQUIRE(v.weight_l == replay.weight_l);
    REQUIRE(v.weight_d == replay.weight_d);
    REQUIRE(std::abs(v.tsdf - replay.direct_tsdf()) < 1e-5);
    REQUIRE(v.weight_l <= v.weight_d + 1e-6f);
    REQUIRE(v.weight_l >= 0.0f);
  }
}

TEST_CASE("distance averaging commutes up to float reordering") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    auto log = random_observations(rng, 30, 2);
    Voxel a;
    apply_log(a, log);
    std::shuffle(log.begin(), log.end(), rng);
    Voxel b;
    apply_log(b, log);
    REQUIRE(a.tsdf == doctest::Approx(b.tsdf).epsilon(1e-5));
    REQUIRE(a.weight_d == doctest::Approx(b.weight_d).epsilon(1e-6));
  }
}

TEST_CASE("two-label sequences satisfy the signed weight-sum identity") {
  // With at most two distinct labels the stored weight equals
  // |sum(agree) - sum(disagree)| against the final label.
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> count(1, 50);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto log = random_observations(rng, count(rng), 2);
    Voxel v;
    apply_log(v, log);
    const auto sums = oracle::label_weight_sums(log, v.label);
    REQUIRE(v.weight_l ==
            doctest::Approx(std::abs(sums.agree - sums.disagree)).epsilon(1e-4));
  }
}

TEST_CASE("parallel and serial frame integration are bit-identical") {
  const SceneSpec spec = small_scene();
  IntegrationConfig cfg;
  cfg.truncation = kTrunc;
  VolumetricMap::Config map_cfg{0.024f, kTrunc, 16};

  VolumetricMap serial(map_cfg), parallel(map_cfg);
  for (size_t f = 0; f < spec.trajectory.size(); ++f) {
    const RenderedFrame frame = render_frame(spec, f, 3);
    const PanopticImage raw = fuse_panoptic(frame.segmentation, spec.schema);
    const IntegrationStats a = integrate_frame_serial(serial, frame.camera, raw, cfg);
    const IntegrationStats b = integrate_frame(parallel, frame.camera, raw, cfg);
    REQUIRE(a.rays == b.rays);
    REQUIRE(a.voxel_updates == b.voxel_updates);
    REQUIRE(a.blocks_allocated == b.blocks_allocated);
  }

  REQUIRE(serial.num_blocks() == parallel.num_blocks());
  REQUIRE(serial.num_blocks() > 0);
  for (const BlockIndex& index : serial.sorted_block_indices()) {
    const VoxelBlock* sb = serial.find_block(index);
    const VoxelBlock* pb = parallel.find_block(index);
    REQUIRE(pb != nullptr);
    for (size_t i = 0; i < sb->num_voxels(); ++i)
      REQUIRE(voxel_equal(sb->voxel(static_cast<int>(i)),
                          pb->voxel(static_cast<int>(i))));
  }
}

TEST_CASE("label weight never exceeds distance weight after full frames") {
  const SceneSpec spec = small_scene();
  IntegrationConfig cfg;
  cfg.truncation = kTrunc;
  VolumetricMap map({0.024f, kTrunc, 16});
  for (size_t f = 0; f < spec.trajectory.size(); ++f) {
    const RenderedFrame frame = render_frame(spec, f, 9);
    const PanopticImage raw = fuse_panoptic(frame.segmentation, spec.schema);
    integrate_frame(map, frame.camera, raw, cfg);
    for (const auto& [index, block] : map.blocks())
      for (size_t i = 0; i < block->num_voxels(); ++i) {
        const Voxel& v = block->voxel(static_cast<int>(i));
        REQUIRE(v.weight_l <= v.weight_d + 1e-4f);
        REQUIRE(std::abs(v.tsdf) <= kTrunc + 1e-6f);
      }
  }
}

TEST_CASE("invalid pose is an input error and zero depth is skipped") {
  VolumetricMap map({0.024f, kTrunc, 16});
  IntegrationConfig cfg;
  cfg.truncation = kTrunc;
  CameraFrame cam;
  cam.intrinsics = {50, 50, 4, 4};
  cam.depth = DepthImage(9, 9, 0.0f);
  cam.pose(0, 0) = 3.0;  // not a rotation
  PanopticImage labels(9, 9);
  CHECK_THROWS_AS(integrate_frame(map, cam, labels, cfg), std::invalid_argument);

  cam.pose = Eigen::Matrix4d::Identity();
  const IntegrationStats stats = integrate_frame(map, cam, labels, cfg);
  CHECK(stats.rays == 0);
  CHECK(stats.voxel_updates == 0);
  CHECK(map.num_blocks() == 0);
}

TEST_CASE("registry accumulates confidence-weighted distributions") {
  InstanceRegistry registry;
  registry.accumulate(5, 0.8f, {{10, 1.0f}});
  auto dist = registry.distribution(5);
  CHECK(dist.at(10) == doctest::Approx(1.0));

  InstanceRegistry even;
  even.accumulate(1, 0.5f, {{10, 1.0f}});
  even.accumulate(1, 0.5f, {{11, 1.0f}});
  dist = even.distribution(1);
  CHECK(dist.at(10) == doctest::Approx(0.5));
  CHECK(dist.at(11) == doctest::Approx(0.5));

  InstanceRegistry skew;
  skew.accumulate(1, 0.9f, {{10, 1.0f}});
  skew.accumulate(1, 0.1f, {{11, 1.0f}});
  dist = skew.distribution(1);
  CHECK(dist.at(10) == doctest::Approx(0.9));
  CHECK(dist.at(11) == doctest::Approx(0.1));
}

TEST_CASE("restored class is the argmax with ties to the lowest class ID") {
  InstanceRegistry registry;
  registry.accumulate(1, 0.9f, {{10, 1.0f}});
  registry.accumulate(1, 0.1f, {{11, 1.0f}});
  const auto [cls, p] = restore_thing_class(registry, 1);
  CHECK(cls == 10);
  CHECK(p == doctest::Approx(0.9));

  InstanceRegistry uniform;
  uniform.accumulate(2, 1.0f, {{10, 0.5f}, {11, 0.5f}});
  CHECK(restore_thing_class(uniform, 2).first == 10);

  CHECK_THROWS_AS(restore_thing_class(registry, 99), std::out_of_range);
}

TEST_CASE("restored class matches a brute-force replay of the inputs") {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<float> conf(0.05f, 1.0f);
  std::uniform_real_distribution<float> split(0.0f, 1.0f);
  for (int trial = 0; trial < 100; ++trial) {
    InstanceRegistry registry;
    std::map<ClassId, double> num;
    double den = 0.0;
    for (int t = 0; t < 10; ++t) {
      const float c = conf(rng);
      const float a = split(rng);
      const std::map<ClassId, float> d = {{10, a}, {11, 1.0f - a}};
      registry.accumulate(7, c, d);
      for (const auto& [cls, p] : d) num[cls] += static_cast<double>(c) * p;
      den += c;
    }
    const auto dist = registry.distribution(7);
    for (const auto& [cls, p] : dist)
      REQUIRE(p == doctest::Approx(num[cls] / den).epsilon(1e-9));
    double sum = 0.0;
    for (const auto& [cls, p] : dist) sum += p;
    REQUIRE(sum == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("probability integration follows the assignment and validates it") {
  SegmentationFrame frame;
  frame.class_map = Image<uint16_t>(1, 1, 0);
  frame.instance_map = Image<uint16_t>(1, 1, 0);
  frame.detections.push_back({4, 0.6f, {{10, 1.0f}}});

  InstanceRegistry registry;
  integrate_thing_probabilities(registry, {{4, 77}}, frame);
  CHECK(registry.contains(77));
  CHECK(registry.entry(77).denominator == doctest::Approx(0.6));

  CHECK_THROWS_AS(integrate_thing_probabilities(registry, {{9, 1}}, frame),
                  std::invalid_argument);
}

}  // TEST_SUITE
