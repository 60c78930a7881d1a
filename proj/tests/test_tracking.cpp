#include <doctest.h>

#include <random>
#include <set>

#include "panmap/tracking.hpp"

using namespace panmap;

namespace {

CameraFrame pinhole_frame(int w, int h, float fill_depth) {
  CameraFrame cam;
  cam.intrinsics = {100.0, 100.0, (w - 1) / 2.0, (h - 1) / 2.0};
  cam.depth = DepthImage(w, h, fill_depth);
  return cam;
}

PanopticImage image_with(int w, int h,
                         const std::vector<std::pair<std::pair<int, int>, PanopticLabel>>& pixels) {
  PanopticImage img(w, h);
  for (const auto& [xy, label] : pixels) img.at(xy.first, xy.second) = label;
  return img;
}

// Paints `count` instance pixels starting at linear offset.
void paint(PanopticImage& img, InstanceId id, size_t offset, size_t count) {
  for (size_t i = offset; i < offset + count; ++i)
    img[i] = PanopticLabel::instance(id);
}

}  // namespace

TEST_SUITE("tracking") {

TEST_CASE("reference render of an empty map is all unknown") {
  VolumetricMap map({0.024f, 0.096f, 16});
  const CameraFrame cam = pinhole_frame(8, 6, 1.0f);
  const PanopticImage ref = render_reference_labels(map, cam);
  for (size_t i = 0; i < ref.size(); ++i) REQUIRE(ref[i].is_unknown());
}

TEST_CASE("reference render hits a labeled voxel through the pinhole model") {
  VolumetricMap map({0.024f, 0.096f, 16});
  CameraFrame cam = pinhole_frame(9, 9, 0.0f);

  // Pixel (6, 4) at depth 1.2 m back-projects to this world point.
  const Eigen::Vector3d p = cam.intrinsics.backproject(6, 4, 1.2);
  const auto [block_idx, linear] = map.world_to_voxel(p);
  map.get_or_allocate_block(block_idx).voxel(linear).label =
      PanopticLabel::instance(42);
  cam.depth.at(6, 4) = 1.2f;

  const PanopticImage ref = render_reference_labels(map, cam);
  CHECK(ref.at(6, 4) == PanopticLabel::instance(42));
  CHECK(ref.at(0, 0).is_unknown());  // depth 0 stays unknown
}

TEST_CASE("iou of identical and disjoint masks") {
  PanopticImage raw(20, 1), ref(20, 1);
  paint(raw, 1, 0, 10);
  paint(ref, 5, 0, 10);
  IouTable t = compute_iou_matrix(raw, ref);
  CHECK(t.iou(5, 1) == doctest::Approx(1.0));

  PanopticImage raw2(20, 1), ref2(20, 1);
  paint(raw2, 1, 0, 10);
  paint(ref2, 5, 10, 10);
  IouTable t2 = compute_iou_matrix(raw2, ref2);
  CHECK(t2.iou(5, 1) == doctest::Approx(0.0));
}

TEST_CASE("iou of a partial overlap") {
  // |A| = 100, |B| = 100, overlap 50: IoU = 50 / 150.
  PanopticImage raw(300, 1), ref(300, 1);
  paint(ref, 9, 0, 100);
  paint(raw, 2, 50, 100);
  IouTable t = compute_iou_matrix(raw, ref);
  CHECK(t.iou(9, 2) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("dimension mismatch is an input error") {
  PanopticImage raw(4, 4), ref(5, 4);
  CHECK_THROWS_AS(compute_iou_matrix(raw, ref), std::invalid_argument);
}

TEST_CASE("association above the threshold reuses the reference ID") {
  VolumetricMap map({0.024f, 0.096f, 16});
  PanopticImage raw(100, 1), ref(100, 1);
  paint(raw, 3, 0, 90);
  paint(ref, 17, 0, 100);  // IoU = 90/100 = 0.9 > 0.25
  const TrackResult result = track_labels(raw, ref, map, {0.25f});
  CHECK(result.assignment.at(3) == 17);
  for (int i = 0; i < 90; ++i)
    REQUIRE(result.resolved[i] == PanopticLabel::instance(17));
}

TEST_CASE("no reference match allocates a fresh ID") {
  VolumetricMap map({0.024f, 0.096f, 16});
  PanopticImage raw(10, 1), ref(10, 1);
  paint(raw, 3, 0, 5);
  const TrackResult result = track_labels(raw, ref, map, {0.25f});
  CHECK(result.assignment.at(3) == 1);  // first map ID
}

TEST_CASE("larger raw mask wins a contested reference; the loser gets a "
          "fresh ID even above the threshold") {
  VolumetricMap map({0.024f, 0.096f, 16});
  // Reference: one instance of 100 px. Raw: instance 1 overlaps 60 px
  // (IoU 60/140 ≈ 0.43 over area 100), instance 2 overlaps 40 px with area
  // 40 (IoU 40/100 = 0.4). Both best-match reference 9; the larger area
  // (instance 1) takes it.
  PanopticImage raw(200, 1), ref(200, 1);
  paint(ref, 9, 0, 100);
  paint(raw, 1, 0, 60);
  paint(raw, 1, 100, 40);  // area 100, overlap 60
  paint(raw, 2, 60, 40);   // area 40, overlap 40
  const TrackResult result = track_labels(raw, ref, map, {0.25f});
  CHECK(result.assignment.at(1) == 9);
  CHECK(result.assignment.at(2) == map.peek_next_instance_id() - 1);
  CHECK(result.assignment.at(2) != 9);
}

TEST_CASE("stuff labels pass through resolution untouched") {
  VolumetricMap map({0.024f, 0.096f, 16});
  PanopticImage raw(4, 1), ref(4, 1);
  raw.at(0, 0) = PanopticLabel::stuff(2);
  raw.at(1, 0) = PanopticLabel::instance(1);
  const TrackResult result = track_labels(raw, ref, map, {0.25f});
  CHECK(result.resolved.at(0, 0) == PanopticLabel::stuff(2));
  CHECK(result.resolved.at(1, 0).is_instance());
  CHECK(result.resolved.at(2, 0).is_unknown());
}

TEST_CASE("a threshold of one forces fresh IDs even on perfect overlap") {
  VolumetricMap map({0.024f, 0.096f, 16});
  PanopticImage raw(10, 1), ref(10, 1);
  paint(raw, 1, 0, 10);
  paint(ref, 4, 0, 10);  // IoU exactly 1.0, not > 1.0
  const TrackResult result = track_labels(raw, ref, map, {1.0f});
  CHECK(result.assignment.at(1) != 4);
}

TEST_CASE("assignment is injective and deterministic on random inputs") {
  std::mt19937_64 rng(1234);
  std::uniform_int_distribution<int> label(0, 6);
  for (int trial = 0; trial < 30; ++trial) {
    PanopticImage raw(40, 20), ref(40, 20);
    for (size_t i = 0; i < raw.size(); ++i) {
      const int r = label(rng);
      if (r > 0) raw[i] = PanopticLabel::instance(r);
      const int q = label(rng);
      if (q > 0) ref[i] = PanopticLabel::instance(q + 100);
    }
    VolumetricMap map_a({0.024f, 0.096f, 16});
    VolumetricMap map_b({0.024f, 0.096f, 16});
    const TrackResult a = track_labels(raw, ref, map_a, {0.25f});
    const TrackResult b = track_labels(raw, ref, map_b, {0.25f});
    REQUIRE(a.assignment == b.assignment);

    std::set<InstanceId> used;
    for (const auto& [local, mapped] : a.assignment)
      REQUIRE(used.insert(mapped).second);
  }
}

}  // TEST_SUITE
