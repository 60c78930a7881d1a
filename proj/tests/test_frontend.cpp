#include <doctest.h>

#include <random>

#include "panmap/frontend.hpp"

using namespace panmap;

namespace {

const LabelSchema kSchema({{1, "wall"}, {2, "floor"}}, {{10, "chair"}, {11, "table"}});

SegmentationFrame make_frame(int w, int h) {
  SegmentationFrame frame;
  frame.class_map = Image<uint16_t>(w, h, 0);
  frame.instance_map = Image<uint16_t>(w, h, 0);
  return frame;
}

}  // namespace

TEST_SUITE("frontend") {

TEST_CASE("instances take precedence over the class map") {
  SegmentationFrame frame = make_frame(2, 1);
  frame.class_map.at(0, 0) = 1;  // wall
  frame.instance_map.at(0, 0) = 7;
  frame.detections.push_back({7, 1.0f, {{10, 1.0f}}});

  const PanopticImage out = fuse_panoptic(frame, kSchema);
  CHECK(out.at(0, 0) == PanopticLabel::instance(7));
}

TEST_CASE("stuff classes pass through without an instance") {
  SegmentationFrame frame = make_frame(1, 1);
  frame.class_map.at(0, 0) = 2;  // floor
  const PanopticImage out = fuse_panoptic(frame, kSchema);
  CHECK(out.at(0, 0) == PanopticLabel::stuff(2));
}

TEST_CASE("thing classes without an instance become unknown") {
  SegmentationFrame frame = make_frame(1, 1);
  frame.class_map.at(0, 0) = 10;  // chair, no mask
  const PanopticImage out = fuse_panoptic(frame, kSchema);
  CHECK(out.at(0, 0).is_unknown());
}

TEST_CASE("classes absent from the schema become unknown") {
  SegmentationFrame frame = make_frame(1, 1);
  frame.class_map.at(0, 0) = 999;
  const PanopticImage out = fuse_panoptic(frame, kSchema);
  CHECK(out.at(0, 0).is_unknown());
}

TEST_CASE("dimension mismatch is an input error") {
  SegmentationFrame frame;
  frame.class_map = Image<uint16_t>(2, 2, 0);
  frame.instance_map = Image<uint16_t>(3, 2, 0);
  CHECK_THROWS_AS(fuse_panoptic(frame, kSchema), std::invalid_argument);
  CHECK_THROWS_AS(frame.validate(kSchema), std::invalid_argument);
}

TEST_CASE("validation rejects broken detections") {
  SegmentationFrame frame = make_frame(2, 1);
  frame.instance_map.at(0, 0) = 3;

  SUBCASE("instance without a detection") {
    CHECK_THROWS_AS(frame.validate(kSchema), std::invalid_argument);
  }
  SUBCASE("distribution not summing to one") {
    frame.detections.push_back({3, 0.5f, {{10, 0.9f}}});
    CHECK_THROWS_AS(frame.validate(kSchema), std::invalid_argument);
  }
  SUBCASE("confidence outside the unit interval") {
    frame.detections.push_back({3, 1.5f, {{10, 1.0f}}});
    CHECK_THROWS_AS(frame.validate(kSchema), std::invalid_argument);
  }
  SUBCASE("duplicate detection IDs") {
    frame.detections.push_back({3, 0.5f, {{10, 1.0f}}});
    frame.detections.push_back({3, 0.5f, {{10, 1.0f}}});
    CHECK_THROWS_AS(frame.validate(kSchema), std::invalid_argument);
  }
  SUBCASE("well formed frame passes") {
    frame.detections.push_back({3, 0.5f, {{10, 0.25f}, {11, 0.75f}}});
    CHECK_NOTHROW(frame.validate(kSchema));
  }
}

TEST_CASE("fused output never holds a thing class as stuff and keeps "
          "instance pixels exact") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> cls(0, 12);
  std::uniform_int_distribution<int> inst(0, 3);
  for (int trial = 0; trial < 50; ++trial) {
    SegmentationFrame frame = make_frame(17, 13);
    for (size_t i = 0; i < frame.class_map.size(); ++i) {
      frame.class_map[i] = static_cast<uint16_t>(cls(rng));
      frame.instance_map[i] = static_cast<uint16_t>(inst(rng));
    }
    const PanopticImage out = fuse_panoptic(frame, kSchema);
    for (size_t i = 0; i < out.size(); ++i) {
      if (out[i].is_stuff()) REQUIRE(kSchema.is_stuff(out[i].stuff_class()));
      REQUIRE((out[i].is_instance()) == (frame.instance_map[i] != 0));
      if (out[i].is_instance())
        REQUIRE(out[i].instance_id() == frame.instance_map[i]);
    }
    // Pure and deterministic.
    REQUIRE(fuse_panoptic(frame, kSchema) == out);
  }
}

}  // TEST_SUITE
