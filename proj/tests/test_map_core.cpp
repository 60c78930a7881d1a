#include <doctest.h>

#include <random>
#include <set>

#include "panmap/label.hpp"
#include "panmap/voxel_map.hpp"

using namespace panmap;

namespace {
VolumetricMap::Config default_config() {
  return {0.024f, 4 * 0.024f, 16};
}
}  // namespace

TEST_SUITE("map_core") {

TEST_CASE("label schema rejects overlapping class sets") {
  CHECK_THROWS_AS(LabelSchema({{1, "floor"}}, {{1, "chair"}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(LabelSchema({{0, "zero"}}, {}), std::invalid_argument);
  const LabelSchema schema({{1, "floor"}, {2, "wall"}}, {{10, "chair"}});
  CHECK(schema.is_stuff(1));
  CHECK(schema.is_thing(10));
  CHECK_FALSE(schema.is_known(99));
}

TEST_CASE("panoptic label encoding and ordering") {
  const PanopticLabel unk = PanopticLabel::unknown();
  const PanopticLabel stuff = PanopticLabel::stuff(7);
  const PanopticLabel inst = PanopticLabel::instance(7);
  CHECK(unk.is_unknown());
  CHECK(stuff.is_stuff());
  CHECK(inst.is_instance());
  CHECK(stuff.stuff_class() == 7);
  CHECK(inst.instance_id() == 7);
  CHECK(stuff != inst);
  CHECK(unk < stuff);
  CHECK(stuff < inst);
  CHECK(PanopticLabel::stuff(1) < PanopticLabel::stuff(2));
  CHECK_THROWS_AS(PanopticLabel::instance(0), std::invalid_argument);
  CHECK(PanopticLabel::from_code(inst.code()) == inst);
}

TEST_CASE("world_to_voxel at the origin") {
  VolumetricMap map(default_config());
  const auto [block, voxel] = map.world_to_voxel({0.0, 0.0, 0.0});
  CHECK(block == BlockIndex{0, 0, 0});
  CHECK(voxel == 0);
}

TEST_CASE("world_to_voxel at an exact block boundary") {
  // 0.384 = 16 * 0.024, so the point opens the next block.
  VolumetricMap map(default_config());
  const auto [block, voxel] = map.world_to_voxel({0.384, 0.0, 0.0});
  CHECK(block == BlockIndex{1, 0, 0});
  CHECK(voxel == 0);
}

TEST_CASE("world_to_voxel floors negative coordinates") {
  VolumetricMap map(default_config());
  const auto [block, voxel] = map.world_to_voxel({-0.001, 0.0, 0.0});
  CHECK(block == BlockIndex{-1, 0, 0});
  CHECK(voxel == 15);  // (15, 0, 0) within the block
}

TEST_CASE("world/voxel round trip stays within half a voxel per axis") {
  VolumetricMap map(default_config());
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> coord(-20.0, 20.0);
  for (int i = 0; i < 1000000; ++i) {
    const Eigen::Vector3d p{coord(rng), coord(rng), coord(rng)};
    const auto [block, voxel] = map.world_to_voxel(p);
    const Eigen::Vector3d center = map.voxel_center(block, voxel);
    for (int d = 0; d < 3; ++d)
      REQUIRE(std::abs(center[d] - p[d]) < map.voxel_size() / 2 + 1e-12);
  }
}

TEST_CASE("adjacent points map to the same or neighboring voxels") {
  VolumetricMap map(default_config());
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coord(-5.0, 5.0);
  std::uniform_real_distribution<double> jitter(-0.02, 0.02);
  for (int i = 0; i < 10000; ++i) {
    const Eigen::Vector3d p{coord(rng), coord(rng), coord(rng)};
    const Eigen::Vector3d q = p + Eigen::Vector3d{jitter(rng), jitter(rng),
                                                  jitter(rng)};
    const auto gp = map.world_to_global_voxel(p);
    const auto gq = map.world_to_global_voxel(q);
    for (int d = 0; d < 3; ++d) REQUIRE(std::abs(gp[d] - gq[d]) <= 1);
  }
}

TEST_CASE("get_or_allocate_block is idempotent") {
  VolumetricMap map(default_config());
  VoxelBlock& a = map.get_or_allocate_block({0, 0, 0});
  CHECK(map.num_blocks() == 1);
  VoxelBlock& b = map.get_or_allocate_block({0, 0, 0});
  CHECK(&a == &b);
  CHECK(map.num_blocks() == 1);
}

TEST_CASE("fresh blocks hold unobserved voxels") {
  VolumetricMap map(default_config());
  const VoxelBlock& block = map.get_or_allocate_block({2, -3, 1});
  CHECK(block.num_voxels() == 16 * 16 * 16);
  for (size_t i = 0; i < block.num_voxels(); ++i) {
    const Voxel& v = block.voxel(static_cast<int>(i));
    REQUIRE(v.weight_d == 0.0f);
    REQUIRE(v.weight_l == 0.0f);
    REQUIRE(v.tsdf == map.truncation());
    REQUIRE(v.label.is_unknown());
  }
}

TEST_CASE("a thousand distinct blocks allocate independently") {
  VolumetricMap map(default_config());
  for (int i = 0; i < 1000; ++i)
    map.get_or_allocate_block({i, -i, 2 * i});
  CHECK(map.num_blocks() == 1000);
  size_t voxels = 0;
  for (const auto& [index, block] : map.blocks()) voxels += block->num_voxels();
  CHECK(voxels == 1000u * 16 * 16 * 16);
}

TEST_CASE("instance IDs are positive, monotonic and never reused") {
  VolumetricMap map(default_config());
  CHECK(map.allocate_instance_id() == 1);
  CHECK(map.allocate_instance_id() == 2);
  CHECK(map.allocate_instance_id() == 3);

  std::set<InstanceId> seen;
  InstanceId previous = 0;
  for (int i = 0; i < 1000; ++i) {
    const InstanceId id = map.allocate_instance_id();
    REQUIRE(id > previous);
    REQUIRE(seen.insert(id).second);
    previous = id;
  }
}

TEST_CASE("map config validation") {
  CHECK_THROWS_AS(VolumetricMap({0.0f, 0.1f, 16}), std::invalid_argument);
  CHECK_THROWS_AS(VolumetricMap({0.024f, 0.01f, 16}), std::invalid_argument);
  CHECK_THROWS_AS(VolumetricMap({0.024f, 0.096f, 0}), std::invalid_argument);
}

TEST_CASE("non power of two block sides address consistently") {
  VolumetricMap map({0.05f, 0.2f, 10});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coord(-3.0, 3.0);
  for (int i = 0; i < 10000; ++i) {
    const Eigen::Vector3d p{coord(rng), coord(rng), coord(rng)};
    const auto [block, voxel] = map.world_to_voxel(p);
    REQUIRE(voxel >= 0);
    REQUIRE(voxel < 1000);
    const Eigen::Vector3d center = map.voxel_center(block, voxel);
    for (int d = 0; d < 3; ++d)
      REQUIRE(std::abs(center[d] - p[d]) < map.voxel_size() / 2 + 1e-12);
  }
}

}  // TEST_SUITE
