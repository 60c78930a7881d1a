#include "panmap/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>

#include "json_util.hpp"

namespace panmap {

uint64_t mix_seed(uint64_t seed, uint64_t stream) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

Rgb8 label_color(PanopticLabel label) {
  if (label.is_unknown()) return {0, 0, 0};
  // 9-bit key spread over the channels; distinct labels get colors at least
  // 36 units apart in some channel, well above the CRF color bandwidth.
  const uint32_t key = label.is_stuff()
                           ? 256u + (label.stuff_class() & 0xffu)
                           : (label.instance_id() & 0xffu);
  const auto channel = [](uint32_t bits) {
    return static_cast<uint8_t>(bits * 36 + 2);
  };
  return {channel(key & 7u), channel((key >> 3) & 7u), channel((key >> 6) & 7u)};
}

void SceneSpec::validate() const {
  for (const auto& s : surfaces) {
    if (s.axis < 0 || s.axis > 2)
      throw std::invalid_argument("surface axis must be 0, 1 or 2");
    if (!schema.is_stuff(s.cls))
      throw std::invalid_argument("surface class is not a stuff class");
    if (s.lo.x() > s.hi.x() || s.lo.y() > s.hi.y())
      throw std::invalid_argument("surface extents inverted");
  }
  for (const auto& t : things) {
    if (!schema.is_thing(t.cls))
      throw std::invalid_argument("primitive class is not a thing class");
    const Eigen::Vector3f margin =
        t.shape == ThingPrimitive::Shape::kSphere
            ? Eigen::Vector3f::Constant(t.radius)
            : t.half_extent;
    for (int d = 0; d < 3; ++d) {
      if (t.center[d] - margin[d] < room_min[d] - 1e-5f ||
          t.center[d] + margin[d] > room_max[d] + 1e-5f)
        throw std::invalid_argument("thing primitive outside room extents");
    }
  }
  for (const auto& pose : trajectory) {
    CameraFrame probe;
    probe.pose = pose;
    if (!probe.pose_is_rigid())
      throw std::invalid_argument("trajectory pose is not rigid");
  }
  if (width <= 0 || height <= 0)
    throw std::invalid_argument("invalid resolution");
  if (intrinsics.fx <= 0 || intrinsics.fy <= 0)
    throw std::invalid_argument("invalid intrinsics");
}

namespace {

// Hit record: parameter s is the camera z-depth (rays use direction vectors
// with unit z in the camera frame).
struct Hit {
  double s = std::numeric_limits<double>::infinity();
  PanopticLabel label;
  ClassId cls = 0;
  int thing_index = -1;
};

constexpr double kMinHitDepth = 1e-4;

void intersect_surface(const StuffSurface& surface, const Eigen::Vector3d& o,
                       const Eigen::Vector3d& d, Hit& best) {
  if (std::abs(d[surface.axis]) < 1e-12) return;
  const double s = (surface.offset - o[surface.axis]) / d[surface.axis];
  if (s < kMinHitDepth || s >= best.s) return;
  const Eigen::Vector3d p = o + s * d;
  const int u = (surface.axis + 1) % 3, v = (surface.axis + 2) % 3;
  if (p[u] < surface.lo.x() || p[u] > surface.hi.x() || p[v] < surface.lo.y() ||
      p[v] > surface.hi.y())
    return;
  best.s = s;
  best.label = PanopticLabel::stuff(surface.cls);
  best.cls = surface.cls;
  best.thing_index = -1;
}

void intersect_thing(const ThingPrimitive& thing, int index,
                     const Eigen::Vector3d& o, const Eigen::Vector3d& d,
                     Hit& best) {
  double s = std::numeric_limits<double>::infinity();
  if (thing.shape == ThingPrimitive::Shape::kSphere) {
    const Eigen::Vector3d oc = o - thing.center.cast<double>();
    const double a = d.squaredNorm();
    const double b = 2.0 * oc.dot(d);
    const double c = oc.squaredNorm() - static_cast<double>(thing.radius) * thing.radius;
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return;
    const double sq = std::sqrt(disc);
    const double s0 = (-b - sq) / (2.0 * a);
    const double s1 = (-b + sq) / (2.0 * a);
    s = s0 >= kMinHitDepth ? s0 : s1;
  } else {
    const Eigen::Vector3d c = thing.center.cast<double>();
    const Eigen::Vector3d h = thing.half_extent.cast<double>();
    double s_near = -std::numeric_limits<double>::infinity();
    double s_far = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
      if (std::abs(d[k]) < 1e-12) {
        if (o[k] < c[k] - h[k] || o[k] > c[k] + h[k]) return;
        continue;
      }
      double t0 = (c[k] - h[k] - o[k]) / d[k];
      double t1 = (c[k] + h[k] - o[k]) / d[k];
      if (t0 > t1) std::swap(t0, t1);
      s_near = std::max(s_near, t0);
      s_far = std::min(s_far, t1);
    }
    if (s_near > s_far) return;
    s = s_near >= kMinHitDepth ? s_near : s_far;
  }
  if (s < kMinHitDepth || s >= best.s) return;
  best.s = s;
  best.label = PanopticLabel::instance(static_cast<InstanceId>(index + 1));
  best.cls = thing.cls;
  best.thing_index = index;
}

bool inside_room(const SceneSpec& spec, const Eigen::Vector3d& p) {
  for (int d = 0; d < 3; ++d)
    if (p[d] < spec.room_min[d] - 1e-6 || p[d] > spec.room_max[d] + 1e-6)
      return false;
  return true;
}

void morph_instance_masks(Image<uint16_t>& instances, int px) {
  if (px == 0) return;
  const int w = instances.width(), h = instances.height();
  const bool dilate = px > 0;
  for (int pass = 0; pass < std::abs(px); ++pass) {
    Image<uint16_t> next = instances;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const uint16_t id = instances.at(x, y);
        if (dilate) {
          if (id != 0) continue;
          // Take the smallest nonzero 4-neighbor.
          uint16_t candidate = 0;
          auto consider = [&](int nx, int ny) {
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) return;
            const uint16_t n = instances.at(nx, ny);
            if (n != 0 && (candidate == 0 || n < candidate)) candidate = n;
          };
          consider(x - 1, y); consider(x + 1, y);
          consider(x, y - 1); consider(x, y + 1);
          if (candidate != 0) next.at(x, y) = candidate;
        } else {
          if (id == 0) continue;
          auto boundary = [&](int nx, int ny) {
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) return true;
            return instances.at(nx, ny) != id;
          };
          if (boundary(x - 1, y) || boundary(x + 1, y) || boundary(x, y - 1) ||
              boundary(x, y + 1))
            next.at(x, y) = 0;
        }
      }
    }
    instances = std::move(next);
  }
}

}  // namespace

RenderedFrame render_frame(const SceneSpec& spec, size_t frame_index,
                           uint64_t seed) {
  if (frame_index >= spec.trajectory.size())
    throw std::out_of_range("frame index beyond trajectory");
  const int w = spec.width, h = spec.height;

  RenderedFrame out;
  out.camera.intrinsics = spec.intrinsics;
  out.camera.pose = spec.trajectory[frame_index];
  out.camera.depth = DepthImage(w, h, 0.0f);
  out.camera.color = ColorImage(w, h);
  out.ground_truth = PanopticImage(w, h);
  out.segmentation.class_map = Image<uint16_t>(w, h, 0);
  out.segmentation.instance_map = Image<uint16_t>(w, h, 0);

  const Eigen::Matrix3d rot = out.camera.rotation();
  const Eigen::Vector3d origin = out.camera.translation();
  if (!inside_room(spec, origin)) return out;  // all-invalid frame

  // Analytic pass: nearest primitive per pixel.
  Image<int> thing_index(w, h, -1);
  std::set<int> present_things;
  std::set<ClassId> present_stuff;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Eigen::Vector3d dir = rot * spec.intrinsics.ray(x, y);
      Hit hit;
      for (const auto& s : spec.surfaces) intersect_surface(s, origin, dir, hit);
      for (size_t k = 0; k < spec.things.size(); ++k)
        intersect_thing(spec.things[k], static_cast<int>(k), origin, dir, hit);
      if (!std::isfinite(hit.s)) continue;
      out.camera.depth.at(x, y) = static_cast<float>(hit.s);
      out.camera.color.at(x, y) = label_color(hit.label);
      out.ground_truth.at(x, y) = hit.label;
      out.segmentation.class_map.at(x, y) = hit.cls;
      thing_index.at(x, y) = hit.thing_index;
      if (hit.thing_index >= 0) present_things.insert(hit.thing_index);
      else present_stuff.insert(hit.cls);
    }
  }

  std::mt19937_64 rng(mix_seed(seed, frame_index));

  // Frame-local instance IDs, optionally permuted per frame.
  std::vector<int> things_sorted(present_things.begin(), present_things.end());
  std::vector<uint16_t> local_ids(things_sorted.size());
  for (size_t i = 0; i < local_ids.size(); ++i)
    local_ids[i] = static_cast<uint16_t>(i + 1);
  if (spec.noise.permute_instance_ids)
    std::shuffle(local_ids.begin(), local_ids.end(), rng);
  std::map<int, uint16_t> thing_to_local;
  for (size_t i = 0; i < things_sorted.size(); ++i) {
    thing_to_local[things_sorted[i]] = local_ids[i];
    out.local_to_thing[local_ids[i]] = things_sorted[i];
  }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (thing_index.at(x, y) >= 0)
        out.segmentation.instance_map.at(x, y) =
            thing_to_local[thing_index.at(x, y)];

  morph_instance_masks(out.segmentation.instance_map, spec.noise.mask_morph_px);

  // Depth noise.
  if (spec.noise.depth_sigma_base > 0.0f ||
      spec.noise.depth_sigma_quadratic > 0.0f) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (size_t i = 0; i < out.camera.depth.size(); ++i) {
      const float z = out.camera.depth[i];
      if (z <= 0.0f) continue;
      const double sigma = spec.noise.depth_sigma_base +
                           spec.noise.depth_sigma_quadratic * z * z;
      out.camera.depth[i] =
          std::max(0.001f, z + static_cast<float>(sigma * gauss(rng)));
    }
  }

  // Label flips: reassign a labeled pixel to another label present in the
  // frame (instances by post-morph masks, stuff by the class map).
  if (spec.noise.label_flip_rate > 0.0f) {
    struct Candidate {
      uint16_t instance;  // 0 for stuff entries
      ClassId cls;
    };
    std::vector<Candidate> candidates;
    std::set<uint16_t> present_local;
    for (size_t i = 0; i < out.segmentation.instance_map.size(); ++i)
      if (out.segmentation.instance_map[i] != 0)
        present_local.insert(out.segmentation.instance_map[i]);
    for (uint16_t id : present_local)
      candidates.push_back(
          {id, spec.things[out.local_to_thing.at(id)].cls});
    for (ClassId c : present_stuff) candidates.push_back({0, c});

    if (candidates.size() >= 2) {
      std::uniform_real_distribution<double> coin(0.0, 1.0);
      std::uniform_int_distribution<size_t> pick(0, candidates.size() - 1);
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const uint16_t id = out.segmentation.instance_map.at(x, y);
          const ClassId cls = out.segmentation.class_map.at(x, y);
          if (id == 0 && cls == 0) continue;  // unlabeled
          if (coin(rng) >= spec.noise.label_flip_rate) continue;
          for (int attempt = 0; attempt < 8; ++attempt) {
            const Candidate& c = candidates[pick(rng)];
            if (c.instance == id && c.cls == cls) continue;
            out.segmentation.instance_map.at(x, y) = c.instance;
            out.segmentation.class_map.at(x, y) = c.cls;
            break;
          }
        }
      }
    }
  }

  // Detections for every instance present in the final map.
  std::set<uint16_t> final_ids;
  for (size_t i = 0; i < out.segmentation.instance_map.size(); ++i)
    if (out.segmentation.instance_map[i] != 0)
      final_ids.insert(out.segmentation.instance_map[i]);
  std::uniform_real_distribution<double> conf_draw(spec.noise.conf_min,
                                                   spec.noise.conf_max);
  const auto& things = spec.schema.thing_classes();
  for (uint16_t id : final_ids) {
    Detection det;
    det.id = id;
    det.confidence = spec.noise.conf_min >= spec.noise.conf_max
                         ? spec.noise.conf_min
                         : static_cast<float>(conf_draw(rng));
    const ClassId true_cls = spec.things[out.local_to_thing.at(id)].cls;
    const double eta = spec.noise.class_smoothing;
    for (const auto& [cls, name] : things) {
      double p = eta / things.size();
      if (cls == true_cls) p += 1.0 - eta;
      if (p > 0.0) det.distribution[cls] = static_cast<float>(p);
    }
    out.segmentation.detections.push_back(det);
  }

  return out;
}

LabeledPointSet ground_truth_points(const SceneSpec& spec, double density,
                                    uint64_t seed) {
  if (density <= 0.0) throw std::invalid_argument("density must be positive");
  std::mt19937_64 rng(mix_seed(seed, 0x6f7261636c65ull));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  LabeledPointSet out;
  auto add = [&out](const Eigen::Vector3d& p, PanopticLabel label, ClassId cls) {
    out.points.push_back(p.cast<float>());
    out.labels.push_back(label);
    out.class_ids.push_back(cls);
  };

  for (const auto& s : spec.surfaces) {
    const double area = static_cast<double>(s.hi.x() - s.lo.x()) *
                        (s.hi.y() - s.lo.y());
    const size_t n = static_cast<size_t>(std::llround(area * density));
    const int u = (s.axis + 1) % 3, v = (s.axis + 2) % 3;
    for (size_t i = 0; i < n; ++i) {
      Eigen::Vector3d p;
      p[s.axis] = s.offset;
      p[u] = s.lo.x() + unit(rng) * (s.hi.x() - s.lo.x());
      p[v] = s.lo.y() + unit(rng) * (s.hi.y() - s.lo.y());
      add(p, PanopticLabel::stuff(s.cls), s.cls);
    }
  }

  for (size_t k = 0; k < spec.things.size(); ++k) {
    const auto& t = spec.things[k];
    const PanopticLabel label =
        PanopticLabel::instance(static_cast<InstanceId>(k + 1));
    if (t.shape == ThingPrimitive::Shape::kSphere) {
      const double area = 4.0 * M_PI * t.radius * t.radius;
      const size_t n = static_cast<size_t>(std::llround(area * density));
      for (size_t i = 0; i < n; ++i) {
        const double z = 2.0 * unit(rng) - 1.0;
        const double phi = 2.0 * M_PI * unit(rng);
        const double r_xy = std::sqrt(std::max(0.0, 1.0 - z * z));
        const Eigen::Vector3d dir(r_xy * std::cos(phi), r_xy * std::sin(phi), z);
        add(t.center.cast<double>() + t.radius * dir, label, t.cls);
      }
    } else {
      const Eigen::Vector3d h = t.half_extent.cast<double>();
      for (int axis = 0; axis < 3; ++axis) {
        const int u = (axis + 1) % 3, v = (axis + 2) % 3;
        const double face_area = 4.0 * h[u] * h[v];
        const size_t n = static_cast<size_t>(std::llround(face_area * density));
        for (int side = -1; side <= 1; side += 2) {
          for (size_t i = 0; i < n; ++i) {
            Eigen::Vector3d p = t.center.cast<double>();
            p[axis] += side * h[axis];
            p[u] += (2.0 * unit(rng) - 1.0) * h[u];
            p[v] += (2.0 * unit(rng) - 1.0) * h[v];
            add(p, label, t.cls);
          }
        }
      }
    }
  }
  return out;
}

std::vector<Eigen::Matrix4d> orbit_trajectory(const Eigen::Vector3f& target,
                                              float radius, float height,
                                              int frames, float revolutions) {
  std::vector<Eigen::Matrix4d> poses;
  poses.reserve(frames);
  for (int i = 0; i < frames; ++i) {
    const double angle = 2.0 * M_PI * revolutions * i / std::max(frames, 1);
    const Eigen::Vector3d eye =
        target.cast<double>() +
        Eigen::Vector3d(radius * std::cos(angle), radius * std::sin(angle),
                        height);
    Eigen::Vector3d forward = (target.cast<double>() - eye).normalized();
    Eigen::Vector3d right = forward.cross(Eigen::Vector3d::UnitZ());
    if (right.norm() < 1e-9) right = Eigen::Vector3d::UnitX();
    right.normalize();
    const Eigen::Vector3d down = forward.cross(right);

    Eigen::Matrix4d pose = Eigen::Matrix4d::Identity();
    pose.block<3, 1>(0, 0) = right;
    pose.block<3, 1>(0, 1) = down;
    pose.block<3, 1>(0, 2) = forward;
    pose.block<3, 1>(0, 3) = eye;
    poses.push_back(pose);
  }
  return poses;
}

namespace {

LabelSchema schema_from_json(const nlohmann::json& j) {
  require_known_keys(j, {"stuff", "things"}, "schema");
  std::map<ClassId, std::string> stuff, things;
  for (const auto& [key, value] : j.at("stuff").items())
    stuff[static_cast<ClassId>(std::stoi(key))] = value.get<std::string>();
  for (const auto& [key, value] : j.at("things").items())
    things[static_cast<ClassId>(std::stoi(key))] = value.get<std::string>();
  return LabelSchema(stuff, things);
}

nlohmann::json schema_to_json(const LabelSchema& schema) {
  nlohmann::json stuff = nlohmann::json::object();
  nlohmann::json things = nlohmann::json::object();
  for (const auto& [id, name] : schema.stuff_classes())
    stuff[std::to_string(id)] = name;
  for (const auto& [id, name] : schema.thing_classes())
    things[std::to_string(id)] = name;
  return {{"stuff", stuff}, {"things", things}};
}

Eigen::Vector3f vec3_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3)
    throw std::invalid_argument("expected a 3-element array");
  return {j[0].get<float>(), j[1].get<float>(), j[2].get<float>()};
}

}  // namespace

SceneSpec load_scene(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open scene file " + path);
  nlohmann::json j;
  is >> j;

  require_known_keys(j,
                     {"schema", "room", "surfaces", "things", "trajectory",
                      "intrinsics", "resolution", "noise"},
                     "scene");
  SceneSpec spec;
  spec.schema = schema_from_json(j.at("schema"));

  const auto& room = j.at("room");
  require_known_keys(room, {"min", "max"}, "scene.room");
  spec.room_min = vec3_from_json(room.at("min"));
  spec.room_max = vec3_from_json(room.at("max"));

  for (const auto& js : json_get(j, "surfaces", nlohmann::json::array())) {
    require_known_keys(js, {"axis", "offset", "lo", "hi", "class"},
                       "scene.surfaces[]");
    StuffSurface s;
    s.axis = js.at("axis").get<int>();
    s.offset = js.at("offset").get<float>();
    s.lo = {js.at("lo")[0].get<float>(), js.at("lo")[1].get<float>()};
    s.hi = {js.at("hi")[0].get<float>(), js.at("hi")[1].get<float>()};
    s.cls = js.at("class").get<ClassId>();
    spec.surfaces.push_back(s);
  }

  for (const auto& jt : json_get(j, "things", nlohmann::json::array())) {
    require_known_keys(jt, {"shape", "class", "center", "radius", "half_extent"},
                       "scene.things[]");
    ThingPrimitive t;
    const std::string shape = jt.at("shape").get<std::string>();
    if (shape == "sphere") t.shape = ThingPrimitive::Shape::kSphere;
    else if (shape == "box") t.shape = ThingPrimitive::Shape::kBox;
    else throw std::invalid_argument("unknown primitive shape " + shape);
    t.cls = jt.at("class").get<ClassId>();
    t.center = vec3_from_json(jt.at("center"));
    if (t.shape == ThingPrimitive::Shape::kSphere)
      t.radius = jt.at("radius").get<float>();
    else
      t.half_extent = vec3_from_json(jt.at("half_extent"));
    spec.things.push_back(t);
  }

  const auto& traj = j.at("trajectory");
  if (traj.contains("orbit")) {
    require_known_keys(traj, {"orbit"}, "scene.trajectory");
    const auto& orbit = traj.at("orbit");
    require_known_keys(
        orbit, {"target", "radius", "height", "frames", "revolutions"},
        "scene.trajectory.orbit");
    spec.trajectory = orbit_trajectory(
        vec3_from_json(orbit.at("target")), orbit.at("radius").get<float>(),
        orbit.at("height").get<float>(), orbit.at("frames").get<int>(),
        json_get(orbit, "revolutions", 1.0f));
  } else {
    require_known_keys(traj, {"poses"}, "scene.trajectory");
    for (const auto& jp : traj.at("poses")) {
      if (!jp.is_array() || jp.size() != 16)
        throw std::invalid_argument("pose must have 16 row-major entries");
      Eigen::Matrix4d pose;
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) pose(r, c) = jp[r * 4 + c].get<double>();
      spec.trajectory.push_back(pose);
    }
  }

  const auto& intr = j.at("intrinsics");
  require_known_keys(intr, {"fx", "fy", "cx", "cy"}, "scene.intrinsics");
  spec.intrinsics.fx = intr.at("fx").get<double>();
  spec.intrinsics.fy = intr.at("fy").get<double>();
  spec.intrinsics.cx = intr.at("cx").get<double>();
  spec.intrinsics.cy = intr.at("cy").get<double>();

  const auto& res = j.at("resolution");
  spec.width = res[0].get<int>();
  spec.height = res[1].get<int>();

  if (j.contains("noise")) {
    const auto& jn = j.at("noise");
    require_known_keys(jn,
                       {"depth_sigma_base", "depth_sigma_quadratic",
                        "label_flip_rate", "mask_morph_px", "conf_min",
                        "conf_max", "class_smoothing", "permute_instance_ids"},
                       "scene.noise");
    spec.noise.depth_sigma_base = json_get(jn, "depth_sigma_base", 0.0f);
    spec.noise.depth_sigma_quadratic =
        json_get(jn, "depth_sigma_quadratic", 0.0f);
    spec.noise.label_flip_rate = json_get(jn, "label_flip_rate", 0.0f);
    spec.noise.mask_morph_px = json_get(jn, "mask_morph_px", 0);
    spec.noise.conf_min = json_get(jn, "conf_min", 1.0f);
    spec.noise.conf_max = json_get(jn, "conf_max", 1.0f);
    spec.noise.class_smoothing = json_get(jn, "class_smoothing", 0.0f);
    spec.noise.permute_instance_ids =
        json_get(jn, "permute_instance_ids", false);
  }

  spec.validate();
  return spec;
}

void save_scene(const SceneSpec& spec, const std::string& path) {
  nlohmann::json j;
  j["schema"] = schema_to_json(spec.schema);
  j["room"] = {{"min", {spec.room_min.x(), spec.room_min.y(), spec.room_min.z()}},
               {"max", {spec.room_max.x(), spec.room_max.y(), spec.room_max.z()}}};
  j["surfaces"] = nlohmann::json::array();
  for (const auto& s : spec.surfaces)
    j["surfaces"].push_back({{"axis", s.axis},
                             {"offset", s.offset},
                             {"lo", {s.lo.x(), s.lo.y()}},
                             {"hi", {s.hi.x(), s.hi.y()}},
                             {"class", s.cls}});
  j["things"] = nlohmann::json::array();
  for (const auto& t : spec.things) {
    nlohmann::json jt = {{"class", t.cls},
                         {"center", {t.center.x(), t.center.y(), t.center.z()}}};
    if (t.shape == ThingPrimitive::Shape::kSphere) {
      jt["shape"] = "sphere";
      jt["radius"] = t.radius;
    } else {
      jt["shape"] = "box";
      jt["half_extent"] = {t.half_extent.x(), t.half_extent.y(),
                           t.half_extent.z()};
    }
    j["things"].push_back(jt);
  }
  j["trajectory"]["poses"] = nlohmann::json::array();
  for (const auto& pose : spec.trajectory) {
    std::vector<double> flat(16);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) flat[r * 4 + c] = pose(r, c);
    j["trajectory"]["poses"].push_back(flat);
  }
  j["intrinsics"] = {{"fx", spec.intrinsics.fx},
                     {"fy", spec.intrinsics.fy},
                     {"cx", spec.intrinsics.cx},
                     {"cy", spec.intrinsics.cy}};
  j["resolution"] = {spec.width, spec.height};
  j["noise"] = {{"depth_sigma_base", spec.noise.depth_sigma_base},
                {"depth_sigma_quadratic", spec.noise.depth_sigma_quadratic},
                {"label_flip_rate", spec.noise.label_flip_rate},
                {"mask_morph_px", spec.noise.mask_morph_px},
                {"conf_min", spec.noise.conf_min},
                {"conf_max", spec.noise.conf_max},
                {"class_smoothing", spec.noise.class_smoothing},
                {"permute_instance_ids", spec.noise.permute_instance_ids}};

  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write scene file " + path);
  os << j.dump(2) << "\n";
}

}  // namespace panmap
