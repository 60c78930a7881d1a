#include "panmap/dataset.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json_util.hpp"
#include "panmap/logging.hpp"
#include "panmap/meshing.hpp"
#include "panmap/png_io.hpp"

namespace fs = std::filesystem;

namespace panmap {

namespace {

std::string frame_name(size_t index) {
  std::ostringstream ss;
  ss << std::setw(6) << std::setfill('0') << index;
  return ss.str();
}

void write_schema_file(const LabelSchema& schema, const std::string& path) {
  nlohmann::json stuff = nlohmann::json::object();
  nlohmann::json things = nlohmann::json::object();
  for (const auto& [id, name] : schema.stuff_classes())
    stuff[std::to_string(id)] = name;
  for (const auto& [id, name] : schema.thing_classes())
    things[std::to_string(id)] = name;
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << nlohmann::json{{"stuff", stuff}, {"things", things}}.dump(2) << "\n";
}

LabeledMesh points_as_mesh(const LabeledPointSet& points) {
  LabeledMesh mesh;
  mesh.vertices = points.points;
  mesh.labels = points.labels;
  mesh.class_ids = points.class_ids;
  mesh.colors.resize(points.size());
  for (size_t i = 0; i < points.size(); ++i)
    mesh.colors[i] = label_color(points.labels[i]);
  return mesh;
}

}  // namespace

LabelSchema load_schema(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  is >> j;
  require_known_keys(j, {"stuff", "things"}, "schema");
  std::map<ClassId, std::string> stuff, things;
  for (const auto& [key, value] : j.at("stuff").items())
    stuff[static_cast<ClassId>(std::stoi(key))] = value.get<std::string>();
  for (const auto& [key, value] : j.at("things").items())
    things[static_cast<ClassId>(std::stoi(key))] = value.get<std::string>();
  return LabelSchema(stuff, things);
}

DatasetWriter::DatasetWriter(const std::string& dir, const LabelSchema& schema,
                             const PinholeIntrinsics& intrinsics)
    : dir_(dir), schema_(schema) {
  fs::create_directories(fs::path(dir) / "frames");
  std::ofstream os(fs::path(dir) / "intrinsics.txt");
  if (!os) throw std::runtime_error("cannot write intrinsics in " + dir);
  os << std::setprecision(17) << intrinsics.fx << " " << intrinsics.fy << " "
     << intrinsics.cx << " " << intrinsics.cy << "\n";
  write_schema_file(schema, (fs::path(dir) / "schema.json").string());
}

void DatasetWriter::write_frame(size_t index, const CameraFrame& cam,
                                const SegmentationFrame& seg) {
  if (index != poses_.size())
    throw std::invalid_argument("frames must be written in order");
  const fs::path stem = fs::path(dir_) / "frames" / frame_name(index);

  Image<uint16_t> depth_mm(cam.depth.width(), cam.depth.height());
  for (size_t i = 0; i < cam.depth.size(); ++i)
    depth_mm[i] = static_cast<uint16_t>(std::clamp(
        std::lround(cam.depth[i] * 1000.0f), 0l, 65535l));
  write_png_gray16(depth_mm, stem.string() + ".depth.png");
  write_png_rgb8(cam.color, stem.string() + ".color.png");
  write_png_gray16(seg.class_map, stem.string() + ".class.png");
  write_png_gray16(seg.instance_map, stem.string() + ".instance.png");

  nlohmann::json dets = nlohmann::json::array();
  for (const auto& det : seg.detections) {
    nlohmann::json dist = nlohmann::json::object();
    for (const auto& [cls, p] : det.distribution)
      dist[std::to_string(cls)] = p;
    dets.push_back({{"id", det.id},
                    {"confidence", det.confidence},
                    {"distribution", dist}});
  }
  std::ofstream os(stem.string() + ".detections.json");
  if (!os) throw std::runtime_error("cannot write detections for frame " +
                                    std::to_string(index));
  os << dets.dump(2) << "\n";

  poses_.push_back(cam.pose);
}

void DatasetWriter::write_ground_truth(const LabeledPointSet& points) {
  export_ply(points_as_mesh(points), schema_,
             (fs::path(dir_) / "gt_points.ply").string());
}

void DatasetWriter::finalize() {
  std::ofstream os(fs::path(dir_) / "poses.txt");
  if (!os) throw std::runtime_error("cannot write poses in " + dir_);
  os << std::setprecision(17);
  for (const auto& pose : poses_) {
    for (int r = 0; r < 4; ++r) {
      os << pose(r, 0) << " " << pose(r, 1) << " " << pose(r, 2) << " "
         << pose(r, 3) << "\n";
    }
  }
}

Dataset::Dataset(const std::string& dir) : dir_(dir) {
  if (!fs::is_directory(dir))
    throw std::runtime_error("dataset directory not found: " + dir);
  schema_ = load_schema((fs::path(dir) / "schema.json").string());

  {
    std::ifstream is(fs::path(dir) / "intrinsics.txt");
    if (!is) throw std::runtime_error("missing intrinsics.txt in " + dir);
    if (!(is >> intrinsics_.fx >> intrinsics_.fy >> intrinsics_.cx >>
          intrinsics_.cy))
      throw std::runtime_error("malformed intrinsics.txt in " + dir);
  }

  {
    std::ifstream is(fs::path(dir) / "poses.txt");
    if (!is) throw std::runtime_error("missing poses.txt in " + dir);
    std::vector<double> numbers;
    double v;
    while (is >> v) numbers.push_back(v);
    if (numbers.size() % 16 != 0)
      throw std::runtime_error("poses.txt does not hold 4x4 matrices");
    for (size_t f = 0; f < numbers.size() / 16; ++f) {
      Eigen::Matrix4d pose;
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) pose(r, c) = numbers[f * 16 + r * 4 + c];
      poses_.push_back(pose);
    }
  }

  // Every pose must have its frame files and vice versa.
  size_t frame_files = 0;
  const fs::path frames_dir = fs::path(dir) / "frames";
  if (fs::is_directory(frames_dir)) {
    for (const auto& entry : fs::directory_iterator(frames_dir)) {
      const std::string name = entry.path().filename().string();
      if (name.size() > 10 && name.substr(6) == ".depth.png") ++frame_files;
    }
  }
  if (frame_files != poses_.size())
    throw std::runtime_error(
        "pose/frame count mismatch: " + std::to_string(poses_.size()) +
        " poses vs " + std::to_string(frame_files) + " depth frames");
}

std::string Dataset::frame_stem(size_t index) const {
  return (fs::path(dir_) / "frames" / frame_name(index)).string();
}

std::pair<CameraFrame, SegmentationFrame> Dataset::load_frame(
    size_t index) const {
  if (index >= poses_.size())
    throw std::out_of_range("frame index out of range");
  const std::string stem = frame_stem(index);
  try {
    CameraFrame cam;
    cam.intrinsics = intrinsics_;
    cam.pose = poses_[index];

    const Image<uint16_t> depth_mm = read_png_gray16(stem + ".depth.png");
    cam.depth = DepthImage(depth_mm.width(), depth_mm.height());
    for (size_t i = 0; i < depth_mm.size(); ++i)
      cam.depth[i] = depth_mm[i] / 1000.0f;
    cam.color = read_png_rgb8(stem + ".color.png");

    SegmentationFrame seg;
    seg.class_map = read_png_gray16(stem + ".class.png");
    seg.instance_map = read_png_gray16(stem + ".instance.png");

    std::ifstream is(stem + ".detections.json");
    if (!is) throw std::runtime_error("missing detections file");
    nlohmann::json j;
    is >> j;
    for (const auto& jd : j) {
      require_known_keys(jd, {"id", "confidence", "distribution"},
                         "detections[]");
      Detection det;
      det.id = jd.at("id").get<uint16_t>();
      det.confidence = jd.at("confidence").get<float>();
      for (const auto& [cls, p] : jd.at("distribution").items())
        det.distribution[static_cast<ClassId>(std::stoi(cls))] = p.get<float>();
      seg.detections.push_back(det);
    }

    cam.validate();
    seg.validate(schema_);
    if (!seg.class_map.same_size(cam.depth))
      throw std::runtime_error("segmentation/depth dimension mismatch");
    return {std::move(cam), std::move(seg)};
  } catch (const std::exception& e) {
    throw std::runtime_error("frame " + std::to_string(index) + ": " + e.what());
  }
}

std::optional<LabeledPointSet> Dataset::ground_truth() const {
  const fs::path path = fs::path(dir_) / "gt_points.ply";
  if (!fs::exists(path)) return std::nullopt;
  const LabeledMesh mesh = import_ply(path.string(), schema_);
  LabeledPointSet points;
  points.points = mesh.vertices;
  points.labels = mesh.labels;
  points.class_ids = mesh.class_ids;
  return points;
}

void generate_dataset(const SceneSpec& spec, uint64_t seed,
                      const std::string& dir, double gt_density) {
  spec.validate();
  DatasetWriter writer(dir, spec.schema, spec.intrinsics);
  for (size_t i = 0; i < spec.trajectory.size(); ++i) {
    const RenderedFrame frame = render_frame(spec, i, seed);
    writer.write_frame(i, frame.camera, frame.segmentation);
  }
  writer.write_ground_truth(ground_truth_points(spec, gt_density, seed));
  writer.finalize();
  save_scene(spec, (fs::path(dir) / "scene.json").string());
  PANMAP_LOG_INFO("generated dataset with %zu frames in %s",
                  spec.trajectory.size(), dir.c_str());
}

}  // namespace panmap
