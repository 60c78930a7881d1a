#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>

namespace panmap {

using ClassId = uint16_t;     // 0 is reserved for "no class"
using InstanceId = uint32_t;  // positive, unique map-wide

// A panoptic label is either a stuff class, a thing instance ID, or unknown.
// Packed into 32 bits so voxels stay small: 0 = unknown, MSB set = stuff
// class, otherwise an instance ID (1 .. 2^31-1).
class PanopticLabel {
 public:
  constexpr PanopticLabel() : code_(0) {}

  static constexpr PanopticLabel unknown() { return PanopticLabel(); }
  static PanopticLabel stuff(ClassId c) {
    if (c == 0) throw std::invalid_argument("stuff class ID must be nonzero");
    return PanopticLabel(kStuffBit | static_cast<uint32_t>(c));
  }
  static PanopticLabel instance(InstanceId z) {
    if (z == 0 || (z & kStuffBit))
      throw std::invalid_argument("instance ID out of range");
    return PanopticLabel(z);
  }

  bool is_unknown() const { return code_ == 0; }
  bool is_stuff() const { return (code_ & kStuffBit) != 0; }
  bool is_instance() const { return code_ != 0 && (code_ & kStuffBit) == 0; }

  ClassId stuff_class() const { return static_cast<ClassId>(code_ & 0xffff); }
  InstanceId instance_id() const { return code_; }

  friend bool operator==(PanopticLabel a, PanopticLabel b) {
    return a.code_ == b.code_;
  }
  friend bool operator!=(PanopticLabel a, PanopticLabel b) {
    return a.code_ != b.code_;
  }
  // Canonical ordering (unknown < stuff < instance, then by ID); used
  // wherever label iteration order must be deterministic.
  friend bool operator<(PanopticLabel a, PanopticLabel b) {
    return a.sort_key() < b.sort_key();
  }

  uint32_t code() const { return code_; }
  static PanopticLabel from_code(uint32_t code) { return PanopticLabel(code); }

 private:
  static constexpr uint32_t kStuffBit = 0x80000000u;
  explicit constexpr PanopticLabel(uint32_t code) : code_(code) {}

  uint64_t sort_key() const {
    uint64_t kind = is_unknown() ? 0 : (is_stuff() ? 1 : 2);
    uint64_t id = is_stuff() ? stuff_class() : code_;
    return (kind << 32) | id;
  }

  uint32_t code_;
};

struct PanopticLabelHash {
  size_t operator()(PanopticLabel l) const {
    return std::hash<uint32_t>()(l.code());
  }
};

// Class vocabulary split into stuff and thing classes. The two sets are
// disjoint; every known class belongs to exactly one of them.
class LabelSchema {
 public:
  LabelSchema() = default;
  LabelSchema(std::map<ClassId, std::string> stuff,
              std::map<ClassId, std::string> things)
      : stuff_(std::move(stuff)), things_(std::move(things)) {
    for (const auto& [id, name] : stuff_) {
      if (id == 0) throw std::invalid_argument("class ID 0 is reserved");
      if (things_.count(id))
        throw std::invalid_argument("class " + std::to_string(id) +
                                    " is both stuff and thing");
    }
    for (const auto& [id, name] : things_)
      if (id == 0) throw std::invalid_argument("class ID 0 is reserved");
  }

  bool is_stuff(ClassId c) const { return stuff_.count(c) != 0; }
  bool is_thing(ClassId c) const { return things_.count(c) != 0; }
  bool is_known(ClassId c) const { return is_stuff(c) || is_thing(c); }

  const std::map<ClassId, std::string>& stuff_classes() const { return stuff_; }
  const std::map<ClassId, std::string>& thing_classes() const { return things_; }

  std::string class_name(ClassId c) const {
    auto it = stuff_.find(c);
    if (it != stuff_.end()) return it->second;
    it = things_.find(c);
    if (it != things_.end()) return it->second;
    return "class_" + std::to_string(c);
  }

 private:
  std::map<ClassId, std::string> stuff_;
  std::map<ClassId, std::string> things_;
};

}  // namespace panmap
