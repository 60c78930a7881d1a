#pragma once

#include <json.hpp>

#include <set>
#include <stdexcept>
#include <string>

namespace panmap {

// Rejects JSON objects carrying keys outside the allowed set; config files
// fail loudly on typos instead of silently ignoring them.
inline void require_known_keys(const nlohmann::json& obj,
                               const std::set<std::string>& allowed,
                               const std::string& context) {
  if (!obj.is_object())
    throw std::invalid_argument(context + ": expected a JSON object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key))
      throw std::invalid_argument(context + ": unknown key \"" + key + "\"");
  }
}

template <typename T>
T json_get(const nlohmann::json& obj, const std::string& key, T fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  return it->get<T>();
}

}  // namespace panmap
