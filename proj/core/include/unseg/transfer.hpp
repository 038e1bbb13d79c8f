#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "unseg/image.hpp"

namespace unseg {

// Label rewrite from a source label space of `source_classes` labels to a
// target space of `target_classes`. Source labels without an entry map to
// background; background and ignore map to themselves.
class ClassMap {
 public:
  ClassMap(int source_classes, int target_classes, const std::map<int, int>& entries);

  static ClassMap identity(int classes);
  // Matches names after lowercasing and dropping non-alphanumerics
  // ("dining table" == "diningtable"). `aliases` maps source names to target
  // names for pairs that differ ("airplane" -> "aeroplane").
  static ClassMap from_names(const std::vector<std::string>& source_names,
                             const std::vector<std::string>& target_names,
                             const std::map<std::string, std::string>& aliases = {});
  // {"source_classes": N, "target_classes": M, "map": {"src": tgt}} or
  // {"source_names": [...], "target_names": [...], "aliases": {...}}.
  static ClassMap load(const std::filesystem::path& path);

  int source_classes() const { return source_; }
  int target_classes() const { return target_; }
  std::uint8_t operator()(std::uint8_t label) const;
  // Filled by from_names; empty otherwise.
  const std::vector<std::string>& target_names() const { return target_names_; }

 private:
  int source_ = 0;
  int target_ = 0;
  std::array<std::int16_t, 256> lut_{};
  std::vector<std::string> target_names_;
};

// Throws Errc::label_out_of_range for labels outside the source space.
LabelMask transfer_remap(const LabelMask& mask, const ClassMap& map);
std::vector<LabelMask> transfer_remap(const std::vector<LabelMask>& masks, const ClassMap& map);

std::string normalize_class_name(const std::string& name);

}  // namespace unseg
