#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace unseg {

struct ManifestEntry {
  std::string image_id;
  std::filesystem::path image_path;
  std::optional<std::filesystem::path> saliency_path;
  std::optional<std::filesystem::path> feature_path;
  std::optional<std::filesystem::path> dense_feature_path;
  std::optional<std::filesystem::path> gt_mask_path;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  // Index 0 is "background". Empty when no classes file accompanies the
  // manifest.
  std::vector<std::string> class_names;

  const ManifestEntry* find(const std::string& image_id) const;
};

// JSON-lines manifest, one object per line with keys image_id, image_path,
// and optionally saliency_path, feature_path, dense_feature_path,
// gt_mask_path. Relative paths resolve against the manifest's directory.
// Class names come from "<stem>.classes.txt" or "classes.txt" next to the
// manifest, one name per line.
//
// Throws Errc::malformed (with the 1-based line number) for unparsable lines
// and Errc::duplicate_id for a repeated image_id.
DatasetManifest load_manifest(const std::filesystem::path& path);

std::vector<std::string> load_class_names(const std::filesystem::path& path);

void write_manifest(const DatasetManifest& manifest,
                    const std::filesystem::path& path);

}  // namespace unseg
