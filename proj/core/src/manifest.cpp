#include "unseg/manifest.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <unordered_set>

#include "unseg/error.hpp"

namespace unseg {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::optional<fs::path> optional_path(const json& obj, const char* key,
                                      const fs::path& base) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  fs::path p = it->get<std::string>();
  return p.is_absolute() ? p : base / p;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

const ManifestEntry* DatasetManifest::find(const std::string& image_id) const {
  for (const auto& e : entries) {
    if (e.image_id == image_id) return &e;
  }
  return nullptr;
}

std::vector<std::string> load_class_names(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open classes file: " + path.string());
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (!line.empty()) names.push_back(line);
  }
  return names;
}

DatasetManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open manifest: " + path.string());
  const fs::path base = path.parent_path();
  DatasetManifest manifest;
  std::unordered_set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto where = [&] { return path.string() + ":" + std::to_string(line_no); };
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(Errc::malformed, where() + ": " + e.what());
    }
    ManifestEntry entry;
    try {
      if (!obj.is_object()) throw Error(Errc::malformed, where() + ": expected an object");
      if (!obj.contains("image_id") || !obj["image_id"].is_string()) {
        throw Error(Errc::malformed, where() + ": missing string field image_id");
      }
      entry.image_id = obj["image_id"].get<std::string>();
      if (entry.image_id.empty()) throw Error(Errc::malformed, where() + ": empty image_id");
      if (auto p = optional_path(obj, "image_path", base)) entry.image_path = *p;
      entry.saliency_path = optional_path(obj, "saliency_path", base);
      entry.feature_path = optional_path(obj, "feature_path", base);
      entry.dense_feature_path = optional_path(obj, "dense_feature_path", base);
      entry.gt_mask_path = optional_path(obj, "gt_mask_path", base);
    } catch (const json::exception& e) {
      throw Error(Errc::malformed, where() + ": " + e.what());
    }
    if (!seen.insert(entry.image_id).second) {
      throw Error(Errc::duplicate_id,
                  where() + ": duplicate image_id \"" + entry.image_id + "\"");
    }
    manifest.entries.push_back(std::move(entry));
  }

  const fs::path stem_classes = base / (path.stem().string() + ".classes.txt");
  const fs::path shared_classes = base / "classes.txt";
  if (fs::exists(stem_classes)) {
    manifest.class_names = load_class_names(stem_classes);
  } else if (fs::exists(shared_classes)) {
    manifest.class_names = load_class_names(shared_classes);
  }
  return manifest;
}

void write_manifest(const DatasetManifest& manifest, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot open for writing: " + path.string());
  for (const auto& e : manifest.entries) {
    json obj = {{"image_id", e.image_id}, {"image_path", e.image_path.string()}};
    if (e.saliency_path) obj["saliency_path"] = e.saliency_path->string();
    if (e.feature_path) obj["feature_path"] = e.feature_path->string();
    if (e.dense_feature_path) obj["dense_feature_path"] = e.dense_feature_path->string();
    if (e.gt_mask_path) obj["gt_mask_path"] = e.gt_mask_path->string();
    out << obj.dump() << '\n';
  }
  if (!manifest.class_names.empty()) {
    std::ofstream classes(path.parent_path() / (path.stem().string() + ".classes.txt"),
                          std::ios::trunc);
    for (const auto& name : manifest.class_names) classes << name << '\n';
  }
}

}  // namespace unseg
