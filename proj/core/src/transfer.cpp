#include "unseg/transfer.hpp"

#include <cctype>
#include <fstream>
#include <nlohmann/json.hpp>

#include "unseg/error.hpp"

namespace unseg {

ClassMap::ClassMap(int source_classes, int target_classes, const std::map<int, int>& entries)
    : source_(source_classes), target_(target_classes) {
  if (source_classes < 1 || source_classes > kMaxClasses + 1 || target_classes < 1 ||
      target_classes > kMaxClasses + 1) {
    throw Error(Errc::invalid_argument, "class counts must lie in [1, 255]");
  }
  lut_.fill(-1);
  for (int s = 0; s < source_; ++s) lut_[s] = 0;
  lut_[kIgnoreLabel] = kIgnoreLabel;
  for (const auto& [src, dst] : entries) {
    if (src < 0 || src >= source_) {
      throw Error(Errc::label_out_of_range, "class map references unknown source label " +
                                                std::to_string(src));
    }
    if (dst < 0 || dst >= target_) {
      throw Error(Errc::label_out_of_range, "class map references unknown target label " +
                                                std::to_string(dst));
    }
    if (src == 0 && dst != 0) {
      throw Error(Errc::invalid_argument, "background must map to background");
    }
    lut_[src] = static_cast<std::int16_t>(dst);
  }
}

ClassMap ClassMap::identity(int classes) {
  std::map<int, int> e;
  for (int c = 0; c < classes; ++c) e[c] = c;
  return ClassMap(classes, classes, e);
}

std::string normalize_class_name(const std::string& name) {
  std::string out;
  for (unsigned char ch : name) {
    if (std::isalnum(ch)) out.push_back(static_cast<char>(std::tolower(ch)));
  }
  return out;
}

ClassMap ClassMap::from_names(const std::vector<std::string>& source_names,
                              const std::vector<std::string>& target_names,
                              const std::map<std::string, std::string>& aliases) {
  std::map<std::string, int> target_index;
  for (std::size_t t = 0; t < target_names.size(); ++t) {
    target_index.emplace(normalize_class_name(target_names[t]), static_cast<int>(t));
  }
  std::map<std::string, std::string> alias_norm;
  for (const auto& [a, b] : aliases) alias_norm[normalize_class_name(a)] = normalize_class_name(b);
  std::map<int, int> entries;
  for (std::size_t s = 1; s < source_names.size(); ++s) {
    auto key = normalize_class_name(source_names[s]);
    if (auto a = alias_norm.find(key); a != alias_norm.end()) key = a->second;
    if (auto it = target_index.find(key); it != target_index.end() && it->second != 0) {
      entries[static_cast<int>(s)] = it->second;
    }
  }
  ClassMap map(static_cast<int>(source_names.size()), static_cast<int>(target_names.size()),
               entries);
  map.target_names_ = target_names;
  return map;
}

ClassMap ClassMap::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open class map: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
    if (j.contains("source_names")) {
      return from_names(j.at("source_names").get<std::vector<std::string>>(),
                        j.at("target_names").get<std::vector<std::string>>(),
                        j.value("aliases", std::map<std::string, std::string>{}));
    }
    std::map<int, int> entries;
    for (const auto& [k, v] : j.at("map").items()) entries[std::stoi(k)] = v.get<int>();
    return ClassMap(j.at("source_classes").get<int>(), j.at("target_classes").get<int>(), entries);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::malformed, path.string() + ": " + e.what());
  } catch (const std::invalid_argument&) {
    throw Error(Errc::malformed, path.string() + ": map keys must be integers");
  }
}

std::uint8_t ClassMap::operator()(std::uint8_t label) const {
  const auto v = lut_[label];
  if (v < 0) {
    throw Error(Errc::label_out_of_range, "label " + std::to_string(label) +
                                              " is outside the source label space of " +
                                              std::to_string(source_));
  }
  return static_cast<std::uint8_t>(v);
}

LabelMask transfer_remap(const LabelMask& mask, const ClassMap& map) {
  LabelMask out = mask;
  for (auto& v : out.labels) v = map(v);
  return out;
}

std::vector<LabelMask> transfer_remap(const std::vector<LabelMask>& masks, const ClassMap& map) {
  std::vector<LabelMask> out;
  out.reserve(masks.size());
  for (const auto& m : masks) out.push_back(transfer_remap(m, map));
  return out;
}

}  // namespace unseg
