#include "test_util.hpp"
#include "unseg/manifest.hpp"

namespace unseg {
namespace {

using testing::TempDir;
using testing::write_text;

TEST(Manifest, TwoLines) {
  TempDir dir;
  write_text(dir / "m.jsonl",
             "{\"image_id\": \"a\", \"image_path\": \"img/a.png\", \"saliency_path\": \"s/a.png\"}\n"
             "{\"image_id\": \"b\", \"image_path\": \"/abs/b.png\", \"gt_mask_path\": \"gt/b.png\"}\n");
  const auto m = load_manifest(dir / "m.jsonl");
  ASSERT_EQ(m.entries.size(), 2u);
  EXPECT_EQ(m.entries[0].image_id, "a");
  EXPECT_EQ(m.entries[0].image_path, dir.path() / "img/a.png");
  EXPECT_EQ(*m.entries[0].saliency_path, dir.path() / "s/a.png");
  EXPECT_FALSE(m.entries[0].feature_path);
  EXPECT_EQ(m.entries[1].image_path, "/abs/b.png");
  EXPECT_EQ(*m.entries[1].gt_mask_path, dir.path() / "gt/b.png");
  ASSERT_NE(m.find("b"), nullptr);
  EXPECT_EQ(m.find("zzz"), nullptr);
}

TEST(Manifest, DuplicateIdNamesIt) {
  TempDir dir;
  write_text(dir / "m.jsonl",
             "{\"image_id\": \"img7\", \"image_path\": \"a.png\"}\n"
             "{\"image_id\": \"img7\", \"image_path\": \"b.png\"}\n");
  EXPECT_ERRC(load_manifest(dir / "m.jsonl"), Errc::duplicate_id);
  try {
    load_manifest(dir / "m.jsonl");
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("img7"), std::string::npos);
  }
}

TEST(Manifest, EmptyFileIsEmptyManifest) {
  TempDir dir;
  write_text(dir / "m.jsonl", "");
  EXPECT_TRUE(load_manifest(dir / "m.jsonl").entries.empty());
}

TEST(Manifest, MalformedLineReportsLineNumber) {
  TempDir dir;
  write_text(dir / "m.jsonl",
             "{\"image_id\": \"a\", \"image_path\": \"a.png\"}\n"
             "\n"
             "{\"image_id\": \"b\", \n");
  try {
    load_manifest(dir / "m.jsonl");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::malformed);
    EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
  }
}

TEST(Manifest, MissingRequiredKeyIsMalformed) {
  TempDir dir;
  write_text(dir / "m.jsonl", "{\"image_path\": \"a.png\"}\n");
  EXPECT_ERRC(load_manifest(dir / "m.jsonl"), Errc::malformed);
}

TEST(Manifest, ClassNamesFromSiblingFile) {
  TempDir dir;
  write_text(dir / "m.jsonl", "");
  write_text(dir / "classes.txt", "background\ncat\ndog\n");
  EXPECT_EQ(load_manifest(dir / "m.jsonl").class_names,
            (std::vector<std::string>{"background", "cat", "dog"}));
  write_text(dir / "m.classes.txt", "background\nbird\n");
  EXPECT_EQ(load_manifest(dir / "m.jsonl").class_names,
            (std::vector<std::string>{"background", "bird"}));
}

TEST(Manifest, WriteThenLoad) {
  TempDir dir;
  DatasetManifest m;
  m.class_names = {"background", "x"};
  ManifestEntry e;
  e.image_id = "q";
  e.image_path = dir / "q.png";
  e.dense_feature_path = dir / "q.ftn";
  m.entries.push_back(e);
  write_manifest(m, dir / "out.jsonl");
  const auto back = load_manifest(dir / "out.jsonl");
  ASSERT_EQ(back.entries.size(), 1u);
  EXPECT_EQ(back.entries[0].image_path, e.image_path);
  EXPECT_EQ(back.entries[0].dense_feature_path, e.dense_feature_path);
  EXPECT_EQ(back.class_names, m.class_names);
}

TEST(Manifest, MissingFileIsIoError) {
  TempDir dir;
  EXPECT_ERRC(load_manifest(dir / "none.jsonl"), Errc::io);
}

}  // namespace
}  // namespace unseg
