#include "test_util.hpp"
#include "unseg/transfer.hpp"

namespace unseg {
namespace {

using testing::TempDir;

TEST(ClassMap, IdentityKeepsLabels) {
  const auto m = ClassMap::identity(4);
  for (int l = 0; l < 4; ++l) EXPECT_EQ(m(static_cast<std::uint8_t>(l)), l);
  EXPECT_EQ(m(kIgnoreLabel), kIgnoreLabel);
  EXPECT_ERRC(m(4), Errc::label_out_of_range);
}

TEST(ClassMap, UnmappedGoToBackground) {
  const ClassMap m(5, 3, {{1, 2}, {3, 1}});
  EXPECT_EQ(m(0), 0);
  EXPECT_EQ(m(1), 2);
  EXPECT_EQ(m(2), 0);
  EXPECT_EQ(m(3), 1);
  EXPECT_EQ(m(4), 0);
  LabelMask mask(3, 2);
  mask.labels = {0, 1, 2, 3, 4, kIgnoreLabel};
  EXPECT_EQ(transfer_remap(mask, m).labels,
            (std::vector<std::uint8_t>{0, 2, 0, 1, 0, kIgnoreLabel}));
}

TEST(ClassMap, RejectsBadEntries) {
  EXPECT_ERRC(ClassMap(3, 3, {{3, 1}}), Errc::label_out_of_range);
  EXPECT_ERRC(ClassMap(3, 3, {{1, 3}}), Errc::label_out_of_range);
  EXPECT_ERRC(ClassMap(3, 3, {{0, 1}}), Errc::invalid_argument);
  EXPECT_ERRC(ClassMap(0, 3, {}), Errc::invalid_argument);
}

TEST(ClassMap, FromNamesNormalizesAndAliases) {
  const std::vector<std::string> src{"background", "Dining Table", "airplane", "zebra"};
  const std::vector<std::string> tgt{"background", "aeroplane", "diningtable"};
  const auto m = ClassMap::from_names(src, tgt, {{"airplane", "aeroplane"}});
  EXPECT_EQ(m(1), 2);
  EXPECT_EQ(m(2), 1);
  EXPECT_EQ(m(3), 0);
  EXPECT_EQ(m.target_names(), tgt);
  EXPECT_EQ(normalize_class_name("Potted-Plant 2"), "pottedplant2");
}

TEST(ClassMap, LoadsBothFileForms) {
  TempDir dir;
  testing::write_text(dir / "a.json",
                      R"({"source_classes": 4, "target_classes": 3, "map": {"1": 2, "3": 1}})");
  const auto a = ClassMap::load(dir / "a.json");
  EXPECT_EQ(a(1), 2);
  EXPECT_EQ(a(2), 0);
  testing::write_text(dir / "b.json",
                      R"({"source_names": ["bg", "car"], "target_names": ["bg", "auto"],
                          "aliases": {"car": "auto"}})");
  EXPECT_EQ(ClassMap::load(dir / "b.json")(1), 1);
  testing::write_text(dir / "c.json", R"({"source_classes": 4, "target_classes": 3, "map": {"x": 1}})");
  EXPECT_ERRC(ClassMap::load(dir / "c.json"), Errc::malformed);
  testing::write_text(dir / "d.json", "{");
  EXPECT_ERRC(ClassMap::load(dir / "d.json"), Errc::malformed);
  EXPECT_ERRC(ClassMap::load(dir / "none.json"), Errc::io);
}

TEST(ClassMap, RemapList) {
  const ClassMap m(3, 2, {{2, 1}});
  std::vector<LabelMask> masks{LabelMask(1, 1, 2), LabelMask(1, 1, 1)};
  const auto out = transfer_remap(masks, m);
  EXPECT_EQ(out[0].labels[0], 1);
  EXPECT_EQ(out[1].labels[0], 0);
  EXPECT_ERRC(transfer_remap(std::vector<LabelMask>{LabelMask(1, 1, 9)}, m),
              Errc::label_out_of_range);
}

}  // namespace
}  // namespace unseg
