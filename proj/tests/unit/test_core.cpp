#include <cmath>
#include <fstream>

#include <gtest/gtest.h>

#include "masr/core.hpp"
#include "masr/digest.hpp"
#include "masr/serialize.hpp"
#include "test_util.hpp"

using namespace masr;
using masr::testing::TempDir;

namespace {

FrameManifest three_frames() {
  FrameManifest m;
  m.video_id = "v";
  for (FrameIndex i = 0; i < 3; ++i) m.frames.push_back({i, std::to_string(i) + ".jpg", static_cast<double>(i)});
  return m;
}

}  // namespace

TEST(Manifest, AcceptsContiguousIndices) { EXPECT_NO_THROW(validate_manifest(three_frames())); }

TEST(Manifest, RejectsEmpty) {
  FrameManifest m;
  m.video_id = "v";
  EXPECT_MASR_ERROR(validate_manifest(m), ErrorKind::EmptyManifest);
}

TEST(Manifest, RejectsIndexGap) {
  auto m = three_frames();
  m.frames[2].index = 5;
  EXPECT_MASR_ERROR(validate_manifest(m), ErrorKind::IndexGap);
}

TEST(Manifest, RejectsNonMonotonicTimestamps) {
  auto m = three_frames();
  m.frames[2].timestamp_s = 0.5;
  EXPECT_MASR_ERROR(validate_manifest(m), ErrorKind::NonMonotonicTimestamps);
}

TEST(Manifest, RejectsNonPositiveFps) {
  auto m = three_frames();
  m.sample_fps = {0, 1};
  EXPECT_MASR_ERROR(validate_manifest(m), ErrorKind::InvalidFps);
}

TEST(Manifest, FileRoundTrip) {
  TempDir dir;
  auto m = three_frames();
  m.sample_fps = {30000, 1001};
  m.source_duration_s = 2.5;
  save_manifest(m, dir / "m.json");
  EXPECT_EQ(load_manifest(dir / "m.json"), m);
}

TEST(Rational, ContinuedFractionRecoversNtscRate) {
  EXPECT_EQ(rational_from_double(30000.0 / 1001.0), (Rational{30000, 1001}));
  EXPECT_EQ(rational_from_double(1.0), (Rational{1, 1}));
  EXPECT_EQ(rational_from_double(0.5), (Rational{1, 2}));
}

TEST(Rational, JsonForms) {
  EXPECT_EQ(nlohmann::json(Rational{1, 1}), nlohmann::json(1));
  EXPECT_EQ(nlohmann::json(Rational{30000, 1001}), nlohmann::json("30000/1001"));
  EXPECT_EQ(nlohmann::json("2/4").get<Rational>(), (Rational{2, 4}));
  EXPECT_EQ(nlohmann::json(25).get<Rational>(), (Rational{25, 1}));
  EXPECT_MASR_ERROR(nlohmann::json("x/y").get<Rational>(), ErrorKind::ParseError);
}

TEST(FeatureVector, NormalizedHasUnitNorm) {
  const auto v = FeatureVector::normalized({3.0, 4.0});
  EXPECT_TRUE(v.is_unit());
  EXPECT_DOUBLE_EQ(v.values()[0], 0.6);
  EXPECT_DOUBLE_EQ(v.values()[1], 0.8);
  EXPECT_NEAR(v.norm(), 1.0, 1e-15);
}

TEST(FeatureVector, RejectsBadInput) {
  EXPECT_MASR_ERROR(FeatureVector(std::vector<double>{}), ErrorKind::InvalidArgument);
  EXPECT_MASR_ERROR(FeatureVector({1.0, NAN}), ErrorKind::InvalidArgument);
  EXPECT_MASR_ERROR(FeatureVector({1.0, 1.0}, true), ErrorKind::InvalidArgument);
  EXPECT_MASR_ERROR(FeatureVector::normalized({0.0, 0.0}), ErrorKind::ZeroVector);
}

TEST(Clip, ValidateAgainstHorizon) {
  EXPECT_NO_THROW(validate_clip(Clip{0, 9, 4}, 10));
  EXPECT_MASR_ERROR(validate_clip(Clip{0, 10, std::nullopt}, 10), ErrorKind::OutOfRange);
  EXPECT_MASR_ERROR(validate_clip(Clip{5, 4, std::nullopt}, 10), ErrorKind::OutOfRange);
  EXPECT_MASR_ERROR(validate_clip(Clip{2, 6, 7}, 10), ErrorKind::OutOfRange);
  EXPECT_EQ((Clip{3, 7, std::nullopt}.length()), 5u);
}

TEST(Task, OptionCountAndGoldRange) {
  QaTask t{"t", "v", "q?", {"a", "b"}, 1};
  EXPECT_NO_THROW(validate_task(t));
  t.gold_index = 2;
  EXPECT_MASR_ERROR(validate_task(t), ErrorKind::InvalidArgument);
  t.gold_index.reset();
  t.options = {"only"};
  EXPECT_MASR_ERROR(validate_task(t), ErrorKind::InvalidArgument);
  t.options.assign(27, "x");
  EXPECT_MASR_ERROR(validate_task(t), ErrorKind::InvalidArgument);
}

TEST(Ledger, InsertsOncePerFrame) {
  ContextLedger ledger;
  EXPECT_TRUE(ledger.insert({4, "first", "m"}, 4.0, 0));
  EXPECT_FALSE(ledger.insert({4, "second", "m"}, 4.0, 1));
  EXPECT_EQ(ledger.entries().at(4).caption.text, "first");
  EXPECT_EQ(ledger.entries().at(4).insertion_round, 0);
  EXPECT_MASR_ERROR(ledger.insert({5, "", "m"}, 5.0, 1), ErrorKind::InvalidArgument);
  EXPECT_EQ(ledger.size(), 1u);
}

TEST(Ledger, IteratesInFrameOrderAndRoundTrips) {
  ContextLedger ledger;
  ledger.insert({9, "nine", "m"}, 9.0, 1);
  ledger.insert({2, "two", "m"}, 2.0, 0);
  std::vector<FrameIndex> order;
  for (const auto& [i, _] : ledger.entries()) order.push_back(i);
  EXPECT_EQ(order, (std::vector<FrameIndex>{2, 9}));
  EXPECT_EQ(nlohmann::json(ledger).get<ContextLedger>(), ledger);
}

TEST(Dte, ParamsValidation) {
  EXPECT_NO_THROW(dte_presets::standard().validate());
  EXPECT_MASR_ERROR((DteParams{2, 6, 3, 2}.validate()), ErrorKind::InvalidArgument);
  EXPECT_MASR_ERROR((DteParams{3, 6, 3, 0}.validate()), ErrorKind::InvalidArgument);
  EXPECT_MASR_ERROR((DteParams{3, -1, 3, 2}.validate()), ErrorKind::InvalidArgument);
}

TEST(Serialize, TaskAndVerdictRoundTrip) {
  const QaTask t{"t1", "v1", "what?", {"a", "b", "c"}, 2};
  EXPECT_EQ(nlohmann::json(t).get<QaTask>(), t);
  const QaTask no_gold{"t2", "v1", "what?", {"a", "b"}, std::nullopt};
  EXPECT_EQ(nlohmann::json(no_gold).get<QaTask>(), no_gold);
  const Verdict v{1, 2, "because"};
  EXPECT_EQ(nlohmann::json(v).get<Verdict>(), v);
  const Clip c{3, 8, 5};
  EXPECT_EQ(nlohmann::json(c).get<Clip>(), c);
}

TEST(Serialize, ParseErrorNamesByteOffset) {
  TempDir dir;
  {
    std::ofstream out(dir / "bad.json");
    out << R"({"a": [1, 2,)";
  }
  try {
    read_json_file(dir / "bad.json");
    FAIL() << "expected ParseError";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParseError);
    EXPECT_NE(std::string(e.what()).find("byte 13"), std::string::npos) << e.what();
  }
}

TEST(Digest, KnownVectors) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(base64_encode("hello"), "aGVsbG8=");
  EXPECT_EQ(base64_decode("aGVsbG8="), "hello");
  EXPECT_EQ(base64_decode(base64_encode(std::string("\0\1\2\xff", 4))), std::string("\0\1\2\xff", 4));
  EXPECT_EQ(base64_encode(""), "");
}

TEST(Digest, MissingFile) { EXPECT_MASR_ERROR(read_file_bytes("/nonexistent/frame.jpg"), ErrorKind::MissingImage); }

TEST(Errors, MessageCarriesKind) {
  const Error e(ErrorKind::IndexGap, "frame 3");
  EXPECT_STREQ(e.what(), "IndexGap: frame 3");
  const StatusError s(401, "unauthorized");
  EXPECT_EQ(s.status(), 401);
  EXPECT_EQ(s.kind(), ErrorKind::BadStatus);
}
