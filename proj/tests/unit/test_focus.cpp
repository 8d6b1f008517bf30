#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "masr/backends/mock.hpp"
#include "masr/cluster.hpp"
#include "masr/focus.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace masr;

namespace {

FeatureVector at_similarity(double s) { return FeatureVector({s, std::sqrt(1.0 - s * s)}, true); }

const FeatureVector kQuery({1.0, 0.0}, true);

FrameManifest manifest_of(std::size_t n) {
  FrameManifest m;
  m.video_id = "v";
  for (FrameIndex i = 0; i < n; ++i) m.frames.push_back({i, std::to_string(i), static_cast<double>(i)});
  return m;
}

ContextLedger one_caption() {
  ContextLedger l;
  l.insert({0, "a person enters the kitchen", "m"}, 0.0, 0);
  return l;
}

const QaTask kTask{"t", "v", "What did the person pick up?", {"cup", "pan", "knife"}, 0};

// Random instance with coarse similarity values so that ties occur.
struct Instance {
  std::vector<FeatureVector> features;
  std::vector<Clip> clips;
  FeatureVector query;
  FocusParams params;
};

Instance random_instance(std::mt19937_64& rng) {
  Instance in;
  const std::size_t n = 2 + rng() % 49;
  for (std::size_t i = 0; i < n; ++i) {
    const int a = static_cast<int>(rng() % 5) - 2, b = static_cast<int>(rng() % 5) - 2;
    in.features.emplace_back(std::vector<double>{static_cast<double>(a) + 0.5, static_cast<double>(b)});
  }
  in.query = FeatureVector({1.0, 0.5});
  const std::size_t n_clips = 1 + rng() % 6;
  for (std::size_t c = 0; c < n_clips; ++c) {
    const FrameIndex s = rng() % n, e = s + rng() % (n - s);
    in.clips.push_back(Clip{s, e, std::nullopt});
  }
  in.params.k_v = 1 + rng() % n;
  in.params.k_c = 6;
  in.params.k_f = 1 + rng() % 6;
  return in;
}

}  // namespace

TEST(Similarity, FrozenCosine) {
  // 32 / sqrt(1078), evaluated to 50 digits with arbitrary precision.
  const double expected = 0.97463184619707627107857249112612286349885264486478;
  EXPECT_NEAR(cosine_similarity(FeatureVector({1, 2, 3}), FeatureVector({4, 5, 6})), expected, 1e-12);
}

TEST(Similarity, Errors) {
  EXPECT_MASR_ERROR(cosine_similarity(FeatureVector({1, 2}), FeatureVector({1, 2, 3})), ErrorKind::DimMismatch);
  EXPECT_MASR_ERROR(cosine_similarity(FeatureVector({0.0, 0.0}), FeatureVector({1, 2})), ErrorKind::ZeroVector);
}

TEST(FineFocus, CountBeatsSinglePeak) {
  // Clip [0,4] owns the single best frame, clip [5,9] the most top-k_v frames.
  std::vector<FeatureVector> f;
  const double sims[] = {0.95, 0.1, 0.1, 0.1, 0.1, 0.1, 0.85, 0.9, 0.8, 0.1};
  for (double s : sims) f.push_back(at_similarity(s));
  const std::vector<Clip> clips = {{0, 4, std::nullopt}, {5, 9, std::nullopt}};
  const auto out = fine_focus(clips, lookup_dense(f), kQuery, FocusParams{4, 1, 4});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out.entries[0].frame_index, 7u);
  EXPECT_TRUE(out.entries[0].clip.same_span(clips[1]));
  EXPECT_EQ(out.entries[0].clip.center, std::optional<FrameIndex>(7));
  EXPECT_NEAR(out.entries[0].similarity, 0.9, 1e-12);
}

TEST(FineFocus, SingleFrameClip) {
  const std::vector<FeatureVector> f = {at_similarity(0.3)};
  const std::vector<Clip> clips = {{0, 0, std::nullopt}};
  const auto out = fine_focus(clips, lookup_dense(f), kQuery, FocusParams{1, 1, 1});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out.entries[0].frame_index, 0u);
  EXPECT_NEAR(out.entries[0].similarity, 0.3, 1e-12);
}

TEST(FineFocus, ClipsWithoutTopFramesAreSkipped) {
  std::vector<FeatureVector> f;
  for (double s : {0.9, 0.8, 0.1, 0.2}) f.push_back(at_similarity(s));
  const std::vector<Clip> clips = {{0, 1, std::nullopt}, {2, 3, std::nullopt}};
  const auto out = fine_focus(clips, lookup_dense(f), kQuery, FocusParams{2, 2, 2});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out.entries[0].frame_index, 0u);
}

TEST(FineFocus, TiesBreakTowardLowerIndex) {
  std::vector<FeatureVector> f(6, at_similarity(0.5));
  const std::vector<Clip> clips = {{3, 5, std::nullopt}, {0, 2, std::nullopt}};
  const auto out = fine_focus(clips, lookup_dense(f), kQuery, FocusParams{6, 1, 1});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out.entries[0].frame_index, 0u);
}

TEST(FineFocus, Errors) {
  std::vector<FeatureVector> f(3, at_similarity(0.5));
  EXPECT_MASR_ERROR(fine_focus({}, lookup_dense(f), kQuery, FocusParams{}), ErrorKind::EmptyCandidates);
  const std::vector<Clip> beyond = {{0, 5, std::nullopt}};
  EXPECT_MASR_ERROR(fine_focus(beyond, lookup_dense(f), kQuery, FocusParams{}), ErrorKind::MissingFeature);
  const std::map<FrameIndex, FeatureVector> sparse = {{0, at_similarity(0.1)}};
  const std::vector<Clip> two = {{0, 1, std::nullopt}};
  EXPECT_MASR_ERROR(fine_focus(two, lookup_map(sparse), kQuery, FocusParams{}), ErrorKind::MissingFeature);
  EXPECT_MASR_ERROR((FocusParams{5, 4, 3}.validate()), ErrorKind::InvalidArgument);
}

TEST(FineFocus, MatchesBruteForceOracle) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    const auto in = random_instance(rng);
    const auto got = fine_focus(in.clips, lookup_dense(in.features), in.query, in.params);
    const auto want = oracle::fine_focus(in.clips, in.features, in.query, in.params.k_v, in.params.k_f);
    ASSERT_EQ(got, want) << "trial " << trial;
  }
}

TEST(FineFocus, OutputBoundAndInvariants) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 300; ++trial) {
    const auto in = random_instance(rng);
    const auto got = fine_focus(in.clips, lookup_dense(in.features), in.query, in.params);
    EXPECT_LE(got.size(), std::min(in.params.k_f, in.clips.size()));
    std::set<FrameIndex> seen;
    for (std::size_t i = 0; i < got.size(); ++i) {
      const auto& e = got.entries[i];
      EXPECT_TRUE(e.clip.contains(e.frame_index));
      EXPECT_TRUE(seen.insert(e.frame_index).second);
      if (i > 0) EXPECT_GE(got.entries[i - 1].similarity, e.similarity);
    }
  }
}

TEST(FineFocus, LargerKfExtendsClipChoice) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 300; ++trial) {
    auto in = random_instance(rng);
    in.params.k_f = 1;
    std::set<std::pair<FrameIndex, FrameIndex>> prev;
    for (std::size_t kf = 1; kf <= 6; ++kf) {
      in.params.k_f = kf;
      const auto got = fine_focus(in.clips, lookup_dense(in.features), in.query, in.params);
      std::set<std::pair<FrameIndex, FrameIndex>> spans;
      for (const auto& e : got.entries) spans.insert({e.clip.start, e.clip.end});
      EXPECT_TRUE(std::includes(spans.begin(), spans.end(), prev.begin(), prev.end())) << "trial " << trial;
      prev = spans;
    }
  }
}

TEST(FineFocus, MidpointAblation) {
  const std::vector<Clip> clips = {{0, 8, std::nullopt}, {8, 14, std::nullopt}, {14, 38, std::nullopt}};
  const auto out = focus_clip_midpoints(clips, FocusParams{90, 2, 4});
  EXPECT_EQ(out.frames(), (std::vector<FrameIndex>{4, 11}));
}

TEST(CoarseSelect, ScriptedIdReturnsThatClip) {
  const auto clips = clips_from_centers(std::vector<FrameIndex>{10, 20, 30}, 40);
  ScriptedChat chat(R"({"answer":"A","confidence":1})", R"({"clips":[2],"reason":"the action happens there"})");
  const auto out = coarse_select(kTask, one_caption(), clips, manifest_of(40), 4, chat, PromptTemplates::defaults());
  ASSERT_EQ(out.clips.size(), 1u);
  EXPECT_EQ(out.clips[0], clips[2]);
  EXPECT_EQ(out.clip_ids, (std::vector<std::size_t>{2}));
  EXPECT_EQ(out.reason, "the action happens there");
  EXPECT_EQ(out.exchanges, 1);
  EXPECT_TRUE(out.warnings.empty());
}

TEST(CoarseSelect, InvalidIdsDroppedWithWarning) {
  const auto clips = clips_from_centers(std::vector<FrameIndex>{10, 20, 30}, 40);
  ScriptedChat chat("", R"({"clips":[99, 1, 1, -3, "x"],"reason":"r"})");
  const auto out = coarse_select(kTask, one_caption(), clips, manifest_of(40), 4, chat, PromptTemplates::defaults());
  EXPECT_EQ(out.clip_ids, (std::vector<std::size_t>{1}));
  EXPECT_EQ(out.warnings.size(), 4u);
}

TEST(CoarseSelect, TruncatesToKc) {
  const auto clips = clips_from_centers(std::vector<FrameIndex>{10, 20, 30}, 40);
  ScriptedChat chat("", R"(Sure! {"clips":[3,0,2],"reason":"r"})");
  const auto out = coarse_select(kTask, one_caption(), clips, manifest_of(40), 2, chat, PromptTemplates::defaults());
  EXPECT_EQ(out.clip_ids, (std::vector<std::size_t>{3, 0}));
}

TEST(CoarseSelect, UnparseableAfterTwoReprompts) {
  const auto clips = clips_from_centers(std::vector<FrameIndex>{10}, 40);
  int calls = 0;
  ScriptedChat chat([&](std::span<const ChatMessage> msgs, ReplySchema) {
    EXPECT_EQ(msgs.size(), static_cast<std::size_t>(1 + 2 * calls));
    ++calls;
    return std::string("I think clip one");
  });
  EXPECT_MASR_ERROR(coarse_select(kTask, one_caption(), clips, manifest_of(40), 4, chat, PromptTemplates::defaults()),
                    ErrorKind::UnparseableSelection);
  EXPECT_EQ(calls, 3);
}

TEST(CoarseSelect, RepromptRecovers) {
  const auto clips = clips_from_centers(std::vector<FrameIndex>{10}, 40);
  int calls = 0;
  ScriptedChat chat([&](std::span<const ChatMessage>, ReplySchema) {
    return ++calls == 1 ? std::string("{oops") : std::string(R"({"clips":[1]})");
  });
  const auto out = coarse_select(kTask, one_caption(), clips, manifest_of(40), 4, chat, PromptTemplates::defaults());
  EXPECT_EQ(out.exchanges, 2);
  EXPECT_EQ(out.clip_ids, (std::vector<std::size_t>{1}));
}

TEST(CoarseSelect, NoValidIdIsEmptySelection) {
  const auto clips = clips_from_centers(std::vector<FrameIndex>{10}, 40);
  ScriptedChat chat("", R"({"clips":[7]})");
  EXPECT_MASR_ERROR(coarse_select(kTask, one_caption(), clips, manifest_of(40), 4, chat, PromptTemplates::defaults()),
                    ErrorKind::EmptySelection);
}

TEST(CoarseSelect, MockReflectorPicksKeyClip) {
  auto tables = std::make_shared<MockTables>();
  tables->tasks.push_back(MockTaskEntry{"t", kTask.question, 23, "the person picks up the cup", std::nullopt, 0, 1});
  MockReflector chat(tables);
  const auto clips = clips_from_centers(std::vector<FrameIndex>{8, 14, 38}, 60);
  const auto out = coarse_select(kTask, one_caption(), clips, manifest_of(60), 4, chat, PromptTemplates::defaults());
  ASSERT_EQ(out.clips.size(), 1u);
  EXPECT_TRUE(out.clips[0].same_span({14, 38, std::nullopt}));
}
