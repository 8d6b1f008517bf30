#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "masr/bench.hpp"
#include "masr/cluster.hpp"
#include "masr/digest.hpp"
#include "masr/dte.hpp"
#include "masr/errors.hpp"
#include "masr/focus.hpp"
#include "masr/serialize.hpp"

namespace masr {
namespace {

constexpr int kBaseAttempts = 20;
constexpr int kPlacementAttempts = 100;
constexpr double kDistractorQueryWeight = 0.1;
constexpr double kNoiseNorm = 0.15;

const std::vector<std::string> kActions = {
    "picks up the red cup",     "opens the fridge",          "waves at the camera",
    "sits down on the sofa",    "turns off the light",       "writes on the whiteboard",
    "pours water into a glass", "ties a shoelace",           "folds a towel",
    "plugs in a phone charger", "closes the window",         "feeds the cat",
};

std::string padded(std::size_t value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*zu", width, value);
  return buf;
}

double unit_uniform(std::mt19937_64& rng) { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; }

double normal(std::mt19937_64& rng) {
  const double u1 = unit_uniform(rng), u2 = unit_uniform(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::size_t below(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(n)) % n;
}

double query_similarity(const std::vector<double>& v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  return v[0] / std::sqrt(sq);
}

bool contains(const std::vector<FrameIndex>& sorted, FrameIndex f) {
  return std::binary_search(sorted.begin(), sorted.end(), f);
}

// Query weight that gives `v` (with its query component replaced) cosine
// `target` against the query axis.
double weight_for_similarity(const std::vector<double>& v, double target) {
  double rest = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) rest += v[i] * v[i];
  return target * std::sqrt(rest / (1.0 - target * target));
}

std::optional<std::size_t> clip_strictly_owning(const std::vector<Clip>& clips, const std::vector<FrameIndex>& centers,
                                                FrameIndex f) {
  if (contains(centers, f)) return std::nullopt;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    if (clips[i].contains(f)) return i;
  }
  return std::nullopt;
}

struct VideoBuild {
  std::vector<std::vector<double>> vectors;
  PlantedTruth truth;
};

class VideoPlanner {
 public:
  VideoPlanner(const SyntheticSpec& spec, std::mt19937_64& rng) : spec_(spec), rng_(rng) {}

  VideoBuild plan(const std::string& task_id) {
    for (int b = 0; b < kBaseAttempts; ++b) {
      if (auto built = try_base(task_id)) return std::move(*built);
    }
    throw Error(ErrorKind::InfeasiblePlacement, "no key placement for " + task_id + " after " +
                                                    std::to_string(kBaseAttempts * kPlacementAttempts) + " attempts");
  }

 private:
  std::optional<VideoBuild> try_base(const std::string& task_id) {
    const std::size_t T = spec_.frames_per_video;
    const std::size_t S = spec_.n_clips_hint;
    const std::size_t noise_dims = spec_.dim - S - 1;
    const double sigma = kNoiseNorm / std::sqrt(static_cast<double>(noise_dims));

    std::vector<std::vector<double>> base(T, std::vector<double>(spec_.dim, 0.0));
    for (std::size_t f = 0; f < T; ++f) {
      base[f][0] = kDistractorQueryWeight * unit_uniform(rng_);
      base[f][1 + f * S / T] = 1.0;
      for (std::size_t d = S + 1; d < spec_.dim; ++d) base[f][d] = sigma * normal(rng_);
    }
    double distractor_max = -1.0;
    for (const auto& v : base) distractor_max = std::max(distractor_max, query_similarity(v));

    const bool needs_hint = spec_.key_reachable_at_round == 2;
    const double hint_target = distractor_max + spec_.key_frame_margin + 1e-3;
    const double key_target = (needs_hint ? hint_target : distractor_max) + spec_.key_frame_margin + 1e-3;
    if (key_target >= 0.999) {
      throw Error(ErrorKind::InfeasiblePlacement, "margin " + std::to_string(spec_.key_frame_margin) +
                                                      " leaves no room above the distractors");
    }

    // Hint candidates come from the unplanted clustering; accept() re-checks
    // them against the clustering of the planted vectors.
    std::vector<FrameIndex> hint_candidates;
    if (needs_hint) {
      const auto clustering = cluster_frames(to_features(base), S, spec_.cluster_seed);
      const auto round0 = expand_all(clustering.center_indices, spec_.dte_round0, T);
      for (FrameIndex f = 1; f < clustering.clips.front().end; ++f) {
        if (!contains(round0, f)) hint_candidates.push_back(f);
      }
      if (hint_candidates.empty()) return std::nullopt;
    }

    for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
      const FrameIndex key = below(rng_, T);
      const auto evidence_signed = static_cast<std::int64_t>(key) + spec_.evidence_offset;
      const FrameIndex hint = needs_hint ? hint_candidates[below(rng_, hint_candidates.size())] : 0;
      if (evidence_signed < 0 || evidence_signed >= static_cast<std::int64_t>(T)) continue;
      const auto evidence = static_cast<FrameIndex>(evidence_signed);
      if (needs_hint && (hint == key || hint == evidence)) continue;

      auto vectors = base;
      vectors[key][0] = weight_for_similarity(vectors[key], key_target);
      if (needs_hint) vectors[hint][0] = weight_for_similarity(vectors[hint], hint_target);

      if (accept(vectors, key, evidence, needs_hint ? std::optional<FrameIndex>(hint) : std::nullopt)) {
        VideoBuild out{std::move(vectors), PlantedTruth{task_id, key, evidence, std::nullopt}};
        if (needs_hint) out.truth.hint_frame = hint;
        return out;
      }
    }
    return std::nullopt;
  }

  static std::vector<FeatureVector> to_features(const std::vector<std::vector<double>>& vectors) {
    std::vector<FeatureVector> features;
    features.reserve(vectors.size());
    for (const auto& v : vectors) features.push_back(FeatureVector::normalized(v));
    return features;
  }

  bool accept(const std::vector<std::vector<double>>& vectors, FrameIndex key, FrameIndex evidence,
              std::optional<FrameIndex> hint) const {
    const std::size_t T = vectors.size();
    const ClusteringResult clustering = cluster_frames(to_features(vectors), spec_.n_clips_hint, spec_.cluster_seed);
    const auto& centers = clustering.center_indices;
    const auto& clips = clustering.clips;
    const auto round0 = expand_all(centers, spec_.dte_round0, T);

    const auto key_clip = clip_strictly_owning(clips, centers, key);
    if (!key_clip) return false;
    if (spec_.key_reachable_at_round == 0) return contains(round0, evidence);
    if (contains(round0, evidence)) return false;

    // The key clip's own neighborhood must carry the evidence, but reaching
    // it through the clip midpoint instead of the key frame must fail.
    if (!contains(expand(key, spec_.dte_main, T), evidence)) return false;
    const Clip& kc = clips[*key_clip];
    if (contains(expand(kc.start + (kc.end - kc.start) / 2, spec_.dte_main, T), evidence)) return false;

    if (spec_.key_reachable_at_round == 2) {
      const auto hint_clip = clip_strictly_owning(clips, centers, *hint);
      if (!hint_clip || *hint_clip != 0 || *key_clip == 0) return false;
      if (contains(round0, *hint)) return false;
      if (contains(expand(*hint, spec_.dte_main, T), evidence)) return false;
    }
    return true;
  }

  const SyntheticSpec& spec_;
  std::mt19937_64& rng_;
};

std::string pgm_image(const std::string& video_id, FrameIndex frame, std::mt19937_64& rng) {
  std::string bytes = "P5\n# " + video_id + " frame " + std::to_string(frame) + "\n8 8\n255\n";
  for (int i = 0; i < 64; ++i) bytes.push_back(static_cast<char>(rng() & 0xff));
  return bytes;
}

}  // namespace

void SyntheticSpec::validate() const {
  const auto fail = [](const std::string& why) { throw Error(ErrorKind::InvalidArgument, "synthetic spec: " + why); };
  if (!(key_frame_margin > 0.0)) fail("key_frame_margin must be > 0");
  if (n_clips_hint < 1) fail("n_clips_hint must be >= 1");
  if (frames_per_video < n_clips_hint + 2) fail("frames_per_video must be >= n_clips_hint + 2");
  if (key_reachable_at_round < 0 || key_reachable_at_round > 2) fail("key_reachable_at_round must be 0, 1 or 2");
  if (key_reachable_at_round == 2 && n_clips_hint < 2) fail("round-2 placement needs at least 2 scenes");
  if (dim < n_clips_hint + 2) fail("dim must be >= n_clips_hint + 2");
  if (n_options < 2 || n_options > kActions.size()) fail("n_options must be in [2, " + std::to_string(kActions.size()) + "]");
  dte_round0.validate();
  dte_main.validate();
}

void to_json(nlohmann::json& j, const SyntheticSpec& s) {
  j = nlohmann::json{{"seed", s.seed},
                     {"n_tasks", s.n_tasks},
                     {"frames_per_video", s.frames_per_video},
                     {"n_clips_hint", s.n_clips_hint},
                     {"key_frame_margin", s.key_frame_margin},
                     {"key_reachable_at_round", s.key_reachable_at_round},
                     {"evidence_offset", s.evidence_offset},
                     {"dim", s.dim},
                     {"n_options", s.n_options},
                     {"cluster_seed", s.cluster_seed},
                     {"dte_round0", s.dte_round0},
                     {"dte_main", s.dte_main}};
}

void from_json(const nlohmann::json& j, SyntheticSpec& s) {
  const auto field = [&](const char* name, auto& slot) {
    const auto it = j.find(name);
    if (it == j.end() || it->is_null()) return;
    try {
      it->get_to(slot);
    } catch (const std::exception& e) {
      throw Error(ErrorKind::ConfigError, std::string("synthetic.") + name + ": " + e.what());
    }
  };
  field("seed", s.seed);
  field("n_tasks", s.n_tasks);
  field("frames_per_video", s.frames_per_video);
  field("n_clips_hint", s.n_clips_hint);
  field("key_frame_margin", s.key_frame_margin);
  field("key_reachable_at_round", s.key_reachable_at_round);
  field("evidence_offset", s.evidence_offset);
  field("dim", s.dim);
  field("n_options", s.n_options);
  field("cluster_seed", s.cluster_seed);
  field("dte_round0", s.dte_round0);
  field("dte_main", s.dte_main);
}

SyntheticDataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  SyntheticDataset out;
  out.tables.dim = spec.dim;
  out.tables.seed = spec.seed;

  for (std::size_t t = 0; t < spec.n_tasks; ++t) {
    std::mt19937_64 rng(std::stoull(sha256_hex(std::to_string(spec.seed) + "/" + std::to_string(t)).substr(0, 16),
                                    nullptr, 16));
    const std::string task_id = "syn-" + padded(t, 4);
    const std::string video_id = "vid-" + padded(t, 4);

    std::vector<std::string> actions = kActions;
    for (std::size_t i = actions.size() - 1; i > 0; --i) std::swap(actions[i], actions[below(rng, i + 1)]);
    actions.resize(spec.n_options);
    const std::size_t gold = below(rng, spec.n_options);
    const std::size_t distractor = (gold + 1 + below(rng, spec.n_options - 1)) % spec.n_options;

    QaTask task{task_id, video_id,
                "What does the person do at the decisive moment of video " + video_id + "? [" + task_id + "]",
                actions, gold};

    VideoPlanner planner(spec, rng);
    VideoBuild build = planner.plan(task_id);

    const std::string key_caption = "KEY EVIDENCE " + task_id + ": at this moment the person " + actions[gold] + ".";
    const std::string hint_caption = "HINT " + task_id + ": the decisive moment happens later in the video.";

    FrameManifest manifest;
    manifest.video_id = video_id;
    manifest.sample_fps = {1, 1};
    manifest.source_duration_s = static_cast<double>(spec.frames_per_video);
    manifest.image_width = 8;
    manifest.image_height = 8;
    for (FrameIndex f = 0; f < spec.frames_per_video; ++f) {
      const std::string ref = video_id + "/" + padded(f, 6) + ".pgm";
      const std::string bytes = pgm_image(video_id, f, rng);
      const std::string digest = sha256_hex(bytes);
      manifest.frames.push_back(FrameRecord{f, ref, static_cast<double>(f)});
      out.images.emplace(ref, bytes);
      out.tables.image_embeddings.emplace(digest, build.vectors[f]);
      std::string caption;
      if (f == build.truth.evidence_frame) {
        caption = key_caption;
      } else if (build.truth.hint_frame && f == *build.truth.hint_frame) {
        caption = hint_caption;
      } else {
        caption = "Frame " + std::to_string(f) + " of " + video_id + ": scene " +
                  std::to_string(1 + f * spec.n_clips_hint / spec.frames_per_video) +
                  ", people move about and nothing notable happens.";
      }
      out.tables.captions.emplace(digest, std::move(caption));
    }

    std::vector<double> query(spec.dim, 0.0);
    query[0] = 1.0;
    out.tables.text_embeddings.emplace(task.question, std::move(query));
    MockTaskEntry entry{task_id, task.question, build.truth.key_frame, key_caption, std::nullopt, gold, distractor};
    if (build.truth.hint_frame) entry.hint = hint_caption;
    out.tables.tasks.push_back(std::move(entry));

    out.tasks.push_back(std::move(task));
    out.manifests.push_back(std::move(manifest));
    out.truth.push_back(build.truth);
  }
  return out;
}

DatasetSpec write_synthetic(const SyntheticDataset& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "manifests");
  DatasetSpec spec;
  spec.path = dir / "dataset.jsonl";
  {
    std::ofstream out(spec.path, std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + spec.path.string());
    for (const auto& t : data.tasks) out << nlohmann::json(t).dump() << '\n';
  }
  for (const auto& m : data.manifests) save_manifest(m, spec.manifest_path(m.video_id));
  const auto frames = spec.resolved_frames_root();
  for (const auto& [ref, bytes] : data.images) {
    const auto path = frames / ref;
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  }
  write_json_file(nlohmann::json(data.tables), dir / "mock_tables.json", -1);
  nlohmann::json truth = nlohmann::json::array();
  for (const auto& t : data.truth) {
    truth.push_back({{"task_id", t.task_id},
                     {"key_frame", t.key_frame},
                     {"evidence_frame", t.evidence_frame},
                     {"hint_frame", t.hint_frame ? nlohmann::json(*t.hint_frame) : nlohmann::json(nullptr)}});
  }
  write_json_file(truth, dir / "truth.json");
  return spec;
}

}  // namespace masr
