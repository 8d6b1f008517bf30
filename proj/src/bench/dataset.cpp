#include <fstream>
#include <set>

#include "masr/bench.hpp"
#include "masr/errors.hpp"
#include "masr/serialize.hpp"

namespace masr {

std::filesystem::path DatasetSpec::manifest_path(const std::string& video_id) const {
  std::string rel = manifest_pattern;
  for (auto pos = rel.find("{video_id}"); pos != std::string::npos; pos = rel.find("{video_id}", pos)) {
    rel.replace(pos, 10, video_id);
    pos += video_id.size();
  }
  const std::filesystem::path p(rel);
  return p.is_absolute() ? p : path.parent_path() / p;
}

std::filesystem::path DatasetSpec::resolved_frames_root() const {
  if (frames_root.empty()) return path.parent_path() / "frames";
  return frames_root.is_absolute() ? frames_root : path.parent_path() / frames_root;
}

void to_json(nlohmann::json& j, const DatasetSpec& s) {
  j = nlohmann::json{{"format", s.format},
                     {"path", s.path.string()},
                     {"frames_root", s.frames_root.string()},
                     {"manifest_pattern", s.manifest_pattern}};
}

void from_json(const nlohmann::json& j, DatasetSpec& s) {
  s.format = j.value("format", std::string("jsonl-mcq"));
  s.path = j.at("path").get<std::string>();
  s.frames_root = j.value("frames_root", std::string{});
  s.manifest_pattern = j.value("manifest_pattern", std::string("manifests/{video_id}.json"));
}

std::vector<QaTask> load_dataset(const DatasetSpec& spec) {
  if (spec.format != "jsonl-mcq") throw Error(ErrorKind::ConfigError, "dataset.format: unsupported '" + spec.format + "'");
  std::ifstream in(spec.path);
  if (!in) throw Error(ErrorKind::Io, "cannot open dataset " + spec.path.string());

  std::vector<QaTask> tasks;
  std::set<std::string> ids;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = spec.path.string() + ":" + std::to_string(line_no) + ": ";
    QaTask task;
    try {
      task = nlohmann::json::parse(line).get<QaTask>();
      validate_task(task);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::ParseError, where + e.what());
    } catch (const Error& e) {
      throw Error(ErrorKind::ParseError, where + e.what());
    }
    if (!ids.insert(task.task_id).second) {
      throw Error(ErrorKind::ParseError, where + "duplicate task_id '" + task.task_id + "'");
    }
    if (!std::filesystem::exists(spec.manifest_path(task.video_id))) {
      throw Error(ErrorKind::MissingManifest, where + "no manifest at " + spec.manifest_path(task.video_id).string());
    }
    tasks.push_back(std::move(task));
  }
  return tasks;
}

std::map<std::string, VideoInput> load_videos(const DatasetSpec& spec, std::span<const QaTask> tasks) {
  std::map<std::string, VideoInput> videos;
  for (const auto& t : tasks) {
    if (videos.contains(t.video_id)) continue;
    const auto path = spec.manifest_path(t.video_id);
    if (!std::filesystem::exists(path)) throw Error(ErrorKind::MissingManifest, "no manifest at " + path.string());
    videos.emplace(t.video_id, VideoInput{load_manifest(path), spec.resolved_frames_root()});
  }
  return videos;
}

}  // namespace masr
