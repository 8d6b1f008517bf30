#include "masr/serialize.hpp"

#include <fstream>
#include <sstream>

#include "masr/errors.hpp"

namespace masr {

using nlohmann::json;

void to_json(json& j, const Rational& r) {
  if (r.den == 1) {
    j = r.num;
  } else {
    j = std::to_string(r.num) + "/" + std::to_string(r.den);
  }
}

void from_json(const json& j, Rational& r) {
  if (j.is_number_integer()) {
    r = {j.get<std::int64_t>(), 1};
  } else if (j.is_number()) {
    r = rational_from_double(j.get<double>());
  } else if (j.is_string()) {
    const auto s = j.get<std::string>();
    const auto slash = s.find('/');
    try {
      if (slash == std::string::npos) {
        r = rational_from_double(std::stod(s));
      } else {
        r = {std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1))};
      }
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::ParseError, "bad rational '" + s + "'");
    }
  } else {
    throw Error(ErrorKind::ParseError, "sample_fps must be a number or \"num/den\"");
  }
}

void to_json(json& j, const FrameRecord& f) {
  j = json{{"index", f.index}, {"image_ref", f.image_ref}, {"timestamp_s", f.timestamp_s}};
}

void from_json(const json& j, FrameRecord& f) {
  j.at("index").get_to(f.index);
  j.at("image_ref").get_to(f.image_ref);
  j.at("timestamp_s").get_to(f.timestamp_s);
}

void to_json(json& j, const FrameManifest& m) {
  j = json{{"video_id", m.video_id}, {"sample_fps", m.sample_fps}, {"frames", m.frames}};
  if (m.source_duration_s) j["source_duration_s"] = *m.source_duration_s;
  if (m.image_width) j["image_width"] = *m.image_width;
  if (m.image_height) j["image_height"] = *m.image_height;
}

void from_json(const json& j, FrameManifest& m) {
  j.at("video_id").get_to(m.video_id);
  j.at("sample_fps").get_to(m.sample_fps);
  j.at("frames").get_to(m.frames);
  m.source_duration_s.reset();
  m.image_width.reset();
  m.image_height.reset();
  if (auto it = j.find("source_duration_s"); it != j.end() && !it->is_null()) {
    m.source_duration_s = it->get<double>();
  }
  if (auto it = j.find("image_width"); it != j.end() && !it->is_null()) m.image_width = it->get<int>();
  if (auto it = j.find("image_height"); it != j.end() && !it->is_null()) m.image_height = it->get<int>();
}

void to_json(json& j, const FeatureVector& v) {
  j = json{{"values", std::vector<double>(v.values().begin(), v.values().end())}, {"unit", v.is_unit()}};
}

void from_json(const json& j, FeatureVector& v) {
  v = FeatureVector(j.at("values").get<std::vector<double>>(), j.value("unit", false));
}

void to_json(json& j, const Clip& c) {
  j = json{{"start", c.start}, {"end", c.end}};
  if (c.center) j["center"] = *c.center;
}

void from_json(const json& j, Clip& c) {
  j.at("start").get_to(c.start);
  j.at("end").get_to(c.end);
  c.center.reset();
  if (auto it = j.find("center"); it != j.end() && !it->is_null()) c.center = it->get<FrameIndex>();
}

void to_json(json& j, const QaTask& t) {
  j = json{{"task_id", t.task_id}, {"video_id", t.video_id}, {"question", t.question}, {"options", t.options}};
  j["gold_index"] = t.gold_index ? json(*t.gold_index) : json(nullptr);
}

void from_json(const json& j, QaTask& t) {
  j.at("task_id").get_to(t.task_id);
  j.at("video_id").get_to(t.video_id);
  j.at("question").get_to(t.question);
  j.at("options").get_to(t.options);
  t.gold_index.reset();
  if (auto it = j.find("gold_index"); it != j.end() && !it->is_null()) {
    t.gold_index = it->get<std::size_t>();
  }
}

void to_json(json& j, const CaptionRecord& c) {
  j = json{{"frame_index", c.frame_index}, {"text", c.text}, {"model_id", c.model_id}};
}

void from_json(const json& j, CaptionRecord& c) {
  j.at("frame_index").get_to(c.frame_index);
  j.at("text").get_to(c.text);
  j.at("model_id").get_to(c.model_id);
}

void to_json(json& j, const ContextLedger& l) {
  j = json::array();
  for (const auto& [frame, e] : l.entries()) {
    json row = e.caption;
    row["timestamp_s"] = e.timestamp_s;
    row["insertion_round"] = e.insertion_round;
    j.push_back(std::move(row));
  }
}

void from_json(const json& j, ContextLedger& l) {
  l = ContextLedger{};
  for (const auto& row : j) {
    l.insert(row.get<CaptionRecord>(), row.at("timestamp_s").get<double>(),
             row.at("insertion_round").get<int>());
  }
}

void to_json(json& j, const Verdict& v) {
  j = json{{"answer_index", v.answer_index}, {"confidence", v.confidence}, {"rationale", v.rationale}};
}

void from_json(const json& j, Verdict& v) {
  j.at("answer_index").get_to(v.answer_index);
  j.at("confidence").get_to(v.confidence);
  v.rationale = j.value("rationale", std::string{});
}

void to_json(json& j, const DteParams& p) {
  j = json{{"wn", p.wn}, {"w", p.w}, {"s", p.s}, {"r", p.r}};
}

void from_json(const json& j, DteParams& p) {
  j.at("wn").get_to(p.wn);
  j.at("w").get_to(p.w);
  j.at("s").get_to(p.s);
  j.at("r").get_to(p.r);
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError,
                path.string() + ": invalid JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

void write_json_file(const json& doc, const std::filesystem::path& path, int indent) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << doc.dump(indent) << '\n';
  if (!out) throw Error(ErrorKind::Io, "short write to " + path.string());
}

FrameManifest load_manifest(const std::filesystem::path& path) {
  const json doc = read_json_file(path);
  FrameManifest m;
  try {
    m = doc.get<FrameManifest>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
  validate_manifest(m);
  return m;
}

void save_manifest(const FrameManifest& manifest, const std::filesystem::path& path) {
  write_json_file(json(manifest), path);
}

}  // namespace masr
