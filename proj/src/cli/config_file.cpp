#include <set>

#include "masr/cli.hpp"
#include "masr/errors.hpp"
#include "masr/serialize.hpp"

namespace masr {
namespace {

const std::set<std::string> kTopLevelKeys = {"pipeline", "backends", "dataset", "synthetic", "templates_dir", "parallel"};

std::filesystem::path anchored(const std::filesystem::path& p, const std::filesystem::path& base) {
  return p.empty() || p.is_absolute() ? p : base / p;
}

}  // namespace

void to_json(nlohmann::json& j, const ConfigFile& c) {
  j = nlohmann::json{{"pipeline", c.pipeline}, {"backends", c.backends}, {"parallel", c.parallel}};
  if (c.dataset) j["dataset"] = *c.dataset;
  if (c.synthetic) j["synthetic"] = *c.synthetic;
  if (c.templates_dir) j["templates_dir"] = c.templates_dir->string();
}

void from_json(const nlohmann::json& j, ConfigFile& c) {
  if (!j.is_object()) throw Error(ErrorKind::ConfigError, "config: top level must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!kTopLevelKeys.contains(key)) throw Error(ErrorKind::ConfigError, "config." + key + ": unknown key");
  }
  if (auto it = j.find("pipeline"); it != j.end()) it->get_to(c.pipeline);
  if (auto it = j.find("backends"); it != j.end()) it->get_to(c.backends);
  if (auto it = j.find("dataset"); it != j.end() && !it->is_null()) {
    try {
      c.dataset = it->get<DatasetSpec>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::ConfigError, std::string("dataset: ") + e.what());
    }
  }
  if (auto it = j.find("synthetic"); it != j.end() && !it->is_null()) c.synthetic = it->get<SyntheticSpec>();
  if (auto it = j.find("templates_dir"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw Error(ErrorKind::ConfigError, "templates_dir: must be a string");
    c.templates_dir = it->get<std::string>();
  }
  if (auto it = j.find("parallel"); it != j.end()) {
    if (!it->is_number_unsigned() || it->get<std::size_t>() < 1) {
      throw Error(ErrorKind::ConfigError, "parallel: must be a positive integer");
    }
    c.parallel = it->get<std::size_t>();
  }
  c.pipeline.validate();
  c.backends.validate();
}

ConfigFile load_config_file(const std::filesystem::path& path) {
  ConfigFile c = read_json_file(path).get<ConfigFile>();
  const auto base = path.parent_path();
  if (c.dataset) {
    c.dataset->path = anchored(c.dataset->path, base);
    c.dataset->frames_root = anchored(c.dataset->frames_root, base);
  }
  if (c.templates_dir) c.templates_dir = anchored(*c.templates_dir, base);
  if (c.backends.cache_dir) c.backends.cache_dir = anchored(*c.backends.cache_dir, base).string();
  return c;
}

DatasetSpec resolve_dataset_arg(const std::filesystem::path& arg) {
  if (std::filesystem::is_directory(arg)) {
    DatasetSpec spec;
    spec.path = arg / "dataset.jsonl";
    return spec;
  }
  if (arg.extension() == ".json") {
    DatasetSpec spec;
    try {
      spec = read_json_file(arg).get<DatasetSpec>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::ConfigError, "dataset: " + std::string(e.what()));
    }
    spec.path = anchored(spec.path, arg.parent_path());
    spec.frames_root = anchored(spec.frames_root, arg.parent_path());
    return spec;
  }
  DatasetSpec spec;
  spec.path = arg;
  return spec;
}

}  // namespace masr
