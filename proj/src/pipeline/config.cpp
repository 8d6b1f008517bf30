#include "masr/digest.hpp"
#include "masr/errors.hpp"
#include "masr/pipeline.hpp"
#include "masr/serialize.hpp"

namespace masr {

void PipelineConfig::validate() const {
  const auto fail = [](const std::string& field, const std::string& why) {
    throw Error(ErrorKind::ConfigError, "pipeline." + field + ": " + why);
  };
  if (max_rounds < 1) fail("max_rounds", "must be >= 1");
  if (caption_parallelism < 1) fail("caption_parallelism", "must be >= 1");
  if (sample_fps.num <= 0 || sample_fps.den <= 0) fail("sample_fps", "must be > 0");
  try {
    focus.validate();
  } catch (const Error& e) {
    fail("k_v/k_f/k_c", e.what());
  }
  try {
    dte_round0.validate();
  } catch (const Error& e) {
    fail("dte_round0", e.what());
  }
  try {
    dte_main.validate();
  } catch (const Error& e) {
    fail("dte_main", e.what());
  }
}

std::string PipelineConfig::digest() const {
  nlohmann::json j = *this;
  j.erase("caption_parallelism");  // scheduling only; results do not depend on it
  return sha256_hex(j.dump());
}

void to_json(nlohmann::json& j, const PipelineConfig& c) {
  j = nlohmann::json{{"n_clusters", c.n_clusters},
                     {"max_rounds", c.max_rounds},
                     {"seed", c.seed},
                     {"k_v", c.focus.k_v},
                     {"k_f", c.focus.k_f},
                     {"k_c", c.focus.k_c},
                     {"dte_round0", c.dte_round0},
                     {"dte_main", c.dte_main},
                     {"sample_fps", c.sample_fps},
                     {"fine_focus", c.fine_focus},
                     {"caption_parallelism", c.caption_parallelism}};
}

void from_json(const nlohmann::json& j, PipelineConfig& c) {
  const auto field = [&](const char* name, auto& slot) {
    const auto it = j.find(name);
    if (it == j.end() || it->is_null()) return;
    try {
      it->get_to(slot);
    } catch (const std::exception& e) {
      throw Error(ErrorKind::ConfigError, std::string("pipeline.") + name + ": " + e.what());
    }
  };
  field("n_clusters", c.n_clusters);
  field("max_rounds", c.max_rounds);
  field("seed", c.seed);
  field("k_v", c.focus.k_v);
  field("k_f", c.focus.k_f);
  field("k_c", c.focus.k_c);
  field("dte_round0", c.dte_round0);
  field("dte_main", c.dte_main);
  field("sample_fps", c.sample_fps);
  field("fine_focus", c.fine_focus);
  field("caption_parallelism", c.caption_parallelism);
}

}  // namespace masr
