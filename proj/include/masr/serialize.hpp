#pragma once

// JSON mapping for the core types (nlohmann ADL hooks) plus manifest file IO.

#include <filesystem>

#include <nlohmann/json.hpp>

#include "masr/core.hpp"

namespace masr {

void to_json(nlohmann::json& j, const Rational& r);
void from_json(const nlohmann::json& j, Rational& r);
void to_json(nlohmann::json& j, const FrameRecord& f);
void from_json(const nlohmann::json& j, FrameRecord& f);
void to_json(nlohmann::json& j, const FrameManifest& m);
void from_json(const nlohmann::json& j, FrameManifest& m);
void to_json(nlohmann::json& j, const FeatureVector& v);
void from_json(const nlohmann::json& j, FeatureVector& v);
void to_json(nlohmann::json& j, const Clip& c);
void from_json(const nlohmann::json& j, Clip& c);
void to_json(nlohmann::json& j, const QaTask& t);
void from_json(const nlohmann::json& j, QaTask& t);
void to_json(nlohmann::json& j, const CaptionRecord& c);
void from_json(const nlohmann::json& j, CaptionRecord& c);
void to_json(nlohmann::json& j, const ContextLedger& l);
void from_json(const nlohmann::json& j, ContextLedger& l);
void to_json(nlohmann::json& j, const Verdict& v);
void from_json(const nlohmann::json& j, Verdict& v);
void to_json(nlohmann::json& j, const DteParams& p);
void from_json(const nlohmann::json& j, DteParams& p);

// Reads and validates a manifest file. Throws ParseError / Io and the
// validate_manifest errors.
FrameManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const FrameManifest& manifest, const std::filesystem::path& path);

// Reads a whole JSON document; parse failures become ParseError naming the
// 1-based byte position (end of input reads as size + 1).
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const nlohmann::json& doc, const std::filesystem::path& path, int indent = 2);

}  // namespace masr
