#include "masr/errors.hpp"
#include "masr/pipeline.hpp"
#include "masr/serialize.hpp"

namespace masr {

using nlohmann::json;

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Confident: return "confident";
    case Termination::RoundBudget: return "round_budget";
    case Termination::Error: return "error";
  }
  return "error";
}

Termination termination_from_string(std::string_view s) {
  if (s == "confident") return Termination::Confident;
  if (s == "round_budget") return Termination::RoundBudget;
  if (s == "error") return Termination::Error;
  throw Error(ErrorKind::ParseError, "unknown termination reason '" + std::string(s) + "'");
}

int RunTrace::answer_exchanges() const {
  int n = 0;
  for (const auto& r : rounds) n += r.answer_exchanges;
  return n;
}

int RunTrace::selection_exchanges() const {
  int n = 0;
  for (const auto& r : rounds) n += r.selection_exchanges;
  return n;
}

json trace_to_json(const RunTrace& t, bool include_timing) {
  json rounds = json::array();
  for (const auto& r : t.rounds) {
    json focus = json::array();
    for (const auto& e : r.focus.entries) {
      focus.push_back({{"clip", e.clip}, {"frame_index", e.frame_index}, {"similarity", e.similarity}});
    }
    json row{{"round", r.round},
             {"selected_clips", r.selected_clips},
             {"selection_fallback", r.selection_fallback},
             {"focused_frames", r.focused_frames},
             {"focus", std::move(focus)},
             {"expanded_frames", r.expanded_frames},
             {"new_captions", r.new_captions},
             {"ledger_size", r.ledger_size},
             {"verdict", r.verdict ? json(*r.verdict) : json(nullptr)},
             {"answer_exchanges", r.answer_exchanges},
             {"selection_exchanges", r.selection_exchanges},
             {"chat_model", r.chat_model},
             {"warnings", r.warnings}};
    if (include_timing) row["elapsed_ms"] = r.elapsed_ms;
    rounds.push_back(std::move(row));
  }
  json j{{"schema", kTraceSchema},
         {"task_id", t.task_id},
         {"video_id", t.video_id},
         {"config_digest", t.config_digest},
         {"template_digests", t.template_digests},
         {"frame_count", t.frame_count},
         {"centers", t.centers},
         {"clips", t.clips},
         {"rounds", std::move(rounds)},
         {"final_answer", t.final_answer ? json(*t.final_answer) : json(nullptr)},
         {"final_confidence", t.final_confidence ? json(*t.final_confidence) : json(nullptr)},
         {"termination", to_string(t.termination)},
         {"error", t.error},
         {"warnings", t.warnings},
         {"call_counts", {{"answer", t.answer_exchanges()}, {"selection", t.selection_exchanges()}}}};
  if (include_timing) j["elapsed_ms"] = t.elapsed_ms;
  return j;
}

RunTrace trace_from_json(const json& j) {
  try {
    if (j.value("schema", "") != kTraceSchema) {
      throw Error(ErrorKind::ParseError, "unsupported trace schema '" + j.value("schema", "") + "'");
    }
    RunTrace t;
    j.at("task_id").get_to(t.task_id);
    j.at("video_id").get_to(t.video_id);
    j.at("config_digest").get_to(t.config_digest);
    j.at("template_digests").get_to(t.template_digests);
    j.at("frame_count").get_to(t.frame_count);
    j.at("centers").get_to(t.centers);
    j.at("clips").get_to(t.clips);
    for (const auto& row : j.at("rounds")) {
      RoundRecord r;
      row.at("round").get_to(r.round);
      row.at("selected_clips").get_to(r.selected_clips);
      row.at("selection_fallback").get_to(r.selection_fallback);
      row.at("focused_frames").get_to(r.focused_frames);
      for (const auto& e : row.at("focus")) {
        r.focus.entries.push_back(FocusEntry{e.at("clip").get<Clip>(), e.at("frame_index").get<FrameIndex>(),
                                             e.at("similarity").get<double>()});
      }
      row.at("expanded_frames").get_to(r.expanded_frames);
      row.at("new_captions").get_to(r.new_captions);
      row.at("ledger_size").get_to(r.ledger_size);
      if (!row.at("verdict").is_null()) r.verdict = row.at("verdict").get<Verdict>();
      row.at("answer_exchanges").get_to(r.answer_exchanges);
      row.at("selection_exchanges").get_to(r.selection_exchanges);
      row.at("chat_model").get_to(r.chat_model);
      row.at("warnings").get_to(r.warnings);
      r.elapsed_ms = row.value("elapsed_ms", 0.0);
      t.rounds.push_back(std::move(r));
    }
    if (!j.at("final_answer").is_null()) t.final_answer = j.at("final_answer").get<std::size_t>();
    if (!j.at("final_confidence").is_null()) t.final_confidence = j.at("final_confidence").get<int>();
    t.termination = termination_from_string(j.at("termination").get<std::string>());
    j.at("error").get_to(t.error);
    j.at("warnings").get_to(t.warnings);
    t.elapsed_ms = j.value("elapsed_ms", 0.0);
    return t;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("malformed trace: ") + e.what());
  }
}

}  // namespace masr
