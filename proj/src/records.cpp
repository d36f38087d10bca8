#include "nada/records.hpp"

#include "nada/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace nada {

using nlohmann::json;

std::string to_string(const Box& box) {
  std::ostringstream os;
  os << '(' << box.x0 << ", " << box.y0 << ", " << box.x1 << ", " << box.y1 << ')';
  return os.str();
}

bool ProposalSet::contains(const std::string& label) const { return score(label).has_value(); }

std::optional<double> ProposalSet::score(const std::string& label) const {
  for (const auto& e : entries) {
    if (e.label == label) return e.score;
  }
  return std::nullopt;
}

void ProposalSet::validate(const std::vector<std::string>* vocabulary) const {
  std::set<std::string> seen;
  for (const auto& e : entries) {
    if (!seen.insert(e.label).second) {
      throw ValidationError("image '" + image_id + "': duplicate proposal '" + e.label + "'");
    }
    if (!(e.score >= 0.0 && e.score <= 1.0)) {
      throw ValidationError("image '" + image_id + "': score of '" + e.label + "' outside [0,1]");
    }
    if (vocabulary &&
        std::find(vocabulary->begin(), vocabulary->end(), e.label) == vocabulary->end()) {
      throw ValidationError("image '" + image_id + "': unknown label '" + e.label + "'");
    }
  }
}

std::string to_string(TranscriptKind kind) {
  switch (kind) {
    case TranscriptKind::Choice: return "choice";
    case TranscriptKind::Score: return "score";
    case TranscriptKind::YesNo: return "yesno";
  }
  return "?";
}

std::optional<TranscriptKind> transcript_kind_from_string(const std::string& s) {
  if (s == "choice") return TranscriptKind::Choice;
  if (s == "score") return TranscriptKind::Score;
  if (s == "yesno" || s == "yes-no") return TranscriptKind::YesNo;
  return std::nullopt;
}

namespace {

template <typename Fn>
void for_each_line(std::istream& in, const char* what, Fn&& fn) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fn(json::parse(line));
    } catch (const json::exception& e) {
      throw ValidationError(std::string("malformed ") + what + " record on line " +
                            std::to_string(number) + ": " + e.what());
    }
  }
}

}  // namespace

void write_proposals(std::ostream& out, const ProposalSet& set) {
  json entries = json::array();
  for (const auto& e : set.entries) entries.push_back({{"label", e.label}, {"score", e.score}});
  out << json{{"image_id", set.image_id}, {"proposals", entries}}.dump() << '\n';
}

std::vector<ProposalSet> read_proposals(std::istream& in) {
  std::vector<ProposalSet> sets;
  for_each_line(in, "proposal", [&](const json& j) {
    ProposalSet s;
    s.image_id = j.at("image_id").get<std::string>();
    for (const auto& e : j.at("proposals")) {
      s.entries.push_back({e.at("label").get<std::string>(), e.at("score").get<double>()});
    }
    s.validate();
    sets.push_back(std::move(s));
  });
  return sets;
}

void write_detection(std::ostream& out, const Detection& d) {
  out << json{{"image_id", d.image_id},
              {"label", d.label},
              {"box", {d.box.x0, d.box.y0, d.box.x1, d.box.y1}},
              {"score", d.confidence}}
             .dump()
      << '\n';
}

std::vector<Detection> read_detections(std::istream& in) {
  std::vector<Detection> dets;
  for_each_line(in, "detection", [&](const json& j) {
    Detection d;
    d.image_id = j.at("image_id").get<std::string>();
    d.label = j.at("label").get<std::string>();
    const auto& b = j.at("box");
    if (!b.is_array() || b.size() != 4) throw ValidationError("detection box must have 4 values");
    d.box = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
    d.confidence = j.at("score").get<double>();
    dets.push_back(std::move(d));
  });
  return dets;
}

void write_transcript(std::ostream& out, const Transcript& t) {
  json j{{"image_id", t.image_id}, {"kind", to_string(t.kind)}, {"response", t.response}};
  if (t.label) j["label"] = *t.label;
  out << j.dump() << '\n';
}

std::vector<Transcript> read_transcripts(std::istream& in) {
  std::vector<Transcript> out;
  for_each_line(in, "transcript", [&](const json& j) {
    Transcript t;
    t.image_id = j.at("image_id").get<std::string>();
    const auto kind = transcript_kind_from_string(j.at("kind").get<std::string>());
    if (!kind) throw ValidationError("unknown transcript kind " + j.at("kind").dump());
    t.kind = *kind;
    if (j.contains("label") && !j.at("label").is_null()) t.label = j.at("label").get<std::string>();
    t.response = j.at("response").get<std::string>();
    if (t.kind == TranscriptKind::YesNo && !t.label) {
      throw ValidationError("yes/no transcript for '" + t.image_id + "' has no label");
    }
    out.push_back(std::move(t));
  });
  return out;
}

}  // namespace nada
