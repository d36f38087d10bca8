#pragma once

// Per-image records exchanged between pipeline stages, and their JSON-lines
// streams (one record per line).

#include "nada/types.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nada {

struct ScoredLabel {
  std::string label;
  double score = 0.0;

  friend bool operator==(const ScoredLabel&, const ScoredLabel&) = default;
};

/// Proposed classes L' for one image with per-class scores in [0, 1].
struct ProposalSet {
  std::string image_id;
  std::vector<ScoredLabel> entries;

  bool contains(const std::string& label) const;
  std::optional<double> score(const std::string& label) const;
  /// Labels unique, scores in [0,1], and (if given) every label in `vocabulary`.
  void validate(const std::vector<std::string>* vocabulary = nullptr) const;

  friend bool operator==(const ProposalSet&, const ProposalSet&) = default;
};

struct Detection {
  std::string image_id;
  std::string label;
  Box box;
  double confidence = 0.0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

enum class TranscriptKind { Choice, Score, YesNo };

std::string to_string(TranscriptKind kind);
std::optional<TranscriptKind> transcript_kind_from_string(const std::string& s);

/// Raw VLM response for one image and query.
struct Transcript {
  std::string image_id;
  TranscriptKind kind = TranscriptKind::Choice;
  std::optional<std::string> label;  // queried class for per-class yes/no
  std::string response;
};

void write_proposals(std::ostream& out, const ProposalSet& set);
std::vector<ProposalSet> read_proposals(std::istream& in);

void write_detection(std::ostream& out, const Detection& d);
std::vector<Detection> read_detections(std::istream& in);

void write_transcript(std::ostream& out, const Transcript& t);
std::vector<Transcript> read_transcripts(std::istream& in);

}  // namespace nada
