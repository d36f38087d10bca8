#include "nada/proposer.hpp"

#include "nada/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace nada::proposer {

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

ProposalSet select_labels(const std::string& image_id, const Eigen::VectorXd& scores,
                          const std::vector<std::string>& classes, HeadMode head,
                          double threshold) {
  if (static_cast<std::size_t>(scores.size()) != classes.size()) {
    throw ValidationError("score vector does not match class count");
  }
  ProposalSet out{image_id, {}};
  if (scores.size() == 0) return out;
  if (head == HeadMode::SingleLabel) {
    Index best = 0;
    for (Index i = 1; i < scores.size(); ++i) {
      if (scores[i] > scores[best]) best = i;
    }
    out.entries.push_back({classes[static_cast<std::size_t>(best)], std::clamp(scores[best], 0.0, 1.0)});
  } else {
    for (Index i = 0; i < scores.size(); ++i) {
      if (scores[i] > threshold) {
        out.entries.push_back({classes[static_cast<std::size_t>(i)], std::clamp(scores[i], 0.0, 1.0)});
      }
    }
  }
  return out;
}

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw ValidationError("embedding dimension mismatch");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw ValidationError("zero-norm embedding");
  return a.dot(b) / (na * nb);
}

ProposalSet clip_propose(const std::string& image_id, const Eigen::VectorXd& image_embedding,
                         const Eigen::MatrixXd& text_embeddings,
                         const std::vector<std::string>& vocabulary, double threshold) {
  if (static_cast<std::size_t>(text_embeddings.rows()) != vocabulary.size()) {
    throw ValidationError("need one text embedding per class");
  }
  ProposalSet out{image_id, {}};
  for (Index i = 0; i < text_embeddings.rows(); ++i) {
    const double sim = cosine_similarity(image_embedding, text_embeddings.row(i).transpose());
    if (sim > threshold) {
      out.entries.push_back({vocabulary[static_cast<std::size_t>(i)], std::clamp(sim, 0.0, 1.0)});
    }
  }
  return out;
}

bool yesno_parse(const Transcript& transcript) {
  if (transcript.kind != TranscriptKind::YesNo) throw ValidationError("not a yes/no transcript");
  const std::string text = to_lower(transcript.response);
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !std::isalnum(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && std::isalnum(static_cast<unsigned char>(text[j]))) ++j;
    if (text.compare(i, j - i, "yes") == 0 && j - i == 3) return true;
    i = j;
  }
  return false;
}

ProposalSet yesno_propose(const std::string& image_id, const std::vector<Transcript>& transcripts,
                          const std::vector<std::string>& vocabulary) {
  ProposalSet out{image_id, {}};
  for (const auto& label : vocabulary) {
    for (const auto& t : transcripts) {
      if (t.image_id != image_id || !t.label || *t.label != label) continue;
      if (yesno_parse(t)) {
        out.entries.push_back({label, 1.0});
        break;
      }
    }
  }
  return out;
}

ProposalSet oracle_propose(const dataio::ImageRecord& record) {
  ProposalSet out{record.id, {}};
  for (const auto& l : record.gt_labels) out.entries.push_back({l, 1.0});
  return out;
}

}  // namespace nada::proposer
