#pragma once

#include "nada/manifest.hpp"
#include "nada/mlp.hpp"
#include "nada/records.hpp"

#include <Eigen/Core>

#include <string>
#include <string_view>
#include <vector>

namespace nada::proposer {

inline constexpr double kScoreThreshold = 0.5;       // tau for score transcripts
inline constexpr double kSimilarityThreshold = 0.28; // CLIP cosine cut-off
inline constexpr double kMultiLabelThreshold = 0.5;

/// Single-label: the argmax class (lowest index on ties) with its probability.
/// Multi-label: every class whose sigmoid exceeds `threshold`.
ProposalSet select_labels(const std::string& image_id, const Eigen::VectorXd& scores,
                          const std::vector<std::string>& classes, HeadMode head,
                          double threshold = kMultiLabelThreshold);

/// Classes named in a free-text answer, each with score 1. Matching is
/// case-insensitive containment, longest label first; text claimed by a
/// longer label cannot match a shorter one.
ProposalSet zscp_parse_choice(const Transcript& transcript, const std::vector<std::string>& vocabulary);

/// Classes scored above `tau` in the first {label: score, ...} dictionary of
/// the answer. "None" or no dictionary gives an empty set. Throws ParseError
/// with the byte offset when the dictionary is malformed.
ProposalSet zscp_parse_score(const Transcript& transcript, const std::vector<std::string>& vocabulary,
                             double tau = kScoreThreshold);

/// True iff the response contains "yes" as a standalone word (any case).
bool yesno_parse(const Transcript& transcript);

/// Proposals for one image from its per-class yes/no transcripts.
ProposalSet yesno_propose(const std::string& image_id, const std::vector<Transcript>& transcripts,
                          const std::vector<std::string>& vocabulary);

/// Cosine similarity of the image embedding with every class text embedding
/// (rows of `text_embeddings`, in vocabulary order); classes strictly above
/// `threshold` are kept with the similarity clipped to [0,1] as score.
ProposalSet clip_propose(const std::string& image_id, const Eigen::VectorXd& image_embedding,
                         const Eigen::MatrixXd& text_embeddings,
                         const std::vector<std::string>& vocabulary,
                         double threshold = kSimilarityThreshold);

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Ground-truth labels with score 1.
ProposalSet oracle_propose(const dataio::ImageRecord& record);

/// ASCII lower-casing used by the parsers.
std::string to_lower(std::string_view s);

}  // namespace nada::proposer
