#pragma once

// Batch commands behind the `nada` executable. Each run_* writes its primary
// output to a file (or `out` when the path is empty), reports to `log`, and
// returns the process exit status.

#include "nada/evalkit.hpp"
#include "nada/fixture.hpp"
#include "nada/manifest.hpp"
#include "nada/mlp.hpp"
#include "nada/records.hpp"
#include "nada/segbox.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nada::cli {

/// Relative paths resolve against $NADA_DATA_DIR when it is set.
std::filesystem::path resolve_path(const std::filesystem::path& path);

/// Stack file of an image inside a stacks directory.
std::filesystem::path stack_path(const std::filesystem::path& stacks_dir, const std::string& image_id);

/// "artdl" / "iconart" or a JSON list file.
std::vector<std::string> load_vocabulary(const std::string& spec);

struct FixturesOptions {
  dataio::FixtureSpec spec;
  std::string vocabulary = "artdl";
  std::filesystem::path out_dir;
};
int run_fixtures(const FixturesOptions& opt, std::ostream& out, std::ostream& log);

struct DetectOptions {
  std::filesystem::path manifest;
  std::filesystem::path stacks_dir;
  std::filesystem::path proposals;
  std::filesystem::path output;  // empty: stdout
  segbox::ExtractionConfig extraction;
  bool uniform_scores = false;
  int jobs = 1;
};

struct DetectResult {
  std::vector<Detection> detections;  // manifest order, then proposal order
  std::size_t images = 0;
  std::size_t missing_spans = 0;
  std::vector<std::string> warnings;
};

/// Detections for one image: every proposed label with a span is aggregated,
/// segmented, and boxed. Labels without a span are counted in `missing`.
std::vector<Detection> detect_image(const dataio::AttentionStack& stack,
                                    const dataio::ImageRecord& record,
                                    const ProposalSet& proposals,
                                    const segbox::ExtractionConfig& config, bool uniform_scores,
                                    std::vector<std::string>* missing);

/// Runs detect_image over every proposed image with `jobs` workers, loading
/// one stack per worker at a time. Output order is manifest order.
DetectResult detect_all(const dataio::DatasetManifest& manifest,
                        const std::vector<ProposalSet>& proposals,
                        const std::filesystem::path& stacks_dir,
                        const segbox::ExtractionConfig& config, bool uniform_scores, int jobs);

int run_detect(const DetectOptions& opt, std::ostream& out, std::ostream& log);

enum class ProposerKind { Wscp, ZscpChoice, ZscpScore, Clip, YesNo, Oracle };
std::optional<ProposerKind> proposer_kind_from_string(const std::string& s);

struct ProposeOptions {
  ProposerKind kind = ProposerKind::Oracle;
  std::filesystem::path manifest;
  std::filesystem::path embeddings;       // wscp, clip: image embeddings
  std::filesystem::path text_embeddings;  // clip: class embeddings, ids = labels
  std::filesystem::path checkpoint;       // wscp
  std::filesystem::path transcripts;      // zscp-*, yesno
  std::filesystem::path output;
  double tau = 0.5;
  double similarity = 0.28;
  double multilabel_threshold = 0.5;
};
int run_propose(const ProposeOptions& opt, std::ostream& out, std::ostream& log);

struct TrainOptions {
  std::filesystem::path manifest;
  std::filesystem::path embeddings;
  std::filesystem::path output;
  proposer::TrainConfig config;
};
int run_train(const TrainOptions& opt, std::ostream& out, std::ostream& log);

struct EvalOptions {
  std::filesystem::path manifest;
  std::filesystem::path detections;
  std::filesystem::path proposals;
  std::filesystem::path json_output;
};
int run_eval(const EvalOptions& opt, std::ostream& out, std::ostream& log);

struct SweepOptions {
  std::filesystem::path manifest;
  std::filesystem::path stacks_dir;
  std::filesystem::path proposals;
  std::filesystem::path json_output;
  segbox::ExtractionConfig extraction;  // mode and threshold are overridden per row
  bool uniform_scores = false;
  int jobs = 1;
};

struct SweepRow {
  std::string threshold;  // "0.1" .. "0.9" or "otsu"
  segbox::ExtractionConfig config;
  std::optional<double> macro_ap50;
  std::size_t detections = 0;
  std::size_t foreground = 0;  // mask pixels summed over every (image, label)
};

struct SweepResult {
  std::vector<SweepRow> rows;  // nine fixed thresholds ascending, then otsu
  /// Per (image, label), mask pixel count at each fixed threshold.
  std::vector<std::vector<Index>> fixed_foreground;
  bool foreground_monotone = true;
  std::size_t missing_spans = 0;
};

std::vector<SweepRow> sweep_rows(const segbox::ExtractionConfig& base);

SweepResult sweep(const dataio::DatasetManifest& manifest, const std::vector<ProposalSet>& proposals,
                  const std::filesystem::path& stacks_dir, const segbox::ExtractionConfig& base,
                  bool uniform_scores, int jobs);

std::string format_sweep(const SweepResult& result);

int run_sweep(const SweepOptions& opt, std::ostream& out, std::ostream& log);

struct PromptOptions {
  std::string label;
  std::string remap;  // "", "iconart", or a JSON file
  std::optional<std::string> caption;
  std::optional<int> token_start;
  int budget = 75;
};
int run_prompt(const PromptOptions& opt, std::ostream& out, std::ostream& log);

struct QueriesOptions {
  std::string vocabulary = "artdl";
  std::string kind = "choice-artdl";
};
int run_queries(const QueriesOptions& opt, std::ostream& out, std::ostream& log);

}  // namespace nada::cli
