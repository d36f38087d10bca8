#include "nada/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using nada::cli::resolve_path;

void add_extraction(CLI::App* cmd, nada::segbox::ExtractionConfig& cfg, std::string& threshold,
                    bool& no_normalize) {
  cmd->add_option("--threshold", threshold, "otsu or a fixed value in (0,1)")->default_val("otsu");
  cmd->add_flag("--no-normalize", no_normalize, "threshold the raw map instead of its min-max rescale");
  cmd->add_option("--min-area", cfg.min_region_area, "drop regions below this fraction of the grid")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--marker-distance", cfg.marker_min_distance,
                  "minimum marker spacing, fraction of the grid side")
      ->check(CLI::Range(0.0, 1.0));
}

void apply_threshold(nada::segbox::ExtractionConfig& cfg, const std::string& threshold,
                     bool no_normalize) {
  cfg.normalize = !no_normalize;
  if (threshold == "otsu") {
    cfg.mode = nada::segbox::ThresholdMode::Otsu;
    return;
  }
  std::size_t used = 0;
  double value = 0;
  try {
    value = std::stod(threshold, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != threshold.size() || !(value > 0.0 && value < 1.0)) {
    throw CLI::ValidationError("--threshold", "expected otsu or a value in (0,1), got " + threshold);
  }
  cfg.mode = nada::segbox::ThresholdMode::Fixed;
  cfg.fixed_threshold = value;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Detection from text-to-image cross-attention maps"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "nada 0.1.0");

  // fixtures
  nada::cli::FixturesOptions fx;
  auto* fixtures = app.add_subcommand("fixtures", "write synthetic attention stacks and a manifest");
  fixtures->add_option("--out", fx.out_dir, "output directory")->required();
  fixtures->add_option("--images", fx.spec.images, "number of images")->check(CLI::Range(1, 100000));
  fixtures->add_option("--seed", fx.spec.seed, "random seed");
  fixtures->add_option("--min-blobs", fx.spec.min_blobs)->check(CLI::Range(1, 1 << 30));
  fixtures->add_option("--max-blobs", fx.spec.max_blobs)->check(CLI::Range(1, 1 << 30));
  fixtures->add_option("--grid", fx.spec.grid.rows, "finest grid side")->check(CLI::Range(4, 1024));
  fixtures->add_option("--steps", fx.spec.steps)->check(CLI::Range(1, 1 << 30));
  fixtures->add_option("--blocks", fx.spec.blocks)->check(CLI::Range(1, 6));
  fixtures->add_option("--noise", fx.spec.noise)->check(CLI::Range(0.0, 1.0));
  fixtures->add_option("--classes", fx.vocabulary, "artdl, iconart or a JSON list file");

  // detect
  nada::cli::DetectOptions det;
  std::string det_threshold;
  bool det_raw = false;
  auto* detect = app.add_subcommand("detect", "boxes for every proposed label");
  detect->add_option("--manifest", det.manifest)->required();
  detect->add_option("--stacks", det.stacks_dir, "directory of <image id>.nada files")->required();
  detect->add_option("--proposals", det.proposals)->required();
  detect->add_option("--out", det.output, "detections JSONL (stdout if omitted)");
  detect->add_flag("--uniform-scores", det.uniform_scores, "give every detection confidence 1");
  detect->add_option("--jobs", det.jobs)->check(CLI::Range(1, 256));
  add_extraction(detect, det.extraction, det_threshold, det_raw);

  // propose
  nada::cli::ProposeOptions prop;
  std::string prop_kind = "oracle";
  auto* propose = app.add_subcommand("propose", "class proposals per image");
  propose->add_option("--kind", prop_kind)
      ->check(CLI::IsMember({"wscp", "zscp-choice", "zscp-score", "clip", "yesno", "oracle"}));
  propose->add_option("--manifest", prop.manifest)->required();
  propose->add_option("--embeddings", prop.embeddings, "image embeddings");
  propose->add_option("--text-embeddings", prop.text_embeddings, "class text embeddings");
  propose->add_option("--checkpoint", prop.checkpoint);
  propose->add_option("--transcripts", prop.transcripts);
  propose->add_option("--out", prop.output, "proposals JSONL (stdout if omitted)");
  propose->add_option("--tau", prop.tau, "score cut-off")->check(CLI::Range(0.0, 1.0));
  propose->add_option("--similarity", prop.similarity, "cosine cut-off")->check(CLI::Range(-1.0, 1.0));
  propose->add_option("--multilabel-threshold", prop.multilabel_threshold)->check(CLI::Range(0.0, 1.0));

  // train
  nada::cli::TrainOptions tr;
  std::string loss = "ce";
  auto* train = app.add_subcommand("train", "fit the proposal MLP on image embeddings");
  train->add_option("--manifest", tr.manifest)->required();
  train->add_option("--embeddings", tr.embeddings)->required();
  train->add_option("--out", tr.output, "checkpoint path")->required();
  train->add_option("--loss", loss)->check(CLI::IsMember({"ce", "bce"}));
  train->add_option("--epochs", tr.config.epochs)->check(CLI::Range(1, 1 << 30));
  train->add_option("--batch", tr.config.batch_size)->check(CLI::Range(1, 1 << 30));
  train->add_option("--lr", tr.config.learning_rate)->check(CLI::PositiveNumber);
  train->add_option("--weight-decay", tr.config.weight_decay)->check(CLI::NonNegativeNumber);
  train->add_option("--layers", tr.config.layers)->check(CLI::Range(1, 1 << 30));
  train->add_option("--hidden", tr.config.hidden_dim)->check(CLI::Range(1, 1 << 30));
  train->add_option("--seed", tr.config.seed);

  // eval
  nada::cli::EvalOptions ev;
  auto* eval = app.add_subcommand("eval", "detection AP50 and classification metrics");
  eval->add_option("--manifest", ev.manifest)->required();
  eval->add_option("--detections", ev.detections);
  eval->add_option("--proposals", ev.proposals);
  eval->add_option("--json", ev.json_output, "also write the report as JSON");

  // sweep
  nada::cli::SweepOptions sw;
  std::string sw_threshold = "otsu";
  bool sw_raw = false;
  auto* sweep = app.add_subcommand("sweep", "AP50 at thresholds 0.1..0.9 and otsu");
  sweep->add_option("--manifest", sw.manifest)->required();
  sweep->add_option("--stacks", sw.stacks_dir)->required();
  sweep->add_option("--proposals", sw.proposals)->required();
  sweep->add_option("--json", sw.json_output);
  sweep->add_flag("--uniform-scores", sw.uniform_scores);
  sweep->add_option("--jobs", sw.jobs)->check(CLI::Range(1, 256));
  add_extraction(sweep, sw.extraction, sw_threshold, sw_raw);
  sweep->remove_option(sweep->get_option("--threshold"));

  // prompt
  nada::cli::PromptOptions pr;
  auto* prompt = app.add_subcommand("prompt", "inversion prompt for one label");
  prompt->add_option("--label", pr.label)->required();
  prompt->add_option("--remap", pr.remap, "iconart or a JSON remap file");
  prompt->add_option("--caption", pr.caption);
  prompt->add_option("--token-start", pr.token_start)->check(CLI::NonNegativeNumber);
  prompt->add_option("--budget", pr.budget)->check(CLI::Range(1, 1 << 30));

  // queries
  nada::cli::QueriesOptions q;
  auto* queries = app.add_subcommand("queries", "VLM queries as JSONL");
  queries->add_option("--classes", q.vocabulary, "artdl, iconart or a JSON list file");
  queries->add_option("--kind", q.kind)
      ->check(CLI::IsMember({"choice-artdl", "choice-iconart", "score", "yesno"}));

  try {
    app.parse(argc, argv);
    if (fx.spec.min_blobs > fx.spec.max_blobs) {
      throw CLI::ValidationError("--min-blobs", "must not exceed --max-blobs");
    }
    fx.spec.grid.cols = fx.spec.grid.rows;
    if (*detect) apply_threshold(det.extraction, det_threshold, det_raw);
    if (*sweep) sw.extraction.normalize = !sw_raw;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  prop.kind = *nada::cli::proposer_kind_from_string(prop_kind);
  tr.config.loss = loss == "ce" ? nada::proposer::Loss::CrossEntropy
                                : nada::proposer::Loss::BinaryCrossEntropy;

  auto& out = std::cout;
  auto& log = std::cerr;
  if (*fixtures) return nada::cli::run_fixtures(fx, out, log);
  if (*detect) return nada::cli::run_detect(det, out, log);
  if (*propose) return nada::cli::run_propose(prop, out, log);
  if (*train) return nada::cli::run_train(tr, out, log);
  if (*eval) return nada::cli::run_eval(ev, out, log);
  if (*sweep) return nada::cli::run_sweep(sw, out, log);
  if (*prompt) return nada::cli::run_prompt(pr, out, log);
  if (*queries) return nada::cli::run_queries(q, out, log);
  return 2;
}
