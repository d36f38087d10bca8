#include "nada/cli.hpp"

#include "nada/attnagg.hpp"
#include "nada/error.hpp"
#include "nada/promptgen.hpp"
#include "nada/proposer.hpp"
#include "pool.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>

namespace nada::cli {

namespace fs = std::filesystem;

fs::path resolve_path(const fs::path& path) {
  if (path.empty() || path.is_absolute()) return path;
  if (const char* root = std::getenv("NADA_DATA_DIR"); root && *root) return fs::path(root) / path;
  return path;
}

fs::path stack_path(const fs::path& stacks_dir, const std::string& image_id) {
  return stacks_dir / (image_id + ".nada");
}

std::vector<std::string> load_vocabulary(const std::string& spec) {
  if (auto v = dataio::vocab::builtin(spec)) return *v;
  std::ifstream in(resolve_path(spec));
  if (!in) throw Error("cannot open vocabulary '" + spec + "' (expected artdl, iconart or a JSON list)");
  const auto doc = nlohmann::json::parse(in, nullptr, false);
  if (!doc.is_array()) throw ValidationError("vocabulary file '" + spec + "' is not a JSON list");
  std::vector<std::string> classes;
  for (const auto& v : doc) {
    if (!v.is_string()) throw ValidationError("vocabulary entries must be strings");
    classes.push_back(v.get<std::string>());
  }
  return classes;
}

namespace {

int guarded(std::ostream& log, const std::function<int()>& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 1;
  }
}

void with_output(const fs::path& path, std::ostream& fallback,
                 const std::function<void(std::ostream&)>& write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  const auto resolved = resolve_path(path);
  if (resolved.has_parent_path()) fs::create_directories(resolved.parent_path());
  std::ofstream out(resolved, std::ios::binary);
  if (!out) throw Error("cannot write '" + resolved.string() + "'");
  write(out);
  out.flush();
  if (!out) throw Error("write failed for '" + resolved.string() + "'");
}

std::ifstream open_input(const fs::path& path, const char* what) {
  if (path.empty()) throw ValidationError(std::string("missing ") + what + " path");
  const auto resolved = resolve_path(path);
  std::ifstream in(resolved, std::ios::binary);
  if (!in) throw Error(std::string("cannot open ") + what + " '" + resolved.string() + "'");
  return in;
}

std::vector<ProposalSet> load_proposals(const fs::path& path) {
  auto in = open_input(path, "proposals");
  return read_proposals(in);
}

}  // namespace

// fixtures ------------------------------------------------------------------

int run_fixtures(const FixturesOptions& opt, std::ostream& out, std::ostream& log) {
  return guarded(log, [&] {
    auto spec = opt.spec;
    if (spec.classes.empty()) spec.classes = load_vocabulary(opt.vocabulary);
    const auto files = dataio::write_fixture(spec, resolve_path(opt.out_dir));
    for (const auto& f : files) out << f.string() << '\n';
    log << "wrote " << files.size() - 1 << " stacks and 1 manifest\n";
    return 0;
  });
}

// detect --------------------------------------------------------------------

std::vector<Detection> detect_image(const dataio::AttentionStack& stack,
                                    const dataio::ImageRecord& record, const ProposalSet& proposals,
                                    const segbox::ExtractionConfig& config, bool uniform_scores,
                                    std::vector<std::string>* missing) {
  std::vector<Detection> detections;
  const auto aligned = attnagg::align_maps(stack);
  for (const auto& entry : proposals.entries) {
    if (!stack.label_spans.count(entry.label)) {
      if (missing) missing->push_back(entry.label);
      continue;
    }
    const auto map = attnagg::label_map(aligned, entry.label);
    for (const auto& b : segbox::extract_boxes(map.values, record.width, record.height, config)) {
      const double confidence = uniform_scores ? 1.0 : entry.score * b.saliency;
      detections.push_back({record.id, entry.label, b.box, confidence});
    }
  }
  return detections;
}

namespace {

struct WorkItem {
  const dataio::ImageRecord* record;
  const ProposalSet* proposals;
};

std::vector<WorkItem> work_items(const dataio::DatasetManifest& manifest,
                                 const std::vector<ProposalSet>& proposals) {
  std::map<std::string, const ProposalSet*> by_image;
  for (const auto& p : proposals) {
    p.validate(&manifest.classes);
    if (!manifest.find_image(p.image_id)) {
      throw ValidationError("proposals for unknown image '" + p.image_id + "'");
    }
    if (!by_image.emplace(p.image_id, &p).second) {
      throw ValidationError("two proposal sets for image '" + p.image_id + "'");
    }
  }
  std::vector<WorkItem> items;
  for (const auto& image : manifest.images) {
    const auto it = by_image.find(image.id);
    if (it != by_image.end() && !it->second->entries.empty()) items.push_back({&image, it->second});
  }
  return items;
}

}  // namespace

DetectResult detect_all(const dataio::DatasetManifest& manifest,
                        const std::vector<ProposalSet>& proposals, const fs::path& stacks_dir,
                        const segbox::ExtractionConfig& config, bool uniform_scores, int jobs) {
  config.validate();
  const auto items = work_items(manifest, proposals);
  std::vector<std::vector<Detection>> per_image(items.size());
  std::vector<std::vector<std::string>> missing(items.size());
  detail::parallel_for(items.size(), jobs, [&](std::size_t i) {
    const auto& item = items[i];
    const auto stack = dataio::load_attention_stack(stack_path(stacks_dir, item.record->id));
    per_image[i] = detect_image(stack, *item.record, *item.proposals, config, uniform_scores, &missing[i]);
  });
  DetectResult result;
  result.images = items.size();
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (auto& d : per_image[i]) result.detections.push_back(std::move(d));
    for (const auto& label : missing[i]) {
      ++result.missing_spans;
      result.warnings.push_back("image '" + items[i].record->id + "' has no span for '" + label +
                                "', skipped");
    }
  }
  return result;
}

int run_detect(const DetectOptions& opt, std::ostream& out, std::ostream& log) {
  return guarded(log, [&] {
    const auto manifest = dataio::load_manifest(resolve_path(opt.manifest));
    const auto proposals = load_proposals(opt.proposals);
    const auto result = detect_all(manifest, proposals, resolve_path(opt.stacks_dir), opt.extraction,
                                   opt.uniform_scores, opt.jobs);
    with_output(opt.output, out, [&](std::ostream& o) {
      for (const auto& d : result.detections) write_detection(o, d);
    });
    for (const auto& w : result.warnings) log << "warning: " << w << '\n';
    log << "detect: " << result.images << " images, " << result.detections.size()
        << " detections, " << result.missing_spans << " missing spans\n";
    return 0;
  });
}

// propose -------------------------------------------------------------------

std::optional<ProposerKind> proposer_kind_from_string(const std::string& s) {
  static const std::map<std::string, ProposerKind> kinds = {
      {"wscp", ProposerKind::Wscp},      {"zscp-choice", ProposerKind::ZscpChoice},
      {"zscp-score", ProposerKind::ZscpScore}, {"clip", ProposerKind::Clip},
      {"yesno", ProposerKind::YesNo},    {"oracle", ProposerKind::Oracle}};
  const auto it = kinds.find(s);
  if (it == kinds.end()) return std::nullopt;
  return it->second;
}

namespace {

Eigen::VectorXd image_embedding(const dataio::EmbeddingMatrix& m, const std::string& id) {
  const auto row = m.find(id);
  if (!row) throw ValidationError("no embedding for image '" + id + "'");
  return m.row(*row);
}

std::vector<ProposalSet> propose_from_transcripts(const ProposeOptions& opt,
                                                  const dataio::DatasetManifest& manifest,
                                                  std::ostream& log) {
  auto in = open_input(opt.transcripts, "transcripts");
  const auto transcripts = read_transcripts(in);
  const TranscriptKind expected = opt.kind == ProposerKind::ZscpChoice ? TranscriptKind::Choice
                                  : opt.kind == ProposerKind::ZscpScore ? TranscriptKind::Score
                                                                        : TranscriptKind::YesNo;
  std::map<std::string, std::vector<Transcript>> by_image;
  for (const auto& t : transcripts) {
    if (t.kind != expected) {
      throw ValidationError("transcript for '" + t.image_id + "' has kind " + to_string(t.kind) +
                            ", proposer expects " + to_string(expected));
    }
    if (!manifest.find_image(t.image_id)) {
      throw ValidationError("transcript for unknown image '" + t.image_id + "'");
    }
    by_image[t.image_id].push_back(t);
  }
  std::vector<ProposalSet> sets;
  for (const auto& image : manifest.images) {
    const auto it = by_image.find(image.id);
    if (it == by_image.end()) continue;
    const auto& ts = it->second;
    if (expected == TranscriptKind::YesNo) {
      sets.push_back(proposer::yesno_propose(image.id, ts, manifest.classes));
      continue;
    }
    if (ts.size() != 1) {
      throw ValidationError("image '" + image.id + "' has " + std::to_string(ts.size()) +
                            " transcripts, expected 1");
    }
    if (expected == TranscriptKind::Choice) {
      sets.push_back(proposer::zscp_parse_choice(ts.front(), manifest.classes));
      continue;
    }
    try {
      sets.push_back(proposer::zscp_parse_score(ts.front(), manifest.classes, opt.tau));
    } catch (const ParseError& e) {
      log << "warning: image '" << image.id << "': " << e.what() << ", no labels proposed\n";
      sets.push_back({image.id, {}});
    }
  }
  return sets;
}

}  // namespace

int run_propose(const ProposeOptions& opt, std::ostream& out, std::ostream& log) {
  return guarded(log, [&] {
    const auto manifest = dataio::load_manifest(resolve_path(opt.manifest));
    std::vector<ProposalSet> sets;
    switch (opt.kind) {
      case ProposerKind::Oracle:
        for (const auto& image : manifest.images) sets.push_back(proposer::oracle_propose(image));
        break;
      case ProposerKind::Wscp: {
        if (opt.checkpoint.empty() || opt.embeddings.empty()) {
          throw ValidationError("wscp needs --checkpoint and --embeddings");
        }
        const auto model = proposer::load_checkpoint(resolve_path(opt.checkpoint));
        const auto emb = dataio::load_embedding_matrix(resolve_path(opt.embeddings));
        if (model.output_dim() != static_cast<Index>(manifest.classes.size())) {
          throw ValidationError("checkpoint has " + std::to_string(model.output_dim()) +
                                " outputs, manifest has " + std::to_string(manifest.classes.size()) +
                                " classes");
        }
        for (const auto& image : manifest.images) {
          const auto scores = proposer::wscp_infer(model, image_embedding(emb, image.id));
          sets.push_back(proposer::select_labels(image.id, scores, manifest.classes, model.head,
                                                 opt.multilabel_threshold));
        }
        break;
      }
      case ProposerKind::Clip: {
        if (opt.embeddings.empty() || opt.text_embeddings.empty()) {
          throw ValidationError("clip needs --embeddings and --text-embeddings");
        }
        const auto emb = dataio::load_embedding_matrix(resolve_path(opt.embeddings));
        const auto text = dataio::load_embedding_matrix(resolve_path(opt.text_embeddings));
        Eigen::MatrixXd rows(static_cast<Index>(manifest.classes.size()), text.dim());
        for (std::size_t c = 0; c < manifest.classes.size(); ++c) {
          const auto r = text.find(manifest.classes[c]);
          if (!r) throw ValidationError("no text embedding for class '" + manifest.classes[c] + "'");
          rows.row(static_cast<Index>(c)) = text.row(*r).transpose();
        }
        for (const auto& image : manifest.images) {
          sets.push_back(proposer::clip_propose(image.id, image_embedding(emb, image.id), rows,
                                                manifest.classes, opt.similarity));
        }
        break;
      }
      case ProposerKind::ZscpChoice:
      case ProposerKind::ZscpScore:
      case ProposerKind::YesNo:
        if (opt.transcripts.empty()) throw ValidationError("this proposer needs --transcripts");
        sets = propose_from_transcripts(opt, manifest, log);
        break;
    }
    with_output(opt.output, out, [&](std::ostream& o) {
      for (const auto& s : sets) write_proposals(o, s);
    });
    std::size_t labels = 0;
    for (const auto& s : sets) labels += s.entries.size();
    log << "propose: " << sets.size() << " images, " << labels << " labels\n";
    return 0;
  });
}

// train ---------------------------------------------------------------------

int run_train(const TrainOptions& opt, std::ostream& out, std::ostream& log) {
  return guarded(log, [&] {
    if (opt.output.empty()) throw ValidationError("train needs --out");
    const auto manifest = dataio::load_manifest(resolve_path(opt.manifest));
    const auto emb = dataio::load_embedding_matrix(resolve_path(opt.embeddings));
    std::map<std::string, std::vector<std::string>> labels;
    for (const auto& image : manifest.images) labels[image.id] = image.gt_labels;
    const auto result = proposer::wscp_train(emb, labels, manifest.classes, opt.config);
    const auto path = resolve_path(opt.output);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    proposer::save_checkpoint(result.model, path);
    out << path.string() << '\n';
    log << "train: " << labels.size() << " images, " << opt.config.epochs
        << " epochs, final loss " << result.final_loss << '\n';
    return 0;
  });
}

// eval ----------------------------------------------------------------------

int run_eval(const EvalOptions& opt, std::ostream& out, std::ostream& log) {
  return guarded(log, [&] {
    if (opt.detections.empty() && opt.proposals.empty()) {
      log << "error: eval needs --detections and/or --proposals\n";
      return 2;
    }
    const auto manifest = dataio::load_manifest(resolve_path(opt.manifest));
    evalkit::EvalReport report;
    report.dataset = manifest.name;
    report.images = manifest.images.size();
    if (!opt.detections.empty()) {
      auto in = open_input(opt.detections, "detections");
      report = evalkit::detection_ap50(read_detections(in), manifest);
    }
    if (!opt.proposals.empty()) {
      const auto cls = evalkit::classification_metrics(load_proposals(opt.proposals), manifest);
      report.classification = cls.classification;
      report.macro_precision = cls.macro_precision;
      report.macro_recall = cls.macro_recall;
      report.macro_f1 = cls.macro_f1;
      report.macro_ap = cls.macro_ap;
    }
    out << evalkit::format_report(report);
    if (!opt.json_output.empty()) {
      with_output(opt.json_output, out,
                  [&](std::ostream& o) { o << evalkit::report_to_json(report).dump(2) << '\n'; });
    }
    return 0;
  });
}

// prompts and queries -------------------------------------------------------

int run_prompt(const PromptOptions& opt, std::ostream& out, std::ostream& log) {
  return guarded(log, [&] {
    promptgen::LabelRemapTable table;
    if (opt.remap == "iconart") {
      table = promptgen::LabelRemapTable::iconart();
    } else if (!opt.remap.empty()) {
      table = promptgen::LabelRemapTable::load(resolve_path(opt.remap));
    }
    const auto rendered = promptgen::remap_label(opt.label, table);
    const auto spec = opt.caption
                          ? promptgen::caption_prompt(*opt.caption, rendered, opt.budget, opt.token_start)
                          : promptgen::template_prompt(rendered);
    out << spec.text << '\n';
    if (spec.fallback) log << "note: caption does not usably mention '" << rendered << "', template prepended\n";
    return 0;
  });
}

int run_queries(const QueriesOptions& opt, std::ostream& out, std::ostream& log) {
  return guarded(log, [&] {
    const auto kind = promptgen::query_kind_from_string(opt.kind);
    if (!kind) {
      log << "error: unknown query kind '" << opt.kind << "'\n";
      return 2;
    }
    const auto vocabulary = load_vocabulary(opt.vocabulary);
    const auto queries = promptgen::build_vlm_query(vocabulary, *kind);
    for (std::size_t i = 0; i < queries.size(); ++i) {
      nlohmann::json line = {{"kind", opt.kind}, {"query", queries[i]}};
      if (*kind == promptgen::QueryKind::PerClassYesNo) line["label"] = vocabulary[i];
      out << line.dump() << '\n';
    }
    return 0;
  });
}

}  // namespace nada::cli
