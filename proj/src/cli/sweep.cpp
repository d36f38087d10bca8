#include "nada/attnagg.hpp"
#include "nada/cli.hpp"
#include "nada/error.hpp"
#include "pool.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace nada::cli {

std::vector<SweepRow> sweep_rows(const segbox::ExtractionConfig& base) {
  std::vector<SweepRow> rows;
  for (int i = 1; i <= 9; ++i) {
    SweepRow row;
    row.config = base;
    row.config.mode = segbox::ThresholdMode::Fixed;
    row.config.fixed_threshold = i / 10.0;
    row.threshold = "0." + std::to_string(i);
    rows.push_back(row);
  }
  SweepRow otsu;
  otsu.config = base;
  otsu.config.mode = segbox::ThresholdMode::Otsu;
  otsu.threshold = "otsu";
  rows.push_back(otsu);
  return rows;
}

namespace {

struct ImageSweep {
  std::vector<std::vector<Detection>> detections;  // per row
  std::vector<std::size_t> foreground;             // per row
  std::vector<std::vector<Index>> fixed_foreground;  // per label, per fixed row
  std::size_t missing = 0;
};

}  // namespace

SweepResult sweep(const dataio::DatasetManifest& manifest, const std::vector<ProposalSet>& proposals,
                  const std::filesystem::path& stacks_dir, const segbox::ExtractionConfig& base,
                  bool uniform_scores, int jobs) {
  SweepResult result;
  result.rows = sweep_rows(base);
  for (const auto& row : result.rows) row.config.validate();
  const std::size_t nrows = result.rows.size();

  std::map<std::string, const ProposalSet*> by_image;
  for (const auto& p : proposals) {
    p.validate(&manifest.classes);
    if (!manifest.find_image(p.image_id)) {
      throw ValidationError("proposals for unknown image '" + p.image_id + "'");
    }
    by_image[p.image_id] = &p;
  }
  std::vector<std::pair<const dataio::ImageRecord*, const ProposalSet*>> items;
  for (const auto& image : manifest.images) {
    const auto it = by_image.find(image.id);
    if (it != by_image.end() && !it->second->entries.empty()) items.emplace_back(&image, it->second);
  }

  std::vector<ImageSweep> per_image(items.size());
  detail::parallel_for(items.size(), jobs, [&](std::size_t i) {
    const auto& [record, props] = items[i];
    const auto stack = dataio::load_attention_stack(stack_path(stacks_dir, record->id));
    const auto aligned = attnagg::align_maps(stack);
    auto& img = per_image[i];
    img.detections.resize(nrows);
    img.foreground.assign(nrows, 0);
    for (const auto& entry : props->entries) {
      if (!stack.label_spans.count(entry.label)) {
        ++img.missing;
        continue;
      }
      const auto map = attnagg::label_map(aligned, entry.label);
      std::vector<Index> fixed;
      for (std::size_t r = 0; r < nrows; ++r) {
        const auto ex = segbox::extract(map.values, record->width, record->height, result.rows[r].config);
        const Index count = ex.mask.count();
        img.foreground[r] += static_cast<std::size_t>(count);
        if (result.rows[r].config.mode == segbox::ThresholdMode::Fixed) fixed.push_back(count);
        for (const auto& b : ex.boxes) {
          const double confidence = uniform_scores ? 1.0 : entry.score * b.saliency;
          img.detections[r].push_back({record->id, entry.label, b.box, confidence});
        }
      }
      img.fixed_foreground.push_back(std::move(fixed));
    }
  });

  std::vector<std::vector<Detection>> detections(nrows);
  for (auto& img : per_image) {
    result.missing_spans += img.missing;
    for (std::size_t r = 0; r < nrows; ++r) {
      result.rows[r].foreground += img.foreground[r];
      for (auto& d : img.detections[r]) detections[r].push_back(std::move(d));
    }
    for (auto& f : img.fixed_foreground) {
      for (std::size_t t = 1; t < f.size(); ++t) {
        if (f[t] > f[t - 1]) result.foreground_monotone = false;
      }
      result.fixed_foreground.push_back(std::move(f));
    }
  }
  for (std::size_t r = 0; r < nrows; ++r) {
    result.rows[r].detections = detections[r].size();
    result.rows[r].macro_ap50 = evalkit::detection_ap50(detections[r], manifest).macro_ap50;
  }
  return result;
}

std::string format_sweep(const SweepResult& result) {
  std::ostringstream out;
  out << "threshold  macro_AP50  detections  foreground\n";
  for (const auto& row : result.rows) {
    char buf[96];
    if (row.macro_ap50) {
      std::snprintf(buf, sizeof buf, "%-10s %-11.3f %-11zu %zu\n", row.threshold.c_str(),
                    *row.macro_ap50, row.detections, row.foreground);
    } else {
      std::snprintf(buf, sizeof buf, "%-10s %-11s %-11zu %zu\n", row.threshold.c_str(), "n/a",
                    row.detections, row.foreground);
    }
    out << buf;
  }
  out << "foreground non-increasing in threshold: " << (result.foreground_monotone ? "yes" : "no")
      << '\n';
  return out.str();
}

int run_sweep(const SweepOptions& opt, std::ostream& out, std::ostream& log) {
  try {
    const auto manifest = dataio::load_manifest(resolve_path(opt.manifest));
    std::ifstream in(resolve_path(opt.proposals));
    if (!in) throw Error("cannot open proposals '" + resolve_path(opt.proposals).string() + "'");
    const auto proposals = read_proposals(in);
    const auto result = sweep(manifest, proposals, resolve_path(opt.stacks_dir), opt.extraction,
                              opt.uniform_scores, opt.jobs);
    out << format_sweep(result);
    if (result.missing_spans > 0) {
      log << "warning: " << result.missing_spans << " proposed labels had no span, skipped\n";
    }
    if (!opt.json_output.empty()) {
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& row : result.rows) {
        rows.push_back({{"threshold", row.threshold},
                        {"macro_ap50", row.macro_ap50 ? nlohmann::json(*row.macro_ap50) : nlohmann::json()},
                        {"detections", row.detections},
                        {"foreground", row.foreground}});
      }
      const auto path = resolve_path(opt.json_output);
      std::ofstream j(path);
      if (!j) throw Error("cannot write '" + path.string() + "'");
      j << nlohmann::json{{"rows", rows}, {"foreground_monotone", result.foreground_monotone}}.dump(2)
        << '\n';
    }
    return 0;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace nada::cli
