#include "nada/attnagg.hpp"

#include "nada/error.hpp"

#include <algorithm>

namespace nada::attnagg {

GridSize alignment_target(const dataio::AttentionStack& stack) {
  GridSize target;
  for (const auto& size : stack.block_sizes) {
    target.rows = std::max(target.rows, size.rows);
    target.cols = std::max(target.cols, size.cols);
  }
  return target;
}

AlignedStack align_maps(const dataio::AttentionStack& stack) {
  stack.validate();
  AlignedStack out;
  out.image_id = stack.image_id;
  out.steps = stack.steps;
  out.blocks = stack.blocks;
  out.tokens = stack.tokens;
  out.size = alignment_target(stack);
  out.label_spans = stack.label_spans;
  out.maps.reserve(stack.maps.size());
  for (const auto& m : stack.maps) out.maps.push_back(resize_bilinear(m, out.size.rows, out.size.cols));
  return out;
}

namespace {

// Sorting each pixel's samples before summing makes the mean a function of
// the multiset of values only.
GridD order_free_mean(const std::vector<GridD>& samples, GridSize size) {
  GridD out(size.rows, size.cols);
  std::vector<double> column(samples.size());
  const double n = static_cast<double>(samples.size());
  for (Index i = 0; i < size.area(); ++i) {
    for (std::size_t s = 0; s < samples.size(); ++s) column[s] = samples[s].data()[i];
    std::sort(column.begin(), column.end());
    double sum = 0.0;
    for (double v : column) sum += v;
    out.data()[i] = sum / n;
  }
  return out;
}

void check_token(std::uint32_t token, std::uint32_t tokens) {
  if (token >= tokens) {
    throw ValidationError("token " + std::to_string(token) + " out of range for T = " +
                          std::to_string(tokens));
  }
}

const dataio::TokenSpan& span_of(const std::map<std::string, dataio::TokenSpan>& spans,
                                 const std::string& label, const std::string& image_id) {
  const auto it = spans.find(label);
  if (it == spans.end()) {
    throw ValidationError("label '" + label + "' has no token span in stack '" + image_id + "'");
  }
  return it->second;
}

template <typename TokenFn>
LabelMap clamp_span_mean(const dataio::TokenSpan& span, std::string label, std::string image_id,
                         TokenFn&& token_map) {
  GridD sum = token_map(span.front()).values;
  for (std::size_t i = 1; i < span.size(); ++i) sum += token_map(span[i]).values;
  LabelMap out;
  out.label = std::move(label);
  out.image_id = std::move(image_id);
  out.values = (sum / static_cast<double>(span.size())).cwiseMax(0.0).cwiseMin(1.0);
  return out;
}

}  // namespace

TokenMap average_token_maps(const AlignedStack& stack, std::uint32_t token) {
  check_token(token, stack.tokens);
  std::vector<GridD> samples;
  samples.reserve(static_cast<std::size_t>(stack.steps) * stack.blocks);
  for (std::uint32_t j = 0; j < stack.steps; ++j) {
    for (std::uint32_t k = 0; k < stack.blocks; ++k) samples.push_back(stack.map(j, k, token));
  }
  return {token, order_free_mean(samples, stack.size)};
}

TokenMap average_token_maps(const dataio::AttentionStack& stack, std::uint32_t token) {
  check_token(token, stack.tokens);
  const GridSize target = alignment_target(stack);
  std::vector<GridD> samples;
  samples.reserve(static_cast<std::size_t>(stack.steps) * stack.blocks);
  for (std::uint32_t j = 0; j < stack.steps; ++j) {
    for (std::uint32_t k = 0; k < stack.blocks; ++k) {
      samples.push_back(resize_bilinear(stack.map(j, k, token), target.rows, target.cols));
    }
  }
  return {token, order_free_mean(samples, target)};
}

LabelMap label_map(const AlignedStack& stack, const std::string& label) {
  const auto& span = span_of(stack.label_spans, label, stack.image_id);
  return clamp_span_mean(span, label, stack.image_id,
                         [&](std::uint32_t t) { return average_token_maps(stack, t); });
}

LabelMap label_map(const dataio::AttentionStack& stack, const std::string& label) {
  const auto& span = span_of(stack.label_spans, label, stack.image_id);
  return clamp_span_mean(span, label, stack.image_id,
                         [&](std::uint32_t t) { return average_token_maps(stack, t); });
}

}  // namespace nada::attnagg
