#include "nada/error.hpp"
#include "nada/proposer.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <numeric>
#include <optional>

namespace nada::proposer {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string trim_label(std::string_view s) {
  const auto keep = [](char c) {
    return !is_space(c) && !std::ispunct(static_cast<unsigned char>(c));
  };
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && !keep(s[b])) ++b;
  while (e > b && !keep(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::optional<std::size_t> vocabulary_index(const std::vector<std::string>& vocabulary,
                                            std::string_view key) {
  const std::string wanted = to_lower(trim_label(key));
  for (std::size_t i = 0; i < vocabulary.size(); ++i) {
    if (to_lower(trim_label(vocabulary[i])) == wanted) return i;
  }
  return std::nullopt;
}

// Recursive-descent reader for one {key: number, ...} dictionary.
class DictReader {
 public:
  DictReader(std::string_view text, std::size_t pos) : text_(text), pos_(pos) {}

  std::vector<std::pair<std::string, double>> read() {
    std::vector<std::pair<std::string, double>> entries;
    expect('{', "expected '{'");
    skip_ws();
    if (peek() == '}') {
      ++pos_;
      return entries;
    }
    while (true) {
      skip_ws();
      if (peek() == '}') {  // trailing comma
        ++pos_;
        return entries;
      }
      std::string key = read_key();
      skip_ws();
      expect(':', "expected ':' after key");
      skip_ws();
      const double value = read_number();
      entries.emplace_back(std::move(key), value);
      skip_ws();
      const char c = peek();
      if (c == ',') {
        ++pos_;
        continue;
      }
      if (c == '}') {
        ++pos_;
        return entries;
      }
      fail(at_end() ? "unterminated dictionary" : "expected ',' or '}'");
    }
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("malformed score dictionary: " + what, pos_);
  }
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }
  void skip_ws() {
    while (!at_end() && is_space(text_[pos_])) ++pos_;
  }
  void expect(char c, const char* what) {
    if (peek() != c) fail(at_end() ? "unterminated dictionary" : what);
    ++pos_;
  }

  std::string read_quoted() {
    const char quote = text_[pos_++];
    std::string out;
    while (true) {
      if (at_end()) fail("unterminated string");
      const char c = text_[pos_++];
      if (c == quote) return out;
      if (c == '\\') {
        if (at_end()) fail("unterminated string");
        out.push_back(text_[pos_++]);
        continue;
      }
      out.push_back(c);
    }
  }

  std::string read_key() {
    const char c = peek();
    if (c == '"' || c == '\'') return read_quoted();
    const std::size_t start = pos_;
    while (!at_end() && text_[pos_] != ':') {
      if (text_[pos_] == ',' || text_[pos_] == '}' || text_[pos_] == '{') fail("expected key");
      ++pos_;
    }
    if (at_end()) fail("unterminated dictionary");
    const std::string key = trim_label(text_.substr(start, pos_ - start));
    if (key.empty()) {
      pos_ = start;
      fail("empty key");
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  double read_number() {
    const char quote = (peek() == '"' || peek() == '\'') ? peek() : '\0';
    if (quote) ++pos_;
    const std::size_t start = pos_;
    while (!at_end()) {
      const char c = text_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+' ||
          c == 'e' || c == 'E') {
        ++pos_;
      } else {
        break;
      }
    }
    const std::string token(text_.substr(start, pos_ - start));
    char* end = nullptr;
    const double value = token.empty() ? 0.0 : std::strtod(token.c_str(), &end);
    if (token.empty() || end != token.c_str() + token.size() || !std::isfinite(value)) {
      pos_ = start;
      fail("expected a number");
    }
    if (quote) expect(quote, "unterminated quoted number");
    return value;
  }

  std::string_view text_;
  std::size_t pos_;
};

// Position of the first '{', if any.
std::optional<std::size_t> first_dictionary(std::string_view text) {
  const auto pos = text.find('{');
  if (pos == std::string_view::npos) return std::nullopt;
  return pos;
}

}  // namespace

ProposalSet zscp_parse_choice(const Transcript& transcript, const std::vector<std::string>& vocabulary) {
  if (transcript.kind != TranscriptKind::Choice) throw ValidationError("not a choice transcript");
  std::string text = to_lower(transcript.response);
  std::vector<std::size_t> order(vocabulary.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::string> needles;
  for (const auto& label : vocabulary) needles.push_back(to_lower(trim_label(label)));
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return needles[a].size() > needles[b].size();
  });

  std::vector<bool> found(vocabulary.size(), false);
  std::vector<bool> claimed(text.size(), false);
  for (std::size_t idx : order) {
    const std::string& needle = needles[idx];
    if (needle.empty()) continue;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) {
      const bool free = std::none_of(claimed.begin() + static_cast<std::ptrdiff_t>(pos),
                                     claimed.begin() + static_cast<std::ptrdiff_t>(pos + needle.size()),
                                     [](bool b) { return b; });
      if (!free) continue;
      found[idx] = true;
      std::fill(claimed.begin() + static_cast<std::ptrdiff_t>(pos),
                claimed.begin() + static_cast<std::ptrdiff_t>(pos + needle.size()), true);
    }
  }
  ProposalSet out{transcript.image_id, {}};
  for (std::size_t i = 0; i < vocabulary.size(); ++i) {
    if (found[i]) out.entries.push_back({vocabulary[i], 1.0});
  }
  return out;
}

ProposalSet zscp_parse_score(const Transcript& transcript, const std::vector<std::string>& vocabulary,
                             double tau) {
  if (transcript.kind != TranscriptKind::Score) throw ValidationError("not a score transcript");
  ProposalSet out{transcript.image_id, {}};
  const std::string_view text = transcript.response;
  if (to_lower(trim_label(text)) == "none") return out;
  const auto start = first_dictionary(text);
  if (!start) return out;

  std::vector<std::optional<double>> scores(vocabulary.size());
  for (const auto& [key, value] : DictReader(text, *start).read()) {
    const auto idx = vocabulary_index(vocabulary, key);
    if (!idx || scores[*idx]) continue;  // unknown label, or repeated key: first wins
    scores[*idx] = std::clamp(value, 0.0, 1.0);
  }
  for (std::size_t i = 0; i < vocabulary.size(); ++i) {
    if (scores[i] && *scores[i] > tau) out.entries.push_back({vocabulary[i], *scores[i]});
  }
  return out;
}

}  // namespace nada::proposer
