#include "nada/error.hpp"
#include "nada/manifest.hpp"
#include "nada/proposer.hpp"

#include <doctest.h>

using namespace nada;
using namespace nada::proposer;

namespace {

Transcript choice(std::string text) { return {"img", TranscriptKind::Choice, std::nullopt, std::move(text)}; }
Transcript score(std::string text) { return {"img", TranscriptKind::Score, std::nullopt, std::move(text)}; }
Transcript yesno(std::string label, std::string text) {
  return {"img", TranscriptKind::YesNo, std::move(label), std::move(text)};
}

std::vector<std::string> labels_of(const ProposalSet& p) {
  std::vector<std::string> out;
  for (const auto& e : p.entries) out.push_back(e.label);
  return out;
}

const std::vector<std::string>& artdl() { return dataio::vocab::artdl(); }
const std::vector<std::string>& iconart() { return dataio::vocab::iconart(); }

}  // namespace

TEST_CASE("label selection") {
  const std::vector<std::string> cls{"a", "b", "c"};
  Eigen::VectorXd p(3);
  p << 0.1, 0.7, 0.2;
  const auto single = select_labels("i", p, cls, HeadMode::SingleLabel);
  REQUIRE(single.entries.size() == 1);
  CHECK(single.entries[0] == ScoredLabel{"b", 0.7});
  p << 0.6, 0.4, 0.9;
  CHECK(labels_of(select_labels("i", p, cls, HeadMode::MultiLabel)) == std::vector<std::string>{"a", "c"});
  p << 0.3, 0.4, 0.5;
  CHECK(select_labels("i", p, cls, HeadMode::MultiLabel).entries.empty());
  p << 0.4, 0.2, 0.4;
  CHECK(select_labels("i", p, cls, HeadMode::SingleLabel).entries[0].label == "a");
}

TEST_CASE("choice parsing") {
  const auto p = zscp_parse_choice(choice("The painting shows Mary, mother of Jesus and Saint Peter."), artdl());
  CHECK(labels_of(p) == std::vector<std::string>{"Mary, mother of Jesus", "Saint Peter"});
  for (const auto& e : p.entries) CHECK(e.score == 1.0);
  CHECK(zscp_parse_choice(choice("A landscape with cows."), artdl()).entries.empty());
  CHECK(labels_of(zscp_parse_choice(choice("saint peter, and again SAINT PETER"), artdl())) ==
        std::vector<std::string>{"Saint Peter"});
  // "naked person" must not also count as "person"
  CHECK(labels_of(zscp_parse_choice(choice("A naked person next to ruins"), iconart())) ==
        std::vector<std::string>{"naked person", "ruins"});
  CHECK(labels_of(zscp_parse_choice(choice("A person and a naked person"), iconart())) ==
        std::vector<std::string>{"person", "naked person"});
  const auto t = choice("Saint Jerome");
  CHECK(zscp_parse_choice(t, artdl()) == zscp_parse_choice(t, artdl()));
}

TEST_CASE("score parsing") {
  SUBCASE("threshold") {
    const auto p = zscp_parse_score(score(R"(Here you go: {"mary": 0.9, "angel": 0.3})"), iconart());
    REQUIRE(p.entries.size() == 1);
    CHECK(p.entries[0] == ScoredLabel{"mary", 0.9});
  }
  SUBCASE("None") { CHECK(zscp_parse_score(score("None"), iconart()).entries.empty()); }
  SUBCASE("no dictionary") { CHECK(zscp_parse_score(score("I see an angel."), iconart()).entries.empty()); }
  SUBCASE("strict boundary") {
    CHECK(zscp_parse_score(score(R"({"ruins": 0.5})"), iconart()).entries.empty());
    CHECK(zscp_parse_score(score(R"({"ruins": 0.5000001})"), iconart()).entries.size() == 1);
  }
  SUBCASE("case, quoting and clipping") {
    const auto p = zscp_parse_score(score(R"({'Angel': 1.7, baby: "0.8", "dragon": 0.99})"), iconart());
    CHECK(labels_of(p) == std::vector<std::string>{"angel", "baby"});
    CHECK(p.entries[0].score == 1.0);
  }
  SUBCASE("malformed dictionaries carry an offset") {
    for (const char* bad : {R"({"mary": })", R"({"mary" 0.9})", R"({"mary": 0.9)", R"({"mary": abc})",
                            R"(x {"mary": 0.9,, "angel": 1})"}) {
      CAPTURE(bad);
      try {
        zscp_parse_score(score(bad), iconart());
        FAIL("expected a parse error");
      } catch (const ParseError& e) {
        CHECK(e.offset() <= std::string(bad).size());
      }
    }
  }
}

TEST_CASE("yes/no parsing") {
  CHECK(yesno_parse(yesno("Saint Peter", "Yes, Saint Peter is depicted.")));
  CHECK_FALSE(yesno_parse(yesno("Saint Peter", "No.")));
  CHECK_FALSE(yesno_parse(yesno("angel", "Eyes are visible")));
  CHECK(yesno_parse(yesno("angel", "I think... YES")));
  const auto p = yesno_propose("img", {yesno("angel", "yes"), yesno("ruins", "no"), yesno("mary", "Yes!")}, iconart());
  CHECK(labels_of(p) == std::vector<std::string>{"angel", "mary"});
}

TEST_CASE("similarity proposals") {
  Eigen::VectorXd img(3);
  img << 1, 0, 0;
  Eigen::MatrixXd text(3, 3);
  text << 1, 0, 0,                                    // identical
      0, 1, 0,                                        // orthogonal
      0.28, std::sqrt(1 - 0.28 * 0.28), 0;            // exactly at the cut-off
  const std::vector<std::string> cls{"a", "b", "c"};
  const auto p = clip_propose("i", img, text, cls);
  REQUIRE(p.entries.size() == 1);
  CHECK(p.entries[0].label == "a");
  CHECK(p.entries[0].score == doctest::Approx(1.0));
  CHECK(cosine_similarity(img, text.row(2).transpose()) <= 0.28);
  CHECK_THROWS_AS(cosine_similarity(img, Eigen::VectorXd::Zero(3)), ValidationError);
}

TEST_CASE("oracle proposals") {
  dataio::ImageRecord r{"img", 10, 10, {"mary", "angel"}, {}};
  const auto p = oracle_propose(r);
  CHECK(labels_of(p) == std::vector<std::string>{"mary", "angel"});
  for (const auto& e : p.entries) CHECK(e.score == 1.0);
  r.gt_labels.clear();
  CHECK(oracle_propose(r).entries.empty());
}
