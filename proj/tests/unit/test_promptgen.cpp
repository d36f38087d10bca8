#include "nada/error.hpp"
#include "nada/manifest.hpp"
#include "nada/promptgen.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

using namespace nada::promptgen;

TEST_CASE("label remapping") {
  const auto table = LabelRemapTable::iconart();
  CHECK(remap_label("nudity", table) == "naked person");
  CHECK(remap_label("child Jesus", table) == "baby");
  CHECK(remap_label("Saint Sebastien", table) == "person");
  CHECK(remap_label("Mary, mother of Jesus", table) == "Mary, mother of Jesus");
  for (const auto& [source, rendered] : table.entries()) {
    CHECK(remap_label(rendered, table) == rendered);
  }
  LabelRemapTable t;
  t.add("a", "b");
  CHECK_THROWS_AS(t.add("A", "c"), nada::ValidationError);
  const auto j = LabelRemapTable::from_json(nlohmann::json{{"old", "new"}});
  CHECK(remap_label("old", j) == "new");
}

TEST_CASE("template prompts") {
  CHECK(template_prompt("Mary, mother of Jesus").text == "A painting of Mary, mother of Jesus");
  CHECK(template_prompt("baby").text == "A painting of a baby");
  CHECK(template_prompt("naked person").text == "A painting of a naked person");
  CHECK(template_prompt("ruins").text == "A painting of ruins");
  CHECK(template_prompt("ruins").mode == PromptMode::Template);
}

TEST_CASE("caption prompts") {
  auto p = caption_prompt("A baby sleeps in a manger", "baby", 75, 2);
  CHECK(p.text == "A baby sleeps in a manger");
  CHECK_FALSE(p.fallback);
  p = caption_prompt("Figures gather at dusk", "angel", 75, std::nullopt);
  CHECK(p.text == "A painting of angel. Figures gather at dusk");
  CHECK(p.fallback);
  p = caption_prompt("... a long caption that finally mentions an angel", "angel", 75, 80);
  CHECK(p.fallback);
  CHECK(p.text.find("... a long caption") != std::string::npos);
  CHECK(p.text.rfind("A painting of angel", 0) == 0);
}

TEST_CASE("VLM queries") {
  const auto& artdl = nada::dataio::vocab::artdl();
  const auto choice = build_vlm_query(artdl, QueryKind::ChoiceArtDL);
  REQUIRE(choice.size() == 1);
  CHECK(choice[0].rfind("Who is in the painting? Choose from the following:", 0) == 0);
  for (const auto& label : artdl) {
    const auto first = choice[0].find(label);
    CHECK(first != std::string::npos);
    CHECK(choice[0].find(label, first + 1) == std::string::npos);
  }
  const auto yn = build_vlm_query({"angel", "baby"}, QueryKind::PerClassYesNo);
  CHECK(yn == std::vector<std::string>{"Is angel in the painting?", "Is baby in the painting?"});
  const auto sc = build_vlm_query(nada::dataio::vocab::iconart(), QueryKind::Score);
  CHECK(sc[0].find("If none of the symbols are present, output 'None'") != std::string::npos);
  CHECK_THROWS_AS(build_vlm_query({}, QueryKind::Score), nada::ValidationError);
  CHECK(query_kind_from_string("score") == QueryKind::Score);
  CHECK_FALSE(query_kind_from_string("poem"));
  CHECK(caption_request("angel").find("angel") != std::string::npos);
}
