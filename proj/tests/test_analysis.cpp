#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>

#include "absorb/analysis.hpp"
#include "absorb/text.hpp"
#include "support/synth.hpp"

using namespace absorb;
using namespace absorb::analysis;

namespace {

const std::string kAnderson =
    "Robert Alexander Anderson (born 1946) is an American portrait artist known for painting the official "
    "portraits of George W. Bush and Alan Greenspan as well as designing United States postage stamps.";

std::set<std::string> surfaces(const std::vector<EntitySpan>& es) {
  std::set<std::string> out;
  for (const auto& e : es) out.insert(e.surface);
  return out;
}

corpus::RawDocument doc_of(const std::string& title, const std::string& body) {
  corpus::RawDocument d;
  d.id = title;
  d.title = title;
  d.body = body;
  return d;
}

}  // namespace

TEST_CASE("segment_sentences examples") {
  CHECK(segment_sentences("A b. C d.").size() == 2);
  CHECK(segment_sentences("He is a deputy for the period 2022-2026, after being elected in the 2021 Chilean "
                          "parliamentary elections.")
            .size() == 1);
  CHECK(segment_sentences("Mr. Smith ran.").size() == 1);
  CHECK(segment_sentences("no terminal punctuation here").size() == 1);
  CHECK(segment_sentences("Alec Sawyer Gipson-Long (born December 12, 1997) is a pitcher. He made his MLB debut in "
                          "2023.")
            .size() == 2);
  CHECK(segment_sentences("Dr. J. Doe works at the U.S. Navy. She left.").size() == 2);
  CHECK(segment_sentences("It rained (a lot. Really.) Then it stopped.").size() == 2);
  CHECK(segment_sentences("He asked \"why?\" Nobody knew.").size() == 2);
}

TEST_CASE("extract_entities examples") {
  auto es = extract_entities(kAnderson);
  auto s = surfaces(es);
  for (const char* want :
       {"Robert Alexander Anderson", "1946", "American", "George W. Bush", "Alan Greenspan", "United States"}) {
    CHECK_MESSAGE(s.count(want) == 1, want);
  }
  CHECK(s.size() == 6);

  auto born = extract_entities("Alec Sawyer Gipson-Long (born December 12, 1997) is a pitcher.");
  bool found = false;
  for (const auto& e : born) found |= (e.surface == "December 12, 1997" && e.kind == EntityKind::date);
  CHECK(found);
  CHECK(extract_entities("nothing here at all").empty());

  auto helmut = surfaces(extract_entities("Helmut Moritz (1 November 1933 - 21 October 2022) was an Austrian "
                                          "physical geodesist."));
  CHECK(helmut.count("1 November 1933"));
  CHECK(helmut.count("21 October 2022"));
  CHECK(helmut.count("Helmut Moritz"));

  auto kinds = extract_entities("The NASA team paid 3,500 dollars to the Museum of Modern Art in May 2001.");
  std::set<std::pair<std::string, EntityKind>> got;
  for (const auto& e : kinds) got.insert({e.surface, e.kind});
  CHECK(got.count({"NASA", EntityKind::acronym}));
  CHECK(got.count({"3,500", EntityKind::number}));
  CHECK(got.count({"Museum of Modern Art", EntityKind::name}));
  CHECK(got.count({"May 2001", EntityKind::date}));
}

TEST_CASE("find_prepositions examples") {
  std::string sentence = kAnderson;
  auto pos = find_prepositions(sentence);
  REQUIRE_FALSE(pos.empty());
  auto toks = word_tokens(sentence);
  // "as well as" is one unit reported at its final token.
  CHECK(toks[pos.back()].text == "as");
  CHECK(toks[pos.back() - 1].text == "well");
  CHECK(toks[pos.back() + 1].text == "designing");
  CHECK(find_prepositions("Nothing happened yesterday").empty());
  auto one = find_prepositions("a book of poems");
  REQUIRE(one.size() == 1);
  CHECK(word_tokens(std::string("a book of poems"))[one[0]].text == "of");
}

TEST_CASE("word tokens keep hyphens inside words and separators inside numbers") {
  auto t = word_tokens(std::string("Gipson-Long paid 1,263.5 dollars, don't 'quote'."));
  std::vector<std::string> texts;
  for (const auto& x : t) texts.push_back(x.text);
  CHECK(texts == std::vector<std::string>{"Gipson-Long", "paid", "1,263.5", "dollars", "don't", "quote"});
}

TEST_CASE("lexicon files parse comments, versions and multiword entries") {
  Lexicons lex = Lexicons::parse("# version: 9\nin\nas well as\n\n# comment\nof\n", "# version: 2\nmr.\n");
  CHECK(lex.prepositions_version == "9");
  CHECK(lex.abbreviations_version == "2");
  REQUIRE(lex.prepositions.size() == 3);
  CHECK(lex.prepositions.front() == std::vector<std::string>{"as", "well", "as"});
  RuleAnalyzer custom(lex);
  CHECK(custom.find_prepositions(U"He went to Paris with us").empty());
}

TEST_CASE("analysis invariants over synthetic documents") {
  RuleAnalyzer an;
  for (std::size_t i = 0; i < 400; ++i) {
    auto sd = testing::synth_document(11, i);
    AnalyzedDocument a = an.analyze(doc_of(sd.title, sd.body));
    const std::u32string& body = a.body;

    // Span validity and ordering.
    for (std::size_t k = 0; k < a.sentences.size(); ++k) {
      const auto& s = a.sentences[k];
      CHECK(s.index == k);
      CHECK(s.start < s.end);
      CHECK(s.end <= body.size());
      if (k) CHECK(a.sentences[k - 1].end <= s.start);
    }
    // Totality: every non-space scalar is inside a sentence; gaps are whitespace only.
    std::size_t prev = 0;
    for (const auto& s : a.sentences) {
      for (std::size_t c = prev; c < s.start; ++c) CHECK(text::is_space(body[c]));
      prev = s.end;
    }
    for (std::size_t c = prev; c < body.size(); ++c) CHECK(text::is_space(body[c]));

    for (std::size_t k = 0; k < a.entities.size(); ++k) {
      const auto& e = a.entities[k];
      CHECK(e.surface == text::encode(std::u32string_view(body).substr(e.start, e.end - e.start)));
      if (k) CHECK(a.entities[k - 1].end <= e.start);
      int containing = 0;
      for (const auto& s : a.sentences) containing += (s.start <= e.start && e.end <= s.end);
      CHECK(containing == 1);
    }
    REQUIRE(a.prepositions.size() == a.sentences.size());
    for (std::size_t k = 0; k < a.sentences.size(); ++k) {
      auto toks = a.sentence_tokens(k);
      for (std::size_t p : a.prepositions[k]) CHECK(p < toks.size());
    }

    // Determinism.
    AnalyzedDocument b = an.analyze(doc_of(sd.title, sd.body));
    CHECK(a.sentences == b.sentences);
    CHECK(a.entities == b.entities);
    CHECK(a.prepositions == b.prepositions);
  }
}
