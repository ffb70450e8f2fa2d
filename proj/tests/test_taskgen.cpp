#include <doctest.h>

#include <set>
#include <string>

#include "absorb/analysis.hpp"
#include "absorb/error.hpp"
#include "absorb/taskgen.hpp"
#include "support/oracles.hpp"
#include "support/synth.hpp"

using namespace absorb;
using namespace absorb::taskgen;
using analysis::AnalyzedDocument;

namespace {

const std::string kAndersonBody =
    "Robert Alexander Anderson (born 1946) is an American portrait artist known for painting the official "
    "portraits of George W. Bush and Alan Greenspan as well as designing United States postage stamps.";

AnalyzedDocument analyze(const std::string& title, const std::string& body,
                         std::optional<std::string> header = std::nullopt) {
  corpus::RawDocument d;
  d.title = title;
  d.body = body;
  d.header = header;
  d.id = corpus::content_id(title, body);
  return analysis::RuleAnalyzer().analyze(d);
}

AnalyzedDocument anderson() {
  return analyze("Robert Anderson (artist)", kAndersonBody, "<Robert Anderson (artist)  - Wikipedia>");
}

const TaskExample* find(const TaskSuite& s, TaskKind k, std::size_t nth = 0) {
  for (const auto& e : s.examples) {
    if (e.kind == k && nth-- == 0) return &e;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("memorization renders header and body as one text") {
  auto a = anderson();
  auto m = gen_memorization(a);
  CHECK(m.question.empty());
  CHECK(m.answer.rfind("<Robert Anderson (artist)  - Wikipedia> Robert Alexander Anderson (born 1946)", 0) == 0);
  CHECK(m.loss_policy == LossPolicy::full_sequence);
  CHECK(gen_memorization(analyze("T", "B.")).answer == "<T - Wikipedia> B.");
}

TEST_CASE("summarization and teaching") {
  auto a = anderson();
  auto s = gen_summarization(a);
  CHECK(s.question == "Write a title: " + a.doc.rendered());
  CHECK(s.answer == "Robert Anderson (artist)");
  CHECK(gen_summarization(analyze("X", "Y.")).answer == "X");
  CHECK(gen_summarization(analyze("X1", "Same.")).answer != gen_summarization(analyze("X2", "Same.")).answer);

  auto t = gen_teaching(a);
  CHECK(t.question == "Tell me about Robert Anderson (artist).");
  CHECK(t.answer == kAndersonBody);
  CHECK(gen_teaching(analyze("T", "B.")).question == "Tell me about T.");
}

TEST_CASE("teaching answer is the memorization text minus its header") {
  for (std::size_t i = 0; i < 100; ++i) {
    auto sd = testing::synth_document(5, i);
    auto a = analyze(sd.title, sd.body);
    std::string mem = gen_memorization(a).answer;
    std::string head = a.doc.rendered_header() + " ";
    REQUIRE(mem.rfind(head, 0) == 0);
    CHECK(gen_teaching(a).answer == mem.substr(head.size()));
  }
}

TEST_CASE("gist and flashcards") {
  auto a = anderson();
  auto g = gen_gist(a);
  REQUIRE(g);
  std::set<std::string> got;
  std::string ans = g->answer;
  for (std::size_t p = 0;;) {
    std::size_t q = ans.find("; ", p);
    got.insert(ans.substr(p, q == std::string::npos ? std::string::npos : q - p));
    if (q == std::string::npos) break;
    p = q + 2;
  }
  CHECK(got == std::set<std::string>{"United States", "American", "Alan Greenspan", "George W. Bush",
                                     "Robert Alexander Anderson", "1946"});
  CHECK(g->question == "Highlight the key information within the article: " + a.doc.rendered());

  auto f = gen_flashcards(a);
  REQUIRE(f);
  CHECK(f->question ==
        "Generate a concrete description about Robert Anderson (artist) based on the following keywords:\n" +
            g->answer);
  CHECK(f->answer == kAndersonBody);

  auto one = analyze("T", "It happened in 1946.");
  CHECK(gen_gist(one)->answer == "1946");
  CHECK(gen_flashcards(one)->question.ends_with(":\n1946"));
  auto none = analyze("T", "nothing here at all.");
  CHECK_FALSE(gen_gist(none));
  CHECK_FALSE(gen_flashcards(none));
}

TEST_CASE("flashcards keywords equal the gist answer across a corpus") {
  for (std::size_t i = 0; i < 200; ++i) {
    auto sd = testing::synth_document(9, i);
    auto a = analyze(sd.title, sd.body);
    auto g = gen_gist(a);
    auto f = gen_flashcards(a);
    REQUIRE(static_cast<bool>(g) == static_cast<bool>(f));
    if (g) CHECK(f->question.ends_with("keywords:\n" + g->answer));
  }
}

TEST_CASE("nli: single sentence gives only the true example") {
  auto a = anderson();
  auto v = gen_nli_pair(a, 0);
  REQUIRE(v.size() == 1);
  CHECK(v[0].answer == "Yes");
  CHECK(v[0].options == kNliOptions);
  CHECK(v[0].question == a.doc.rendered() + " Based on the article above can we conclude that\n<" + a.doc.title +
                             "> " + kAndersonBody + "\nOptions:\n- Yes\n- It's impossible to say\n- No");
  CHECK(gen_nli_pair(analyze("T", "Only 1946 here."), 3).size() == 1);
}

TEST_CASE("nli corruption enumerates same-kind substitutions from other sentences") {
  auto a = analyze("T", "Alice was born in 1980. Bob was born in 1991.");
  REQUIRE(a.sentences.size() == 2);
  // By hand: sentence 1 holds the date 1980; the only same-kind entity elsewhere is 1991.
  auto c = nli_corruptions(a, 0);
  std::set<std::string> got;
  for (const auto& x : c) got.insert(x.statement);
  CHECK(got == std::set<std::string>{"Alice was born in 1991."});

  bool saw_first = false;
  for (std::uint64_t seed = 0; seed < 64 && !saw_first; ++seed) {
    auto v = gen_nli_pair(a, seed);
    if (v[0].provenance["sentence"] != 0) continue;
    saw_first = true;
    REQUIRE(v.size() == 2);
    CHECK(v[1].provenance["statement"] == "Alice was born in 1991.");
    CHECK(v[1].answer == "No");
    CHECK(testing::check_nli_false(v[1], a).empty());
  }
  CHECK(saw_first);
}

TEST_CASE("cloze, multichoice and completion on the worked example") {
  auto a = anderson();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto c = gen_cloze(a, seed);
    REQUIRE(c);
    CHECK(testing::check_blank(*c, a) == "");
    auto m = gen_multichoice(a, seed);
    REQUIRE(m);
    CHECK(testing::check_blank(*m, a) == "");
    CHECK(testing::check_options(*m, 4) == "");
  }
  auto comp = gen_completion(a, 0);
  REQUIRE(comp);
  CHECK(comp->question.ends_with("Alan Greenspan as well as:"));
  CHECK(comp->answer == "designing United States postage stamps");
  CHECK(testing::check_completion(*comp, a) == "");

  auto small = analyze("T", "A book of poems.");
  auto sc = gen_completion(small, 0);
  REQUIRE(sc);
  CHECK(sc->question == "<T> A book of:");
  CHECK(sc->answer == "poems");
  CHECK_FALSE(gen_completion(analyze("T", "Nothing happened yesterday."), 0));
  // The last preposition ends the sentence, so it cannot split.
  CHECK_FALSE(gen_completion(analyze("T", "Tell me what it is for."), 0));
}

TEST_CASE("cloze on a single-entity document always blanks that entity") {
  auto a = analyze("T", "It happened in 1946.");
  for (std::uint64_t seed = 0; seed < 10; ++seed) CHECK(gen_cloze(a, seed)->answer == "1946");
}

TEST_CASE("multichoice guard and forced option set") {
  CHECK_FALSE(gen_multichoice(analyze("T", "In 1946 NASA met Alan Greenspan."), 0));
  auto four = analyze("T", "In 1946 NASA met Alan Greenspan in Paris.");
  REQUIRE(four.entities.size() == 4);
  std::set<std::string> all;
  for (const auto& e : four.entities) all.insert(e.surface);
  std::set<std::vector<std::string>> orders;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto m = gen_multichoice(four, seed);
    REQUIRE(m);
    CHECK(std::set<std::string>(m->options->begin(), m->options->end()) == all);
    orders.insert(*m->options);
  }
  CHECK(orders.size() > 1);
}

TEST_CASE("build_suite counts follow the guard table") {
  auto a = anderson();
  TaskSuite s = build_suite(a, {}, 0);
  // Every guard passes except NLI-false (one sentence): one example per kind.
  CHECK(s.examples.size() == 9);
  for (TaskKind k : kAllKinds) CHECK(s.counts[k] == 1);

  // Entity-rich single sentence with no preposition: completion also drops out.
  auto rich = analyze("T", "Alan Greenspan, George Bush, NASA, 1946 and Paris remained.");
  TaskSuite r = build_suite(rich, {}, 0);
  CHECK(r.examples.size() == 8);
  CHECK(r.counts[TaskKind::completion] == 0);

  auto zero = analyze("T", "nothing much happened here at all.");
  TaskSuite z = build_suite(zero, {}, 0);
  std::multiset<TaskKind> kinds;
  for (const auto& e : z.examples) kinds.insert(e.kind);
  CHECK(kinds == std::multiset<TaskKind>{TaskKind::memorization, TaskKind::summarization, TaskKind::nli,
                                         TaskKind::teaching, TaskKind::completion});
}

TEST_CASE("suite invariants and determinism over synthetic documents") {
  std::size_t changed = 0;
  for (std::size_t i = 0; i < 300; ++i) {
    auto sd = testing::synth_document(21, i);
    auto a = analyze(sd.title, sd.body);
    TaskSuite s1 = build_suite(a, {}, 77);
    TaskSuite s2 = build_suite(a, {}, 77);
    REQUIRE(s1.examples.size() == s2.examples.size());
    for (std::size_t k = 0; k < s1.examples.size(); ++k) CHECK(s1.examples[k].to_json() == s2.examples[k].to_json());

    std::size_t total = 0;
    for (auto& [k, n] : s1.counts) {
      total += n;
      CHECK(n <= (k == TaskKind::nli ? 2u : 1u));
    }
    CHECK(total == s1.examples.size());
    for (const auto& e : s1.examples) {
      CHECK_FALSE(e.answer.empty());
      CHECK(e.loss_policy == (e.kind == TaskKind::memorization ? LossPolicy::full_sequence : LossPolicy::answer_only));
      CHECK(static_cast<bool>(e.options) == (e.kind == TaskKind::nli || e.kind == TaskKind::multichoice));
      if (e.kind == TaskKind::nli) CHECK(*e.options == kNliOptions);
      if (e.kind == TaskKind::cloze || e.kind == TaskKind::multichoice) CHECK(testing::check_blank(e, a) == "");
      if (e.kind == TaskKind::multichoice) CHECK(testing::check_options(e, 4) == "");
      if (e.kind == TaskKind::completion) CHECK(testing::check_completion(e, a) == "");
      if (e.kind == TaskKind::nli && e.answer == "No") CHECK(testing::check_nli_false(e, a) == "");
      CHECK(TaskExample::from_json(e.to_json()).to_json() == e.to_json());
    }
    TaskSuite other = build_suite(a, {}, 78);
    for (std::size_t k = 0; k < std::min(other.examples.size(), s1.examples.size()); ++k) {
      if (other.examples[k].to_json() != s1.examples[k].to_json()) {
        ++changed;
        break;
      }
    }
  }
  CHECK(changed > 0);
}

TEST_CASE("task config: enabled kinds, caps, option count, templates") {
  auto a = analyze("T", "Alice met Alan Greenspan in 1980. Bob met George W. Bush in 1991 in Paris with NASA.");
  TaskConfig cfg = TaskConfig::from_json(Json::parse(
      R"({"enabled":["teaching","nli","multichoice"],"caps":{"nli":1},"option_count":3,
          "templates":{"teaching":"Explain {title}, please."}})"));
  TaskSuite s = build_suite(a, cfg, 1);
  for (const auto& e : s.examples) {
    CHECK((e.kind == TaskKind::teaching || e.kind == TaskKind::nli || e.kind == TaskKind::multichoice));
    if (e.kind == TaskKind::multichoice) CHECK(e.options->size() == 3);
  }
  CHECK(s.counts[TaskKind::nli] == 1);
  CHECK(find(s, TaskKind::teaching)->question == "Explain T, please.");
  CHECK(TaskConfig::from_json(cfg.to_json()).to_json() == cfg.to_json());

  CHECK_THROWS_AS(TaskConfig::from_json(Json::parse(R"({"bogus":1})")), Error);
  CHECK_THROWS_AS(TaskConfig::from_json(Json::parse(R"({"caps":{"cloze":2}})")), Error);
  CHECK_THROWS_AS(TaskConfig::from_json(Json::parse(R"({"enabled":["nope"]})")), Error);
  CHECK_THROWS_AS(TaskConfig::from_json(Json::parse(R"({"option_count":1})")), Error);
}

TEST_CASE("template substitution never rescans inserted text") {
  CHECK(fill_template("Tell me about {title}.", {{"title", "{document} x"}, {"document", "BAD"}}) ==
        "Tell me about {document} x.");
  CHECK(fill_template("{a}{b}{missing}", {{"a", "1"}, {"b", "2"}}) == "12{missing}");
  auto a = analyze("Curly {title} T", "It happened in 1946.");
  CHECK(gen_teaching(a).question == "Tell me about Curly {title} T.");
}

TEST_CASE("reading-comprehension format and its parser") {
  auto a = anderson();
  TaskSuite s = build_suite(a, {}, 0);
  std::string text = format_reading_comprehension(s);
  std::string head = a.doc.rendered() + "\n\nAnswer the questions based on the article:\n\n";
  REQUIRE(text.rfind(head, 0) == 0);
  CHECK(text.find("Question: Write a title:\nAnswer:Robert Anderson (artist)") != std::string::npos);
  CHECK(text.find("Question: Tell me about Robert Anderson (artist).\nAnswer:" + kAndersonBody) != std::string::npos);

  auto [doc, blocks] = parse_reading_comprehension(text);
  CHECK(doc == a.doc.rendered());
  REQUIRE(blocks.size() == s.examples.size() - 1);
  // Blocks follow generation order.
  std::vector<TaskKind> order;
  for (const auto& e : s.examples) {
    if (e.kind != TaskKind::memorization) order.push_back(e.kind);
  }
  CHECK(order == std::vector<TaskKind>{TaskKind::summarization, TaskKind::gist, TaskKind::nli, TaskKind::teaching,
                                       TaskKind::flashcards, TaskKind::cloze, TaskKind::multichoice,
                                       TaskKind::completion});
  std::size_t k = 0;
  for (const auto& e : s.examples) {
    if (e.kind == TaskKind::memorization) continue;
    CHECK(blocks[k].second == e.answer);
    ++k;
  }

  TaskSuite without = s;
  std::erase_if(without.examples, [](const TaskExample& e) { return e.kind == TaskKind::multichoice; });
  std::string t2 = format_reading_comprehension(without);
  CHECK(parse_reading_comprehension(t2).second.size() == blocks.size() - 1);
  CHECK(t2.find("Options:\n- ") == t2.find("Options:\n- Yes"));

  TaskSuite no_mem = s;
  std::erase_if(no_mem.examples, [](const TaskExample& e) { return e.kind == TaskKind::memorization; });
  CHECK_THROWS_AS(format_reading_comprehension(no_mem), Error);
}

TEST_CASE("reading format round trip over synthetic documents") {
  for (std::size_t i = 0; i < 100; ++i) {
    auto sd = testing::synth_document(3, i);
    auto a = analyze(sd.title, sd.body);
    TaskSuite s = build_suite(a, {}, 5);
    auto [doc, blocks] = parse_reading_comprehension(format_reading_comprehension(s));
    CHECK(doc == a.doc.rendered());
    std::size_t k = 0;
    for (const auto& e : s.examples) {
      if (e.kind == TaskKind::memorization) continue;
      REQUIRE(k < blocks.size());
      CHECK(blocks[k].second == e.answer);
      ++k;
    }
    CHECK(k == blocks.size());
  }
}
