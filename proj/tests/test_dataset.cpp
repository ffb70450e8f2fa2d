#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "absorb/analysis.hpp"
#include "absorb/dataset.hpp"
#include "absorb/error.hpp"
#include "absorb/taskgen.hpp"
#include "support/helpers.hpp"
#include "support/synth.hpp"

using namespace absorb;
using namespace absorb::dataset;
using testing::TempDir;

namespace {

corpus::Corpus synth_corpus(std::uint64_t seed, std::size_t n) {
  corpus::Corpus c;
  c.name = "synth";
  for (std::size_t i = 0; i < n; ++i) {
    auto sd = testing::synth_document(seed, i);
    corpus::RawDocument d;
    d.title = sd.title;
    d.body = sd.body;
    d.id = corpus::content_id(d.title, d.body);
    c.documents.push_back(d);
  }
  return c;
}

std::vector<Record> sample_records() {
  auto c = synth_corpus(2, 3);
  std::vector<Record> out;
  for (const auto& d : c.documents) out.push_back(doc_record(d));
  qagen::QAPair p{c.documents[0].id, qagen::QATask::generation, "Who?", "Someone.", {}, {}};
  out.push_back(qa_record(p));
  return out;
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::size_t p = 0;
  while (p < s.size()) {
    std::size_t q = s.find('\n', p);
    out.push_back(s.substr(p, q - p));
    p = q + 1;
  }
  return out;
}

std::string join_lines(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& l : v) s += l + "\n";
  return s;
}

}  // namespace

TEST_CASE("attach_loss_policy") {
  taskgen::TaskExample mem;
  mem.kind = taskgen::TaskKind::memorization;
  mem.answer = "x";
  mem.doc_id = "d";
  Record r = task_record(mem);
  r.loss_policy = LossPolicy::answer_only;
  CHECK(attach_loss_policy(r).loss_policy == LossPolicy::full_sequence);

  qagen::QAPair qa{"d", qagen::QATask::generation, "Q?", "A.", {}, {}};
  Record q = qa_record(qa);
  q.loss_policy = LossPolicy::full_sequence;
  CHECK(attach_loss_policy(q).loss_policy == LossPolicy::answer_only);
  CHECK(attach_loss_policy(attach_loss_policy(q)) == attach_loss_policy(q));

  Json raw = {{"kind", "doc"}, {"payload", {{"doc_id", "d"}}}};
  CHECK(attach_loss_policy(raw)["loss_policy"] == "full_sequence");
  CHECK_THROWS_AS(attach_loss_policy(Json{{"kind", "weird"}, {"payload", Json::object()}}), Error);
}

TEST_CASE("qa text carries the answer span") {
  auto [text, span] = qa_text("Who wrote it?", "Anna Ölund");
  CHECK(text == "Question: Who wrote it?\nAnswer: Anna Ölund");
  CHECK(span.first == 32);
  CHECK(span.second == 42);
  CHECK(qa_text("", "Just text").first == "Just text");
}

TEST_CASE("write_manifest is byte-deterministic; verify accepts untouched files") {
  TempDir dir("manifest");
  auto recs = sample_records();
  Manifest a = write_manifest(recs, "m", "train", 3, dir / "a.jsonl");
  Manifest b = write_manifest(recs, "m", "train", 3, dir / "b.jsonl");
  CHECK(testing::slurp(dir / "a.jsonl") == testing::slurp(dir / "b.jsonl"));
  CHECK(a.checksum == manifest_checksum(recs));
  auto v = verify_manifest(dir / "a.jsonl");
  CHECK(v.ok);
  CHECK(v.count == recs.size());

  Manifest one = write_manifest({recs[0]}, "one", "test", 0, dir / "one.jsonl");
  CHECK(one.size() == 1);
  CHECK(verify_manifest(dir / "one.jsonl").ok);
  CHECK(read_manifest(dir / "one.jsonl").records == std::vector<Record>{recs[0]});
  CHECK_THROWS_AS(write_manifest({}, "e", "train", 0, dir / "e.jsonl"), Error);
  CHECK_FALSE(std::filesystem::exists(dir / "e.jsonl"));
}

TEST_CASE("footer format") {
  auto recs = sample_records();
  std::string s = serialize(make_manifest(recs, "m", "train", 9));
  auto lines = lines_of(s);
  REQUIRE(lines.size() == recs.size() + 1);
  Json footer = Json::parse(lines.back());
  CHECK(footer["count"] == recs.size());
  CHECK(footer["seed"] == 9);
  CHECK(footer["checksum"] == manifest_checksum(recs));
  for (std::size_t i = 0; i < recs.size(); ++i) {
    Json rec = Json::parse(lines[i]);
    CHECK(rec.contains("kind"));
    CHECK(rec.contains("loss_policy"));
    CHECK(rec.contains("payload"));
  }
}

TEST_CASE("verify detects every single-byte flip") {
  TempDir dir("tamper");
  auto recs = sample_records();
  write_manifest(recs, "m", "train", 0, dir / "m.jsonl");
  std::string good = testing::slurp(dir / "m.jsonl");
  std::size_t body_end = good.rfind('\n', good.size() - 2) + 1;  // start of the footer
  testing::Dice d(1);
  for (int trial = 0; trial < 60; ++trial) {
    std::string bad = good;
    std::size_t at = d.below(body_end);
    if (bad[at] == '\n') continue;
    bad[at] = static_cast<char>(bad[at] ^ 0x01);
    testing::spit(dir / "bad.jsonl", bad);
    VerifyResult v;
    try {
      v = verify_manifest(dir / "bad.jsonl");
    } catch (const Error&) {
      continue;  // unparseable is a rejection too
    }
    CHECK_FALSE(v.ok);
  }
}

TEST_CASE("verify: truncation and reordering") {
  TempDir dir("trunc");
  auto recs = sample_records();
  write_manifest(recs, "m", "train", 0, dir / "m.jsonl");
  auto lines = lines_of(testing::slurp(dir / "m.jsonl"));

  // Footer cut off.
  std::vector<std::string> no_footer(lines.begin(), lines.end() - 1);
  testing::spit(dir / "t1.jsonl", join_lines(no_footer));
  auto v1 = verify_manifest(dir / "t1.jsonl");
  CHECK_FALSE(v1.ok);
  CHECK(v1.first_mismatch == recs.size() - 1);

  // Cut mid-record.
  std::string whole = testing::slurp(dir / "m.jsonl");
  testing::spit(dir / "t2.jsonl", whole.substr(0, whole.size() / 2));
  auto v2 = verify_manifest(dir / "t2.jsonl");
  CHECK_FALSE(v2.ok);
  REQUIRE(v2.first_mismatch);
  CHECK(*v2.first_mismatch == v2.count);

  // Last record dropped, footer kept.
  std::vector<std::string> dropped(lines.begin(), lines.end() - 2);
  dropped.push_back(lines.back());
  testing::spit(dir / "t3.jsonl", join_lines(dropped));
  auto v3 = verify_manifest(dir / "t3.jsonl");
  CHECK_FALSE(v3.ok);
  CHECK(v3.first_mismatch == recs.size() - 1);

  // Two records swapped.
  std::vector<std::string> swapped = lines;
  std::swap(swapped[0], swapped[1]);
  testing::spit(dir / "t4.jsonl", join_lines(swapped));
  auto v4 = verify_manifest(dir / "t4.jsonl");
  CHECK_FALSE(v4.ok);
  CHECK(v4.first_mismatch == 0u);
}

TEST_CASE("test_count and split examples") {
  CHECK(test_count(1263, 0.1) == 127);
  CHECK(1263 - test_count(1263, 0.1) == 1136);
  CHECK(test_count(2, 0.5) == 1);
  CHECK(test_count(10, 0.3) == 3);
  CHECK_THROWS_AS(test_count(10, 0.0), Error);
  CHECK_THROWS_AS(test_count(10, 1.0), Error);

  auto two = synth_corpus(1, 2);
  auto s = split_corpus(two, {0.5, 1, 8});
  CHECK(s.train.size() == 1);
  CHECK(s.test.size() == 1);
  CHECK(s.train.documents[0].id != s.test.documents[0].id);

  auto one = synth_corpus(1, 1);
  CHECK_THROWS_AS(split_corpus(one, {0.5, 1, 8}), Error);
  CHECK_THROWS_AS(split_corpus(synth_corpus(1, 5), {0.99, 1, 8}), Error);

  auto dup = synth_corpus(1, 4);
  dup.documents[3].title = dup.documents[0].title;
  CHECK_THROWS_AS(split_corpus(dup, {0.5, 1, 8}), Error);
}

TEST_CASE("split properties over seeds") {
  auto c = synth_corpus(6, 200);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    SplitSpec spec{0.1, seed, 8};
    auto s = split_corpus(c, spec);
    CHECK(s.train.size() + s.test.size() == c.size());
    CHECK(s.test.size() == 20);
    std::set<std::string> ids, titles;
    for (const auto& d : s.train.documents) {
      ids.insert(d.id);
      titles.insert(d.title);
    }
    for (const auto& d : s.test.documents) {
      CHECK(ids.count(d.id) == 0);
      CHECK(titles.count(d.title) == 0);
    }
    // Each side keeps corpus order.
    auto pos = [&](const std::string& id) {
      return std::find_if(c.documents.begin(), c.documents.end(), [&](auto& d) { return d.id == id; }) -
             c.documents.begin();
    };
    for (std::size_t i = 1; i < s.train.size(); ++i) {
      CHECK(pos(s.train.documents[i - 1].id) < pos(s.train.documents[i].id));
    }
    auto again = split_corpus(c, spec);
    CHECK(corpus::serialize(again.test) == corpus::serialize(s.test));
  }
}

TEST_CASE("overlap report finds shared n-grams but never blocks") {
  auto c = synth_corpus(8, 2);
  c.documents[0].body = "one two three four five six seven eight nine.";
  c.documents[1].body = "zero one two three four five six seven eight.";
  corpus::Corpus a, b;
  a.documents = {c.documents[0]};
  b.documents = {c.documents[1]};
  Json r = overlap_report(a, b, 8);
  CHECK(r["advisory"] == true);
  CHECK(r["shared_ngrams"] == 1);
  CHECK(r["test_docs_with_shared_ngrams"].size() == 1);
  CHECK(overlap_report(a, b, 9)["shared_ngrams"] == 0);
}

TEST_CASE("percentages sum to exactly 100") {
  testing::Dice d(2);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::size_t> counts(1 + d.below(9));
    for (auto& c : counts) c = d.below(1000);
    if (std::accumulate(counts.begin(), counts.end(), std::size_t{0}) == 0) counts[0] = 1;
    auto p = percentages(counts);
    long long hundredths = 0;
    for (double x : p) hundredths += std::llround(x * 100);
    CHECK(hundredths == 10000);
  }
  auto three = percentages({2, 1, 0});
  CHECK(three == std::vector<double>{66.67, 33.33, 0.0});
}

TEST_CASE("record json round trip") {
  for (const auto& r : sample_records()) CHECK(Record::from_json(r.to_json()) == r);
}
