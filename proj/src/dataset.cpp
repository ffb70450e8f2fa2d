#include "absorb/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "absorb/error.hpp"
#include "absorb/hash.hpp"
#include "absorb/rng.hpp"
#include "absorb/text.hpp"

namespace absorb::dataset {

namespace {

std::string record_line(const Record& r) { return canonical(r.to_json()) + "\n"; }

std::string digest16(std::string_view line) { return sha256_hex(line).substr(0, 16); }

bool is_footer(const Json& j) { return j.is_object() && j.contains("checksum") && !j.contains("kind"); }

constexpr std::uint64_t kSplitStream = 0x73706c6974ULL;

}  // namespace

std::string_view to_string(RecordKind k) noexcept {
  switch (k) {
    case RecordKind::doc: return "doc";
    case RecordKind::task: return "task";
    case RecordKind::qa: return "qa";
  }
  return "doc";
}

RecordKind record_kind_from_string(std::string_view s) {
  if (s == "doc") return RecordKind::doc;
  if (s == "task") return RecordKind::task;
  if (s == "qa") return RecordKind::qa;
  throw_data("unknown record kind: " + std::string(s));
}

std::string Record::doc_id() const { return payload.value("doc_id", ""); }

Json Record::to_json() const {
  return {{"kind", to_string(kind)}, {"loss_policy", taskgen::to_string(loss_policy)}, {"payload", payload}};
}

Record Record::from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) throw_data("record without a kind");
  Record r;
  r.kind = record_kind_from_string(j["kind"].get<std::string>());
  if (!j.contains("loss_policy") || !j["loss_policy"].is_string()) throw_data("record without a loss_policy");
  r.loss_policy = taskgen::loss_policy_from_string(j["loss_policy"].get<std::string>());
  r.payload = j.value("payload", Json::object());
  return r;
}

Record attach_loss_policy(Record r) {
  switch (r.kind) {
    case RecordKind::doc: r.loss_policy = LossPolicy::full_sequence; break;
    case RecordKind::task:
      r.loss_policy = taskgen::loss_policy_for(taskgen::task_kind_from_string(r.payload.value("task", "")));
      break;
    case RecordKind::qa: r.loss_policy = LossPolicy::answer_only; break;
  }
  return r;
}

Json attach_loss_policy(const Json& record) {
  if (!record.is_object() || !record.contains("kind") || !record["kind"].is_string()) {
    throw_data("record without a kind");
  }
  Record r;
  r.kind = record_kind_from_string(record["kind"].get<std::string>());
  r.payload = record.value("payload", Json::object());
  return attach_loss_policy(r).to_json();
}

std::pair<std::string, std::pair<std::size_t, std::size_t>> qa_text(const std::string& question,
                                                                    const std::string& answer) {
  if (question.empty()) return {answer, {0, text::scalar_length(answer)}};
  std::string head = "Question: " + question + "\nAnswer: ";
  std::size_t start = text::scalar_length(head);
  return {head + answer, {start, start + text::scalar_length(answer)}};
}

Record doc_record(const corpus::RawDocument& doc) {
  Record r;
  r.kind = RecordKind::doc;
  r.payload = {{"doc_id", doc.id}, {"title", doc.title}, {"text", doc.rendered()}};
  return attach_loss_policy(r);
}

Record reading_record(const std::string& doc_id, const std::string& text) {
  Record r;
  r.kind = RecordKind::doc;
  r.payload = {{"doc_id", doc_id}, {"format", "reading_comprehension"}, {"text", text}};
  return attach_loss_policy(r);
}

Record task_record(const taskgen::TaskExample& ex) {
  Record r;
  r.kind = RecordKind::task;
  r.payload = ex.to_json();
  r.payload.erase("loss_policy");
  auto [t, span] = qa_text(ex.question, ex.answer);
  r.payload["text"] = t;
  r.payload["answer_span"] = {span.first, span.second};
  return attach_loss_policy(r);
}

Record qa_record(const qagen::QAPair& pair) {
  Record r;
  r.kind = RecordKind::qa;
  r.payload = pair.to_json();
  auto [t, span] = qa_text(pair.question, pair.answer);
  r.payload["text"] = t;
  r.payload["answer_span"] = {span.first, span.second};
  return attach_loss_policy(r);
}

std::string manifest_checksum(const std::vector<Record>& records) {
  std::string all;
  for (const auto& r : records) all += record_line(r);
  return sha256_hex(all);
}

Manifest make_manifest(std::vector<Record> records, std::string name, std::string split, std::uint64_t seed) {
  Manifest m;
  m.name = std::move(name);
  m.split = std::move(split);
  m.seed = seed;
  m.records = std::move(records);
  m.checksum = manifest_checksum(m.records);
  return m;
}

std::string serialize(const Manifest& m) {
  std::string out;
  Json digests = Json::array();
  for (const auto& r : m.records) {
    std::string line = record_line(r);
    digests.push_back(digest16(line));
    out += line;
  }
  Json footer = {{"checksum", m.checksum}, {"count", m.records.size()}, {"name", m.name},
                 {"record_digests", digests}, {"seed", m.seed}, {"split", m.split}};
  out += canonical(footer) + "\n";
  return out;
}

Manifest write_manifest(std::vector<Record> records, const std::string& name, const std::string& split,
                        std::uint64_t seed, const std::filesystem::path& path) {
  if (records.empty()) throw_data("manifest " + name + " would be empty: " + path.string());
  Manifest m = make_manifest(std::move(records), name, split, seed);
  write_file_atomic(path, serialize(m));
  return m;
}

Manifest read_manifest(const std::filesystem::path& path) {
  Manifest m;
  bool footer = false;
  for (auto& [line_no, j] : read_jsonl(path)) {
    if (footer) throw_data(path.string() + ":" + std::to_string(line_no) + ": record after manifest footer");
    if (is_footer(j)) {
      footer = true;
      m.checksum = j.value("checksum", "");
      m.name = j.value("name", "");
      m.split = j.value("split", "");
      m.seed = j.value("seed", std::uint64_t{0});
      continue;
    }
    try {
      m.records.push_back(Record::from_json(j));
    } catch (const Error& e) {
      throw_data(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!footer) throw_data(path.string() + ": manifest footer missing");
  return m;
}

VerifyResult verify_manifest(const std::filesystem::path& path) {
  std::string content = read_file(path);
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t nl = content.find('\n', pos);
    std::size_t end = nl == std::string::npos ? content.size() : nl + 1;
    lines.emplace_back(std::string_view(content).substr(pos, end - pos));
    pos = end;
  }

  VerifyResult res;
  std::vector<std::string> digests;
  std::string all;
  std::optional<Json> footer;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (text::trim(line).empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      if (i + 1 == lines.size()) {
        // A cut-off final line: the file was truncated.
        res.count = digests.size();
        res.first_mismatch = digests.size();
        res.message = "truncated manifest: incomplete line " + std::to_string(i + 1);
        return res;
      }
      throw_data(path.string() + ":" + std::to_string(i + 1) + ": malformed JSON");
    }
    if (is_footer(j)) {
      if (footer) throw_data(path.string() + ":" + std::to_string(i + 1) + ": second manifest footer");
      footer = j;
      continue;
    }
    if (footer) throw_data(path.string() + ":" + std::to_string(i + 1) + ": record after manifest footer");
    Record r;
    try {
      r = Record::from_json(j);
    } catch (const Error& e) {
      throw_data(path.string() + ":" + std::to_string(i + 1) + ": " + e.what());
    }
    if (attach_loss_policy(r).loss_policy != r.loss_policy) {
      res.count = digests.size() + 1;
      res.first_mismatch = digests.size();
      res.message = "record " + std::to_string(digests.size()) + " has a loss_policy inconsistent with its kind";
      return res;
    }
    std::string canon = record_line(r);
    if (canon.substr(0, canon.size() - 1) != text::trim(line)) {
      res.count = digests.size() + 1;
      res.first_mismatch = digests.size();
      res.message = "record " + std::to_string(digests.size()) + " is not in canonical form";
      return res;
    }
    digests.push_back(digest16(canon));
    all += canon;
  }
  res.count = digests.size();
  if (!footer) {
    res.first_mismatch = digests.empty() ? 0 : digests.size() - 1;
    res.message = "manifest footer missing (truncated?); mismatch at record " + std::to_string(*res.first_mismatch);
    return res;
  }
  std::vector<std::string> expected;
  try {
    expected = footer->value("record_digests", std::vector<std::string>{});
  } catch (const nlohmann::json::exception&) {
    throw_data(path.string() + ": malformed record_digests in footer");
  }
  std::size_t declared = footer->value("count", std::size_t{0});
  std::size_t n = std::min(expected.size(), digests.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (expected[i] != digests[i]) {
      res.first_mismatch = i;
      res.message = "record " + std::to_string(i) + " differs from the recorded digest";
      return res;
    }
  }
  if (expected.size() != digests.size() || declared != digests.size()) {
    res.first_mismatch = n;  // first record present on only one side
    res.message = "record count " + std::to_string(digests.size()) + " does not match footer count " +
                  std::to_string(declared);
    return res;
  }
  if (footer->value("checksum", "") != sha256_hex(all)) {
    res.first_mismatch = digests.empty() ? 0 : digests.size() - 1;
    res.message = "checksum mismatch";
    return res;
  }
  res.ok = true;
  res.message = "ok";
  return res;
}

std::size_t test_count(std::size_t n, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw_usage("test fraction must lie strictly between 0 and 1");
  return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
}

SplitResult split_corpus(const corpus::Corpus& corpus, const SplitSpec& spec) {
  std::size_t n = corpus.size();
  std::size_t n_test = test_count(n, spec.test_fraction);
  if (n < 2 || n_test == 0 || n_test >= n) {
    throw_data("degenerate split: " + std::to_string(n) + " documents at test fraction " +
               std::to_string(spec.test_fraction) + " leaves one side empty");
  }
  std::unordered_map<std::string, std::size_t> titles;
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, fresh] = titles.emplace(corpus.documents[i].title, i);
    if (!fresh) {
      throw_data("duplicate title '" + corpus.documents[i].title + "' (documents " + corpus.documents[it->second].id +
                 " and " + corpus.documents[i].id + "); titles must be unique before splitting");
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Stream rng(mix64(spec.seed ^ kSplitStream), 0);
  rng.shuffle(order);
  std::vector<bool> is_test(n, false);
  for (std::size_t k = 0; k < n_test; ++k) is_test[order[k]] = true;

  SplitResult out;
  out.train.name = corpus.name + "_train";
  out.test.name = corpus.name + "_test";
  out.train.seed = out.test.seed = corpus.seed;
  for (std::size_t i = 0; i < n; ++i) {
    (is_test[i] ? out.test : out.train).documents.push_back(corpus.documents[i]);
  }
  return out;
}

Json overlap_report(const corpus::Corpus& train, const corpus::Corpus& test, std::size_t n) {
  if (n == 0) throw_usage("n-gram length must be positive");
  auto grams = [n](const corpus::RawDocument& d) {
    std::vector<std::string> w = text::tokenize_words(d.title + " " + d.body);
    std::set<std::string> out;
    for (std::size_t i = 0; i + n <= w.size(); ++i) {
      std::vector<std::string> g(w.begin() + static_cast<std::ptrdiff_t>(i), w.begin() + static_cast<std::ptrdiff_t>(i + n));
      out.insert(text::join(g, " "));
    }
    return out;
  };
  std::unordered_set<std::string> train_grams;
  for (const auto& d : train.documents) {
    for (auto& g : grams(d)) train_grams.insert(std::move(g));
  }
  std::set<std::string> shared;
  Json affected = Json::array();
  for (const auto& d : test.documents) {
    bool hit = false;
    for (const auto& g : grams(d)) {
      if (train_grams.count(g)) {
        shared.insert(g);
        hit = true;
      }
    }
    if (hit) affected.push_back(d.id);
  }
  Json examples = Json::array();
  for (const auto& g : shared) {
    if (examples.size() == 20) break;
    examples.push_back(g);
  }
  return {{"advisory", true},
          {"ngram", n},
          {"shared_ngrams", shared.size()},
          {"test_docs_with_shared_ngrams", affected},
          {"examples", examples},
          {"train_docs", train.size()},
          {"test_docs", test.size()}};
}

std::vector<double> percentages(const std::vector<std::size_t>& counts) {
  std::uint64_t total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  std::vector<double> out(counts.size(), 0.0);
  if (total == 0) return out;
  std::vector<std::uint64_t> units(counts.size());
  std::vector<std::pair<std::uint64_t, std::size_t>> rema;
  std::uint64_t assigned = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    std::uint64_t scaled = counts[i] * 10000ULL;
    units[i] = scaled / total;
    assigned += units[i];
    rema.emplace_back(scaled % total, i);
  }
  std::stable_sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < 10000; ++k, ++assigned) ++units[rema[k].second];
  for (std::size_t i = 0; i < counts.size(); ++i) out[i] = static_cast<double>(units[i]) / 100.0;
  return out;
}

}  // namespace absorb::dataset
