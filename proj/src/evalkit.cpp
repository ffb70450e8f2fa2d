#include "absorb/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "absorb/text.hpp"

namespace absorb::evalkit {

namespace {

std::size_t common_count(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::unordered_map<std::string, std::size_t> bag;
  for (const auto& t : a) ++bag[t];
  std::size_t common = 0;
  for (const auto& t : b) {
    auto it = bag.find(t);
    if (it != bag.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  return common;
}

void require_golds(const std::vector<std::string>& golds) {
  if (golds.empty()) throw_usage("at least one gold answer is required");
}

double f1_single(const std::vector<std::string>& p, const std::vector<std::string>& g) {
  if (p.empty() || g.empty()) return p.empty() && g.empty() ? 1.0 : 0.0;
  std::size_t common = common_count(p, g);
  if (common == 0) return 0.0;
  double precision = static_cast<double>(common) / static_cast<double>(p.size());
  double recall = static_cast<double>(common) / static_cast<double>(g.size());
  return 2 * precision * recall / (precision + recall);
}

double recall_single(const std::vector<std::string>& p, const std::vector<std::string>& g) {
  if (p.empty() || g.empty()) return p.empty() && g.empty() ? 1.0 : 0.0;
  return static_cast<double>(common_count(p, g)) / static_cast<double>(g.size());
}

std::size_t lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double mean_pct(double sum, std::size_t n) { return round2(100.0 * sum / static_cast<double>(n)); }

std::string key_of(const std::string& premise, const std::string& hypothesis) {
  return normalize_answer(premise) + "\x1f" + normalize_answer(hypothesis);
}

}  // namespace

std::string normalize_answer(std::string_view s) {
  std::u32string lower = text::to_lower(text::decode(s));
  std::u32string kept;
  kept.reserve(lower.size());
  for (char32_t c : lower) {
    if (text::is_space(c)) kept.push_back(U' ');
    else if (text::is_alnum(c)) kept.push_back(c);
  }
  std::vector<std::string> words;
  for (auto& w : text::split_whitespace(text::encode(kept))) {
    if (w != "a" && w != "an" && w != "the") words.push_back(std::move(w));
  }
  return text::join(words, " ");
}

std::vector<std::string> answer_tokens(std::string_view s) { return text::split_whitespace(normalize_answer(s)); }

int exact_match(std::string_view pred, const std::vector<std::string>& golds) {
  require_golds(golds);
  std::string p = normalize_answer(pred);
  for (const auto& g : golds) {
    if (normalize_answer(g) == p) return 1;
  }
  return 0;
}

double token_f1(std::string_view pred, const std::vector<std::string>& golds) {
  require_golds(golds);
  auto p = answer_tokens(pred);
  double best = 0.0;
  for (const auto& g : golds) best = std::max(best, f1_single(p, answer_tokens(g)));
  return best;
}

double token_recall(std::string_view pred, const std::vector<std::string>& golds) {
  require_golds(golds);
  auto p = answer_tokens(pred);
  double best = 0.0;
  for (const auto& g : golds) best = std::max(best, recall_single(p, answer_tokens(g)));
  return best;
}

// Rouge-L keeps articles: plain lowercase word tokens, as ROUGE scorers do.
double rouge_l(std::string_view pred, std::string_view gold) {
  auto p = text::tokenize_words(pred);
  auto g = text::tokenize_words(gold);
  if (p.empty() || g.empty()) return p.empty() && g.empty() ? 1.0 : 0.0;
  std::size_t l = lcs(p, g);
  if (l == 0) return 0.0;
  double precision = static_cast<double>(l) / static_cast<double>(p.size());
  double recall = static_cast<double>(l) / static_cast<double>(g.size());
  return 2 * precision * recall / (precision + recall);
}

double rouge_l(std::string_view pred, const std::vector<std::string>& golds) {
  require_golds(golds);
  double best = 0.0;
  for (const auto& g : golds) best = std::max(best, rouge_l(pred, std::string_view(g)));
  return best;
}

std::optional<qagen::NliLabel> parse_nli_prediction(std::string_view pred) {
  using qagen::NliLabel;
  static const std::vector<std::pair<NliLabel, std::vector<std::string>>> options = [] {
    std::vector<std::pair<NliLabel, std::vector<std::string>>> v;
    for (NliLabel l : {NliLabel::yes, NliLabel::impossible, NliLabel::no}) {
      v.emplace_back(l, answer_tokens(qagen::option_text(l)));
    }
    return v;
  }();
  auto words = answer_tokens(pred);
  for (const auto& [label, opt] : options) {
    if (words == opt) return label;
  }
  std::optional<NliLabel> best;
  std::size_t best_pos = words.size();
  std::size_t best_len = 0;
  for (const auto& [label, opt] : options) {
    auto it = std::search(words.begin(), words.end(), opt.begin(), opt.end());
    if (it == words.end()) continue;
    auto pos = static_cast<std::size_t>(it - words.begin());
    if (pos < best_pos || (pos == best_pos && opt.size() > best_len)) {
      best = label;
      best_pos = pos;
      best_len = opt.size();
    }
  }
  return best;
}

NliScore nli_accuracy(std::string_view pred, qagen::NliLabel gold) {
  auto label = parse_nli_prediction(pred);
  if (!label) return {0, false};
  return {*label == gold ? 1 : 0, true};
}

double aggregate_ppl(const std::vector<LogProbRecord>& records) {
  double sum = 0.0;
  double comp = 0.0;
  std::size_t count = 0;
  for (const auto& r : records) {
    for (double x : r.logprobs) {
      if (!std::isfinite(x) || x > 0.0) {
        throw_data("log-probability out of range in record " + r.doc_id + ": values must be finite and <= 0");
      }
      double t = sum + x;
      comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
      sum = t;
      ++count;
    }
  }
  if (count == 0) throw_data("perplexity needs at least one token");
  return std::exp(-(sum + comp) / static_cast<double>(count));
}

bool ExactJudge::entails(const std::string& premise, const std::string& hypothesis) const {
  return normalize_answer(premise) == normalize_answer(hypothesis);
}

VerdictJudge::VerdictJudge(const std::filesystem::path& path) {
  for (const auto& [line_no, j] : read_jsonl(path)) {
    try {
      verdicts_[{normalize_answer(j.at("premise").get<std::string>()),
                 normalize_answer(j.at("hypothesis").get<std::string>())}] = j.at("entails").get<bool>();
    } catch (const nlohmann::json::exception&) {
      throw_data(path.string() + ":" + std::to_string(line_no) + ": verdict needs premise, hypothesis, entails");
    }
  }
}

bool VerdictJudge::entails(const std::string& premise, const std::string& hypothesis) const {
  auto it = verdicts_.find({normalize_answer(premise), normalize_answer(hypothesis)});
  if (it == verdicts_.end()) throw JudgeUnavailable("no verdict for pair " + key_of(premise, hypothesis));
  return it->second;
}

int judge_accuracy(const Judge& judge, const std::string& pred, const std::vector<std::string>& golds) {
  require_golds(golds);
  for (const auto& g : golds) {
    if (judge.entails(pred, g) && judge.entails(g, pred)) return 1;
  }
  return 0;
}

std::vector<Judgment> score(const std::vector<Reference>& refs, const std::vector<Prediction>& preds,
                            const Judge* judge, Diagnostics& diag) {
  std::unordered_map<std::string, const Prediction*> by_id;
  for (const auto& p : preds) {
    if (!by_id.emplace(p.item_id, &p).second) throw_data("duplicate prediction for item " + p.item_id);
  }
  std::set<std::string> ref_ids;
  std::vector<std::string> missing;
  for (const auto& r : refs) {
    if (!ref_ids.insert(r.item_id).second) throw_data("duplicate reference item " + r.item_id);
    if (!by_id.count(r.item_id)) missing.push_back(r.item_id);
  }
  std::vector<std::string> unknown;
  for (const auto& p : preds) {
    if (!ref_ids.count(p.item_id)) unknown.push_back(p.item_id);
  }
  if (!missing.empty() || !unknown.empty()) {
    std::string msg;
    if (!missing.empty()) {
      msg += "predictions missing for " + std::to_string(missing.size()) + " item(s): " + text::join(missing, ", ");
    }
    if (!unknown.empty()) {
      if (!msg.empty()) msg += "; ";
      msg += "predictions for unknown item(s): " + text::join(unknown, ", ");
    }
    throw_data(msg);
  }

  std::vector<Judgment> out;
  out.reserve(refs.size());
  for (const auto& r : refs) {
    const std::string& pred = by_id.at(r.item_id)->prediction;
    Judgment j;
    j.item_id = r.item_id;
    if (r.gold_label) {
      NliScore s = nli_accuracy(pred, *r.gold_label);
      j.nli_acc = s.correct;
      if (!s.parsed) ++diag.unparseable_nli;
      if (auto l = parse_nli_prediction(pred)) j.nli_predicted = std::string(qagen::to_string(*l));
    } else {
      if (r.golds.empty()) throw_data("reference " + r.item_id + " has no golds");
      j.em = exact_match(pred, r.golds);
      j.f1 = token_f1(pred, r.golds);
      j.recall = token_recall(pred, r.golds);
      j.rouge_l = rouge_l(pred, r.golds);
      if (judge) {
        try {
          j.acc = judge_accuracy(*judge, pred, r.golds);
        } catch (const JudgeUnavailable&) {
          ++diag.judge_skipped;
        }
      }
    }
    out.push_back(std::move(j));
  }
  return out;
}

Json report(std::vector<Judgment> judgments, const Diagnostics& diag, std::optional<double> ppl,
            std::size_t ppl_tokens) {
  if (judgments.empty() && !ppl) throw_data("nothing to report: no scored items and no log-probabilities");
  std::sort(judgments.begin(), judgments.end(),
            [](const Judgment& a, const Judgment& b) { return a.item_id < b.item_id; });

  struct Acc {
    double sum = 0;
    std::size_t n = 0;
    void add(double v) {
      sum += v;
      ++n;
    }
  };
  Acc em, f1, recall, rl, acc, nli;
  Json items = Json::array();
  for (const auto& j : judgments) {
    Json item = {{"item_id", j.item_id}};
    if (j.em) em.add(*j.em), item["em"] = *j.em;
    if (j.f1) f1.add(*j.f1), item["f1"] = *j.f1;
    if (j.recall) recall.add(*j.recall), item["recall"] = *j.recall;
    if (j.rouge_l) rl.add(*j.rouge_l), item["rouge_l"] = *j.rouge_l;
    if (j.acc) acc.add(*j.acc), item["acc"] = *j.acc;
    if (j.nli_acc) nli.add(*j.nli_acc), item["nli_acc"] = *j.nli_acc;
    if (j.nli_predicted) item["nli_predicted"] = *j.nli_predicted;
    items.push_back(std::move(item));
  }
  Json metrics = Json::object();
  if (em.n) metrics["em"] = mean_pct(em.sum, em.n);
  if (f1.n) metrics["f1"] = mean_pct(f1.sum, f1.n);
  if (recall.n) metrics["recall"] = mean_pct(recall.sum, recall.n);
  if (rl.n) metrics["rouge_l"] = mean_pct(rl.sum, rl.n);
  if (acc.n) metrics["acc"] = mean_pct(acc.sum, acc.n);
  if (nli.n) metrics["nli_acc"] = mean_pct(nli.sum, nli.n);
  if (ppl) metrics["ppl"] = round2(*ppl);

  Json out = {{"metrics", metrics},
              {"item_count", judgments.size()},
              {"items", items},
              {"diagnostics", {{"unparseable_nli", diag.unparseable_nli}, {"judge_skipped", diag.judge_skipped}}}};
  if (ppl) out["ppl"] = {{"value", *ppl}, {"tokens", ppl_tokens}};
  return out;
}

std::vector<Reference> read_references(const std::filesystem::path& path) {
  std::vector<Reference> out;
  for (const auto& [line_no, j] : read_jsonl(path)) {
    try {
      Reference r;
      r.item_id = j.at("item_id").is_string() ? j["item_id"].get<std::string>() : j["item_id"].dump();
      if (j.contains("golds")) r.golds = j["golds"].get<std::vector<std::string>>();
      if (j.contains("gold_label") && !j["gold_label"].is_null()) {
        r.gold_label = qagen::nli_label_from_string(j["gold_label"].get<std::string>());
      }
      if (r.golds.empty() && !r.gold_label) throw_data("needs golds or gold_label");
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw_data(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw_data(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
  std::vector<Prediction> out;
  for (const auto& [line_no, j] : read_jsonl(path)) {
    try {
      Prediction p;
      p.item_id = j.at("item_id").is_string() ? j["item_id"].get<std::string>() : j["item_id"].dump();
      p.prediction = j.at("prediction").get<std::string>();
      out.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw_data(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<LogProbRecord> read_logprobs(const std::filesystem::path& path) {
  std::vector<LogProbRecord> out;
  for (const auto& [line_no, j] : read_jsonl(path)) {
    try {
      LogProbRecord r;
      r.doc_id = j.value("doc_id", "");
      r.logprobs = j.at("logprobs").get<std::vector<double>>();
      if (r.logprobs.empty()) throw_data("record has no tokens");
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw_data(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw_data(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace absorb::evalkit
