#include "absorb/qagen.hpp"

#include <map>

#include "absorb/error.hpp"
#include "absorb/taskgen.hpp"
#include "absorb/text.hpp"

namespace absorb::embedded {
extern const std::string_view generation_prompt_txt;
extern const std::string_view nli_prompt_txt;
extern const std::string_view type_prompt_txt;
}  // namespace absorb::embedded

namespace absorb::qagen {

namespace {

// Start offsets of `marker` where it opens a line (leading blanks allowed).
std::vector<std::size_t> line_markers(std::string_view s, std::string_view marker) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while ((pos = s.find(marker, pos)) != std::string_view::npos) {
    std::size_t k = pos;
    while (k > 0 && (s[k - 1] == ' ' || s[k - 1] == '\t')) --k;
    if (k == 0 || s[k - 1] == '\n') out.push_back(pos);
    pos += marker.size();
  }
  return out;
}

}  // namespace

std::string_view to_string(QATask t) noexcept { return t == QATask::generation ? "generation" : "nli"; }

QATask qa_task_from_string(std::string_view s) {
  if (s == "generation") return QATask::generation;
  if (s == "nli") return QATask::nli;
  throw_data("unknown QA task: " + std::string(s));
}

std::string_view to_string(NliLabel l) noexcept {
  switch (l) {
    case NliLabel::yes: return "Yes";
    case NliLabel::no: return "No";
    case NliLabel::impossible: return "Impossible";
  }
  return "Impossible";
}

NliLabel nli_label_from_string(std::string_view s) {
  if (auto l = canonical_label(s)) return *l;
  throw_data("unknown NLI label: " + std::string(s));
}

std::string_view option_text(NliLabel l) noexcept {
  switch (l) {
    case NliLabel::yes: return "Yes";
    case NliLabel::no: return "No";
    case NliLabel::impossible: return "It's impossible to say";
  }
  return "It's impossible to say";
}

std::optional<NliLabel> canonical_label(std::string_view answer) {
  std::string a = text::to_lower(text::trim(answer));
  while (!a.empty() && (a.back() == '.' || a.back() == ' ')) a.pop_back();
  for (std::size_t p; (p = a.find("\xE2\x80\x99")) != std::string::npos;) a.replace(p, 3, "'");
  if (a == "yes") return NliLabel::yes;
  if (a == "no") return NliLabel::no;
  if (a == "impossible" || a == "it's impossible to say") return NliLabel::impossible;
  return std::nullopt;
}

Json QAPair::to_json() const {
  Json j = {{"doc_id", doc_id}, {"task", to_string(task)}, {"question", question}, {"answer", answer}};
  if (options) j["options"] = *options;
  if (answer_label) j["answer_label"] = to_string(*answer_label);
  return j;
}

QAPair QAPair::from_json(const Json& j) {
  try {
    QAPair p;
    p.doc_id = j.at("doc_id").get<std::string>();
    p.task = qa_task_from_string(j.at("task").get<std::string>());
    p.question = j.at("question").get<std::string>();
    p.answer = j.at("answer").get<std::string>();
    if (j.contains("options")) p.options = j["options"].get<std::vector<std::string>>();
    if (j.contains("answer_label")) p.answer_label = nli_label_from_string(j["answer_label"].get<std::string>());
    if (p.task == QATask::nli && !p.answer_label) p.answer_label = nli_label_from_string(p.answer);
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw_data(std::string("malformed QA record: ") + e.what());
  }
}

Prompts Prompts::defaults() {
  return {std::string(embedded::generation_prompt_txt), std::string(embedded::nli_prompt_txt),
          std::string(embedded::type_prompt_txt)};
}

std::string build_generation_prompt(const corpus::RawDocument& doc, const Prompts& prompts) {
  if (doc.body.empty()) throw_data("document " + doc.id + " has an empty body");
  return taskgen::fill_template(prompts.generation, {{"topic", doc.title}, {"paragraph", doc.body}});
}

std::string build_nli_prompt(const corpus::RawDocument& doc, const Prompts& prompts) {
  if (doc.body.empty()) throw_data("document " + doc.id + " has an empty body");
  return taskgen::fill_template(prompts.nli, {{"topic", doc.title}, {"paragraph", doc.body}});
}

std::string build_type_prompt(const corpus::RawDocument& doc, const std::vector<QAPair>& pairs,
                              const Prompts& prompts) {
  if (pairs.empty()) throw_data("document " + doc.id + ": type prompt needs at least one QA pair");
  std::vector<std::string> lines;
  for (const auto& p : pairs) lines.push_back("Question: " + p.question + "\nAnswer: " + p.answer);
  return taskgen::fill_template(prompts.type, {{"paragraph", doc.rendered()}, {"QA", text::join(lines, "\n")}});
}

ParseResult parse_qa_response(std::string_view raw_in, QATask task, const std::string& doc_id) {
  std::string raw(raw_in);
  for (std::size_t p; (p = raw.find("\r\n")) != std::string::npos;) raw.erase(p, 1);
  std::string_view s(raw);

  ParseResult out;
  auto starts = line_markers(s, "Question:");
  for (std::size_t b = 0; b < starts.size(); ++b) {
    std::size_t begin = starts[b] + 9;
    std::size_t end = b + 1 < starts.size() ? starts[b + 1] : s.size();
    std::string_view block = s.substr(begin, end - begin);
    auto answers = line_markers(block, "Answer:");
    if (answers.empty()) {
      ++out.warnings;
      continue;
    }
    std::string_view q = block.substr(0, answers.front());
    std::string answer(text::trim(block.substr(answers.front() + 7)));
    std::size_t opt = task == QATask::nli ? q.find("Options:") : std::string_view::npos;
    if (opt != std::string_view::npos) {
      q = q.substr(0, opt);  // the option set is fixed; the listed texts are not kept
    }
    std::string question(text::trim(q));
    if (question.empty() || answer.empty()) {
      ++out.warnings;
      continue;
    }
    QAPair pair;
    pair.doc_id = doc_id;
    pair.task = task;
    pair.question = std::move(question);
    if (task == QATask::nli) {
      auto label = canonical_label(answer);
      if (!label) {
        ++out.warnings;
        continue;
      }
      pair.answer_label = label;
      pair.answer = std::string(option_text(*label));
      pair.options = taskgen::kNliOptions;
    } else {
      pair.answer = std::move(answer);
    }
    out.pairs.push_back(std::move(pair));
  }
  if (out.pairs.empty()) {
    throw_data((doc_id.empty() ? std::string() : "document " + doc_id + ": ") +
               "no question/answer pairs found in " + std::string(to_string(task)) + " response");
  }
  return out;
}

std::string render_qa_response(const std::vector<QAPair>& pairs) {
  std::string out;
  for (const auto& p : pairs) {
    if (!out.empty()) out += "\n";
    out += "Question: " + p.question + "\n";
    if (p.options) out += "Options:\n" + taskgen::render_options(*p.options) + "\n";
    out += "Answer: " + p.answer;
  }
  return out;
}

}  // namespace absorb::qagen
