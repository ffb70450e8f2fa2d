#include "absorb/analysis.hpp"

#include <algorithm>
#include <array>
#include <unordered_set>

#include "absorb/error.hpp"
#include "absorb/jsonio.hpp"
#include "absorb/text.hpp"

namespace absorb::embedded {
extern const std::string_view prepositions_txt;
extern const std::string_view abbreviations_txt;
}  // namespace absorb::embedded

namespace absorb::analysis {

namespace {

using text::is_alnum;
using text::is_digit;
using text::is_letter;
using text::is_space;
using text::is_upper;

bool is_joiner(char32_t c) { return c == U'-' || c == U'\'' || c == U'’'; }
bool is_open_quote(char32_t c) { return c == U'"' || c == U'\'' || c == U'“' || c == U'‘'; }
bool is_close_quote(char32_t c) { return c == U'"' || c == U'\'' || c == U'”' || c == U'’'; }

constexpr std::array<std::u32string_view, 12> kMonths = {
    U"January", U"February", U"March",     U"April",   U"May",      U"June",
    U"July",    U"August",   U"September", U"October", U"November", U"December"};

// Lowercase connectors allowed between capitalized words of one name.
const std::unordered_set<std::u32string>& connectors() {
  static const std::unordered_set<std::u32string> s = {
      U"of", U"the", U"de", U"van", U"von", U"der", U"den", U"da", U"du", U"la",
      U"le", U"del", U"della", U"di", U"do", U"dos", U"das", U"y", U"bin", U"ibn"};
  return s;
}

// Capitalized only because they open the sentence.
const std::unordered_set<std::u32string>& leading_stopwords() {
  static const std::unordered_set<std::u32string> s = {
      U"the",   U"a",      U"an",       U"in",        U"on",    U"at",      U"he",     U"she",
      U"it",    U"they",   U"his",      U"her",       U"its",   U"their",   U"this",   U"that",
      U"these", U"those",  U"from",     U"after",     U"before", U"during", U"when",   U"while",
      U"as",    U"for",    U"with",     U"by",        U"of",    U"to",      U"but",    U"and",
      U"or",    U"if",     U"since",    U"although",  U"following", U"according", U"there",
      U"here",  U"we",     U"i",        U"you",       U"our",   U"my",      U"upon",   U"despite",
      U"however", U"also", U"both",     U"each",      U"some",  U"many",    U"most",   U"other",
      U"such",  U"under",  U"between",  U"born",      U"then",  U"later",   U"today",  U"currently"};
  return s;
}

std::optional<std::string> version_of(std::string_view line) {
  constexpr std::string_view tag = "version:";
  std::string_view body = text::trim(line.substr(1));
  if (body.substr(0, tag.size()) != tag) return std::nullopt;
  return std::string(text::trim(body.substr(tag.size())));
}

template <class F>
void for_each_entry(std::string_view content, std::string& version, F&& f) {
  std::size_t pos = 0;
  while (pos <= content.size()) {
    std::size_t nl = content.find('\n', pos);
    std::size_t end = nl == std::string_view::npos ? content.size() : nl;
    std::string_view line = text::trim(content.substr(pos, end - pos));
    if (!line.empty()) {
      if (line.front() == '#') {
        if (auto v = version_of(line)) version = *v;
      } else {
        f(line);
      }
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
}

enum class ETokType { word, number, initial, dotted };

struct EToken {
  std::size_t start;
  std::size_t end;
  ETokType type;
  bool cap;
};

struct Candidate {
  std::size_t start;
  std::size_t end;
  EntityKind kind;
};

int priority(EntityKind k) {
  switch (k) {
    case EntityKind::date: return 0;
    case EntityKind::acronym: return 1;
    case EntityKind::name: return 2;
    case EntityKind::number: return 3;
    case EntityKind::other: return 4;
  }
  return 5;
}

bool numeric(std::u32string_view s) {
  if (s.empty() || !is_digit(s.front())) return false;
  return std::all_of(s.begin(), s.end(), [](char32_t c) { return is_digit(c) || c == U',' || c == U'.'; });
}

long small_int(std::u32string_view s) {
  if (s.empty() || s.size() > 4) return -1;
  long v = 0;
  for (char32_t c : s) {
    if (!is_digit(c)) return -1;
    v = v * 10 + static_cast<long>(c - U'0');
  }
  return v;
}

}  // namespace

std::string_view to_string(EntityKind kind) noexcept {
  switch (kind) {
    case EntityKind::name: return "name";
    case EntityKind::date: return "date";
    case EntityKind::number: return "number";
    case EntityKind::acronym: return "acronym";
    case EntityKind::other: return "other";
  }
  return "other";
}

EntityKind entity_kind_from_string(std::string_view s) {
  if (s == "name") return EntityKind::name;
  if (s == "date") return EntityKind::date;
  if (s == "number") return EntityKind::number;
  if (s == "acronym") return EntityKind::acronym;
  if (s == "other") return EntityKind::other;
  throw_data("unknown entity kind: " + std::string(s));
}

std::vector<Token> word_tokens(std::u32string_view t) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = t.size();
  while (i < n) {
    if (!is_alnum(t[i])) {
      ++i;
      continue;
    }
    std::size_t start = i;
    bool num = is_digit(t[i]);
    ++i;
    while (i < n) {
      char32_t c = t[i];
      bool next_alnum = i + 1 < n && is_alnum(t[i + 1]);
      if (is_alnum(c)) {
        if (!is_digit(c)) num = false;
        ++i;
      } else if (is_joiner(c) && next_alnum && is_letter(t[i - 1])) {
        num = false;
        ++i;
      } else if (num && (c == U',' || c == U'.') && i + 1 < n && is_digit(t[i + 1]) && is_digit(t[i - 1])) {
        ++i;
      } else {
        break;
      }
    }
    out.push_back({start, i, text::encode(t.substr(start, i - start))});
  }
  return out;
}

std::vector<Token> word_tokens(std::string_view utf8) { return word_tokens(text::decode(utf8)); }

Lexicons Lexicons::parse(std::string_view prepositions_text, std::string_view abbreviations_text) {
  Lexicons lex;
  for_each_entry(prepositions_text, lex.prepositions_version, [&](std::string_view line) {
    std::vector<std::string> seq;
    for (auto& w : text::split_whitespace(line)) seq.push_back(text::to_lower(w));
    lex.prepositions.push_back(std::move(seq));
  });
  for_each_entry(abbreviations_text, lex.abbreviations_version,
                 [&](std::string_view line) { lex.abbreviations.insert(text::to_lower(line)); });
  // Longest units first so multiword entries win over their parts.
  std::stable_sort(lex.prepositions.begin(), lex.prepositions.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
  return lex;
}

Lexicons Lexicons::defaults() { return parse(embedded::prepositions_txt, embedded::abbreviations_txt); }

Lexicons Lexicons::load(const std::optional<std::filesystem::path>& prepositions,
                        const std::optional<std::filesystem::path>& abbreviations) {
  std::string p = prepositions ? read_file(*prepositions) : std::string(embedded::prepositions_txt);
  std::string a = abbreviations ? read_file(*abbreviations) : std::string(embedded::abbreviations_txt);
  return parse(p, a);
}

std::string AnalyzedDocument::slice(std::size_t start, std::size_t end) const {
  return text::encode(std::u32string_view(body).substr(start, end - start));
}

std::string AnalyzedDocument::sentence_text(std::size_t i) const {
  return slice(sentences.at(i).start, sentences.at(i).end);
}

std::vector<Token> AnalyzedDocument::sentence_tokens(std::size_t i) const {
  const auto& s = sentences.at(i);
  return word_tokens(std::u32string_view(body).substr(s.start, s.end - s.start));
}

std::vector<const EntitySpan*> AnalyzedDocument::entities_in(std::size_t i) const {
  std::vector<const EntitySpan*> out;
  const auto& s = sentences.at(i);
  for (const auto& e : entities) {
    if (e.start >= s.start && e.end <= s.end) out.push_back(&e);
  }
  return out;
}

RuleAnalyzer::RuleAnalyzer() : lex_(Lexicons::defaults()) {}
RuleAnalyzer::RuleAnalyzer(Lexicons lexicons) : lex_(std::move(lexicons)) {}

bool RuleAnalyzer::protected_period(std::u32string_view body, std::size_t start, std::size_t dot) const {
  std::size_t ws = dot;
  while (ws > start && !is_space(body[ws - 1]) && body[ws - 1] != U'(' && body[ws - 1] != U'[' &&
         !is_open_quote(body[ws - 1])) {
    --ws;
  }
  std::u32string_view word = body.substr(ws, dot - ws);
  if (word.empty()) return false;
  std::u32string with_dot(word);
  with_dot.push_back(U'.');
  if (lex_.abbreviations.count(text::encode(text::to_lower(with_dot)))) return true;
  if (word.size() == 1 && is_upper(word[0])) return true;
  // Dotted initialisms: "U.S", "e.g", "D.C".
  if (word.size() >= 3 && word.size() % 2 == 1) {
    bool dotted = true;
    for (std::size_t k = 0; k < word.size(); ++k) {
      if (k % 2 == 0 ? !is_letter(word[k]) : word[k] != U'.') {
        dotted = false;
        break;
      }
    }
    if (dotted) return true;
  }
  return false;
}

std::vector<SentenceSpan> RuleAnalyzer::segment_sentences(std::u32string_view body) const {
  std::vector<SentenceSpan> out;
  const std::size_t n = body.size();
  std::size_t i = 0;
  while (i < n && is_space(body[i])) ++i;
  std::size_t start = i;
  int depth = 0;
  auto emit = [&](std::size_t end) {
    while (end > start && is_space(body[end - 1])) --end;
    if (end > start) out.push_back({start, end, out.size()});
  };
  while (i < n) {
    char32_t c = body[i];
    if (c == U'(' || c == U'[') {
      ++depth;
    } else if ((c == U')' || c == U']') && depth > 0) {
      --depth;
      // "(... Really.) Then": the bracket closes a finished sentence.
      bool ended = i > 0 && (body[i - 1] == U'.' || body[i - 1] == U'?' || body[i - 1] == U'!');
      if (depth == 0 && ended) {
        std::size_t k = i + 1;
        if (k < n && is_space(body[k])) {
          while (k < n && is_space(body[k])) ++k;
          if (k < n && (is_upper(body[k]) || is_open_quote(body[k]))) {
            emit(i + 1);
            start = k;
            i = k;
            continue;
          }
        }
      }
    } else if ((c == U'.' || c == U'?' || c == U'!') && depth == 0) {
      std::size_t j = i + 1;
      while (j < n && (body[j] == U'.' || body[j] == U'?' || body[j] == U'!')) ++j;
      while (j < n && is_close_quote(body[j])) ++j;
      if (j < n && is_space(body[j])) {
        std::size_t k = j;
        while (k < n && is_space(body[k])) ++k;
        bool opener = k < n && (is_upper(body[k]) || is_digit(body[k]) || is_open_quote(body[k]));
        bool abbrev = c == U'.' && j == i + 1 && protected_period(body, start, i);
        if (opener && !abbrev) {
          emit(j);
          start = k;
          i = k;
          continue;
        }
      }
      i = j;
      continue;
    }
    ++i;
  }
  emit(n);
  return out;
}

void RuleAnalyzer::sentence_entities(std::u32string_view body, const SentenceSpan& s,
                                     std::vector<EntitySpan>& out) const {
  std::u32string_view sent = body.substr(s.start, s.end - s.start);
  std::vector<Token> raw = word_tokens(sent);

  std::vector<EToken> toks;
  for (std::size_t k = 0; k < raw.size(); ++k) {
    std::u32string_view w = sent.substr(raw[k].start, raw[k].end - raw[k].start);
    bool followed_by_dot = raw[k].end < sent.size() && sent[raw[k].end] == U'.';
    if (w.size() == 1 && is_upper(w[0]) && followed_by_dot) {
      std::size_t end = raw[k].end + 1;
      int letters = 1;
      while (k + 1 < raw.size() && raw[k + 1].start == end && raw[k + 1].end - raw[k + 1].start == 1 &&
             is_letter(sent[raw[k + 1].start]) && raw[k + 1].end < sent.size() && sent[raw[k + 1].end] == U'.') {
        ++k;
        end = raw[k].end + 1;
        ++letters;
      }
      toks.push_back({raw[k].start - static_cast<std::size_t>(2 * (letters - 1)), end,
                      letters == 1 ? ETokType::initial : ETokType::dotted, true});
      continue;
    }
    if (followed_by_dot && is_upper(w[0])) {
      std::u32string with_dot(w);
      with_dot.push_back(U'.');
      if (lex_.abbreviations.count(text::encode(text::to_lower(with_dot)))) {
        toks.push_back({raw[k].start, raw[k].end + 1, ETokType::initial, true});
        continue;
      }
    }
    if (numeric(w)) {
      toks.push_back({raw[k].start, raw[k].end, ETokType::number, false});
    } else {
      toks.push_back({raw[k].start, raw[k].end, ETokType::word, is_upper(w[0])});
    }
  }

  auto view = [&](const EToken& t) { return sent.substr(t.start, t.end - t.start); };
  auto gap_is = [&](std::size_t a, std::size_t b, std::u32string_view g) {
    return sent.substr(toks[a].end, toks[b].start - toks[a].end) == g;
  };
  auto lower = [&](const EToken& t) { return text::to_lower(view(t)); };
  auto is_connector = [&](const EToken& t) { return t.type == ETokType::word && !t.cap && connectors().count(lower(t)); };
  auto is_capital = [&](const EToken& t) {
    return (t.type == ETokType::word && t.cap) || t.type == ETokType::initial || t.type == ETokType::dotted;
  };
  auto month_of = [&](const EToken& t) {
    return t.type == ETokType::word && std::find(kMonths.begin(), kMonths.end(), view(t)) != kMonths.end();
  };
  auto day_of = [&](const EToken& t) {
    long v = t.type == ETokType::number ? small_int(view(t)) : -1;
    return v >= 1 && v <= 31 && view(t).size() <= 2;
  };
  auto year_of = [&](const EToken& t) {
    long v = t.type == ETokType::number ? small_int(view(t)) : -1;
    return view(t).size() == 4 && v >= 1000 && v <= 2999;
  };

  std::vector<Candidate> cands;

  // (a) capitalized runs
  for (std::size_t i = 0; i < toks.size();) {
    if (!is_capital(toks[i])) {
      ++i;
      continue;
    }
    std::size_t last = i;
    for (std::size_t k = i + 1; k < toks.size() && gap_is(k - 1, k, U" "); ++k) {
      if (is_capital(toks[k])) {
        last = k;
      } else if (!is_connector(toks[k])) {
        break;
      }
    }
    std::size_t a = i;
    std::size_t b = last;
    i = last + 1;
    while (b > a && toks[b].type == ETokType::initial) --b;
    if (a == 0) {
      if (toks[a].type == ETokType::word && leading_stopwords().count(lower(toks[a]))) {
        ++a;
        while (a <= b && is_connector(toks[a])) ++a;
        if (a > b) continue;
      } else if (a == b) {
        continue;  // lone capitalized sentence opener
      }
    }
    if (a == b && toks[a].type == ETokType::initial) continue;
    EntityKind kind = EntityKind::name;
    if (a == b) {
      std::u32string_view w = view(toks[a]);
      if (toks[a].type == ETokType::dotted) kind = EntityKind::acronym;
      else if (month_of(toks[a])) kind = EntityKind::date;
      else if (w.size() >= 2 && w.size() <= 6 && std::all_of(w.begin(), w.end(), [](char32_t c) { return is_upper(c); }))
        kind = EntityKind::acronym;
    }
    cands.push_back({toks[a].start, toks[b].end, kind});
  }

  for (std::size_t k = 0; k < toks.size(); ++k) {
    const EToken& t = toks[k];
    // (d) acronyms, regardless of position
    if (t.type == ETokType::word) {
      std::u32string_view w = view(t);
      if (w.size() >= 2 && w.size() <= 6 && std::all_of(w.begin(), w.end(), [](char32_t c) { return is_upper(c); })) {
        cands.push_back({t.start, t.end, EntityKind::acronym});
      }
    }
    // (c) standalone numbers
    if (t.type == ETokType::number) cands.push_back({t.start, t.end, EntityKind::number});
    // (b) dates
    auto has = [&](std::size_t off) { return k + off < toks.size(); };
    auto date = [&](std::size_t last) { cands.push_back({t.start, toks[last].end, EntityKind::date}); };
    if (month_of(t)) {
      if (has(1) && gap_is(k, k + 1, U" ") && day_of(toks[k + 1])) {
        date(k + 1);
        if (has(2) && (gap_is(k + 1, k + 2, U", ") || gap_is(k + 1, k + 2, U" ")) && year_of(toks[k + 2])) date(k + 2);
      }
      if (has(1) && gap_is(k, k + 1, U" ") && year_of(toks[k + 1])) date(k + 1);
    }
    if (day_of(t) && has(1) && gap_is(k, k + 1, U" ") && month_of(toks[k + 1])) {
      date(k + 1);
      if (has(2) && gap_is(k + 1, k + 2, U" ") && year_of(toks[k + 2])) date(k + 2);
    }
    if (year_of(t)) date(k);
  }

  // Longest match, then leftmost, then kind priority.
  std::sort(cands.begin(), cands.end(), [](const Candidate& x, const Candidate& y) {
    std::size_t lx = x.end - x.start, ly = y.end - y.start;
    if (lx != ly) return lx > ly;
    if (x.start != y.start) return x.start < y.start;
    return priority(x.kind) < priority(y.kind);
  });
  std::vector<Candidate> kept;
  for (const auto& c : cands) {
    bool clash = std::any_of(kept.begin(), kept.end(), [&](const Candidate& k) { return c.start < k.end && k.start < c.end; });
    if (!clash) kept.push_back(c);
  }
  std::sort(kept.begin(), kept.end(), [](const Candidate& x, const Candidate& y) { return x.start < y.start; });
  for (const auto& c : kept) {
    out.push_back({s.start + c.start, s.start + c.end, text::encode(sent.substr(c.start, c.end - c.start)), c.kind});
  }
}

std::vector<EntitySpan> RuleAnalyzer::extract_entities(std::u32string_view body,
                                                       const std::vector<SentenceSpan>& sentences) const {
  std::vector<EntitySpan> out;
  for (const auto& s : sentences) sentence_entities(body, s, out);
  return out;
}

std::vector<EntitySpan> RuleAnalyzer::extract_entities(std::u32string_view body) const {
  return extract_entities(body, segment_sentences(body));
}

std::vector<std::size_t> RuleAnalyzer::find_prepositions(std::u32string_view sentence) const {
  std::vector<Token> toks = word_tokens(sentence);
  std::vector<std::string> lower;
  lower.reserve(toks.size());
  for (const auto& t : toks) lower.push_back(text::to_lower(t.text));

  auto spaced = [&](std::size_t a, std::size_t b) {
    for (std::size_t k = toks[a].end; k < toks[b].start; ++k) {
      if (!is_space(sentence[k])) return false;
    }
    return true;
  };

  std::vector<std::size_t> out;
  for (std::size_t p = 0; p < toks.size();) {
    std::size_t matched = 0;
    for (const auto& entry : lex_.prepositions) {
      if (entry.empty() || p + entry.size() > toks.size()) continue;
      bool ok = true;
      for (std::size_t k = 0; k < entry.size() && ok; ++k) {
        ok = lower[p + k] == entry[k] && (k == 0 || spaced(p + k - 1, p + k));
      }
      if (ok) {
        matched = entry.size();
        break;
      }
    }
    if (matched) {
      out.push_back(p + matched - 1);
      p += matched;
    } else {
      ++p;
    }
  }
  return out;
}

AnalyzedDocument RuleAnalyzer::analyze(const corpus::RawDocument& doc) const {
  AnalyzedDocument a;
  a.doc = doc;
  a.body = text::decode(doc.body);
  a.sentences = segment_sentences(a.body);
  a.entities = extract_entities(a.body, a.sentences);
  for (const auto& s : a.sentences) {
    a.prepositions.push_back(find_prepositions(std::u32string_view(a.body).substr(s.start, s.end - s.start)));
  }
  return a;
}

namespace {
const RuleAnalyzer& default_analyzer() {
  static const RuleAnalyzer analyzer;
  return analyzer;
}
}  // namespace

std::vector<SentenceSpan> segment_sentences(std::string_view body) {
  return default_analyzer().segment_sentences(text::decode(body));
}

std::vector<EntitySpan> extract_entities(std::string_view body) {
  return default_analyzer().extract_entities(text::decode(body));
}

std::vector<std::size_t> find_prepositions(std::string_view sentence) {
  return default_analyzer().find_prepositions(text::decode(sentence));
}

}  // namespace absorb::analysis
