#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "absorb/corpus.hpp"

namespace absorb::analysis {

// All offsets are in Unicode scalar units, end-exclusive.
struct SentenceSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t index = 0;

  bool operator==(const SentenceSpan&) const = default;
};

enum class EntityKind { name, date, number, acronym, other };

std::string_view to_string(EntityKind kind) noexcept;
EntityKind entity_kind_from_string(std::string_view s);

struct EntitySpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string surface;
  EntityKind kind = EntityKind::other;

  bool operator==(const EntitySpan&) const = default;
};

struct Token {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string text;  // as written
};

/// Word tokens with offsets: letter/digit runs, with hyphens and apostrophes
/// kept inside words ("Gipson-Long") and separators kept inside numbers
/// ("1,263"). Other punctuation is skipped.
std::vector<Token> word_tokens(std::u32string_view text);
std::vector<Token> word_tokens(std::string_view utf8);

// Closed word lists loaded from one-entry-per-line files. Lines starting
// with '#' are comments; "# version: N" is recorded.
struct Lexicons {
  std::string prepositions_version;
  std::string abbreviations_version;
  std::vector<std::vector<std::string>> prepositions;  // lowercase token sequences
  std::set<std::string> abbreviations;                 // lowercase, with final period

  static Lexicons defaults();
  /// Empty optionals fall back to the built-in lists.
  static Lexicons load(const std::optional<std::filesystem::path>& prepositions,
                       const std::optional<std::filesystem::path>& abbreviations);
  static Lexicons parse(std::string_view prepositions_text, std::string_view abbreviations_text);
};

struct AnalyzedDocument {
  corpus::RawDocument doc;
  std::u32string body;  // doc.body as scalars; all spans index into this
  std::vector<SentenceSpan> sentences;
  std::vector<EntitySpan> entities;
  std::vector<std::vector<std::size_t>> prepositions;  // per sentence, indices into sentence_tokens(i)

  std::string slice(std::size_t start, std::size_t end) const;
  std::string sentence_text(std::size_t i) const;
  std::vector<Token> sentence_tokens(std::size_t i) const;
  /// Entities whose span lies inside sentence i.
  std::vector<const EntitySpan*> entities_in(std::size_t i) const;
};

// Swappable analysis backend; generators only see AnalyzedDocument.
class Analyzer {
 public:
  virtual ~Analyzer() = default;
  virtual AnalyzedDocument analyze(const corpus::RawDocument& doc) const = 0;
};

class RuleAnalyzer final : public Analyzer {
 public:
  RuleAnalyzer();
  explicit RuleAnalyzer(Lexicons lexicons);

  AnalyzedDocument analyze(const corpus::RawDocument& doc) const override;

  std::vector<SentenceSpan> segment_sentences(std::u32string_view body) const;
  std::vector<EntitySpan> extract_entities(std::u32string_view body) const;
  std::vector<EntitySpan> extract_entities(std::u32string_view body,
                                           const std::vector<SentenceSpan>& sentences) const;
  std::vector<std::size_t> find_prepositions(std::u32string_view sentence) const;

  const Lexicons& lexicons() const noexcept { return lex_; }

 private:
  bool protected_period(std::u32string_view body, std::size_t start, std::size_t dot) const;
  void sentence_entities(std::u32string_view body, const SentenceSpan& s, std::vector<EntitySpan>& out) const;

  Lexicons lex_;
};

// Convenience wrappers over a RuleAnalyzer with the built-in lexicons.
std::vector<SentenceSpan> segment_sentences(std::string_view body);
std::vector<EntitySpan> extract_entities(std::string_view body);
std::vector<std::size_t> find_prepositions(std::string_view sentence);

}  // namespace absorb::analysis
