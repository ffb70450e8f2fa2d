#include "absorb/text.hpp"

#include "absorb/error.hpp"

namespace absorb::text {

namespace {

bool in(char32_t c, char32_t lo, char32_t hi) noexcept { return c >= lo && c <= hi; }

// Latin Extended-A alternates case by parity, with the parity flipping in
// 0x139..0x148 and 0x179..0x17E.
bool latin_ext_a_upper(char32_t c) noexcept {
  if (in(c, 0x100, 0x137)) return c % 2 == 0;
  if (in(c, 0x139, 0x148)) return c % 2 == 1;
  if (in(c, 0x14A, 0x177)) return c % 2 == 0;
  if (c == 0x178) return true;
  if (in(c, 0x179, 0x17E)) return c % 2 == 1;
  return false;
}

bool latin_ext_a_lower(char32_t c) noexcept {
  if (in(c, 0x100, 0x137)) return c % 2 == 1;
  if (in(c, 0x139, 0x148)) return c % 2 == 0;
  if (in(c, 0x14A, 0x177)) return c % 2 == 1;
  if (in(c, 0x179, 0x17E)) return c % 2 == 0;
  return c == 0x138 || c == 0x17F;
}

}  // namespace

std::u32string decode(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    unsigned char b0 = static_cast<unsigned char>(s[i]);
    char32_t cp = 0;
    std::size_t len = 0;
    char32_t min = 0;
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      len = 2;
      min = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      len = 3;
      min = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      len = 4;
      min = 0x10000;
    } else {
      throw_data("invalid UTF-8 lead byte at offset " + std::to_string(i));
    }
    if (i + len > s.size()) throw_data("truncated UTF-8 sequence at offset " + std::to_string(i));
    for (std::size_t k = 1; k < len; ++k) {
      unsigned char b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) throw_data("invalid UTF-8 continuation at offset " + std::to_string(i + k));
      cp = (cp << 6) | (b & 0x3F);
    }
    if (cp < min || cp > 0x10FFFF || in(cp, 0xD800, 0xDFFF)) {
      throw_data("invalid UTF-8 scalar at offset " + std::to_string(i));
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string encode(char32_t c) {
  std::string out;
  if (c < 0x80) {
    out.push_back(static_cast<char>(c));
  } else if (c < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (c >> 6)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else if (c < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (c >> 12)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (c >> 18)));
    out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  }
  return out;
}

std::string encode(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t c : s) out += encode(c);
  return out;
}

bool valid_utf8(std::string_view s) noexcept {
  try {
    (void)decode(s);
    return true;
  } catch (const Error&) {
    return false;
  }
}

std::size_t scalar_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char b : s) {
    if ((b & 0xC0) != 0x80) ++n;
  }
  return n;
}

bool is_space(char32_t c) noexcept {
  return in(c, 0x09, 0x0D) || c == 0x20 || c == 0x85 || c == 0xA0 || c == 0x1680 ||
         in(c, 0x2000, 0x200A) || c == 0x2028 || c == 0x2029 || c == 0x202F || c == 0x205F ||
         c == 0x3000;
}

bool is_digit(char32_t c) noexcept { return in(c, U'0', U'9'); }

bool is_letter(char32_t c) noexcept {
  if (in(c, U'a', U'z') || in(c, U'A', U'Z')) return true;
  if (c < 0xAA) return false;
  if (c == 0xAA || c == 0xB5 || c == 0xBA) return true;
  if (in(c, 0xC0, 0xFF)) return c != 0xD7 && c != 0xF7;
  if (in(c, 0x100, 0x2AF)) return true;    // Latin extended A/B, IPA
  if (in(c, 0x300, 0x36F)) return true;    // combining marks stay inside words
  if (in(c, 0x370, 0x3FF)) return c != 0x37E && c != 0x387;
  if (in(c, 0x400, 0x52F)) return true;    // Cyrillic
  if (in(c, 0x531, 0x587)) return true;    // Armenian
  if (in(c, 0x5D0, 0x5EA)) return true;    // Hebrew
  if (in(c, 0x620, 0x64A)) return true;    // Arabic
  if (in(c, 0x900, 0xDFF)) return true;    // Indic scripts
  if (in(c, 0xE00, 0xE7F)) return true;    // Thai
  if (in(c, 0x1E00, 0x1FFF)) return true;  // Latin/Greek extended
  if (in(c, 0x3040, 0x30FF)) return true;  // kana
  if (in(c, 0x3400, 0x4DBF) || in(c, 0x4E00, 0x9FFF)) return true;
  if (in(c, 0xAC00, 0xD7A3)) return true;  // Hangul
  if (in(c, 0xF900, 0xFAFF)) return true;
  if (in(c, 0x20000, 0x2FFFF)) return true;
  return false;
}

bool is_upper(char32_t c) noexcept {
  if (in(c, U'A', U'Z')) return true;
  if (c < 0xC0) return false;
  if (in(c, 0xC0, 0xDE)) return c != 0xD7;
  if (in(c, 0x100, 0x17F)) return latin_ext_a_upper(c);
  if (in(c, 0x391, 0x3A9)) return c != 0x3A2;
  if (in(c, 0x400, 0x42F)) return true;
  if (in(c, 0x1E00, 0x1EFF)) return c % 2 == 0;
  return false;
}

bool is_lower(char32_t c) noexcept {
  if (in(c, U'a', U'z')) return true;
  if (c < 0xDF) return c == 0xB5;
  if (in(c, 0xDF, 0xFF)) return c != 0xF7;
  if (in(c, 0x100, 0x17F)) return latin_ext_a_lower(c);
  if (in(c, 0x3AC, 0x3CE)) return true;
  if (in(c, 0x430, 0x45F)) return true;
  if (in(c, 0x1E00, 0x1EFF)) return c % 2 == 1;
  return false;
}

char32_t to_lower(char32_t c) noexcept {
  if (in(c, U'A', U'Z')) return c + 32;
  if (c < 0xC0) return c;
  if (in(c, 0xC0, 0xDE) && c != 0xD7) return c + 32;
  if (c == 0x178) return 0xFF;
  if (in(c, 0x100, 0x17F) && latin_ext_a_upper(c)) return c + 1;
  if (in(c, 0x391, 0x3A9) && c != 0x3A2) return c + 32;
  if (in(c, 0x410, 0x42F)) return c + 32;
  if (in(c, 0x400, 0x40F)) return c + 80;
  if (in(c, 0x1E00, 0x1EFF) && c % 2 == 0) return c + 1;
  return c;
}

std::u32string to_lower(std::u32string_view s) {
  std::u32string out(s);
  for (auto& c : out) c = to_lower(c);
  return out;
}

std::string to_lower(std::string_view utf8) { return encode(to_lower(decode(utf8))); }

std::string_view trim(std::string_view s) noexcept {
  auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

std::u32string_view trim(std::u32string_view s) noexcept {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string normalize_whitespace(std::string_view utf8) {
  std::u32string in = decode(utf8);
  std::u32string out;
  out.reserve(in.size());
  std::u32string line;
  auto flush_line = [&] {
    std::u32string_view t = trim(std::u32string_view(line));
    out.append(t);
    line.clear();
  };
  bool pending_space = false;
  for (std::size_t i = 0; i < in.size(); ++i) {
    char32_t c = in[i];
    if (c == U'\r' && i + 1 < in.size() && in[i + 1] == U'\n') continue;
    if (c == U'\n' || c == U'\r') {
      pending_space = false;
      flush_line();
      out.push_back(U'\n');
      continue;
    }
    if (is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !line.empty()) line.push_back(U' ');
    pending_space = false;
    line.push_back(c);
  }
  flush_line();
  return encode(trim(std::u32string_view(out)));
}

std::string first_paragraph(std::string_view article) {
  std::size_t pos = 0;
  bool seen_content = false;
  std::size_t start = std::string_view::npos;
  while (pos <= article.size()) {
    std::size_t nl = article.find('\n', pos);
    std::size_t end = nl == std::string_view::npos ? article.size() : nl;
    std::string_view line = article.substr(pos, end - pos);
    bool blank = trim(line).empty();
    if (!blank && !seen_content) {
      seen_content = true;
      start = pos;
    } else if (blank && seen_content) {
      std::string_view para = article.substr(start, pos - start);
      while (!para.empty() && (para.back() == '\n' || para.back() == '\r')) para.remove_suffix(1);
      return std::string(para);
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  if (!seen_content) return std::string(article);
  std::string_view para = article.substr(start);
  while (!para.empty() && (para.back() == '\n' || para.back() == '\r')) para.remove_suffix(1);
  return std::string(para);
}

std::vector<std::string> tokenize_words(std::string_view utf8) {
  std::vector<std::string> out;
  std::u32string cur;
  for (char32_t c : decode(utf8)) {
    if (is_alnum(c)) {
      cur.push_back(to_lower(c));
    } else if (!cur.empty()) {
      out.push_back(encode(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(encode(cur));
  return out;
}

std::vector<std::string> split_whitespace(std::string_view utf8) {
  std::vector<std::string> out;
  std::u32string cur;
  for (char32_t c : decode(utf8)) {
    if (is_space(c)) {
      if (!cur.empty()) out.push_back(encode(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(encode(cur));
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace absorb::text
