#pragma once

// Line/word scanner shared by the canonical text parsers.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "regretforge/errors.hpp"

namespace regretforge::detail {

struct Word {
  std::string text;
  std::size_t column = 1;
  bool quoted = false;
};

class LineReader {
 public:
  explicit LineReader(std::string_view src) : src_(src) {}

  /// Advances to the next non-empty, non-comment line. Returns false at end of input.
  bool next();

  std::size_t line_no() const { return line_no_; }
  const std::vector<Word>& words() const { return words_; }

  [[noreturn]] void fail(const std::string& what, std::size_t column = 1) const {
    throw ParseError(what, line_no_, column);
  }
  /// Error positioned just past the last consumed character (used for premature end of input).
  [[noreturn]] void fail_eof(const std::string& what) const {
    throw ParseError(what, line_no_ + 1, 1);
  }

  const Word& word(std::size_t i) const {
    if (i >= words_.size()) fail("expected more fields", last_column());
    return words_[i];
  }
  void expect_count(std::size_t n) const {
    if (words_.size() != n) {
      fail("expected " + std::to_string(n) + " fields, found " + std::to_string(words_.size()),
           words_.size() > n ? words_[n].column : last_column());
    }
  }
  void expect_keyword(std::string_view kw) const {
    if (words_.empty() || words_[0].quoted || words_[0].text != kw) {
      fail("expected '" + std::string(kw) + "'", words_.empty() ? 1 : words_[0].column);
    }
  }
  long long integer(std::size_t i) const;

 private:
  std::size_t last_column() const { return current_.size() + 1; }
  void split();

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
  std::string_view current_;
  std::vector<Word> words_;
};

inline bool LineReader::next() {
  while (pos_ < src_.size()) {
    const auto end = src_.find('\n', pos_);
    const auto stop = end == std::string_view::npos ? src_.size() : end;
    current_ = src_.substr(pos_, stop - pos_);
    if (!current_.empty() && current_.back() == '\r') current_.remove_suffix(1);
    pos_ = stop + 1;
    ++line_no_;
    split();
    if (!words_.empty() && !(words_[0].text.starts_with('#') && !words_[0].quoted)) return true;
  }
  words_.clear();
  return false;
}

inline void LineReader::split() {
  words_.clear();
  std::size_t i = 0;
  while (i < current_.size()) {
    if (current_[i] == ' ' || current_[i] == '\t') {
      ++i;
      continue;
    }
    Word w;
    w.column = i + 1;
    if (current_[i] == '"') {
      w.quoted = true;
      ++i;
      bool closed = false;
      while (i < current_.size()) {
        const char c = current_[i];
        if (c == '\\') {
          if (i + 1 >= current_.size()) break;
          const char e = current_[i + 1];
          if (e == 'n') {
            w.text.push_back('\n');
          } else if (e == '"' || e == '\\') {
            w.text.push_back(e);
          } else {
            fail("bad escape", i + 1);
          }
          i += 2;
        } else if (c == '"') {
          closed = true;
          ++i;
          break;
        } else {
          w.text.push_back(c);
          ++i;
        }
      }
      if (!closed) fail("unterminated string", w.column);
    } else {
      while (i < current_.size() && current_[i] != ' ' && current_[i] != '\t') w.text.push_back(current_[i++]);
    }
    words_.push_back(std::move(w));
  }
}

inline long long LineReader::integer(std::size_t i) const {
  const auto& w = word(i);
  if (w.quoted || w.text.empty()) fail("expected integer", w.column);
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(w.text, &used);
  } catch (const std::exception&) {
    fail("expected integer", w.column);
  }
  if (used != w.text.size()) fail("expected integer", w.column);
  return v;
}

}  // namespace regretforge::detail
