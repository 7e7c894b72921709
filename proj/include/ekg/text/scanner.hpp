#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "ekg/error.hpp"

namespace ekg::text {

// Character cursor with line/column tracking shared by the hand-written
// parsers (Turtle, queries, rules, taxonomy).
class Scanner {
 public:
  explicit Scanner(std::string_view input) : input_(input) {}

  bool eof() const noexcept { return offset_ >= input_.size(); }
  char peek(std::size_t ahead = 0) const noexcept {
    return offset_ + ahead < input_.size() ? input_[offset_ + ahead] : '\0';
  }
  char advance();
  SourcePos pos() const noexcept { return pos_; }
  std::size_t offset() const noexcept { return offset_; }
  std::string_view rest() const noexcept { return input_.substr(offset_); }

  // Skips whitespace and `#` comments.
  void skip_space();

  // Consumes `literal` exactly if present.
  bool accept(std::string_view literal);
  // Consumes an ASCII keyword case-insensitively when it is not followed by
  // another identifier character.
  bool accept_keyword(std::string_view keyword);
  void expect(std::string_view literal, std::string_view what);

  [[noreturn]] void fail(const std::string& message) const;
  [[noreturn]] void fail_at(SourcePos at, const std::string& message) const;

 private:
  std::string_view input_;
  std::size_t offset_ = 0;
  SourcePos pos_{};
};

bool is_name_start(char c) noexcept;
bool is_name_char(char c) noexcept;

// Lexical pieces of the Turtle term grammar, reused by the query parser.
// Each expects the scanner positioned at the first character of the token.
std::string read_iri_ref(Scanner& s);                  // <...>
std::string read_string_literal(Scanner& s);           // "..."
std::int64_t read_integer(Scanner& s);                 // [+-]?[0-9]+
// prefix ':' local ; returns {prefix, local}. The prefix may be empty.
std::pair<std::string, std::string> read_prefixed_name(Scanner& s);

bool is_valid_local_name(std::string_view local) noexcept;

}  // namespace ekg::text
