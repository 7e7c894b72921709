#include "ekg/text/scanner.hpp"

#include <cctype>
#include <charconv>

namespace ekg::text {

char Scanner::advance() {
  if (eof()) return '\0';
  char c = input_[offset_++];
  if (c == '\n') {
    ++pos_.line;
    pos_.column = 1;
  } else {
    ++pos_.column;
  }
  return c;
}

void Scanner::skip_space() {
  while (!eof()) {
    char c = peek();
    if (c == '#') {
      while (!eof() && peek() != '\n') advance();
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      advance();
    } else {
      return;
    }
  }
}

bool Scanner::accept(std::string_view literal) {
  if (rest().substr(0, literal.size()) != literal) return false;
  for (std::size_t i = 0; i < literal.size(); ++i) advance();
  return true;
}

bool Scanner::accept_keyword(std::string_view keyword) {
  auto r = rest();
  if (r.size() < keyword.size()) return false;
  for (std::size_t i = 0; i < keyword.size(); ++i) {
    if (std::toupper(static_cast<unsigned char>(r[i])) !=
        std::toupper(static_cast<unsigned char>(keyword[i]))) {
      return false;
    }
  }
  if (r.size() > keyword.size() && is_name_char(r[keyword.size()])) return false;
  for (std::size_t i = 0; i < keyword.size(); ++i) advance();
  return true;
}

void Scanner::expect(std::string_view literal, std::string_view what) {
  if (!accept(literal)) {
    fail("expected " + std::string(what));
  }
}

void Scanner::fail(const std::string& message) const { fail_at(pos_, message); }

void Scanner::fail_at(SourcePos at, const std::string& message) const {
  throw ParseError(at, message);
}

bool is_name_start(char c) noexcept {
  return std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_';
}

bool is_name_char(char c) noexcept {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-';
}

std::string read_iri_ref(Scanner& s) {
  SourcePos start = s.pos();
  s.expect("<", "'<'");
  std::string out;
  while (!s.eof() && s.peek() != '>') {
    char c = s.advance();
    if (std::isspace(static_cast<unsigned char>(c)) || c == '<') {
      s.fail_at(start, "malformed IRI reference");
    }
    out += c;
  }
  if (s.eof()) s.fail_at(start, "unterminated IRI reference");
  s.advance();
  if (out.empty()) s.fail_at(start, "empty IRI reference");
  return out;
}

std::string read_string_literal(Scanner& s) {
  SourcePos start = s.pos();
  s.expect("\"", "'\"'");
  std::string out;
  while (true) {
    if (s.eof() || s.peek() == '\n') s.fail_at(start, "unterminated string literal");
    char c = s.advance();
    if (c == '"') break;
    if (c == '\\') {
      char e = s.advance();
      switch (e) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: s.fail("unsupported escape sequence '\\" + std::string(1, e) + "'");
      }
      continue;
    }
    out += c;
  }
  if (s.peek() == '@' || (s.peek() == '^' && s.peek(1) == '^')) {
    s.fail("language tags and datatype IRIs are not supported");
  }
  return out;
}

std::int64_t read_integer(Scanner& s) {
  SourcePos start = s.pos();
  std::string digits;
  if (s.peek() == '+' || s.peek() == '-') digits += s.advance();
  while (std::isdigit(static_cast<unsigned char>(s.peek()))) digits += s.advance();
  if (s.peek() == '.' && std::isdigit(static_cast<unsigned char>(s.peek(1)))) {
    s.fail_at(start, "decimal literals are not supported");
  }
  std::string_view view = digits;
  if (!view.empty() && view.front() == '+') view.remove_prefix(1);
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(view.data(), view.data() + view.size(), value);
  if (ec != std::errc{} || ptr != view.data() + view.size() || view.empty()) {
    s.fail_at(start, "malformed integer '" + digits + "'");
  }
  return value;
}

std::pair<std::string, std::string> read_prefixed_name(Scanner& s) {
  SourcePos start = s.pos();
  std::string prefix;
  if (is_name_start(s.peek())) {
    while (is_name_char(s.peek())) prefix += s.advance();
  }
  if (s.peek() != ':') s.fail_at(start, "expected prefixed name");
  s.advance();
  std::string local;
  // Dots are allowed inside a local name but never as its last character, so
  // a statement terminator glued to the name is left for the caller.
  while (is_name_char(s.peek()) ||
         (s.peek() == '.' && is_name_char(s.peek(1)) && !local.empty())) {
    local += s.advance();
  }
  return {prefix, local};
}

bool is_valid_local_name(std::string_view local) noexcept {
  if (local.empty()) return true;
  if (local.front() == '.' || local.front() == '-' || local.back() == '.') return false;
  for (char c : local) {
    if (!is_name_char(c) && c != '.') return false;
  }
  return true;
}

}  // namespace ekg::text
