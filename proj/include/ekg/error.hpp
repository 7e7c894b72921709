#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ekg {

// Every failure the engine reports carries one of these codes. The CLI maps
// them onto exit codes, tests match on them.
enum class ErrorCode {
  Io,
  Parse,
  FrozenGraph,
  UnknownPrefix,
  UnregisteredPrefix,
  UnboundVariable,
  UnsupportedForm,
  Type,
  RaggedRow,
  SchemaMismatch,
  IncompleteSchema,
  InvalidIndex,
  DuplicatePath,
  UnknownConcept,
  UnknownFeature,
  UncompilableExpr,
  Config,
  Internal,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// 1-based position inside some text input.
struct SourcePos {
  std::size_t line = 1;
  std::size_t column = 1;
};

class ParseError : public Error {
 public:
  ParseError(SourcePos pos, const std::string& message,
             ErrorCode code = ErrorCode::Parse)
      : Error(code, format(pos, message)), pos_(pos) {}

  SourcePos pos() const noexcept { return pos_; }

 private:
  static std::string format(SourcePos pos, const std::string& message) {
    return std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " +
           message;
  }

  SourcePos pos_;
};

}  // namespace ekg
