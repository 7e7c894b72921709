#include "ekg/error.hpp"

namespace ekg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io: return "IoError";
    case ErrorCode::Parse: return "ParseError";
    case ErrorCode::FrozenGraph: return "FrozenGraph";
    case ErrorCode::UnknownPrefix: return "UnknownPrefix";
    case ErrorCode::UnregisteredPrefix: return "UnregisteredPrefix";
    case ErrorCode::UnboundVariable: return "UnboundVariable";
    case ErrorCode::UnsupportedForm: return "UnsupportedForm";
    case ErrorCode::Type: return "TypeError";
    case ErrorCode::RaggedRow: return "RaggedRow";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::IncompleteSchema: return "IncompleteSchema";
    case ErrorCode::InvalidIndex: return "InvalidIndex";
    case ErrorCode::DuplicatePath: return "DuplicatePath";
    case ErrorCode::UnknownConcept: return "UnknownConcept";
    case ErrorCode::UnknownFeature: return "UnknownFeature";
    case ErrorCode::UncompilableExpr: return "UncompilableExpr";
    case ErrorCode::Config: return "ConfigError";
    case ErrorCode::Internal: return "InternalError";
  }
  return "Unknown";
}

}  // namespace ekg
