#ifndef CBT_ERROR_HPP
#define CBT_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace cbt {

enum class ErrorCode {
  // corpus
  MalformedLine,
  MissingField,
  DuplicateId,
  TermNotInText,
  BadLabel,
  GoldMismatch,
  EmptyLabelList,
  InconsistentRaterCount,
  TooSmall,
  // ontology
  ConflictingMapping,
  UnresolvableLevel1,
  MalformedRow,
  TermUnmapped,
  // classifier
  EmptyCorpus,
  UntrainedModel,
  BackendUnavailable,
  ProtocolViolation,
  LengthMismatch,
  EmptyInput,
  // polarization
  NoOccurrence,
  TermNotFound,
  // augment
  IdenticalPredicate,
  UnparseableResponse,
  // pipeline
  ConstantInput,
  TooFewPoints,
  TooFewPermutations,
  NotAscending,
  SizeExceedsCorpus,
  UnwritablePath,
  // shared
  InvalidArgument,
  IoError,
  ConfigError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::TermNotInText: return "TermNotInText";
    case ErrorCode::BadLabel: return "BadLabel";
    case ErrorCode::GoldMismatch: return "GoldMismatch";
    case ErrorCode::EmptyLabelList: return "EmptyLabelList";
    case ErrorCode::InconsistentRaterCount: return "InconsistentRaterCount";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::ConflictingMapping: return "ConflictingMapping";
    case ErrorCode::UnresolvableLevel1: return "UnresolvableLevel1";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::TermUnmapped: return "TermUnmapped";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::UntrainedModel: return "UntrainedModel";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::ProtocolViolation: return "ProtocolViolation";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NoOccurrence: return "NoOccurrence";
    case ErrorCode::TermNotFound: return "TermNotFound";
    case ErrorCode::IdenticalPredicate: return "IdenticalPredicate";
    case ErrorCode::UnparseableResponse: return "UnparseableResponse";
    case ErrorCode::ConstantInput: return "ConstantInput";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::TooFewPermutations: return "TooFewPermutations";
    case ErrorCode::NotAscending: return "NotAscending";
    case ErrorCode::SizeExceedsCorpus: return "SizeExceedsCorpus";
    case ErrorCode::UnwritablePath: return "UnwritablePath";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Backend and provider failures are reported separately from data errors
/// so that callers (the CLI in particular) can map them to distinct exit codes.
inline bool is_backend_error(ErrorCode code) {
  return code == ErrorCode::BackendUnavailable ||
         code == ErrorCode::ProtocolViolation ||
         code == ErrorCode::UnparseableResponse;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(std::move(detail)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace cbt

#endif  // CBT_ERROR_HPP
