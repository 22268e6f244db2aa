#pragma once

#include <stdexcept>
#include <string>

namespace seqdevid {

enum class Errc {
  BadMagic,
  TruncatedHeader,
  MissingFile,
  DuplicateSession,
  EmptySession,
  UnknownExtractor,
  NotFitted,
  SchemaMismatch,
  ShapeMismatch,
  LabelOutOfRange,
  StaleCache,
  KernelTooWide,
  InvalidSpec,
  ClassTooSmall,
  EmptyTestSet,
  DomainError,
  IncompleteRuns,
  NonFiniteLoss,
  BadConfig,
  Io,
};

inline const char* errc_name(Errc e) {
  switch (e) {
    case Errc::BadMagic: return "BadMagic";
    case Errc::TruncatedHeader: return "TruncatedHeader";
    case Errc::MissingFile: return "MissingFile";
    case Errc::DuplicateSession: return "DuplicateSession";
    case Errc::EmptySession: return "EmptySession";
    case Errc::UnknownExtractor: return "UnknownExtractor";
    case Errc::NotFitted: return "NotFitted";
    case Errc::SchemaMismatch: return "SchemaMismatch";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::LabelOutOfRange: return "LabelOutOfRange";
    case Errc::StaleCache: return "StaleCache";
    case Errc::KernelTooWide: return "KernelTooWide";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::ClassTooSmall: return "ClassTooSmall";
    case Errc::EmptyTestSet: return "EmptyTestSet";
    case Errc::DomainError: return "DomainError";
    case Errc::IncompleteRuns: return "IncompleteRuns";
    case Errc::NonFiniteLoss: return "NonFiniteLoss";
    case Errc::BadConfig: return "BadConfig";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

  /// Input-data problems (bad files, schemas, labels) as opposed to
  /// failures of the computation itself.
  bool is_data_error() const noexcept {
    switch (code_) {
      case Errc::BadMagic:
      case Errc::TruncatedHeader:
      case Errc::MissingFile:
      case Errc::DuplicateSession:
      case Errc::EmptySession:
      case Errc::UnknownExtractor:
      case Errc::SchemaMismatch:
      case Errc::LabelOutOfRange:
      case Errc::ClassTooSmall:
      case Errc::EmptyTestSet:
      case Errc::Io:
        return true;
      default:
        return false;
    }
  }

 private:
  Errc code_;
};

}  // namespace seqdevid
