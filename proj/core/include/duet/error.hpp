#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace duet {

enum class ErrorCode {
  InvalidArgument,
  UnsupportedRole,
  AuthMissing,
  ProviderError,
  RootMissing,
  UnreadableFile,
  MissingChapter,
  EmptyModelList,
  DuplicateModelId,
  SessionActive,
  PreconditionFailed,
  AlreadyActive,
  NotActive,
  UnknownModel,
  ModelBusy,
  UnknownSession,
  CorruptRecord,
  NonPositiveMinutes,
  DuplicateRecord,
  IncompletePairs,
  EmptyStore,
  BadConfig,
};

/// Stable snake_case identifier used on the wire and in logs.
std::string_view error_code_name(ErrorCode code) noexcept;

/// Every failure raised by duet carries a machine-readable code. `details`
/// holds auxiliary strings (suggested aliases, missing cells, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::vector<std::string> details = {})
      : std::runtime_error(message), code_(code), details_(std::move(details)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  ErrorCode code_;
  std::vector<std::string> details_;
};

}  // namespace duet
