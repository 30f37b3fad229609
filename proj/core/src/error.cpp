#include "duet/error.hpp"

namespace duet {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::UnsupportedRole: return "unsupported_role";
    case ErrorCode::AuthMissing: return "auth_missing";
    case ErrorCode::ProviderError: return "provider_error";
    case ErrorCode::RootMissing: return "root_missing";
    case ErrorCode::UnreadableFile: return "unreadable_file";
    case ErrorCode::MissingChapter: return "missing_chapter";
    case ErrorCode::EmptyModelList: return "empty_model_list";
    case ErrorCode::DuplicateModelId: return "duplicate_model_id";
    case ErrorCode::SessionActive: return "session_active";
    case ErrorCode::PreconditionFailed: return "precondition_failed";
    case ErrorCode::AlreadyActive: return "already_active";
    case ErrorCode::NotActive: return "not_active";
    case ErrorCode::UnknownModel: return "unknown_model";
    case ErrorCode::ModelBusy: return "model_busy";
    case ErrorCode::UnknownSession: return "unknown_session";
    case ErrorCode::CorruptRecord: return "corrupt_record";
    case ErrorCode::NonPositiveMinutes: return "non_positive_minutes";
    case ErrorCode::DuplicateRecord: return "duplicate_record";
    case ErrorCode::IncompletePairs: return "incomplete_pairs";
    case ErrorCode::EmptyStore: return "empty_store";
    case ErrorCode::BadConfig: return "bad_config";
  }
  return "unknown";
}

}  // namespace duet
