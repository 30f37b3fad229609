#pragma once

#include <string>
#include <string_view>

namespace duet::text {

bool is_valid_utf8(std::string_view s) noexcept;

std::string_view trim(std::string_view s) noexcept;

/// Converts CRLF and lone CR line endings to LF.
std::string normalize_newlines(std::string_view s);

}  // namespace duet::text
