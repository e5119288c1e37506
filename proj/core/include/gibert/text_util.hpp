#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace gibert {

/// ASCII lowercase; other bytes pass through unchanged.
std::string to_lower(std::string_view text);

std::string_view trim(std::string_view text);

std::vector<std::string_view> split(std::string_view text, char sep);

/// Lowercases, splits on whitespace, and emits every ASCII punctuation
/// character as its own token. Shared by tokenization, lexicon partitioning,
/// and lexical overlap so all three agree on what a token is.
std::vector<std::string> pre_tokenize(std::string_view text);

}  // namespace gibert
