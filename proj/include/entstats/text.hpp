#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace entstats {

// Token bag: token -> count. std::map keeps iteration deterministic.
using TokenBag = std::map<std::string, std::int64_t>;

// Lowercase, split on whitespace and punctuation boundaries, no stemming.
// Bytes >= 0x80 are kept as-is so UTF-8 content passes through.
std::vector<std::string> tokenize(std::string_view raw);

// ASCII lowercase of a single pre-split token.
std::string lowercase(std::string_view token);

TokenBag make_bag(const std::vector<std::string>& tokens);

// Space-joined; inverse of splitting a normalized surface form.
std::string join_tokens(const std::vector<std::string>& tokens);
std::vector<std::string> split_tokens(std::string_view joined);

// Sorted, counts expanded; make_bag(bag_to_tokens(b)) == b.
std::vector<std::string> bag_to_tokens(const TokenBag& bag);

} // namespace entstats
