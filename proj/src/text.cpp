#include "entstats/text.hpp"

#include <cctype>

namespace entstats {

namespace {

bool is_token_char(unsigned char c) {
    return std::isalnum(c) != 0 || c >= 0x80;
}

} // namespace

std::vector<std::string> tokenize(std::string_view raw) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : raw) {
        if (is_token_char(c)) {
            cur.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::string lowercase(std::string_view token) {
    std::string out;
    out.reserve(token.size());
    for (unsigned char c : token) {
        out.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
    }
    return out;
}

TokenBag make_bag(const std::vector<std::string>& tokens) {
    TokenBag bag;
    for (const auto& t : tokens) ++bag[t];
    return bag;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

std::vector<std::string> split_tokens(std::string_view joined) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : joined) {
        if (c == ' ') {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::vector<std::string> bag_to_tokens(const TokenBag& bag) {
    std::vector<std::string> out;
    for (const auto& [token, count] : bag) {
        for (std::int64_t i = 0; i < count; ++i) out.push_back(token);
    }
    return out;
}

} // namespace entstats
