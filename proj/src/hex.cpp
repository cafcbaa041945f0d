#include "scs/hex.hpp"

#include <cctype>

#include "scs/errors.hpp"

namespace scs {

namespace {

bool is_hex_digit(char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
}

char to_lower_ascii(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

bool is_space_ascii(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

// Shared by normalize_hex / normalize_address: drop whitespace, strip one
// leading 0x/0X, lowercase, validate hex digits. Offsets in errors refer to
// the original input string.
std::string clean_hex(const std::string& raw) {
    std::vector<std::pair<char, std::size_t>> kept;
    kept.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (!is_space_ascii(raw[i])) kept.emplace_back(raw[i], i);
    }
    std::size_t begin = 0;
    if (kept.size() >= 2 && kept[0].first == '0' &&
        (kept[1].first == 'x' || kept[1].first == 'X')) {
        begin = 2;
    }
    std::string out;
    out.reserve(kept.size() - begin);
    for (std::size_t i = begin; i < kept.size(); ++i) {
        char c = to_lower_ascii(kept[i].first);
        if (!is_hex_digit(c)) throw NonHexCharacter(kept[i].second, kept[i].first);
        out.push_back(c);
    }
    return out;
}

}  // namespace

std::string normalize_hex(const std::string& raw) {
    std::string out = clean_hex(raw);
    if (out.size() % 2 != 0) throw OddLength(out.size());
    return out;
}

bool is_canonical_hex(const std::string& s) {
    if (s.size() % 2 != 0) return false;
    for (char c : s) {
        if (!is_hex_digit(c)) return false;
    }
    return true;
}

TokenSequence tokenize(const std::string& canonical_hex) {
    if (canonical_hex.empty()) throw EmptyInput();
    if (canonical_hex.size() % 2 != 0) throw OddLength(canonical_hex.size());
    for (std::size_t i = 0; i < canonical_hex.size(); ++i) {
        if (!is_hex_digit(canonical_hex[i])) throw NonHexCharacter(i, canonical_hex[i]);
    }
    TokenSequence tokens;
    tokens.reserve(canonical_hex.size() / 2);
    for (std::size_t i = 0; i + 1 < canonical_hex.size(); i += 2) {
        tokens.push_back(canonical_hex.substr(i, 2));
    }
    return tokens;
}

std::uint8_t token_byte(const std::string& token) {
    if (token.size() != 2 || !is_hex_digit(token[0]) || !is_hex_digit(token[1])) {
        throw NonHexCharacter(0, token.empty() ? '?' : token[0]);
    }
    auto nibble = [](char c) -> unsigned {
        return c <= '9' ? static_cast<unsigned>(c - '0') : static_cast<unsigned>(c - 'a' + 10);
    };
    return static_cast<std::uint8_t>(nibble(token[0]) * 16 + nibble(token[1]));
}

bool is_address(const std::string& s) {
    if (s.size() != 40) return false;
    for (char c : s) {
        if (!is_hex_digit(c)) return false;
    }
    return true;
}

std::string normalize_address(const std::string& raw) {
    std::string out;
    try {
        out = clean_hex(raw);
    } catch (const NonHexCharacter& e) {
        throw InvalidAddress(e.what());
    }
    if (out.size() != 40) {
        throw InvalidAddress("expected 40 hex chars, got " + std::to_string(out.size()));
    }
    return out;
}

}  // namespace scs
