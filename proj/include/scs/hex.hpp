#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace scs {

// A bytecode split into 2-hex-char byte tokens, e.g. {"60","80","60","40","52"}.
using TokenSequence = std::vector<std::string>;

// Canonical form: lowercase [0-9a-f], even length, no prefix, no whitespace.
// Whitespace anywhere in the input is dropped (explorer copy-paste wraps lines),
// a single leading "0x"/"0X" is stripped. Throws NonHexCharacter with the
// offset of the offending character in the original input, or OddLength.
std::string normalize_hex(const std::string& raw);

bool is_canonical_hex(const std::string& s);

// Splits canonical hex into consecutive byte tokens. Concatenating the tokens
// reproduces the input exactly. Throws EmptyInput on "".
TokenSequence tokenize(const std::string& canonical_hex);

// Byte value of a single 2-char token.
std::uint8_t token_byte(const std::string& token);

// Addresses: 20 bytes, stored as 40 lowercase hex chars without prefix.
bool is_address(const std::string& s);
std::string normalize_address(const std::string& raw);

}  // namespace scs
