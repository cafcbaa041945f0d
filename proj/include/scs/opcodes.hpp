#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace scs {

// Yellow-paper mnemonic for a byte value, "INVALID" for unassigned opcodes.
// Total and pure on 0..255.
std::string_view opcode_name(std::uint8_t byte);

// Space-separated mnemonics for an even-length hex fragment, e.g.
// "1157" -> "GT JUMPI". Used to render n-grams in detection reports.
std::string mnemonic_render(const std::string& hex_fragment);

}  // namespace scs
