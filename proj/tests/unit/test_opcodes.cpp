#include <doctest.h>

#include "scs/opcodes.hpp"

using namespace scs;

TEST_CASE("opcode_name canonical entries") {
    CHECK(opcode_name(0x11) == "GT");
    CHECK(opcode_name(0x00) == "STOP");
    CHECK(opcode_name(0x0c) == "INVALID");  // unassigned
    CHECK(opcode_name(0x60) == "PUSH1");
    CHECK(opcode_name(0x7f) == "PUSH32");
    CHECK(opcode_name(0x80) == "DUP1");
    CHECK(opcode_name(0x5b) == "JUMPDEST");
    CHECK(opcode_name(0xf1) == "CALL");
    CHECK(opcode_name(0xff) == "SELFDESTRUCT");
    CHECK(opcode_name(0xef) == "INVALID");
}

TEST_CASE("opcode_name is total on 0..255") {
    for (int b = 0; b < 256; ++b) {
        CHECK_FALSE(opcode_name(static_cast<std::uint8_t>(b)).empty());
    }
}

TEST_CASE("mnemonic_render") {
    CHECK(mnemonic_render("1157") == "GT JUMPI");
    CHECK(mnemonic_render("6080") == "PUSH1 DUP1");
    CHECK(mnemonic_render("00") == "STOP");
}
