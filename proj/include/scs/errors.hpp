#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace scs {

// Exit-code buckets used by the CLI: 1 usage, 2 data, 3 runtime.
enum class ErrorKind { usage = 1, data = 2, runtime = 3 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

struct NonHexCharacter : Error {
    NonHexCharacter(std::size_t off, char c)
        : Error(ErrorKind::data,
                "non-hex character '" + std::string(1, c) + "' at offset " + std::to_string(off)),
          offset(off),
          ch(c) {}
    std::size_t offset;
    char ch;
};

struct OddLength : Error {
    explicit OddLength(std::size_t len)
        : Error(ErrorKind::data, "hex string has odd length " + std::to_string(len)) {}
};

struct EmptyInput : Error {
    EmptyInput() : Error(ErrorKind::data, "empty input") {}
};

struct InvalidAddress : Error {
    explicit InvalidAddress(const std::string& why)
        : Error(ErrorKind::usage, "invalid address: " + why) {}
};

struct ParseError : Error {
    ParseError(std::size_t line_no, const std::string& why)
        : Error(ErrorKind::data, "parse error at line " + std::to_string(line_no) + ": " + why),
          line(line_no) {}
    std::size_t line;
};

struct DuplicateAddress : Error {
    explicit DuplicateAddress(const std::string& addr)
        : Error(ErrorKind::data, "duplicate address " + addr) {}
};

struct NetworkError : Error {
    explicit NetworkError(const std::string& why)
        : Error(ErrorKind::runtime, "network error: " + why) {}
};

struct NotAContract : Error {
    explicit NotAContract(const std::string& addr)
        : Error(ErrorKind::data, "no code at address " + addr + " (externally owned account?)") {}
};

struct MalformedResponse : Error {
    explicit MalformedResponse(const std::string& why)
        : Error(ErrorKind::data, "malformed endpoint response: " + why) {}
};

struct ShapeMismatch : Error {
    explicit ShapeMismatch(const std::string& why)
        : Error(ErrorKind::runtime, "shape mismatch: " + why) {}
};

struct EmptySequence : Error {
    EmptySequence() : Error(ErrorKind::data, "encoded sequence has no real positions") {}
};

struct UnlabeledRecord : Error {
    explicit UnlabeledRecord(const std::string& addr)
        : Error(ErrorKind::data, "record " + addr + " has no label") {}
};

struct MissingClass : Error {
    explicit MissingClass(int label)
        : Error(ErrorKind::data, "no records with label " + std::to_string(label)) {}
};

struct DivergenceDetected : Error {
    explicit DivergenceDetected(const std::string& where)
        : Error(ErrorKind::runtime, "non-finite loss during training: " + where) {}
};

struct FormatVersionMismatch : Error {
    FormatVersionMismatch(unsigned got, unsigned want)
        : Error(ErrorKind::data, "format version " + std::to_string(got) + ", expected " +
                                     std::to_string(want)) {}
};

struct VocabHashMismatch : Error {
    VocabHashMismatch()
        : Error(ErrorKind::data, "checkpoint was trained with a different vocabulary") {}
};

struct CorruptFile : Error {
    explicit CorruptFile(const std::string& why)
        : Error(ErrorKind::data, "corrupt file: " + why) {}
};

}  // namespace scs
