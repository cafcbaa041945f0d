#pragma once

#include <optional>
#include <string>
#include <vector>

namespace scs {

enum class ScamKind { ponzi, honeypot, phishing, other };

std::string to_string(ScamKind kind);
ScamKind scam_kind_from_string(const std::string& name);

struct ContractRecord {
    std::string address;       // 40 lowercase hex chars, no 0x prefix
    std::string bytecode_hex;  // canonical hex, may be empty
    std::optional<int> label;  // 0 benign, 1 scam
    std::optional<ScamKind> scam_kind;

    bool operator==(const ContractRecord&) const = default;
};

// Immutable after load; addresses unique. Labeled records drive training and
// evaluation.
struct Dataset {
    std::vector<ContractRecord> records;
    std::string provenance;  // single-line free text

    bool operator==(const Dataset&) const = default;
};

// On-disk format: UTF-8 lines, '#' comments, one record per line as
//   address<TAB>bytecode_hex<TAB>label<TAB>scam_kind
// with "-" for an absent label or kind. The provenance note round-trips
// through a "# provenance: ..." comment.
Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& ds, const std::string& path);

// Validates one record against the type invariants; throws on violation.
void validate_record(const ContractRecord& rec);

}  // namespace scs
