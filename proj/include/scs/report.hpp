#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scs/hex.hpp"
#include "scs/model.hpp"
#include "scs/ngram.hpp"

namespace scs {

struct TopFeature {
    std::string ngram;      // hex form, e.g. "1157"
    std::string mnemonics;  // "GT JUMPI"
    double weight = 0.0;    // attention weight, max over occurrences
};

// The detection report emitted for one contract.
struct ScamReport {
    std::optional<std::string> address;
    double probability = 0.0;
    int label = 0;  // 1 = scam
    std::string model_id;
    std::vector<TopFeature> top_features;  // descending by weight
};

// Runs the classifier over one token sequence and assembles the report.
// top_k limits the feature list; models without attention produce an empty
// feature list. N-grams are aggregated by their maximum attention weight
// across occurrences.
ScamReport make_report(const ModelParams& params, const ModelConfig& cfg,
                       const NgramVocabulary& vocab, const TokenSequence& tokens,
                       std::optional<std::string> address, const std::string& model_id,
                       std::size_t top_k = 10);

std::string report_json(const ScamReport& report);
std::string report_pretty(const ScamReport& report);

// FNV-1a of a file's bytes, hex-encoded; used as the checkpoint identifier.
std::string file_fnv1a_hex(const std::string& path);

}  // namespace scs
