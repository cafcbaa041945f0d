#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "scs/hex.hpp"

namespace scs {

// Frozen map from n-gram strings (n concatenated byte tokens, 2n hex chars)
// to dense integer ids. Ids 0 and 1 are reserved for padding and for
// out-of-vocabulary n-grams; real entries start at 2.
class NgramVocabulary {
public:
    static constexpr std::uint32_t kPad = 0;
    static constexpr std::uint32_t kUnk = 1;

    NgramVocabulary() = default;
    NgramVocabulary(std::size_t n, std::vector<std::string> ordered_ngrams);

    std::size_t n() const { return n_; }
    std::size_t size() const { return ordered_.size() + 2; }

    // Id for an n-gram, kUnk when absent.
    std::uint32_t id_of(const std::string& ngram) const;

    // Inverse lookup for non-reserved ids; "<pad>"/"<unk>" for the reserved ones.
    const std::string& ngram_of(std::uint32_t id) const;

    // FNV-1a over the canonical serialization; ties checkpoints to the
    // vocabulary they were trained with.
    std::uint64_t hash() const;

    void save(const std::string& path) const;
    static NgramVocabulary load(const std::string& path);

private:
    std::size_t n_ = 0;
    std::vector<std::string> ordered_;  // index = id - 2
    std::unordered_map<std::string, std::uint32_t> ids_;
};

// Sliding window, stride 1: max(0, m-n+1) n-grams in input order.
std::vector<std::string> extract_ngrams(const TokenSequence& tokens, std::size_t n);

// Frequency-filtered vocabulary over a corpus. Entries are ordered by
// (frequency desc, lexicographic asc); max_entries, when set, caps the number
// of retained n-grams (reserved ids not counted). Deterministic, and
// invariant under permutation of the corpus.
NgramVocabulary build_vocab(const std::vector<TokenSequence>& corpus, std::size_t n,
                            std::size_t min_count = 1,
                            std::optional<std::size_t> max_entries = std::nullopt);

// Fixed-capacity integer encoding of one contract.
struct EncodedSequence {
    std::vector<std::uint32_t> ids;  // exactly max_len entries, PAD-padded
    std::size_t true_length = 0;     // n-gram count before truncation/padding
};

// Maps each extracted n-gram to its id (UNK when absent), keeps the first
// max_len ids, pads the tail with PAD.
EncodedSequence encode(const TokenSequence& tokens, const NgramVocabulary& vocab,
                       std::size_t max_len);

// Occurrence counts per vocabulary id; out-of-vocabulary n-grams aggregate
// under UNK, PAD never appears. Ordered map so iteration is deterministic.
std::map<std::uint32_t, std::uint32_t> count_vector(const TokenSequence& tokens,
                                                    const NgramVocabulary& vocab);

}  // namespace scs
