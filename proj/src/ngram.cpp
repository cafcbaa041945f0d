#include "scs/ngram.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "scs/errors.hpp"

namespace scs {

namespace {
const std::string kPadName = "<pad>";
const std::string kUnkName = "<unk>";
constexpr std::uint32_t kVocabFormatVersion = 1;
}  // namespace

NgramVocabulary::NgramVocabulary(std::size_t n, std::vector<std::string> ordered_ngrams)
    : n_(n), ordered_(std::move(ordered_ngrams)) {
    ids_.reserve(ordered_.size());
    for (std::size_t i = 0; i < ordered_.size(); ++i) {
        const std::string& g = ordered_[i];
        if (g.size() != 2 * n_ || !is_canonical_hex(g)) {
            throw CorruptFile("vocabulary entry '" + g + "' is not a " + std::to_string(n_) +
                              "-gram");
        }
        if (!ids_.emplace(g, static_cast<std::uint32_t>(i + 2)).second) {
            throw CorruptFile("duplicate vocabulary entry '" + g + "'");
        }
    }
}

std::uint32_t NgramVocabulary::id_of(const std::string& ngram) const {
    auto it = ids_.find(ngram);
    return it == ids_.end() ? kUnk : it->second;
}

const std::string& NgramVocabulary::ngram_of(std::uint32_t id) const {
    if (id == kPad) return kPadName;
    if (id == kUnk) return kUnkName;
    std::size_t idx = id - 2;
    if (idx >= ordered_.size()) throw ShapeMismatch("vocabulary id out of range");
    return ordered_[idx];
}

std::uint64_t NgramVocabulary::hash() const {
    // FNV-1a 64-bit over "n\n" then each entry in id order.
    std::uint64_t h = 14695981039346656037ull;
    auto mix = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
        h ^= '\n';
        h *= 1099511628211ull;
    };
    mix(std::to_string(n_));
    for (const auto& g : ordered_) mix(g);
    return h;
}

void NgramVocabulary::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);  // binary: bit-exact round trip
    if (!out) throw CorruptFile("cannot open " + path + " for writing");
    out << "scs-vocab\t" << kVocabFormatVersion << "\t" << n_ << "\t" << size() << "\n";
    for (std::size_t i = 0; i < ordered_.size(); ++i) {
        out << ordered_[i] << "\t" << (i + 2) << "\n";
    }
    if (!out) throw CorruptFile("write failed for " + path);
}

NgramVocabulary NgramVocabulary::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CorruptFile("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw CorruptFile("empty vocabulary file " + path);

    std::istringstream header(line);
    std::string tag;
    std::uint32_t version = 0;
    std::size_t n = 0, total = 0;
    if (!(header >> tag >> version >> n >> total) || tag != "scs-vocab") {
        throw CorruptFile("bad vocabulary header in " + path);
    }
    if (version != kVocabFormatVersion) throw FormatVersionMismatch(version, kVocabFormatVersion);
    if (total < 2) throw CorruptFile("vocabulary size below reserved ids");

    std::vector<std::string> ordered;
    ordered.reserve(total - 2);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw ParseError(line_no, "expected ngram<TAB>id");
        }
        std::string ngram = line.substr(0, tab);
        std::size_t id = 0;
        try {
            id = std::stoull(line.substr(tab + 1));
        } catch (const std::exception&) {
            throw ParseError(line_no, "bad id field");
        }
        if (id != ordered.size() + 2) throw ParseError(line_no, "ids must be dense and in order");
        ordered.push_back(std::move(ngram));
    }
    if (ordered.size() + 2 != total) {
        throw CorruptFile("vocabulary row count does not match header in " + path);
    }
    return NgramVocabulary(n, std::move(ordered));
}

std::vector<std::string> extract_ngrams(const TokenSequence& tokens, std::size_t n) {
    std::vector<std::string> out;
    if (n == 0 || tokens.size() < n) return out;
    out.reserve(tokens.size() - n + 1);
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string g;
        g.reserve(2 * n);
        for (std::size_t j = 0; j < n; ++j) g += tokens[i + j];
        out.push_back(std::move(g));
    }
    return out;
}

NgramVocabulary build_vocab(const std::vector<TokenSequence>& corpus, std::size_t n,
                            std::size_t min_count, std::optional<std::size_t> max_entries) {
    std::unordered_map<std::string, std::uint64_t> freq;
    for (const auto& tokens : corpus) {
        for (auto& g : extract_ngrams(tokens, n)) ++freq[std::move(g)];
    }

    std::vector<std::pair<std::string, std::uint64_t>> entries;
    entries.reserve(freq.size());
    for (auto& [g, c] : freq) {
        if (c >= min_count) entries.emplace_back(g, c);
    }
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (max_entries && entries.size() > *max_entries) entries.resize(*max_entries);

    std::vector<std::string> ordered;
    ordered.reserve(entries.size());
    for (auto& [g, c] : entries) ordered.push_back(std::move(g));
    return NgramVocabulary(n, std::move(ordered));
}

EncodedSequence encode(const TokenSequence& tokens, const NgramVocabulary& vocab,
                       std::size_t max_len) {
    if (max_len == 0) throw ShapeMismatch("max_len must be >= 1");
    auto grams = extract_ngrams(tokens, vocab.n());
    EncodedSequence enc;
    enc.true_length = grams.size();
    enc.ids.assign(max_len, NgramVocabulary::kPad);
    std::size_t keep = std::min(max_len, grams.size());
    for (std::size_t i = 0; i < keep; ++i) enc.ids[i] = vocab.id_of(grams[i]);
    return enc;
}

std::map<std::uint32_t, std::uint32_t> count_vector(const TokenSequence& tokens,
                                                    const NgramVocabulary& vocab) {
    std::map<std::uint32_t, std::uint32_t> counts;
    for (const auto& g : extract_ngrams(tokens, vocab.n())) ++counts[vocab.id_of(g)];
    return counts;
}

}  // namespace scs
