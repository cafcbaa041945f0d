#include "scs/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "scs/errors.hpp"
#include "scs/opcodes.hpp"

namespace scs {

using nlohmann::json;

ScamReport make_report(const ModelParams& params, const ModelConfig& cfg,
                       const NgramVocabulary& vocab, const TokenSequence& tokens,
                       std::optional<std::string> address, const std::string& model_id,
                       std::size_t top_k) {
    const EncodedSequence enc = encode(tokens, vocab, cfg.max_len);
    const ForwardTrace trace = forward(params, cfg, enc);

    ScamReport report;
    report.address = std::move(address);
    report.probability = trace.prob;
    report.label = predict_label(trace.prob);
    report.model_id = model_id;

    if (!trace.attn.empty()) {
        // The trace covers positions 0..len-1; recover the n-gram strings so
        // out-of-vocabulary grams are reported by their actual bytes.
        const auto grams = extract_ngrams(tokens, vocab.n());
        std::map<std::string, double> best;
        for (std::size_t i = 0; i < trace.len && i < grams.size(); ++i) {
            auto [it, inserted] = best.try_emplace(grams[i], trace.attn[i]);
            if (!inserted && trace.attn[i] > it->second) it->second = trace.attn[i];
        }
        std::vector<std::pair<std::string, double>> ranked(best.begin(), best.end());
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        if (ranked.size() > top_k) ranked.resize(top_k);
        for (const auto& [gram, weight] : ranked) {
            report.top_features.push_back({gram, mnemonic_render(gram), weight});
        }
    }
    return report;
}

std::string report_json(const ScamReport& report) {
    json doc;
    if (report.address) {
        doc["address"] = *report.address;
    } else {
        doc["address"] = nullptr;
    }
    doc["probability"] = report.probability;
    doc["label"] = report.label == 1 ? "scam" : "safe";
    doc["model"] = report.model_id;
    doc["top_features"] = json::array();
    for (const auto& f : report.top_features) {
        doc["top_features"].push_back(
            {{"ngram", f.ngram}, {"mnemonics", f.mnemonics}, {"weight", f.weight}});
    }
    return doc.dump(2) + "\n";
}

std::string report_pretty(const ScamReport& report) {
    std::ostringstream out;
    char buf[160];
    out << "contract: " << (report.address ? *report.address : std::string("(bytecode)"))
        << "\n";
    std::snprintf(buf, sizeof(buf), "scam probability: %.4f -> %s\n", report.probability,
                  report.label == 1 ? "SCAM" : "safe");
    out << buf;
    out << "model: " << report.model_id << "\n";
    if (!report.top_features.empty()) {
        out << "most attended byte patterns:\n";
        for (const auto& f : report.top_features) {
            std::snprintf(buf, sizeof(buf), "  %-12s %-28s %.4f\n", f.ngram.c_str(),
                          f.mnemonics.c_str(), f.weight);
            out << buf;
        }
    }
    return out.str();
}

std::string file_fnv1a_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CorruptFile("cannot open " + path);
    std::uint64_t h = 14695981039346656037ull;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
        if (in.eof()) break;
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

}  // namespace scs
