#include "scs/dataset.hpp"

#include <fstream>
#include <unordered_set>

#include "scs/errors.hpp"
#include "scs/hex.hpp"

namespace scs {

namespace {

const std::string kProvenancePrefix = "# provenance: ";

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    return fields;
}

}  // namespace

std::string to_string(ScamKind kind) {
    switch (kind) {
        case ScamKind::ponzi: return "ponzi";
        case ScamKind::honeypot: return "honeypot";
        case ScamKind::phishing: return "phishing";
        case ScamKind::other: return "other";
    }
    return "other";
}

ScamKind scam_kind_from_string(const std::string& name) {
    if (name == "ponzi") return ScamKind::ponzi;
    if (name == "honeypot") return ScamKind::honeypot;
    if (name == "phishing") return ScamKind::phishing;
    if (name == "other") return ScamKind::other;
    throw Error(ErrorKind::data, "unknown scam kind '" + name + "'");
}

void validate_record(const ContractRecord& rec) {
    if (!is_address(rec.address)) {
        throw Error(ErrorKind::data, "bad address '" + rec.address + "'");
    }
    if (!is_canonical_hex(rec.bytecode_hex)) {
        throw Error(ErrorKind::data, "bytecode for " + rec.address + " is not canonical hex");
    }
    if (rec.label && *rec.label != 0 && *rec.label != 1) {
        throw Error(ErrorKind::data, "label must be 0 or 1");
    }
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::data, "cannot open dataset " + path);

    Dataset ds;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind(kProvenancePrefix, 0) == 0) {
                ds.provenance = line.substr(kProvenancePrefix.size());
            }
            continue;
        }
        auto fields = split_tabs(line);
        if (fields.size() != 4) {
            throw ParseError(line_no, "expected 4 tab-separated fields, got " +
                                          std::to_string(fields.size()));
        }
        ContractRecord rec;
        rec.address = fields[0];
        if (!is_address(rec.address)) throw ParseError(line_no, "bad address field");
        rec.bytecode_hex = fields[1];
        if (!is_canonical_hex(rec.bytecode_hex)) {
            throw ParseError(line_no, "bytecode is not canonical even-length hex");
        }
        if (fields[2] != "-") {
            if (fields[2] == "0") {
                rec.label = 0;
            } else if (fields[2] == "1") {
                rec.label = 1;
            } else {
                throw ParseError(line_no, "label must be 0, 1 or '-'");
            }
        }
        if (fields[3] != "-") {
            try {
                rec.scam_kind = scam_kind_from_string(fields[3]);
            } catch (const Error&) {
                throw ParseError(line_no, "bad scam kind '" + fields[3] + "'");
            }
        }
        if (!seen.insert(rec.address).second) throw DuplicateAddress(rec.address);
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) {
    std::unordered_set<std::string> seen;
    for (const auto& rec : ds.records) {
        validate_record(rec);
        if (!seen.insert(rec.address).second) throw DuplicateAddress(rec.address);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::data, "cannot open " + path + " for writing");
    if (!ds.provenance.empty()) {
        if (ds.provenance.find('\n') != std::string::npos) {
            throw Error(ErrorKind::data, "provenance must be a single line");
        }
        out << kProvenancePrefix << ds.provenance << "\n";
    }
    for (const auto& rec : ds.records) {
        out << rec.address << "\t" << rec.bytecode_hex << "\t"
            << (rec.label ? std::to_string(*rec.label) : std::string("-")) << "\t"
            << (rec.scam_kind ? to_string(*rec.scam_kind) : std::string("-")) << "\n";
    }
    if (!out) throw Error(ErrorKind::data, "write failed for " + path);
}

}  // namespace scs
