// Command-line front end for the four-phase pipeline: collect bytecode,
// preprocess it into n-gram sequences, train/evaluate the classifier, and
// emit detection reports.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "scs/baseline.hpp"
#include "scs/dataset.hpp"
#include "scs/errors.hpp"
#include "scs/fetch.hpp"
#include "scs/hex.hpp"
#include "scs/model.hpp"
#include "scs/ngram.hpp"
#include "scs/opcodes.hpp"
#include "scs/report.hpp"
#include "scs/train.hpp"

namespace fs = std::filesystem;

namespace {

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw scs::Error(scs::ErrorKind::data, "cannot open " + path);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw scs::Error(scs::ErrorKind::data, "cannot write " + path);
    out << content;
}

struct CommonModelFlags {
    scs::TrainConfig train;
    std::string cell = "gru";
    bool no_attention = false;
    std::size_t max_vocab = 0;
    int threads = 0;
    bool serial = false;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--seed", train.seed, "global RNG seed");
        cmd->add_option("--epochs", train.epochs, "training epochs");
        cmd->add_option("--batch-size", train.batch_size, "minibatch size");
        cmd->add_option("--lr", train.learning_rate, "Adam learning rate");
        cmd->add_option("--undersample-to", train.undersample_benign_to,
                        "benign undersampling target");
        cmd->add_option("--train-frac", train.train_fraction, "training split fraction");
        cmd->add_option("--val-frac", train.val_fraction, "validation split fraction");
        cmd->add_option("--min-count", train.min_count, "n-gram frequency cutoff");
        cmd->add_option("--max-vocab", max_vocab, "cap on retained n-grams (0 = unlimited)");
        cmd->add_option("--early-stop-loss", train.early_stop_train_loss,
                        "stop when training loss falls below this (0 disables)");
        cmd->add_option("--n", train.model.n, "n-gram order (1..4)");
        cmd->add_option("--embed-dim", train.model.embed_dim, "embedding width");
        cmd->add_option("--hidden-dim", train.model.hidden_dim, "recurrent state width");
        cmd->add_option("--cell", cell, "recurrent cell: rnn|lstm|gru");
        cmd->add_flag("--no-attention", no_attention, "read the last hidden state instead");
        cmd->add_flag("--one-hot", train.model.one_hot,
                      "identity embedding (feature-direct variant)");
        cmd->add_option("--lambda", train.model.lambda, "L2 coefficient");
        cmd->add_option("--max-len", train.model.max_len, "sequence capacity in n-grams");
        cmd->add_flag("--serial", serial, "disable OpenMP parallelism");
        cmd->add_option("--threads", threads, "OpenMP thread count (0 = default)");
    }

    scs::TrainConfig resolve() {
        scs::TrainConfig cfg = train;
        cfg.model.cell = scs::cell_kind_from_string(cell);
        cfg.model.attention = !no_attention;
        if (max_vocab > 0) cfg.max_vocab = max_vocab;
        cfg.parallel = !serial;
#ifdef _OPENMP
        if (threads > 0) omp_set_num_threads(threads);
#endif
        return cfg;
    }
};

scs::FetchOptions make_fetch_options(const std::string& endpoint, const std::string& kind,
                                     const std::string& cache_dir, int timeout) {
    scs::FetchOptions opts;
    opts.endpoint = endpoint;
    opts.kind = scs::endpoint_kind_from_string(kind);
    opts.cache_dir = cache_dir;
    opts.timeout_seconds = timeout;
    if (const char* key = std::getenv("SCS_API_KEY")) opts.api_key = key;
    return opts;
}

// ---- fetch ----

int cmd_fetch(const std::string& target, const scs::FetchOptions& opts, bool keep_going) {
    std::vector<std::string> addresses;
    if (fs::exists(target) && !scs::is_address(target)) {
        std::ifstream in(target);
        std::string line;
        while (std::getline(in, line)) {
            while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
            if (line.empty() || line[0] == '#') continue;
            addresses.push_back(line);
        }
        if (addresses.empty()) throw scs::Error(scs::ErrorKind::data, "no addresses in " + target);
    } else {
        addresses.push_back(target);
    }

    // Validate everything before touching the network.
    for (auto& a : addresses) a = scs::normalize_address(a);

    std::size_t failed = 0;
    for (const auto& addr : addresses) {
        try {
            std::string code = scs::fetch_bytecode(addr, opts);
            std::cout << addr << "\tok\t" << code.size() / 2 << " bytes\n";
        } catch (const scs::Error& e) {
            ++failed;
            std::cerr << addr << "\terror\t" << e.what() << "\n";
            if (!keep_going) throw;
        }
    }
    if (failed > 0) {
        std::cerr << failed << "/" << addresses.size() << " addresses failed\n";
        return 2;
    }
    return 0;
}

// ---- tokenize ----

int cmd_tokenize(const std::string& source, bool mnemonics, const scs::FetchOptions& opts) {
    std::string hex;
    if (scs::is_address(source) ||
        (source.rfind("0x", 0) == 0 && source.size() == 42)) {
        hex = scs::fetch_bytecode(source, opts);
    } else {
        hex = scs::normalize_hex(read_text_file(source));
    }
    for (const auto& tok : scs::tokenize(hex)) {
        if (mnemonics) {
            std::cout << tok << "\t" << scs::opcode_name(scs::token_byte(tok)) << "\n";
        } else {
            std::cout << tok << "\n";
        }
    }
    return 0;
}

// ---- train ----

int cmd_train(const std::string& dataset_path, const std::string& out_dir,
              scs::TrainConfig cfg) {
    scs::Dataset ds = scs::load_dataset(dataset_path);
    fs::create_directories(out_dir);

    scs::PipelineResult res = scs::train_pipeline(ds, cfg);

    const std::string vocab_path = (fs::path(out_dir) / "vocab.tsv").string();
    const std::string ckpt_path = (fs::path(out_dir) / "model.ckpt").string();
    res.vocab.save(vocab_path);
    scs::save_checkpoint(res.train.params, res.model, res.vocab.hash(), ckpt_path);
    write_text_file((fs::path(out_dir) / "history.tsv").string(),
                    scs::history_tsv(res.train.history));
    write_text_file((fs::path(out_dir) / "metrics.txt").string(),
                    scs::metrics_report(res.test_metrics));

    std::cout << "vocabulary: " << res.vocab.size() << " ids (n=" << res.vocab.n() << ")\n"
              << "parameters: " << scs::param_count(res.model) << "\n"
              << "best epoch: " << res.train.history.best_epoch << "\n"
              << "test metrics:\n"
              << scs::metrics_report(res.test_metrics);
    return 0;
}

// ---- evaluate ----

int cmd_evaluate(const std::string& ckpt_path, const std::string& vocab_path,
                 const std::string& dataset_path, const std::string& split,
                 scs::TrainConfig cfg) {
    scs::NgramVocabulary vocab = scs::NgramVocabulary::load(vocab_path);
    scs::Checkpoint ck = scs::load_checkpoint(ckpt_path, vocab);
    scs::Dataset ds = scs::load_dataset(dataset_path);

    std::vector<scs::ContractRecord> records;
    if (split == "all") {
        records = ds.records;
    } else {
        scs::SplitResult s =
            scs::split_dataset(ds, cfg.seed, cfg.train_fraction, cfg.val_fraction);
        if (split == "train") {
            records = s.train.records;
        } else if (split == "val") {
            records = s.val.records;
        } else if (split == "test") {
            records = s.test.records;
        } else {
            throw scs::Error(scs::ErrorKind::usage, "unknown split '" + split + "'");
        }
    }
    auto enc = scs::encode_records(records, vocab, ck.config.max_len, cfg.parallel);
    scs::EvalMetrics m = scs::evaluate(ck.params, ck.config, enc, cfg.parallel);
    std::cout << scs::metrics_report(m);
    return 0;
}

// ---- predict ----

int cmd_predict(const std::string& ckpt_path, const std::string& vocab_path,
                const std::string& bytecode_file, const std::string& address, bool pretty,
                std::size_t top_k, const scs::FetchOptions& opts) {
    scs::NgramVocabulary vocab = scs::NgramVocabulary::load(vocab_path);
    scs::Checkpoint ck = scs::load_checkpoint(ckpt_path, vocab);

    std::string hex;
    std::optional<std::string> addr;
    if (!address.empty()) {
        addr = scs::normalize_address(address);
        hex = scs::fetch_bytecode(*addr, opts);
    } else if (!bytecode_file.empty()) {
        hex = scs::normalize_hex(read_text_file(bytecode_file));
    } else {
        throw scs::Error(scs::ErrorKind::usage, "need --bytecode-file or --address");
    }
    if (hex.empty()) throw scs::NotAContract(addr.value_or("(bytecode input)"));

    scs::ScamReport rep = scs::make_report(ck.params, ck.config, vocab, scs::tokenize(hex),
                                           addr, scs::file_fnv1a_hex(ckpt_path), top_k);
    std::cout << (pretty ? scs::report_pretty(rep) : scs::report_json(rep));
    return 0;
}

// ---- ablation ----

int cmd_ablation(const std::string& dataset_path, const std::string& out_dir,
                 const std::vector<std::string>& only, scs::TrainConfig cfg) {
    scs::Dataset ds = scs::load_dataset(dataset_path);
    fs::create_directories(out_dir);

    scs::AblationTables tables = scs::run_ablation(ds, cfg, only);
    write_text_file((fs::path(out_dir) / "embedding_table.tsv").string(),
                    scs::ablation_rows_tsv(tables.embedding));
    std::vector<scs::AblationRow> arch = tables.architecture;
    if (tables.baseline) arch.push_back(*tables.baseline);
    write_text_file((fs::path(out_dir) / "architecture_table.tsv").string(),
                    scs::ablation_rows_tsv(arch));
    write_text_file((fs::path(out_dir) / "ablation.tsv").string(), scs::ablation_tsv(tables));
    std::cout << scs::ablation_pretty(tables);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"scam smart-contract detector over EVM bytecode n-grams"};
    app.require_subcommand(1);

    // fetch
    auto* fetch = app.add_subcommand("fetch", "download and cache contract bytecode");
    std::string fetch_target, endpoint, endpoint_kind = "rpc", cache_dir = ".scs-cache";
    int timeout = 30;
    bool keep_going = false;
    fetch->add_option("target", fetch_target, "address or file with one address per line")
        ->required();
    fetch->add_option("--endpoint", endpoint, "node or explorer URL")->required();
    fetch->add_option("--endpoint-kind", endpoint_kind, "rpc|explorer");
    fetch->add_option("--cache-dir", cache_dir, "bytecode cache directory");
    fetch->add_option("--timeout", timeout, "network timeout in seconds");
    fetch->add_flag("--keep-going", keep_going, "continue past per-address failures");

    // tokenize
    auto* tok = app.add_subcommand("tokenize", "split bytecode into byte tokens");
    std::string tok_source;
    bool mnemonics = false;
    tok->add_option("source", tok_source, "bytecode hex file or 40-hex address")->required();
    tok->add_flag("--mnemonics", mnemonics, "append the opcode mnemonic column");
    tok->add_option("--endpoint", endpoint, "node or explorer URL (for addresses)");
    tok->add_option("--endpoint-kind", endpoint_kind, "rpc|explorer");
    tok->add_option("--cache-dir", cache_dir, "bytecode cache directory");

    // build-vocab
    auto* bv = app.add_subcommand("build-vocab", "build an n-gram vocabulary from a dataset");
    std::string bv_dataset, bv_out;
    std::size_t bv_n = 2, bv_min_count = 1, bv_max = 0;
    bv->add_option("--dataset", bv_dataset, "dataset file")->required();
    bv->add_option("--out", bv_out, "vocabulary output path")->required();
    bv->add_option("--n", bv_n, "n-gram order");
    bv->add_option("--min-count", bv_min_count, "frequency cutoff");
    bv->add_option("--max-vocab", bv_max, "cap on retained n-grams (0 = unlimited)");

    // train
    auto* train = app.add_subcommand("train", "train the classifier on a labeled dataset");
    std::string train_dataset, train_out = "scs-out";
    CommonModelFlags train_flags;
    train->add_option("--dataset", train_dataset, "labeled dataset file")->required();
    train->add_option("--out-dir", train_out, "output directory");
    train_flags.add_to(train);

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "evaluate a checkpoint on a dataset");
    std::string ev_ckpt, ev_vocab, ev_dataset, ev_split = "all";
    CommonModelFlags ev_flags;
    ev->add_option("--checkpoint", ev_ckpt, "model checkpoint")->required();
    ev->add_option("--vocab", ev_vocab, "vocabulary file")->required();
    ev->add_option("--dataset", ev_dataset, "dataset file")->required();
    ev->add_option("--split", ev_split, "all|train|val|test (splits use --seed)");
    ev_flags.add_to(ev);

    // predict
    auto* pr = app.add_subcommand("predict", "classify one contract and emit a report");
    std::string pr_ckpt, pr_vocab, pr_file, pr_address;
    bool pr_pretty = false;
    std::size_t pr_topk = 10;
    pr->add_option("--checkpoint", pr_ckpt, "model checkpoint")->required();
    pr->add_option("--vocab", pr_vocab, "vocabulary file")->required();
    pr->add_option("--bytecode-file", pr_file, "file containing bytecode hex");
    pr->add_option("--address", pr_address, "contract address (uses cache/endpoint)");
    pr->add_flag("--pretty", pr_pretty, "human-readable report instead of JSON");
    pr->add_option("--top-k", pr_topk, "number of attended features to report");
    pr->add_option("--endpoint", endpoint, "node or explorer URL");
    pr->add_option("--endpoint-kind", endpoint_kind, "rpc|explorer");
    pr->add_option("--cache-dir", cache_dir, "bytecode cache directory");

    // ablation
    auto* ab = app.add_subcommand("ablation", "feature/architecture comparison tables");
    std::string ab_dataset, ab_out = "scs-ablation";
    std::vector<std::string> ab_only;
    CommonModelFlags ab_flags;
    ab->add_option("--dataset", ab_dataset, "labeled dataset file")->required();
    ab->add_option("--out-dir", ab_out, "output directory");
    ab->add_option("--only", ab_only,
                   "restrict to rows, e.g. gru+attention, 2-gram, baseline");
    ab_flags.add_to(ab);

    try {
        app.parse(argc, argv);
        const auto opts = make_fetch_options(endpoint, endpoint_kind, cache_dir, timeout);
        if (*fetch) return cmd_fetch(fetch_target, opts, keep_going);
        if (*tok) return cmd_tokenize(tok_source, mnemonics, opts);
        if (*bv) {
            scs::Dataset ds = scs::load_dataset(bv_dataset);
            scs::NgramVocabulary vocab = scs::build_vocab(
                scs::tokenize_records(ds.records), bv_n, bv_min_count,
                bv_max > 0 ? std::optional<std::size_t>(bv_max) : std::nullopt);
            vocab.save(bv_out);
            std::cout << "vocabulary: " << vocab.size() << " ids (n=" << vocab.n() << "), hash "
                      << std::hex << vocab.hash() << std::dec << "\n";
            return 0;
        }
        if (*train) return cmd_train(train_dataset, train_out, train_flags.resolve());
        if (*ev) return cmd_evaluate(ev_ckpt, ev_vocab, ev_dataset, ev_split,
                                     ev_flags.resolve());
        if (*pr) return cmd_predict(pr_ckpt, pr_vocab, pr_file, pr_address, pr_pretty, pr_topk,
                                    opts);
        if (*ab) return cmd_ablation(ab_dataset, ab_out, ab_only, ab_flags.resolve());
        return 1;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const scs::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
