#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scs/dataset.hpp"
#include "scs/model.hpp"
#include "scs/ngram.hpp"

namespace scs {

// Confusion counts and the derived scores; positive = scam (the rare class).
struct EvalMetrics {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;

    // Zero denominators map to 0 so every metric is total.
    static EvalMetrics from_counts(std::size_t tp, std::size_t fp, std::size_t tn,
                                   std::size_t fn);
};

struct TrainConfig {
    std::uint64_t seed = 42;
    std::size_t epochs = 100;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::size_t undersample_benign_to = 1000;
    double train_fraction = 0.6;
    double val_fraction = 0.2;  // test split takes the remainder
    std::size_t min_count = 1;
    std::optional<std::size_t> max_vocab;
    bool parallel = true;
    // When > 0, stop once the epoch's training cross-entropy drops below it.
    double early_stop_train_loss = 0.0;
    ModelConfig model;
};

struct EpochStats {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0.0;
    double train_acc = 0.0;
    double val_loss = 0.0;
    double val_acc = 0.0;
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
    std::size_t best_epoch = 0;  // epoch whose params were kept (best val F1)
    double best_val_f1 = 0.0;
};

struct SplitResult {
    Dataset train, val, test;
};

// Stratified 60/20/20-style split with exact global sizes floor(f*N); per-class
// allocations use largest-remainder apportionment so both classes land in
// every split whenever arithmetic allows. Requires every record labeled.
SplitResult split_dataset(const Dataset& ds, std::uint64_t seed, double train_fraction = 0.6,
                          double val_fraction = 0.2);

// Benign records sampled without replacement down to the target (each kept
// benign is unique), scam records resampled to the same count: all originals
// kept and duplicates drawn with replacement when the class is short. The
// result is a training multiset, not a Dataset, since oversampling repeats
// addresses. Output classes are exactly equal in size.
std::vector<ContractRecord> rebalance(const Dataset& train_split, std::uint64_t seed,
                                      std::size_t undersample_benign_to);

// Token sequences of records (vocabulary building input).
std::vector<TokenSequence> tokenize_records(const std::vector<ContractRecord>& records);

// Tokenize + encode every record against a frozen vocabulary; records must be
// labeled.
std::vector<LabeledSequence> encode_records(const std::vector<ContractRecord>& records,
                                            const NgramVocabulary& vocab, std::size_t max_len,
                                            bool parallel = true);

struct TrainResult {
    ModelParams params;   // from the best-validation-F1 epoch
    TrainHistory history;
};

// Seeded minibatch Adam over the encoded training set. Epoch-end losses and
// accuracies are recomputed over the full train/val sets with the updated
// parameters. Throws DivergenceDetected on a non-finite loss.
TrainResult train_loop(const std::vector<LabeledSequence>& train,
                       const std::vector<LabeledSequence>& val, const TrainConfig& cfg);

EvalMetrics evaluate(const ModelParams& params, const ModelConfig& cfg,
                     const std::vector<LabeledSequence>& split, bool parallel = true);

// Mean cross-entropy and accuracy of a split (the history numbers).
std::pair<double, double> eval_loss_acc(const ModelParams& params, const ModelConfig& cfg,
                                        const std::vector<LabeledSequence>& split,
                                        bool parallel = true);

struct PipelineResult {
    NgramVocabulary vocab;
    TrainResult train;
    EvalMetrics test_metrics;
    ModelConfig model;  // config with vocab_size filled in
};

// The full training pipeline: split -> rebalance -> vocabulary from the
// training split only -> encode -> train -> evaluate on the untouched test
// split. cfg.model.vocab_size is derived from the built vocabulary.
PipelineResult train_pipeline(const Dataset& ds, const TrainConfig& cfg);

// One row of the comparison tables.
struct AblationRow {
    std::string key;   // e.g. "2-gram", "gru+attention", "baseline"
    std::string name;  // display name
    EvalMetrics metrics;
    std::size_t param_count = 0;
    std::size_t epochs_ran = 0;
};

struct AblationTables {
    std::vector<AblationRow> embedding;     // feature-direct, 1/2/3-gram
    std::vector<AblationRow> architecture;  // rnn/lstm/gru x +-attention
    std::optional<AblationRow> baseline;    // logistic regression comparator
};

// Trains every configuration on identical splits (derived deterministically
// from cfg.seed) and evaluates on the untouched test split. `only`, when
// non-empty, restricts rows by key.
AblationTables run_ablation(const Dataset& data, const TrainConfig& cfg,
                            const std::vector<std::string>& only = {});

std::string ablation_tsv(const AblationTables& tables);
std::string ablation_pretty(const AblationTables& tables);
// One table on its own (the per-table output files).
std::string ablation_rows_tsv(const std::vector<AblationRow>& rows);

// History file: one row per epoch, tab separated, with header.
std::string history_tsv(const TrainHistory& history);
std::string metrics_report(const EvalMetrics& m);

}  // namespace scs
