#include "scs/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "scs/baseline.hpp"
#include "scs/errors.hpp"

namespace scs {

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// Largest-remainder apportionment of `target` slots across classes, honoring
// per-class capacity. `exact[c]` is the unrounded share of class c.
std::vector<std::size_t> apportion(const std::vector<double>& exact,
                                   const std::vector<std::size_t>& capacity,
                                   std::size_t target) {
    const std::size_t k = exact.size();
    std::vector<std::size_t> out(k);
    std::vector<std::pair<double, std::size_t>> remainder(k);
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < k; ++c) {
        out[c] = std::min(static_cast<std::size_t>(exact[c]), capacity[c]);
        assigned += out[c];
        remainder[c] = {exact[c] - std::floor(exact[c]), c};
    }
    std::sort(remainder.begin(), remainder.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::size_t i = 0;
    while (assigned < target) {
        const std::size_t c = remainder[i % k].second;
        if (out[c] < capacity[c]) {
            ++out[c];
            ++assigned;
        }
        ++i;
        if (i > 4 * k + target) break;  // every class at capacity
    }
    return out;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace

EvalMetrics EvalMetrics::from_counts(std::size_t tp, std::size_t fp, std::size_t tn,
                                     std::size_t fn) {
    EvalMetrics m;
    m.tp = tp;
    m.fp = fp;
    m.tn = tn;
    m.fn = fn;
    const std::size_t total = tp + fp + tn + fn;
    m.accuracy = total == 0 ? 0.0
                            : static_cast<double>(tp + tn) / static_cast<double>(total);
    m.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    m.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    m.f1 = m.precision + m.recall == 0.0
               ? 0.0
               : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

SplitResult split_dataset(const Dataset& ds, std::uint64_t seed, double train_fraction,
                          double val_fraction) {
    const std::size_t n = ds.records.size();
    if (n < 5) throw Error(ErrorKind::data, "dataset too small to split (need >= 5 records)");
    if (train_fraction <= 0.0 || val_fraction < 0.0 || train_fraction + val_fraction >= 1.0) {
        throw Error(ErrorKind::usage, "split fractions must be positive and sum below 1");
    }
    for (const auto& rec : ds.records) {
        if (!rec.label) throw UnlabeledRecord(rec.address);
    }

    // Indices per class, shuffled with a seed-derived stream.
    std::vector<std::vector<std::size_t>> by_class(2);
    for (std::size_t i = 0; i < n; ++i) by_class[static_cast<std::size_t>(*ds.records[i].label)].push_back(i);
    Rng rng(Rng::derive(seed, 0));
    rng.shuffle(by_class[0]);
    rng.shuffle(by_class[1]);

    const std::size_t n_train = static_cast<std::size_t>(train_fraction * static_cast<double>(n));
    const std::size_t n_val = static_cast<std::size_t>(val_fraction * static_cast<double>(n));

    std::vector<double> exact_train(2), exact_val(2);
    std::vector<std::size_t> cap(2);
    for (std::size_t c = 0; c < 2; ++c) {
        cap[c] = by_class[c].size();
        exact_train[c] = train_fraction * static_cast<double>(cap[c]);
    }
    const auto train_c = apportion(exact_train, cap, n_train);
    for (std::size_t c = 0; c < 2; ++c) {
        cap[c] -= train_c[c];
        exact_val[c] = val_fraction * static_cast<double>(by_class[c].size());
    }
    const auto val_c = apportion(exact_val, cap, n_val);

    SplitResult out;
    out.train.provenance = ds.provenance;
    out.val.provenance = ds.provenance;
    out.test.provenance = ds.provenance;
    for (std::size_t c = 0; c < 2; ++c) {
        const auto& idx = by_class[c];
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const ContractRecord& rec = ds.records[idx[i]];
            if (i < train_c[c]) {
                out.train.records.push_back(rec);
            } else if (i < train_c[c] + val_c[c]) {
                out.val.records.push_back(rec);
            } else {
                out.test.records.push_back(rec);
            }
        }
    }
    return out;
}

std::vector<ContractRecord> rebalance(const Dataset& train_split, std::uint64_t seed,
                                      std::size_t undersample_benign_to) {
    std::vector<std::size_t> benign, scam;
    for (std::size_t i = 0; i < train_split.records.size(); ++i) {
        const auto& rec = train_split.records[i];
        if (!rec.label) throw UnlabeledRecord(rec.address);
        (*rec.label == 0 ? benign : scam).push_back(i);
    }
    if (benign.empty()) throw MissingClass(0);
    if (scam.empty()) throw MissingClass(1);

    Rng rng(Rng::derive(seed, 1));
    rng.shuffle(benign);
    const std::size_t kept = std::min(benign.size(), undersample_benign_to);
    benign.resize(kept);

    std::vector<std::size_t> scam_out;
    if (scam.size() <= kept) {
        scam_out = scam;
        while (scam_out.size() < kept) scam_out.push_back(scam[rng.next_index(scam.size())]);
    } else {
        rng.shuffle(scam);
        scam_out.assign(scam.begin(), scam.begin() + static_cast<std::ptrdiff_t>(kept));
    }

    std::vector<ContractRecord> out;
    out.reserve(2 * kept);
    for (std::size_t i : benign) out.push_back(train_split.records[i]);
    for (std::size_t i : scam_out) out.push_back(train_split.records[i]);
    return out;
}

std::vector<TokenSequence> tokenize_records(const std::vector<ContractRecord>& records) {
    std::vector<TokenSequence> out;
    out.reserve(records.size());
    for (const auto& rec : records) out.push_back(tokenize(rec.bytecode_hex));
    return out;
}

std::vector<LabeledSequence> encode_records(const std::vector<ContractRecord>& records,
                                            const NgramVocabulary& vocab, std::size_t max_len,
                                            bool parallel) {
    std::vector<LabeledSequence> out(records.size());
    std::exception_ptr error;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel)
#endif
    for (std::size_t i = 0; i < records.size(); ++i) {
        try {
            if (!records[i].label) throw UnlabeledRecord(records[i].address);
            out[i].enc = encode(tokenize(records[i].bytecode_hex), vocab, max_len);
            out[i].label = *records[i].label;
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
    return out;
}

std::pair<double, double> eval_loss_acc(const ModelParams& params, const ModelConfig& cfg,
                                        const std::vector<LabeledSequence>& split,
                                        bool parallel) {
    if (split.empty()) return {0.0, 0.0};
    std::vector<double> probs(split.size(), 0.0);
    std::exception_ptr error;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel)
#endif
    for (std::size_t i = 0; i < split.size(); ++i) {
        try {
            probs[i] = predict_prob(params, cfg, split[i].enc);
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);

    double sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < split.size(); ++i) {
        const double p = std::min(std::max(probs[i], 1e-12), 1.0 - 1e-12);
        sum += split[i].label == 1 ? -std::log(p) : -std::log(1.0 - p);
        if (predict_label(probs[i]) == split[i].label) ++correct;
    }
    return {sum / static_cast<double>(split.size()),
            static_cast<double>(correct) / static_cast<double>(split.size())};
}

EvalMetrics evaluate(const ModelParams& params, const ModelConfig& cfg,
                     const std::vector<LabeledSequence>& split, bool parallel) {
    if (split.empty()) return EvalMetrics{};
    std::vector<double> probs(split.size(), 0.0);
    std::exception_ptr error;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel)
#endif
    for (std::size_t i = 0; i < split.size(); ++i) {
        try {
            probs[i] = predict_prob(params, cfg, split[i].enc);
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);

    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < split.size(); ++i) {
        const int pred = predict_label(probs[i]);
        if (split[i].label == 1) {
            pred == 1 ? ++tp : ++fn;
        } else {
            pred == 1 ? ++fp : ++tn;
        }
    }
    return EvalMetrics::from_counts(tp, fp, tn, fn);
}

namespace {

// Dense Adam state mirroring the parameter tensors.
struct AdamState {
    BatchGrad m, v;
    std::size_t step = 0;
};

void adam_update(ModelParams& params, const BatchGrad& grads, AdamState& st,
                 const TrainConfig& cfg) {
    ++st.step;
    const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
    const double corr1 = 1.0 - std::pow(b1, static_cast<double>(st.step));
    const double corr2 = 1.0 - std::pow(b2, static_cast<double>(st.step));
    const double lr = cfg.learning_rate;
    const double eps = cfg.adam_eps;

    auto update_tensor = [&](Tensor& p, const Tensor& g, Tensor& m, Tensor& v) {
        for (std::size_t i = 0; i < p.numel(); ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            p[i] -= lr * (m[i] / corr1) / (std::sqrt(v[i] / corr2) + eps);
        }
    };

    if (params.embedding.numel() > 0) {
        update_tensor(params.embedding, grads.embedding, st.m.embedding, st.v.embedding);
    }
    for (std::size_t k = 0; k < params.w_input.size(); ++k) {
        update_tensor(params.w_input[k], grads.w_input[k], st.m.w_input[k], st.v.w_input[k]);
        update_tensor(params.w_state[k], grads.w_state[k], st.m.w_state[k], st.v.w_state[k]);
        update_tensor(params.bias[k], grads.bias[k], st.m.bias[k], st.v.bias[k]);
    }
    if (params.context.numel() > 0) {
        update_tensor(params.context, grads.context, st.m.context, st.v.context);
    }
    update_tensor(params.head_w, grads.head_w, st.m.head_w, st.v.head_w);

    st.m.head_b = b1 * st.m.head_b + (1.0 - b1) * grads.head_b;
    st.v.head_b = b2 * st.v.head_b + (1.0 - b2) * grads.head_b * grads.head_b;
    params.head_b -= lr * (st.m.head_b / corr1) / (std::sqrt(st.v.head_b / corr2) + eps);
}

}  // namespace

TrainResult train_loop(const std::vector<LabeledSequence>& train,
                       const std::vector<LabeledSequence>& val, const TrainConfig& cfg) {
    if (train.empty()) throw Error(ErrorKind::data, "empty training set");
    if (cfg.epochs < 1 || cfg.batch_size < 1) {
        throw Error(ErrorKind::usage, "epochs and batch_size must be >= 1");
    }
    cfg.model.validate();

    Rng rng(cfg.seed);
    ModelParams params = init_params(cfg.model, rng);
    AdamState adam;
    adam.m = BatchGrad::zeros_like(params, cfg.model);
    adam.v = BatchGrad::zeros_like(params, cfg.model);

    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);

    TrainResult result;
    ModelParams best = params;
    double best_f1 = -1.0;
    std::size_t best_epoch = 0;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                           order.begin() + static_cast<std::ptrdiff_t>(end));
            BatchResult br = batch_forward_backward(params, cfg.model, train, batch,
                                                    cfg.parallel);
            if (!std::isfinite(br.loss.total)) {
                throw DivergenceDetected("epoch " + std::to_string(epoch) + ", batch at " +
                                         std::to_string(start));
            }
            adam_update(params, br.grads, adam, cfg);
        }

        auto [train_loss, train_acc] = eval_loss_acc(params, cfg.model, train, cfg.parallel);
        auto [val_loss, val_acc] = eval_loss_acc(params, cfg.model, val, cfg.parallel);
        if (!std::isfinite(train_loss)) throw DivergenceDetected("epoch-end evaluation");
        result.history.epochs.push_back({epoch, train_loss, train_acc, val_loss, val_acc});

        if (!val.empty()) {
            const EvalMetrics vm = evaluate(params, cfg.model, val, cfg.parallel);
            if (vm.f1 > best_f1) {
                best_f1 = vm.f1;
                best = params;
                best_epoch = epoch;
            }
        }

        if (cfg.early_stop_train_loss > 0.0 && train_loss < cfg.early_stop_train_loss) break;
    }

    if (val.empty()) {
        // No validation set: keep the final parameters.
        best = std::move(params);
        best_epoch = result.history.epochs.size();
        best_f1 = 0.0;
    }
    result.params = std::move(best);
    result.history.best_epoch = best_epoch;
    result.history.best_val_f1 = std::max(best_f1, 0.0);
    return result;
}

PipelineResult train_pipeline(const Dataset& ds, const TrainConfig& cfg) {
    SplitResult split = split_dataset(ds, cfg.seed, cfg.train_fraction, cfg.val_fraction);
    std::vector<ContractRecord> balanced =
        rebalance(split.train, cfg.seed, cfg.undersample_benign_to);

    PipelineResult out;
    out.vocab = build_vocab(tokenize_records(split.train.records), cfg.model.n, cfg.min_count,
                            cfg.max_vocab);
    TrainConfig tc = cfg;
    tc.model.vocab_size = out.vocab.size();
    out.model = tc.model;

    auto enc_train = encode_records(balanced, out.vocab, tc.model.max_len, cfg.parallel);
    auto enc_val = encode_records(split.val.records, out.vocab, tc.model.max_len, cfg.parallel);
    auto enc_test = encode_records(split.test.records, out.vocab, tc.model.max_len, cfg.parallel);

    out.train = train_loop(enc_train, enc_val, tc);
    out.test_metrics = evaluate(out.train.params, tc.model, enc_test, cfg.parallel);
    return out;
}

AblationTables run_ablation(const Dataset& data, const TrainConfig& cfg,
                            const std::vector<std::string>& only) {
    struct RowSpec {
        std::string key, name;
        std::size_t n;
        bool one_hot;
        CellKind cell;
        bool attention;
        bool embedding_table;
    };
    const CellKind base_cell = cfg.model.cell;
    const bool base_attn = cfg.model.attention;
    const std::vector<RowSpec> rows = {
        {"feature-direct", "Feature Directly Embedding", 1, true, base_cell, base_attn, true},
        {"1-gram", "1-gram Feature Embedding", 1, false, base_cell, base_attn, true},
        {"2-gram", "2-gram Feature Embedding", 2, false, base_cell, base_attn, true},
        {"3-gram", "3-gram Feature Embedding", 3, false, base_cell, base_attn, true},
        {"rnn", "RNN", cfg.model.n, false, CellKind::rnn, false, false},
        {"rnn+attention", "RNN+Attention", cfg.model.n, false, CellKind::rnn, true, false},
        {"lstm", "LSTM", cfg.model.n, false, CellKind::lstm, false, false},
        {"lstm+attention", "LSTM+Attention", cfg.model.n, false, CellKind::lstm, true, false},
        {"gru", "GRU", cfg.model.n, false, CellKind::gru, false, false},
        {"gru+attention", "GRU+Attention", cfg.model.n, false, CellKind::gru, true, false},
    };

    auto selected = [&only](const std::string& key) {
        if (only.empty()) return true;
        return std::find(only.begin(), only.end(), key) != only.end();
    };

    // Identical splits and balanced set for every row.
    SplitResult split = split_dataset(data, cfg.seed, cfg.train_fraction, cfg.val_fraction);
    std::vector<ContractRecord> balanced =
        rebalance(split.train, cfg.seed, cfg.undersample_benign_to);
    const std::vector<TokenSequence> train_tokens = tokenize_records(split.train.records);

    AblationTables tables;
    for (const RowSpec& row : rows) {
        if (!selected(row.key)) continue;
        TrainConfig rc = cfg;
        rc.seed = Rng::derive(cfg.seed, fnv1a(row.key));
        rc.model.n = row.n;
        rc.model.one_hot = row.one_hot;
        rc.model.cell = row.cell;
        rc.model.attention = row.attention;

        NgramVocabulary vocab = build_vocab(train_tokens, row.n, cfg.min_count, cfg.max_vocab);
        rc.model.vocab_size = vocab.size();

        auto enc_train = encode_records(balanced, vocab, rc.model.max_len, cfg.parallel);
        auto enc_val = encode_records(split.val.records, vocab, rc.model.max_len, cfg.parallel);
        auto enc_test = encode_records(split.test.records, vocab, rc.model.max_len, cfg.parallel);

        TrainResult tr = train_loop(enc_train, enc_val, rc);
        AblationRow out;
        out.key = row.key;
        out.name = row.name;
        out.metrics = evaluate(tr.params, rc.model, enc_test, cfg.parallel);
        out.param_count = param_count(rc.model);
        out.epochs_ran = tr.history.epochs.size();
        (row.embedding_table ? tables.embedding : tables.architecture).push_back(std::move(out));
    }

    if (selected("baseline")) {
        NgramVocabulary vocab =
            build_vocab(train_tokens, cfg.model.n, cfg.min_count, cfg.max_vocab);
        auto counts_of = [&vocab](const std::vector<ContractRecord>& records) {
            std::vector<CountSample> out;
            out.reserve(records.size());
            for (const auto& rec : records) {
                out.push_back({count_vector(tokenize(rec.bytecode_hex), vocab), *rec.label});
            }
            return out;
        };
        const auto train_counts = counts_of(balanced);
        const auto test_counts = counts_of(split.test.records);
        LinearModel lm = baseline_train(train_counts, cfg.model.lambda, 300, 1.0,
                                        Rng::derive(cfg.seed, fnv1a("baseline")));
        std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
        for (const auto& s : test_counts) {
            const int pred = predict_label(baseline_predict(lm, s.counts));
            if (s.label == 1) {
                pred == 1 ? ++tp : ++fn;
            } else {
                pred == 1 ? ++fp : ++tn;
            }
        }
        AblationRow out;
        out.key = "baseline";
        out.name = "Logistic Regression (count features)";
        out.metrics = EvalMetrics::from_counts(tp, fp, tn, fn);
        out.param_count = vocab.size() + 1;
        out.epochs_ran = 300;
        tables.baseline = std::move(out);
    }
    return tables;
}

std::string ablation_rows_tsv(const std::vector<AblationRow>& rows) {
    std::ostringstream out;
    out << "# note: row rankings are specific to the evaluation corpus and do not\n"
        << "# transfer across datasets; compare rows only within this run.\n";
    out << "row\taccuracy\tprecision\trecall\tf1\tparams\tepochs\n";
    for (const auto& r : rows) {
        out << r.name << "\t" << format_double(r.metrics.accuracy) << "\t"
            << format_double(r.metrics.precision) << "\t" << format_double(r.metrics.recall)
            << "\t" << format_double(r.metrics.f1) << "\t" << r.param_count << "\t"
            << r.epochs_ran << "\n";
    }
    return out.str();
}

std::string ablation_tsv(const AblationTables& tables) {
    std::ostringstream out;
    out << "# note: row rankings are specific to the evaluation corpus and do not\n"
        << "# transfer across datasets; compare rows only within this run.\n";
    out << "table\trow\taccuracy\tprecision\trecall\tf1\tparams\tepochs\n";
    auto emit = [&out](const char* table, const AblationRow& r) {
        out << table << "\t" << r.name << "\t" << format_double(r.metrics.accuracy) << "\t"
            << format_double(r.metrics.precision) << "\t" << format_double(r.metrics.recall)
            << "\t" << format_double(r.metrics.f1) << "\t" << r.param_count << "\t"
            << r.epochs_ran << "\n";
    };
    for (const auto& r : tables.embedding) emit("embedding", r);
    for (const auto& r : tables.architecture) emit("architecture", r);
    if (tables.baseline) emit("baseline", *tables.baseline);
    return out.str();
}

std::string ablation_pretty(const AblationTables& tables) {
    std::ostringstream out;
    auto section = [&out](const std::string& title, const std::vector<AblationRow>& rows) {
        if (rows.empty()) return;
        out << title << "\n";
        char buf[160];
        std::snprintf(buf, sizeof(buf), "  %-36s %9s %10s %8s %8s\n", "row", "accuracy",
                      "precision", "recall", "f1");
        out << buf;
        for (const auto& r : rows) {
            std::snprintf(buf, sizeof(buf), "  %-36s %9.3f %10.3f %8.3f %8.3f\n",
                          r.name.c_str(), r.metrics.accuracy, r.metrics.precision,
                          r.metrics.recall, r.metrics.f1);
            out << buf;
        }
    };
    section("Feature embedding comparison", tables.embedding);
    section("Architecture comparison", tables.architecture);
    if (tables.baseline) section("Comparator", {*tables.baseline});
    out << "note: row rankings are specific to the evaluation corpus and do not\n"
        << "transfer across datasets; compare rows only within this run.\n";
    return out.str();
}

std::string history_tsv(const TrainHistory& history) {
    std::ostringstream out;
    out << "epoch\ttrain_loss\ttrain_acc\tval_loss\tval_acc\n";
    for (const auto& e : history.epochs) {
        out << e.epoch << "\t" << format_double(e.train_loss) << "\t"
            << format_double(e.train_acc) << "\t" << format_double(e.val_loss) << "\t"
            << format_double(e.val_acc) << "\n";
    }
    out << "# best_epoch\t" << history.best_epoch << "\n";
    return out.str();
}

std::string metrics_report(const EvalMetrics& m) {
    std::ostringstream out;
    out << "accuracy\t" << format_double(m.accuracy) << "\n"
        << "precision\t" << format_double(m.precision) << "\n"
        << "recall\t" << format_double(m.recall) << "\n"
        << "f1\t" << format_double(m.f1) << "\n"
        << "tp\t" << m.tp << "\nfp\t" << m.fp << "\ntn\t" << m.tn << "\nfn\t" << m.fn << "\n";
    return out.str();
}

}  // namespace scs
