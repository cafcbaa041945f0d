#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "scs/errors.hpp"
#include "scs/train.hpp"
#include "testutil/synth.hpp"

using namespace scs;

namespace {

Dataset tiny_labeled_dataset(std::size_t benign, std::size_t scam, std::uint64_t seed) {
    testutil::SynthSpec spec;
    spec.benign = benign;
    spec.scam = scam;
    spec.min_bytes = 8;
    spec.max_bytes = 20;
    return testutil::make_synthetic_corpus(spec, seed);
}

std::multiset<std::string> addresses(const Dataset& ds) {
    std::multiset<std::string> out;
    for (const auto& r : ds.records) out.insert(r.address);
    return out;
}

}  // namespace

TEST_CASE("split sizes are exact for N=100") {
    Dataset ds = tiny_labeled_dataset(70, 30, 1);
    SplitResult s = split_dataset(ds, 7);
    CHECK(s.train.records.size() == 60);
    CHECK(s.val.records.size() == 20);
    CHECK(s.test.records.size() == 20);
}

TEST_CASE("split is deterministic and partitions the dataset") {
    Rng rng(5);
    for (int iter = 0; iter < 20; ++iter) {
        const std::size_t benign = 5 + rng.next_index(40);
        const std::size_t scam = 3 + rng.next_index(20);
        Dataset ds = tiny_labeled_dataset(benign, scam, 100 + iter);
        const std::uint64_t seed = rng.next_u64();

        SplitResult a = split_dataset(ds, seed);
        SplitResult b = split_dataset(ds, seed);
        CHECK(a.train == b.train);
        CHECK(a.val == b.val);
        CHECK(a.test == b.test);

        // Union == dataset (as multisets), pairwise disjoint by address.
        std::multiset<std::string> all = addresses(ds);
        std::multiset<std::string> merged;
        for (const Dataset* part : {&a.train, &a.val, &a.test}) {
            for (const auto& r : part->records) merged.insert(r.address);
        }
        CHECK(merged == all);

        std::set<std::string> train_set, val_set;
        for (const auto& r : a.train.records) train_set.insert(r.address);
        for (const auto& r : a.val.records) {
            CHECK(train_set.count(r.address) == 0);
            val_set.insert(r.address);
        }
        for (const auto& r : a.test.records) {
            CHECK(train_set.count(r.address) == 0);
            CHECK(val_set.count(r.address) == 0);
        }
    }
}

TEST_CASE("split is stratified when arithmetic allows") {
    Dataset ds = tiny_labeled_dataset(80, 20, 3);
    SplitResult s = split_dataset(ds, 11);
    for (const Dataset* part : {&s.train, &s.val, &s.test}) {
        std::size_t pos = 0, neg = 0;
        for (const auto& r : part->records) (*r.label == 1 ? pos : neg)++;
        CHECK(pos > 0);
        CHECK(neg > 0);
    }
}

TEST_CASE("split rejects unlabeled records and tiny datasets") {
    Dataset ds = tiny_labeled_dataset(10, 5, 9);
    ds.records[3].label.reset();
    CHECK_THROWS_AS(split_dataset(ds, 1), UnlabeledRecord);

    Dataset small = tiny_labeled_dataset(2, 1, 9);
    small.records.resize(3);
    CHECK_THROWS_AS(split_dataset(small, 1), Error);
}

TEST_CASE("rebalance undersamples benign and oversamples scam") {
    SUBCASE("plenty of benign") {
        Dataset ds = tiny_labeled_dataset(50, 15, 13);
        auto out = rebalance(ds, 21, 20);
        std::size_t pos = 0, neg = 0;
        std::set<std::string> benign_seen;
        std::set<std::string> scam_seen;
        for (const auto& r : out) {
            if (*r.label == 1) {
                ++pos;
                scam_seen.insert(r.address);
            } else {
                ++neg;
                CHECK(benign_seen.insert(r.address).second);  // unique benign
            }
        }
        CHECK(pos == 20);
        CHECK(neg == 20);
        CHECK(scam_seen.size() == 15);  // every original scam retained
    }
    SUBCASE("benign below target") {
        Dataset ds = tiny_labeled_dataset(8, 3, 14);
        auto out = rebalance(ds, 22, 20);
        std::size_t pos = 0, neg = 0;
        for (const auto& r : out) (*r.label == 1 ? pos : neg)++;
        CHECK(pos == 8);
        CHECK(neg == 8);
    }
    SUBCASE("deterministic") {
        Dataset ds = tiny_labeled_dataset(30, 7, 15);
        auto a = rebalance(ds, 5, 10);
        auto b = rebalance(ds, 5, 10);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    }
    SUBCASE("missing class") {
        Dataset ds = tiny_labeled_dataset(10, 2, 16);
        for (auto& r : ds.records) r.label = 0;
        CHECK_THROWS_AS(rebalance(ds, 1, 10), MissingClass);
    }
}

TEST_CASE("metric identities") {
    EvalMetrics m = EvalMetrics::from_counts(9, 1, 8, 2);
    CHECK(m.accuracy == doctest::Approx(0.85).epsilon(1e-12));
    CHECK(m.precision == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(m.recall == doctest::Approx(9.0 / 11.0).epsilon(1e-9));
    CHECK(m.f1 == doctest::Approx(0.857143).epsilon(1e-5));

    EvalMetrics perfect = EvalMetrics::from_counts(5, 0, 5, 0);
    CHECK(perfect.accuracy == 1.0);
    CHECK(perfect.precision == 1.0);
    CHECK(perfect.recall == 1.0);
    CHECK(perfect.f1 == 1.0);

    EvalMetrics empty = EvalMetrics::from_counts(0, 0, 10, 0);
    CHECK(empty.precision == 0.0);
    CHECK(empty.recall == 0.0);
    CHECK(empty.f1 == 0.0);
    CHECK(empty.accuracy == 1.0);
}

TEST_CASE("training on the planted-marker corpus is deterministic and learns") {
    Dataset ds = tiny_labeled_dataset(60, 30, 17);

    TrainConfig cfg;
    cfg.seed = 5;
    cfg.epochs = 30;
    cfg.batch_size = 16;
    cfg.undersample_benign_to = 50;
    cfg.model.n = 2;
    cfg.model.embed_dim = 8;
    cfg.model.hidden_dim = 16;
    cfg.model.max_len = 32;
    cfg.model.cell = CellKind::gru;
    cfg.model.attention = true;
    cfg.model.lambda = 1e-4;

    PipelineResult a = train_pipeline(ds, cfg);
    PipelineResult b = train_pipeline(ds, cfg);

    REQUIRE(a.train.history.epochs.size() == b.train.history.epochs.size());
    for (std::size_t i = 0; i < a.train.history.epochs.size(); ++i) {
        CHECK(a.train.history.epochs[i].train_loss == b.train.history.epochs[i].train_loss);
        CHECK(a.train.history.epochs[i].val_loss == b.train.history.epochs[i].val_loss);
        CHECK(a.train.history.epochs[i].train_acc == b.train.history.epochs[i].train_acc);
    }
    CHECK(a.test_metrics.tp == b.test_metrics.tp);
    CHECK(a.test_metrics.f1 == b.test_metrics.f1);
    CHECK(history_tsv(a.train.history) == history_tsv(b.train.history));

    // Loss should come down markedly on this separable construction.
    CHECK(a.train.history.epochs.back().train_loss <
          0.5 * a.train.history.epochs.front().train_loss);
}

TEST_CASE("overfit sanity: 32 samples reach near-zero loss") {
    Dataset ds = tiny_labeled_dataset(16, 16, 19);

    TrainConfig cfg;
    cfg.seed = 3;
    cfg.epochs = 500;
    cfg.batch_size = 32;
    cfg.early_stop_train_loss = 0.01;
    cfg.model.n = 2;
    cfg.model.embed_dim = 8;
    cfg.model.hidden_dim = 16;
    cfg.model.max_len = 32;
    cfg.model.lambda = 0.0;

    NgramVocabulary vocab = build_vocab(tokenize_records(ds.records), 2, 1);
    ModelConfig mc = cfg.model;
    mc.vocab_size = vocab.size();
    cfg.model = mc;
    auto enc = encode_records(ds.records, vocab, mc.max_len);
    TrainResult tr = train_loop(enc, {}, cfg);
    CHECK(tr.history.epochs.back().train_loss < 0.01);
    CHECK(tr.history.epochs.size() <= 500);
}

TEST_CASE("divergent training is detected") {
    Dataset ds = tiny_labeled_dataset(10, 10, 23);
    NgramVocabulary vocab = build_vocab(tokenize_records(ds.records), 2, 1);

    TrainConfig cfg;
    cfg.seed = 1;
    cfg.epochs = 20;
    cfg.learning_rate = 1e300;  // guaranteed overflow into NaN
    cfg.model.n = 2;
    cfg.model.embed_dim = 4;
    cfg.model.hidden_dim = 8;
    cfg.model.max_len = 16;
    cfg.model.vocab_size = vocab.size();
    auto enc = encode_records(ds.records, vocab, cfg.model.max_len);
    CHECK_THROWS_AS(train_loop(enc, enc, cfg), DivergenceDetected);
}

TEST_CASE("vocabulary is a function of the training split only") {
    Dataset ds = tiny_labeled_dataset(40, 20, 29);
    SplitResult s = split_dataset(ds, 31);
    NgramVocabulary before = build_vocab(tokenize_records(s.train.records), 2, 1);

    // Permute and then replace the test split outright; the vocabulary input
    // is untouched.
    Rng rng(33);
    rng.shuffle(s.test.records);
    for (auto& r : s.test.records) r.bytecode_hex = "deadbeef";
    NgramVocabulary after = build_vocab(tokenize_records(s.train.records), 2, 1);
    CHECK(before.hash() == after.hash());
}
