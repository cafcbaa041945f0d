#include <doctest.h>

#include <nlohmann/json.hpp>

#include "scs/report.hpp"

using namespace scs;

namespace {

struct ReportFixture {
    NgramVocabulary vocab;
    ModelConfig cfg;
    ModelParams params;

    ReportFixture() {
        std::vector<TokenSequence> corpus{
            {"11", "57", "60", "80", "60", "40", "52"},
            {"60", "80", "11", "57", "00"},
        };
        vocab = build_vocab(corpus, 2, 1);
        cfg.n = 2;
        cfg.vocab_size = vocab.size();
        cfg.embed_dim = 6;
        cfg.hidden_dim = 8;
        cfg.max_len = 16;
        cfg.cell = CellKind::gru;
        cfg.attention = true;
        Rng rng(3);
        params = init_params(cfg, rng);
    }
};

}  // namespace

TEST_CASE("report carries probability, label and ranked features") {
    ReportFixture fx;
    TokenSequence tokens{"11", "57", "60", "80", "60", "40", "52"};
    ScamReport rep = make_report(fx.params, fx.cfg, fx.vocab, tokens,
                                 "01ade83a7ac7d13ab01f322d68bc2f8fe371ed27", "modelhash", 5);

    CHECK(rep.probability > 0.0);
    CHECK(rep.probability < 1.0);
    CHECK(rep.label == predict_label(rep.probability));
    REQUIRE(!rep.top_features.empty());
    for (std::size_t i = 1; i < rep.top_features.size(); ++i) {
        CHECK(rep.top_features[i - 1].weight >= rep.top_features[i].weight);
    }
    for (const auto& f : rep.top_features) {
        CHECK(f.weight <= 1.0);
        CHECK(f.weight >= 0.0);
        CHECK(f.ngram.size() == 4);
    }

    // The "1157" bigram renders through the opcode table.
    bool found = false;
    for (const auto& f : rep.top_features) {
        if (f.ngram == "1157") {
            CHECK(f.mnemonics == "GT JUMPI");
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("no-attention models produce no feature attributions") {
    ReportFixture fx;
    fx.cfg.attention = false;
    Rng rng(5);
    fx.params = init_params(fx.cfg, rng);
    ScamReport rep = make_report(fx.params, fx.cfg, fx.vocab, {"60", "80", "60"}, std::nullopt,
                                 "m", 5);
    CHECK(rep.top_features.empty());
}

TEST_CASE("json report is machine parseable and consistent") {
    ReportFixture fx;
    TokenSequence tokens{"60", "80", "11", "57", "00"};
    ScamReport rep = make_report(fx.params, fx.cfg, fx.vocab, tokens, std::nullopt, "abc123", 3);

    auto doc = nlohmann::json::parse(report_json(rep));
    CHECK(doc["address"].is_null());
    CHECK(doc["model"] == "abc123");
    const double p = doc["probability"].get<double>();
    CHECK(doc["label"] == (p < 0.5 ? "safe" : "scam"));
    CHECK(doc["top_features"].is_array());
    CHECK(doc["top_features"].size() <= 3);
    if (!doc["top_features"].empty()) {
        CHECK(doc["top_features"][0].contains("ngram"));
        CHECK(doc["top_features"][0].contains("mnemonics"));
        CHECK(doc["top_features"][0].contains("weight"));
    }

    const std::string pretty = report_pretty(rep);
    CHECK(pretty.find("scam probability") != std::string::npos);
}
