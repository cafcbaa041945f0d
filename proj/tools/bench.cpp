// Compares the serial reference against the OpenMP batch kernels on a
// synthetic workload and confirms they agree bit for bit.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "scs/model.hpp"
#include "scs/ngram.hpp"

using namespace scs;

namespace {

std::vector<LabeledSequence> random_batch(const ModelConfig& cfg, std::size_t count,
                                          std::uint64_t seed) {
    Rng rng(seed);
    std::vector<LabeledSequence> out(count);
    for (auto& s : out) {
        s.label = static_cast<int>(rng.next_index(2));
        s.enc.true_length = cfg.max_len / 2 + rng.next_index(cfg.max_len / 2);
        s.enc.ids.assign(cfg.max_len, NgramVocabulary::kPad);
        for (std::size_t t = 0; t < s.enc.true_length; ++t) {
            s.enc.ids[t] = static_cast<std::uint32_t>(rng.next_index(cfg.vocab_size));
        }
    }
    return out;
}

double time_ms(const ModelParams& params, const ModelConfig& cfg,
               const std::vector<LabeledSequence>& data,
               const std::vector<std::size_t>& idx, bool parallel, int reps) {
    using clock = std::chrono::steady_clock;
    // warmup
    batch_forward_backward(params, cfg, data, idx, parallel);
    const auto t0 = clock::now();
    for (int r = 0; r < reps; ++r) batch_forward_backward(params, cfg, data, idx, parallel);
    const auto t1 = clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

bool grads_equal(const BatchGrad& a, const BatchGrad& b) {
    auto eq = [](const Tensor& x, const Tensor& y) {
        if (x.numel() != y.numel()) return false;
        for (std::size_t i = 0; i < x.numel(); ++i) {
            if (x[i] != y[i]) return false;
        }
        return true;
    };
    if (!eq(a.embedding, b.embedding) || !eq(a.context, b.context) ||
        !eq(a.head_w, b.head_w) || a.head_b != b.head_b) {
        return false;
    }
    for (std::size_t k = 0; k < a.w_input.size(); ++k) {
        if (!eq(a.w_input[k], b.w_input[k]) || !eq(a.w_state[k], b.w_state[k]) ||
            !eq(a.bias[k], b.bias[k])) {
            return false;
        }
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"serial vs OpenMP batch kernel benchmark"};
    std::size_t batch = 32, max_len = 256, vocab = 4096, embed = 32, hidden = 64;
    int reps = 5;
    app.add_option("--batch", batch, "samples per batch");
    app.add_option("--max-len", max_len, "sequence capacity");
    app.add_option("--vocab", vocab, "vocabulary size");
    app.add_option("--embed-dim", embed, "embedding width");
    app.add_option("--hidden-dim", hidden, "hidden width");
    app.add_option("--reps", reps, "timed repetitions");
    CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
    std::printf("openmp: %d threads\n", omp_get_max_threads());
#else
    std::printf("openmp: not compiled in\n");
#endif
    std::printf("%-6s %-10s %12s %12s %8s %6s\n", "cell", "attention", "serial ms", "openmp ms",
                "speedup", "equal");

    for (CellKind cell : {CellKind::rnn, CellKind::gru, CellKind::lstm}) {
        for (bool attention : {false, true}) {
            ModelConfig cfg;
            cfg.vocab_size = vocab;
            cfg.embed_dim = embed;
            cfg.hidden_dim = hidden;
            cfg.max_len = max_len;
            cfg.cell = cell;
            cfg.attention = attention;
            cfg.lambda = 1e-4;

            Rng rng(1);
            ModelParams params = init_params(cfg, rng);
            auto data = random_batch(cfg, batch, 2);
            std::vector<std::size_t> idx(data.size());
            for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;

            BatchResult s = batch_forward_backward(params, cfg, data, idx, false);
            BatchResult p = batch_forward_backward(params, cfg, data, idx, true);
            const bool equal = grads_equal(s.grads, p.grads) && s.loss.total == p.loss.total;

            const double ms_serial = time_ms(params, cfg, data, idx, false, reps);
            const double ms_parallel = time_ms(params, cfg, data, idx, true, reps);
            std::printf("%-6s %-10s %12.2f %12.2f %7.2fx %6s\n", to_string(cell).c_str(),
                        attention ? "yes" : "no", ms_serial, ms_parallel,
                        ms_serial / ms_parallel, equal ? "yes" : "NO");
            if (!equal) return 1;
        }
    }
    return 0;
}
