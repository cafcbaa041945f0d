#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "scs/ngram.hpp"
#include "scs/tensor.hpp"

namespace scs {

enum class CellKind { rnn, lstm, gru };

std::string to_string(CellKind kind);
CellKind cell_kind_from_string(const std::string& name);

struct ModelConfig {
    std::size_t n = 2;            // n-gram order of the vocabulary
    std::size_t vocab_size = 0;   // including PAD/UNK
    std::size_t embed_dim = 32;
    std::size_t hidden_dim = 64;
    CellKind cell = CellKind::gru;
    bool attention = true;
    bool one_hot = false;         // identity embedding (feature-direct variant)
    double lambda = 1e-4;
    std::size_t max_len = 2048;

    // Width of the vector the cell consumes per step.
    std::size_t input_dim() const { return one_hot ? vocab_size : embed_dim; }
    void validate() const;
};

// Gate slots: RNN uses slot 0; GRU 0=update, 1=reset, 2=candidate;
// LSTM 0=input, 1=forget, 2=output, 3=cell candidate.
std::size_t gate_count(CellKind kind);

struct ModelParams {
    Tensor embedding;              // vocab_size x E; empty when one_hot
    std::vector<Tensor> w_input;   // per gate: input_dim x d
    std::vector<Tensor> w_state;   // per gate: d x d
    std::vector<Tensor> bias;      // per gate: d
    Tensor context;                // d; empty when attention is off
    Tensor head_w;                 // d
    double head_b = 0.0;
};

ModelParams init_params(const ModelConfig& cfg, Rng& rng);

// Closed-form trainable parameter total for a config.
std::size_t param_count(const ModelConfig& cfg);

struct EncodedBatchItem;  // fwd

struct CellState {
    std::vector<double> h;
    std::vector<double> c;  // LSTM only
};

// One recurrence step. `gates` (when non-null) receives the post-nonlinearity
// gate activations needed by the backward pass.
CellState cell_step(CellKind kind, const ModelParams& params, const ModelConfig& cfg,
                    const std::vector<double>& x, const CellState& prev,
                    std::array<std::vector<double>, 4>* gates = nullptr);

struct AttentionResult {
    std::vector<double> scores;   // a_i = h_i . V / sqrt(d)
    std::vector<double> weights;  // alpha = softmax(a)
    std::vector<double> pooled;   // c = sum_i alpha_i h_i
};

AttentionResult attention_pool(const std::vector<std::vector<double>>& hidden,
                               const Tensor& context);

// Everything the backward pass (and the detection report) needs from one
// forward evaluation.
struct ForwardTrace {
    double prob = 0.0;
    double logit = 0.0;
    std::size_t len = 0;                       // real steps: min(true_length, max_len)
    std::vector<std::uint32_t> ids;            // ids consumed, length len
    std::vector<std::vector<double>> hidden;   // h_1..h_len
    std::vector<std::vector<double>> cell;     // LSTM cell states
    std::vector<std::array<std::vector<double>, 4>> gates;
    std::vector<double> scores;                // attention scores (empty if off)
    std::vector<double> attn;                  // attention weights (empty if off)
    std::vector<double> pooled;                // vector fed to the sigmoid head
};

// PAD positions beyond true_length never enter the recurrence or the
// attention, so padding is output-neutral. Throws EmptySequence when the
// sequence has no real positions.
ForwardTrace forward(const ModelParams& params, const ModelConfig& cfg,
                     const EncodedSequence& enc);

// Forward without retaining per-step caches.
double predict_prob(const ModelParams& params, const ModelConfig& cfg,
                    const EncodedSequence& enc);

// 0.5 and above maps to scam; only the < 0.5 branch is safe.
int predict_label(double prob);

struct LossParts {
    double total = 0.0;
    double data = 0.0;  // cross-entropy (batch mean when batched)
    double reg = 0.0;   // (lambda/2) * sum of squared regularized weights
};

// Probabilities are clamped to [1e-12, 1-1e-12] before the logs.
LossParts loss(double prob, int label, const ModelParams& params, double lambda);
LossParts loss(const std::vector<double>& probs, const std::vector<int>& labels,
               const ModelParams& params, double lambda);

// L2 applies to the gate matrices, the context vector and the head weights;
// biases and the embedding table are not regularized.
double reg_term(const ModelParams& params, double lambda);

// Per-sample gradient; embedding rows kept sparse.
struct SampleGrad {
    std::vector<Tensor> w_input, w_state, bias;
    Tensor context;
    Tensor head_w;
    double head_b = 0.0;
    std::map<std::uint32_t, std::vector<double>> embedding_rows;
};

// Batch gradient with the same dense shapes as ModelParams.
struct BatchGrad {
    Tensor embedding;
    std::vector<Tensor> w_input, w_state, bias;
    Tensor context;
    Tensor head_w;
    double head_b = 0.0;

    static BatchGrad zeros_like(const ModelParams& params, const ModelConfig& cfg);
    void accumulate(const SampleGrad& g, double scale);
    void add_l2(const ModelParams& params, double lambda);
};

// Gradient of this sample's cross-entropy wrt every parameter (no 1/N, no reg).
SampleGrad sample_backward(const ModelParams& params, const ModelConfig& cfg, int label,
                           const ForwardTrace& trace);

struct LabeledSequence {
    EncodedSequence enc;
    int label = 0;
};

struct BatchResult {
    BatchGrad grads;            // gradient of (mean CE + reg)
    LossParts loss;
    std::vector<double> probs;  // per sample, batch order
};

// Forward+backward over a batch. `parallel` distributes samples over OpenMP
// threads; per-sample gradients are reduced in batch order afterwards, so the
// result is bit-identical to the serial reference for any thread count.
BatchResult batch_forward_backward(const ModelParams& params, const ModelConfig& cfg,
                                   const std::vector<LabeledSequence>& data,
                                   const std::vector<std::size_t>& batch_indices, bool parallel);

// ---- checkpoint io ----

struct Checkpoint {
    ModelParams params;
    ModelConfig config;
    std::uint64_t vocab_hash = 0;
};

void save_checkpoint(const ModelParams& params, const ModelConfig& cfg,
                     std::uint64_t vocab_hash, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);
// Rejects checkpoints whose vocabulary hash does not match.
Checkpoint load_checkpoint(const std::string& path, const NgramVocabulary& vocab);

}  // namespace scs
