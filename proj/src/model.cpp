#include "scs/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "scs/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace scs {

namespace {

constexpr double kProbEps = 1e-12;

double sigmoid_scalar(double x) {
    return 1.0 / (1.0 + std::exp(-x));
}

double clamp_prob(double p) {
    return std::min(std::max(p, kProbEps), 1.0 - kProbEps);
}

// y += x . M  (x spans M.rows(), y spans M.cols())
void add_vec_mat(const double* x, std::size_t in, const Tensor& m, double* y) {
    const std::size_t out = m.cols();
    const double* row = m.data();
    for (std::size_t i = 0; i < in; ++i, row += out) {
        double xv = x[i];
        if (xv == 0.0) continue;
        for (std::size_t j = 0; j < out; ++j) y[j] += xv * row[j];
    }
}

// y += g . M^T  (g spans M.cols(), y spans M.rows())
void add_vec_mat_t(const double* g, const Tensor& m, double* y) {
    const std::size_t in = m.rows(), out = m.cols();
    const double* row = m.data();
    for (std::size_t i = 0; i < in; ++i, row += out) {
        double s = 0.0;
        for (std::size_t j = 0; j < out; ++j) s += g[j] * row[j];
        y[i] += s;
    }
}

// dM += outer(x, g)
void add_outer(Tensor& dm, const double* x, std::size_t in, const double* g) {
    const std::size_t out = dm.cols();
    double* row = dm.data();
    for (std::size_t i = 0; i < in; ++i, row += out) {
        double xv = x[i];
        if (xv == 0.0) continue;
        for (std::size_t j = 0; j < out; ++j) row[j] += xv * g[j];
    }
}

// Input abstraction: a dense embedding row, or the implicit one-hot basis
// vector for `id` (in which case x . W collapses to a row of W).
struct StepInput {
    bool one_hot = false;
    std::uint32_t id = 0;
    const double* x = nullptr;
    std::size_t x_len = 0;
};

void add_input_term(const StepInput& in, const Tensor& w, double* y) {
    if (in.one_hot) {
        const double* row = w.data() + static_cast<std::size_t>(in.id) * w.cols();
        for (std::size_t j = 0; j < w.cols(); ++j) y[j] += row[j];
    } else {
        add_vec_mat(in.x, in.x_len, w, y);
    }
}

// dW += outer(x, g); dx += g . W^T when an embedding row is being trained.
void input_backward(const StepInput& in, const Tensor& w, Tensor& dw, const double* g,
                    double* dx) {
    if (in.one_hot) {
        double* row = dw.data() + static_cast<std::size_t>(in.id) * dw.cols();
        for (std::size_t j = 0; j < dw.cols(); ++j) row[j] += g[j];
    } else {
        add_outer(dw, in.x, in.x_len, g);
        if (dx != nullptr) add_vec_mat_t(g, w, dx);
    }
}

StepInput make_input(const ModelParams& params, const ModelConfig& cfg, std::uint32_t id) {
    StepInput in;
    in.one_hot = cfg.one_hot;
    in.id = id;
    if (!cfg.one_hot) {
        in.x = params.embedding.data() + static_cast<std::size_t>(id) * cfg.embed_dim;
        in.x_len = cfg.embed_dim;
    }
    return in;
}

void gate_preact(const ModelParams& p, std::size_t g, const StepInput& in,
                 const std::vector<double>& state_vec, std::vector<double>& pre) {
    pre = p.bias[g].values();
    add_input_term(in, p.w_input[g], pre.data());
    add_vec_mat(state_vec.data(), state_vec.size(), p.w_state[g], pre.data());
}

void step_cell(CellKind kind, const ModelParams& p, const ModelConfig& cfg, const StepInput& in,
               const CellState& prev, CellState& next,
               std::array<std::vector<double>, 4>* gates) {
    const std::size_t d = cfg.hidden_dim;
    next.h.assign(d, 0.0);
    switch (kind) {
        case CellKind::rnn: {
            std::vector<double> pre;
            gate_preact(p, 0, in, prev.h, pre);
            for (std::size_t j = 0; j < d; ++j) next.h[j] = std::tanh(pre[j]);
            break;
        }
        case CellKind::gru: {
            std::vector<double> z, r, nin;
            gate_preact(p, 0, in, prev.h, z);
            gate_preact(p, 1, in, prev.h, r);
            for (std::size_t j = 0; j < d; ++j) {
                z[j] = sigmoid_scalar(z[j]);
                r[j] = sigmoid_scalar(r[j]);
            }
            std::vector<double> rh(d);
            for (std::size_t j = 0; j < d; ++j) rh[j] = r[j] * prev.h[j];
            gate_preact(p, 2, in, rh, nin);
            std::vector<double> hc(d);
            for (std::size_t j = 0; j < d; ++j) hc[j] = std::tanh(nin[j]);
            for (std::size_t j = 0; j < d; ++j) {
                next.h[j] = (1.0 - z[j]) * hc[j] + z[j] * prev.h[j];
            }
            if (gates) {
                (*gates)[0] = std::move(z);
                (*gates)[1] = std::move(r);
                (*gates)[2] = std::move(hc);
            }
            break;
        }
        case CellKind::lstm: {
            std::vector<double> gi, gf, go, gc;
            gate_preact(p, 0, in, prev.h, gi);
            gate_preact(p, 1, in, prev.h, gf);
            gate_preact(p, 2, in, prev.h, go);
            gate_preact(p, 3, in, prev.h, gc);
            next.c.assign(d, 0.0);
            const std::vector<double>& cprev = prev.c;
            for (std::size_t j = 0; j < d; ++j) {
                gi[j] = sigmoid_scalar(gi[j]);
                gf[j] = sigmoid_scalar(gf[j]);
                go[j] = sigmoid_scalar(go[j]);
                gc[j] = std::tanh(gc[j]);
                next.c[j] = gf[j] * (cprev.empty() ? 0.0 : cprev[j]) + gi[j] * gc[j];
                next.h[j] = go[j] * std::tanh(next.c[j]);
            }
            if (gates) {
                (*gates)[0] = std::move(gi);
                (*gates)[1] = std::move(gf);
                (*gates)[2] = std::move(go);
                (*gates)[3] = std::move(gc);
            }
            break;
        }
    }
}

}  // namespace

std::string to_string(CellKind kind) {
    switch (kind) {
        case CellKind::rnn: return "rnn";
        case CellKind::lstm: return "lstm";
        case CellKind::gru: return "gru";
    }
    return "gru";
}

CellKind cell_kind_from_string(const std::string& name) {
    if (name == "rnn") return CellKind::rnn;
    if (name == "lstm") return CellKind::lstm;
    if (name == "gru") return CellKind::gru;
    throw Error(ErrorKind::usage, "unknown cell kind '" + name + "' (rnn|lstm|gru)");
}

std::size_t gate_count(CellKind kind) {
    switch (kind) {
        case CellKind::rnn: return 1;
        case CellKind::gru: return 3;
        case CellKind::lstm: return 4;
    }
    return 1;
}

void ModelConfig::validate() const {
    if (vocab_size < 2) throw ShapeMismatch("vocab_size must be >= 2");
    if (!one_hot && embed_dim < 1) throw ShapeMismatch("embed_dim must be >= 1");
    if (hidden_dim < 1) throw ShapeMismatch("hidden_dim must be >= 1");
    if (lambda < 0.0) throw ShapeMismatch("lambda must be >= 0");
    if (max_len < 1) throw ShapeMismatch("max_len must be >= 1");
    if (n < 1) throw ShapeMismatch("n must be >= 1");
}

ModelParams init_params(const ModelConfig& cfg, Rng& rng) {
    cfg.validate();
    const std::size_t d = cfg.hidden_dim;
    const std::size_t in = cfg.input_dim();
    ModelParams p;
    if (!cfg.one_hot) {
        p.embedding = init_uniform({cfg.vocab_size, cfg.embed_dim}, rng, cfg.vocab_size,
                                   cfg.embed_dim);
    }
    const std::size_t gates = gate_count(cfg.cell);
    for (std::size_t g = 0; g < gates; ++g) {
        p.w_input.push_back(init_uniform({in, d}, rng, in, d));
        p.w_state.push_back(init_uniform({d, d}, rng, d, d));
        p.bias.push_back(Tensor::vector(d));
    }
    if (cfg.attention) p.context = init_uniform({d}, rng, d, 1);
    p.head_w = init_uniform({d}, rng, d, 1);
    p.head_b = 0.0;
    return p;
}

std::size_t param_count(const ModelConfig& cfg) {
    const std::size_t d = cfg.hidden_dim;
    const std::size_t in = cfg.input_dim();
    std::size_t total = cfg.one_hot ? 0 : cfg.vocab_size * cfg.embed_dim;
    total += gate_count(cfg.cell) * (in * d + d * d + d);
    if (cfg.attention) total += d;
    total += d + 1;  // head
    return total;
}

CellState cell_step(CellKind kind, const ModelParams& params, const ModelConfig& cfg,
                    const std::vector<double>& x, const CellState& prev,
                    std::array<std::vector<double>, 4>* gates) {
    if (x.size() != cfg.input_dim()) throw ShapeMismatch("cell_step input width");
    StepInput in;
    in.one_hot = false;
    in.x = x.data();
    in.x_len = x.size();
    CellState next;
    step_cell(kind, params, cfg, in, prev, next, gates);
    return next;
}

AttentionResult attention_pool(const std::vector<std::vector<double>>& hidden,
                               const Tensor& context) {
    if (hidden.empty()) throw EmptySequence();
    const std::size_t d = context.numel();
    AttentionResult res;
    res.scores.resize(hidden.size());
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    for (std::size_t i = 0; i < hidden.size(); ++i) {
        if (hidden[i].size() != d) throw ShapeMismatch("attention_pool hidden width");
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += hidden[i][j] * context[j];
        res.scores[i] = s * inv_sqrt_d;
    }
    res.weights = softmax(res.scores);
    res.pooled.assign(d, 0.0);
    for (std::size_t i = 0; i < hidden.size(); ++i) {
        for (std::size_t j = 0; j < d; ++j) res.pooled[j] += res.weights[i] * hidden[i][j];
    }
    return res;
}

ForwardTrace forward(const ModelParams& params, const ModelConfig& cfg,
                     const EncodedSequence& enc) {
    const std::size_t len = std::min(enc.true_length, cfg.max_len);
    if (len == 0) throw EmptySequence();
    if (enc.ids.size() != cfg.max_len) throw ShapeMismatch("encoded length != max_len");

    ForwardTrace tr;
    tr.len = len;
    tr.ids.assign(enc.ids.begin(), enc.ids.begin() + static_cast<std::ptrdiff_t>(len));
    tr.hidden.resize(len);
    const bool is_lstm = cfg.cell == CellKind::lstm;
    if (is_lstm) tr.cell.resize(len);
    if (cfg.cell != CellKind::rnn) tr.gates.resize(len);

    CellState state;
    state.h.assign(cfg.hidden_dim, 0.0);
    if (is_lstm) state.c.assign(cfg.hidden_dim, 0.0);
    for (std::size_t t = 0; t < len; ++t) {
        const std::uint32_t id = tr.ids[t];
        if (id >= cfg.vocab_size) throw ShapeMismatch("token id out of vocab range");
        CellState next;
        step_cell(cfg.cell, params, cfg, make_input(params, cfg, id), state, next,
                  cfg.cell == CellKind::rnn ? nullptr : &tr.gates[t]);
        tr.hidden[t] = next.h;
        if (is_lstm) tr.cell[t] = next.c;
        state = std::move(next);
    }

    if (cfg.attention) {
        AttentionResult at = attention_pool(tr.hidden, params.context);
        tr.scores = std::move(at.scores);
        tr.attn = std::move(at.weights);
        tr.pooled = std::move(at.pooled);
    } else {
        tr.pooled = tr.hidden.back();
    }

    double logit = params.head_b;
    for (std::size_t j = 0; j < cfg.hidden_dim; ++j) logit += params.head_w[j] * tr.pooled[j];
    tr.logit = logit;
    tr.prob = sigmoid_scalar(logit);
    return tr;
}

double predict_prob(const ModelParams& params, const ModelConfig& cfg,
                    const EncodedSequence& enc) {
    return forward(params, cfg, enc).prob;
}

int predict_label(double prob) {
    return prob < 0.5 ? 0 : 1;
}

double reg_term(const ModelParams& params, double lambda) {
    if (lambda == 0.0) return 0.0;
    double sq = 0.0;
    auto add_sq = [&sq](const Tensor& t) {
        for (std::size_t i = 0; i < t.numel(); ++i) sq += t[i] * t[i];
    };
    for (const auto& t : params.w_input) add_sq(t);
    for (const auto& t : params.w_state) add_sq(t);
    add_sq(params.context);
    add_sq(params.head_w);
    return 0.5 * lambda * sq;
}

LossParts loss(double prob, int label, const ModelParams& params, double lambda) {
    return loss(std::vector<double>{prob}, std::vector<int>{label}, params, lambda);
}

LossParts loss(const std::vector<double>& probs, const std::vector<int>& labels,
               const ModelParams& params, double lambda) {
    if (probs.size() != labels.size() || probs.empty()) throw ShapeMismatch("loss batch sizes");
    LossParts parts;
    double sum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        double p = clamp_prob(probs[i]);
        sum += labels[i] == 1 ? -std::log(p) : -std::log(1.0 - p);
    }
    parts.data = sum / static_cast<double>(probs.size());
    parts.reg = reg_term(params, lambda);
    parts.total = parts.data + parts.reg;
    return parts;
}

BatchGrad BatchGrad::zeros_like(const ModelParams& params, const ModelConfig& cfg) {
    BatchGrad g;
    if (!cfg.one_hot) g.embedding = Tensor::zeros(params.embedding.shape());
    for (const auto& t : params.w_input) g.w_input.push_back(Tensor::zeros(t.shape()));
    for (const auto& t : params.w_state) g.w_state.push_back(Tensor::zeros(t.shape()));
    for (const auto& t : params.bias) g.bias.push_back(Tensor::zeros(t.shape()));
    if (cfg.attention) g.context = Tensor::zeros(params.context.shape());
    g.head_w = Tensor::zeros(params.head_w.shape());
    g.head_b = 0.0;
    return g;
}

void BatchGrad::accumulate(const SampleGrad& g, double scale) {
    auto axpy = [scale](Tensor& dst, const Tensor& src) {
        for (std::size_t i = 0; i < dst.numel(); ++i) dst[i] += scale * src[i];
    };
    for (std::size_t k = 0; k < w_input.size(); ++k) axpy(w_input[k], g.w_input[k]);
    for (std::size_t k = 0; k < w_state.size(); ++k) axpy(w_state[k], g.w_state[k]);
    for (std::size_t k = 0; k < bias.size(); ++k) axpy(bias[k], g.bias[k]);
    if (context.numel() > 0) axpy(context, g.context);
    axpy(head_w, g.head_w);
    head_b += scale * g.head_b;
    if (embedding.numel() > 0) {
        const std::size_t width = embedding.cols();
        for (const auto& [row, vec] : g.embedding_rows) {
            double* dst = embedding.data() + static_cast<std::size_t>(row) * width;
            for (std::size_t j = 0; j < width; ++j) dst[j] += scale * vec[j];
        }
    }
}

void BatchGrad::add_l2(const ModelParams& params, double lambda) {
    if (lambda == 0.0) return;
    auto add = [lambda](Tensor& dst, const Tensor& src) {
        for (std::size_t i = 0; i < dst.numel(); ++i) dst[i] += lambda * src[i];
    };
    for (std::size_t k = 0; k < w_input.size(); ++k) add(w_input[k], params.w_input[k]);
    for (std::size_t k = 0; k < w_state.size(); ++k) add(w_state[k], params.w_state[k]);
    if (context.numel() > 0) add(context, params.context);
    add(head_w, params.head_w);
}

SampleGrad sample_backward(const ModelParams& params, const ModelConfig& cfg, int label,
                           const ForwardTrace& trace) {
    const std::size_t d = cfg.hidden_dim;
    const std::size_t len = trace.len;

    SampleGrad g;
    const std::size_t gates = gate_count(cfg.cell);
    for (std::size_t k = 0; k < gates; ++k) {
        g.w_input.push_back(Tensor::zeros(params.w_input[k].shape()));
        g.w_state.push_back(Tensor::zeros(params.w_state[k].shape()));
        g.bias.push_back(Tensor::zeros(params.bias[k].shape()));
    }
    if (cfg.attention) g.context = Tensor::zeros(params.context.shape());
    g.head_w = Tensor::zeros(params.head_w.shape());

    // d(cross-entropy)/d(logit) for the sigmoid head.
    const double dlogit = trace.prob - static_cast<double>(label);
    g.head_b = dlogit;
    for (std::size_t j = 0; j < d; ++j) g.head_w[j] = dlogit * trace.pooled[j];

    std::vector<double> dpool(d);
    for (std::size_t j = 0; j < d; ++j) dpool[j] = dlogit * params.head_w[j];

    std::vector<std::vector<double>> dh(len, std::vector<double>(d, 0.0));
    if (cfg.attention) {
        const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
        std::vector<double> dalpha(len);
        for (std::size_t i = 0; i < len; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) s += dpool[j] * trace.hidden[i][j];
            dalpha[i] = s;
            for (std::size_t j = 0; j < d; ++j) dh[i][j] += trace.attn[i] * dpool[j];
        }
        std::vector<double> dscore = softmax_backward(trace.attn, dalpha);
        for (std::size_t i = 0; i < len; ++i) {
            const double ds = dscore[i] * inv_sqrt_d;
            for (std::size_t j = 0; j < d; ++j) {
                g.context[j] += ds * trace.hidden[i][j];
                dh[i][j] += ds * params.context[j];
            }
        }
    } else {
        dh[len - 1] = dpool;
    }

    const std::vector<double> zero(d, 0.0);
    std::vector<double> dcell_next(d, 0.0);  // LSTM carry
    std::vector<double> dx(cfg.one_hot ? 0 : cfg.embed_dim);

    for (std::size_t ti = len; ti-- > 0;) {
        const std::vector<double>& hprev = ti > 0 ? trace.hidden[ti - 1] : zero;
        const std::vector<double>& dcurr = dh[ti];
        const StepInput in = make_input(params, cfg, trace.ids[ti]);
        std::vector<double> dh_prev(d, 0.0);
        if (!cfg.one_hot) std::fill(dx.begin(), dx.end(), 0.0);
        double* dxp = cfg.one_hot ? nullptr : dx.data();

        switch (cfg.cell) {
            case CellKind::rnn: {
                std::vector<double> du(d);
                for (std::size_t j = 0; j < d; ++j) {
                    const double h = trace.hidden[ti][j];
                    du[j] = dcurr[j] * (1.0 - h * h);
                }
                for (std::size_t j = 0; j < d; ++j) g.bias[0][j] += du[j];
                input_backward(in, params.w_input[0], g.w_input[0], du.data(), dxp);
                add_outer(g.w_state[0], hprev.data(), d, du.data());
                add_vec_mat_t(du.data(), params.w_state[0], dh_prev.data());
                break;
            }
            case CellKind::gru: {
                const auto& z = trace.gates[ti][0];
                const auto& r = trace.gates[ti][1];
                const auto& hc = trace.gates[ti][2];
                std::vector<double> dnin(d), dzin(d), drin(d), drh(d, 0.0), rh(d);
                for (std::size_t j = 0; j < d; ++j) {
                    const double dhj = dcurr[j];
                    const double dhc = dhj * (1.0 - z[j]);
                    dnin[j] = dhc * (1.0 - hc[j] * hc[j]);
                    const double dz = dhj * (hprev[j] - hc[j]);
                    dzin[j] = dz * z[j] * (1.0 - z[j]);
                    dh_prev[j] += dhj * z[j];
                    rh[j] = r[j] * hprev[j];
                }
                for (std::size_t j = 0; j < d; ++j) g.bias[2][j] += dnin[j];
                input_backward(in, params.w_input[2], g.w_input[2], dnin.data(), dxp);
                add_outer(g.w_state[2], rh.data(), d, dnin.data());
                add_vec_mat_t(dnin.data(), params.w_state[2], drh.data());
                for (std::size_t j = 0; j < d; ++j) {
                    const double dr = drh[j] * hprev[j];
                    drin[j] = dr * r[j] * (1.0 - r[j]);
                    dh_prev[j] += drh[j] * r[j];
                }
                for (std::size_t j = 0; j < d; ++j) g.bias[0][j] += dzin[j];
                input_backward(in, params.w_input[0], g.w_input[0], dzin.data(), dxp);
                add_outer(g.w_state[0], hprev.data(), d, dzin.data());
                add_vec_mat_t(dzin.data(), params.w_state[0], dh_prev.data());
                for (std::size_t j = 0; j < d; ++j) g.bias[1][j] += drin[j];
                input_backward(in, params.w_input[1], g.w_input[1], drin.data(), dxp);
                add_outer(g.w_state[1], hprev.data(), d, drin.data());
                add_vec_mat_t(drin.data(), params.w_state[1], dh_prev.data());
                break;
            }
            case CellKind::lstm: {
                const auto& gi = trace.gates[ti][0];
                const auto& gf = trace.gates[ti][1];
                const auto& go = trace.gates[ti][2];
                const auto& gc = trace.gates[ti][3];
                const std::vector<double>& cprev = ti > 0 ? trace.cell[ti - 1] : zero;
                std::vector<double> din(d), dfn(d), don(d), dgn(d), dcell_prev(d);
                for (std::size_t j = 0; j < d; ++j) {
                    const double tc = std::tanh(trace.cell[ti][j]);
                    const double dov = dcurr[j] * tc;
                    const double dct = dcell_next[j] + dcurr[j] * go[j] * (1.0 - tc * tc);
                    din[j] = dct * gc[j] * gi[j] * (1.0 - gi[j]);
                    dfn[j] = dct * cprev[j] * gf[j] * (1.0 - gf[j]);
                    don[j] = dov * go[j] * (1.0 - go[j]);
                    dgn[j] = dct * gi[j] * (1.0 - gc[j] * gc[j]);
                    dcell_prev[j] = dct * gf[j];
                }
                const std::array<const std::vector<double>*, 4> dpre = {&din, &dfn, &don, &dgn};
                for (std::size_t k = 0; k < 4; ++k) {
                    for (std::size_t j = 0; j < d; ++j) g.bias[k][j] += (*dpre[k])[j];
                    input_backward(in, params.w_input[k], g.w_input[k], dpre[k]->data(), dxp);
                    add_outer(g.w_state[k], hprev.data(), d, dpre[k]->data());
                    add_vec_mat_t(dpre[k]->data(), params.w_state[k], dh_prev.data());
                }
                dcell_next = std::move(dcell_prev);
                break;
            }
        }

        if (!cfg.one_hot) {
            auto [it, inserted] = g.embedding_rows.try_emplace(trace.ids[ti]);
            if (inserted) it->second.assign(cfg.embed_dim, 0.0);
            for (std::size_t j = 0; j < cfg.embed_dim; ++j) it->second[j] += dx[j];
        }
        if (ti > 0) {
            for (std::size_t j = 0; j < d; ++j) dh[ti - 1][j] += dh_prev[j];
        }
    }
    return g;
}

BatchResult batch_forward_backward(const ModelParams& params, const ModelConfig& cfg,
                                   const std::vector<LabeledSequence>& data,
                                   const std::vector<std::size_t>& batch_indices,
                                   bool parallel) {
    const std::size_t b = batch_indices.size();
    if (b == 0) throw ShapeMismatch("empty batch");

    std::vector<SampleGrad> per_sample(b);
    std::vector<double> probs(b, 0.0);
    std::vector<int> labels(b, 0);

    auto run_one = [&](std::size_t k) {
        const LabeledSequence& s = data[batch_indices[k]];
        ForwardTrace tr = forward(params, cfg, s.enc);
        probs[k] = tr.prob;
        labels[k] = s.label;
        per_sample[k] = sample_backward(params, cfg, s.label, tr);
    };

    if (parallel) {
        std::exception_ptr error;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
        for (std::size_t k = 0; k < b; ++k) {
            try {
                run_one(k);
            } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
                if (!error) error = std::current_exception();
            }
        }
        if (error) std::rethrow_exception(error);
    } else {
        for (std::size_t k = 0; k < b; ++k) run_one(k);
    }

    BatchResult res;
    res.grads = BatchGrad::zeros_like(params, cfg);
    const double inv_b = 1.0 / static_cast<double>(b);
    for (std::size_t k = 0; k < b; ++k) res.grads.accumulate(per_sample[k], inv_b);
    res.grads.add_l2(params, cfg.lambda);
    res.loss = loss(probs, labels, params, cfg.lambda);
    res.probs = std::move(probs);
    return res;
}

// ---- checkpoint io ----

namespace {

constexpr char kMagic[8] = {'S', 'C', 'S', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kCheckpointVersion = 1;

void put_bytes(std::ostream& out, const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void put_u8(std::ostream& out, std::uint8_t v) {
    put_bytes(out, &v, 1);
}

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    put_bytes(out, b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    put_bytes(out, b, 8);
}

void put_f64(std::ostream& out, double v) {
    put_u64(out, std::bit_cast<std::uint64_t>(v));
}

void get_bytes(std::istream& in, void* p, std::size_t n) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (in.gcount() != static_cast<std::streamsize>(n)) {
        throw CorruptFile("unexpected end of checkpoint");
    }
}

std::uint8_t get_u8(std::istream& in) {
    std::uint8_t v;
    get_bytes(in, &v, 1);
    return v;
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    get_bytes(in, b, 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    get_bytes(in, b, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& in) {
    return std::bit_cast<double>(get_u64(in));
}

void put_tensor(std::ostream& out, const Tensor& t) {
    put_u8(out, static_cast<std::uint8_t>(t.rank()));
    for (std::size_t dim : t.shape()) put_u64(out, dim);
    for (std::size_t i = 0; i < t.numel(); ++i) put_f64(out, t[i]);
}

Tensor get_tensor(std::istream& in) {
    const std::size_t rank = get_u8(in);
    if (rank > 2) throw CorruptFile("tensor rank > 2");
    std::vector<std::size_t> shape(rank);
    std::size_t numel = 1;
    for (std::size_t i = 0; i < rank; ++i) {
        shape[i] = static_cast<std::size_t>(get_u64(in));
        if (shape[i] == 0 || shape[i] > (1u << 28)) throw CorruptFile("implausible tensor dim");
        numel *= shape[i];
    }
    std::vector<double> values(numel);
    for (auto& v : values) v = get_f64(in);
    return Tensor(std::move(shape), std::move(values));
}

}  // namespace

void save_checkpoint(const ModelParams& params, const ModelConfig& cfg,
                     std::uint64_t vocab_hash, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CorruptFile("cannot open " + path + " for writing");
    put_bytes(out, kMagic, sizeof(kMagic));
    put_u32(out, kCheckpointVersion);
    put_u64(out, cfg.n);
    put_u64(out, cfg.vocab_size);
    put_u64(out, cfg.embed_dim);
    put_u64(out, cfg.hidden_dim);
    put_u8(out, static_cast<std::uint8_t>(cfg.cell));
    put_u8(out, cfg.attention ? 1 : 0);
    put_u8(out, cfg.one_hot ? 1 : 0);
    put_f64(out, cfg.lambda);
    put_u64(out, cfg.max_len);
    put_u64(out, vocab_hash);

    if (!cfg.one_hot) put_tensor(out, params.embedding);
    for (std::size_t g = 0; g < gate_count(cfg.cell); ++g) {
        put_tensor(out, params.w_input[g]);
        put_tensor(out, params.w_state[g]);
        put_tensor(out, params.bias[g]);
    }
    if (cfg.attention) put_tensor(out, params.context);
    put_tensor(out, params.head_w);
    put_f64(out, params.head_b);
    if (!out) throw CorruptFile("write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CorruptFile("cannot open " + path);
    char magic[8];
    get_bytes(in, magic, sizeof(magic));
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw CorruptFile("bad magic in " + path);
    }
    const std::uint32_t version = get_u32(in);
    if (version != kCheckpointVersion) throw FormatVersionMismatch(version, kCheckpointVersion);

    Checkpoint ck;
    ModelConfig& cfg = ck.config;
    cfg.n = static_cast<std::size_t>(get_u64(in));
    cfg.vocab_size = static_cast<std::size_t>(get_u64(in));
    cfg.embed_dim = static_cast<std::size_t>(get_u64(in));
    cfg.hidden_dim = static_cast<std::size_t>(get_u64(in));
    const std::uint8_t cell = get_u8(in);
    if (cell > 2) throw CorruptFile("bad cell kind");
    cfg.cell = static_cast<CellKind>(cell);
    cfg.attention = get_u8(in) != 0;
    cfg.one_hot = get_u8(in) != 0;
    cfg.lambda = get_f64(in);
    cfg.max_len = static_cast<std::size_t>(get_u64(in));
    cfg.validate();
    ck.vocab_hash = get_u64(in);

    auto expect_shape = [](const Tensor& t, std::vector<std::size_t> shape, const char* what) {
        if (t.shape() != shape) throw CorruptFile(std::string("unexpected shape for ") + what);
    };
    const std::size_t d = cfg.hidden_dim;
    if (!cfg.one_hot) {
        ck.params.embedding = get_tensor(in);
        expect_shape(ck.params.embedding, {cfg.vocab_size, cfg.embed_dim}, "embedding");
    }
    for (std::size_t g = 0; g < gate_count(cfg.cell); ++g) {
        ck.params.w_input.push_back(get_tensor(in));
        expect_shape(ck.params.w_input.back(), {cfg.input_dim(), d}, "input weights");
        ck.params.w_state.push_back(get_tensor(in));
        expect_shape(ck.params.w_state.back(), {d, d}, "state weights");
        ck.params.bias.push_back(get_tensor(in));
        expect_shape(ck.params.bias.back(), {d}, "bias");
    }
    if (cfg.attention) {
        ck.params.context = get_tensor(in);
        expect_shape(ck.params.context, {d}, "context vector");
    }
    ck.params.head_w = get_tensor(in);
    expect_shape(ck.params.head_w, {d}, "head weights");
    ck.params.head_b = get_f64(in);

    in.peek();
    if (!in.eof()) throw CorruptFile("trailing bytes in " + path);
    return ck;
}

Checkpoint load_checkpoint(const std::string& path, const NgramVocabulary& vocab) {
    Checkpoint ck = load_checkpoint(path);
    if (ck.vocab_hash != vocab.hash()) throw VocabHashMismatch();
    if (ck.config.vocab_size != vocab.size() || ck.config.n != vocab.n()) {
        throw VocabHashMismatch();
    }
    return ck;
}

}  // namespace scs
