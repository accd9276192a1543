#include "punctr/tagger.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "punctr/binio.hpp"
#include "punctr/util.hpp"

namespace punctr {

namespace {

constexpr char kCkptMagic[4] = {'P', 'T', 'C', 'K'};
constexpr uint32_t kCkptVersion = 1;
constexpr double kLnEps = 1e-12;
constexpr double kMaskValue = -1e30;
constexpr double kInitStd = 0.02;

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2)); }

double gelu_grad(double x) {
    double cdf = 0.5 * (1.0 + std::erf(x * M_SQRT1_2));
    double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    return cdf + x * pdf;
}

struct LnCache {
    Matrix xhat;                  // normalized input
    std::vector<double> inv_std;  // per row
};

Matrix layer_norm(const Matrix& x, const Matrix& gain, const Matrix& bias, LnCache& cache) {
    Matrix y(x.rows, x.cols);
    cache.xhat = Matrix(x.rows, x.cols);
    cache.inv_std.assign(x.rows, 0.0);
    const double n = static_cast<double>(x.cols);
    for (size_t r = 0; r < x.rows; ++r) {
        const double* xr = x.row(r);
        double mean = 0.0;
        for (size_t c = 0; c < x.cols; ++c) mean += xr[c];
        mean /= n;
        double var = 0.0;
        for (size_t c = 0; c < x.cols; ++c) {
            double d = xr[c] - mean;
            var += d * d;
        }
        var /= n;
        double inv = 1.0 / std::sqrt(var + kLnEps);
        cache.inv_std[r] = inv;
        double* hr = cache.xhat.row(r);
        double* yr = y.row(r);
        for (size_t c = 0; c < x.cols; ++c) {
            hr[c] = (xr[c] - mean) * inv;
            yr[c] = gain.data[c] * hr[c] + bias.data[c];
        }
    }
    return y;
}

Matrix layer_norm_backward(const Matrix& dy, const LnCache& cache, const Matrix& gain,
                           Matrix& dgain, Matrix& dbias) {
    Matrix dx(dy.rows, dy.cols);
    const double n = static_cast<double>(dy.cols);
    for (size_t r = 0; r < dy.rows; ++r) {
        const double* dyr = dy.row(r);
        const double* hr = cache.xhat.row(r);
        double m1 = 0.0, m2 = 0.0;
        for (size_t c = 0; c < dy.cols; ++c) {
            double dxhat = dyr[c] * gain.data[c];
            m1 += dxhat;
            m2 += dxhat * hr[c];
            dgain.data[c] += dyr[c] * hr[c];
            dbias.data[c] += dyr[c];
        }
        m1 /= n;
        m2 /= n;
        double inv = cache.inv_std[r];
        double* dxr = dx.row(r);
        for (size_t c = 0; c < dy.cols; ++c)
            dxr[c] = inv * (dyr[c] * gain.data[c] - m1 - hr[c] * m2);
    }
    return dx;
}

// Inverted dropout; the mask holds 0 or 1/(1-p) factors and doubles as the
// backward multiplier. An empty mask means dropout was off.
void apply_dropout(Matrix& x, double p, Rng* rng, Matrix& mask) {
    if (rng == nullptr || p <= 0.0) return;
    mask = Matrix(x.rows, x.cols);
    const double scale = 1.0 / (1.0 - p);
    for (size_t i = 0; i < x.data.size(); ++i) {
        mask.data[i] = rng->bernoulli(p) ? 0.0 : scale;
        x.data[i] *= mask.data[i];
    }
}

void dropout_backward(Matrix& dx, const Matrix& mask) {
    if (mask.data.empty()) return;
    for (size_t i = 0; i < dx.data.size(); ++i) dx.data[i] *= mask.data[i];
}

struct LayerCache {
    Matrix x_in;
    Matrix q, k, v;
    std::vector<Matrix> probs;  // per head, seq x seq
    Matrix attn_concat;
    Matrix o_mask;
    LnCache ln1;
    Matrix x1;
    Matrix ffn_pre;  // x1 w1 + b1
    Matrix ffn_act;  // gelu(ffn_pre)
    Matrix g_mask;
    LnCache ln2;
    Matrix x2;
};

struct SeqCache {
    Matrix emb_sum;
    LnCache emb_ln;
    Matrix emb_mask;
    Matrix x0;
    std::vector<LayerCache> layers;
    Matrix logits;
};

// Forward for one sequence; attn[t] == 0 marks padding (keys masked out).
void forward_seq(const TaggerModel& model, const uint32_t* ids, const uint8_t* attn, size_t T,
                 Rng* train_rng, SeqCache& cache) {
    const auto& cfg = model.config;
    const size_t d = cfg.d_model;
    const size_t H = cfg.n_heads;
    const size_t dh = d / H;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    const double p = cfg.dropout_prob;

    cache.emb_sum = Matrix(T, d);
    for (size_t t = 0; t < T; ++t) {
        const double* tok = model.tok_emb.row(ids[t]);
        const double* pos = model.pos_emb.row(t);
        double* out = cache.emb_sum.row(t);
        for (size_t c = 0; c < d; ++c) out[c] = tok[c] + pos[c];
    }
    cache.x0 = layer_norm(cache.emb_sum, model.emb_ln_gain, model.emb_ln_bias, cache.emb_ln);
    apply_dropout(cache.x0, p, train_rng, cache.emb_mask);

    cache.layers.assign(model.layers.size(), {});
    const Matrix* x = &cache.x0;
    for (size_t l = 0; l < model.layers.size(); ++l) {
        const LayerParams& lp = model.layers[l];
        LayerCache& lc = cache.layers[l];
        lc.x_in = *x;

        lc.q = matmul(lc.x_in, lp.wq);
        add_bias_inplace(lc.q, lp.bq);
        lc.k = matmul(lc.x_in, lp.wk);
        add_bias_inplace(lc.k, lp.bk);
        lc.v = matmul(lc.x_in, lp.wv);
        add_bias_inplace(lc.v, lp.bv);

        lc.probs.assign(H, Matrix());
        lc.attn_concat = Matrix(T, d);
        for (size_t h = 0; h < H; ++h) {
            Matrix& prob = lc.probs[h];
            prob = Matrix(T, T);
            for (size_t i = 0; i < T; ++i) {
                const double* qr = lc.q.row(i) + h * dh;
                double* pr = prob.row(i);
                double mx = -std::numeric_limits<double>::infinity();
                for (size_t j = 0; j < T; ++j) {
                    double s = 0.0;
                    const double* kr = lc.k.row(j) + h * dh;
                    for (size_t c = 0; c < dh; ++c) s += qr[c] * kr[c];
                    s *= scale;
                    if (!attn[j]) s = kMaskValue;
                    pr[j] = s;
                    mx = std::max(mx, s);
                }
                double sum = 0.0;
                for (size_t j = 0; j < T; ++j) {
                    pr[j] = std::exp(pr[j] - mx);
                    sum += pr[j];
                }
                for (size_t j = 0; j < T; ++j) pr[j] /= sum;
                // weighted value sum for this head
                double* out = lc.attn_concat.row(i) + h * dh;
                for (size_t j = 0; j < T; ++j) {
                    double w = pr[j];
                    if (w == 0.0) continue;
                    const double* vr = lc.v.row(j) + h * dh;
                    for (size_t c = 0; c < dh; ++c) out[c] += w * vr[c];
                }
            }
        }

        Matrix o = matmul(lc.attn_concat, lp.wo);
        add_bias_inplace(o, lp.bo);
        apply_dropout(o, p, train_rng, lc.o_mask);

        add_inplace(o, lc.x_in);  // residual
        lc.x1 = layer_norm(o, lp.ln1_gain, lp.ln1_bias, lc.ln1);

        lc.ffn_pre = matmul(lc.x1, lp.ffn_w1);
        add_bias_inplace(lc.ffn_pre, lp.ffn_b1);
        lc.ffn_act = Matrix(lc.ffn_pre.rows, lc.ffn_pre.cols);
        for (size_t i = 0; i < lc.ffn_pre.data.size(); ++i)
            lc.ffn_act.data[i] = gelu(lc.ffn_pre.data[i]);
        Matrix g = matmul(lc.ffn_act, lp.ffn_w2);
        add_bias_inplace(g, lp.ffn_b2);
        apply_dropout(g, p, train_rng, lc.g_mask);

        add_inplace(g, lc.x1);  // residual
        lc.x2 = layer_norm(g, lp.ln2_gain, lp.ln2_bias, lc.ln2);
        x = &lc.x2;
    }

    cache.logits = matmul(*x, model.head_w);
    add_bias_inplace(cache.logits, model.head_b);
}

// Gradient tensor indices follow named_tensors() order.
struct GradView {
    Matrix* tok_emb;
    Matrix* pos_emb;
    Matrix* emb_ln_gain;
    Matrix* emb_ln_bias;
    struct Layer {
        Matrix *wq, *bq, *wk, *bk, *wv, *bv, *wo, *bo;
        Matrix *ln1_gain, *ln1_bias;
        Matrix *ffn_w1, *ffn_b1, *ffn_w2, *ffn_b2;
        Matrix *ln2_gain, *ln2_bias;
    };
    std::vector<Layer> layers;
    Matrix* head_w;
    Matrix* head_b;

    explicit GradView(Gradients& g, size_t n_layers) {
        size_t i = 0;
        tok_emb = &g.tensors[i++];
        pos_emb = &g.tensors[i++];
        emb_ln_gain = &g.tensors[i++];
        emb_ln_bias = &g.tensors[i++];
        layers.resize(n_layers);
        for (auto& l : layers) {
            l.wq = &g.tensors[i++];
            l.bq = &g.tensors[i++];
            l.wk = &g.tensors[i++];
            l.bk = &g.tensors[i++];
            l.wv = &g.tensors[i++];
            l.bv = &g.tensors[i++];
            l.wo = &g.tensors[i++];
            l.bo = &g.tensors[i++];
            l.ln1_gain = &g.tensors[i++];
            l.ln1_bias = &g.tensors[i++];
            l.ffn_w1 = &g.tensors[i++];
            l.ffn_b1 = &g.tensors[i++];
            l.ffn_w2 = &g.tensors[i++];
            l.ffn_b2 = &g.tensors[i++];
            l.ln2_gain = &g.tensors[i++];
            l.ln2_bias = &g.tensors[i++];
        }
        head_w = &g.tensors[i++];
        head_b = &g.tensors[i++];
    }
};

void backward_seq(const TaggerModel& model, const uint32_t* ids, size_t T, SeqCache& cache,
                  const Matrix& dlogits, GradView& grads) {
    const auto& cfg = model.config;
    const size_t d = cfg.d_model;
    const size_t H = cfg.n_heads;
    const size_t dh = d / H;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    const Matrix& x_top = model.layers.empty() ? cache.x0 : cache.layers.back().x2;
    add_inplace(*grads.head_w, matmul_tn(x_top, dlogits));
    add_inplace(*grads.head_b, column_sums(dlogits));
    Matrix dx = matmul_nt(dlogits, model.head_w);

    for (size_t l = model.layers.size(); l-- > 0;) {
        const LayerParams& lp = model.layers[l];
        LayerCache& lc = cache.layers[l];
        auto& gl = grads.layers[l];

        // x2 = LN2(x1 + g)
        Matrix dsum2 = layer_norm_backward(dx, lc.ln2, lp.ln2_gain, *gl.ln2_gain, *gl.ln2_bias);
        Matrix dx1 = dsum2;  // residual branch
        Matrix dg = dsum2;
        dropout_backward(dg, lc.g_mask);

        add_inplace(*gl.ffn_w2, matmul_tn(lc.ffn_act, dg));
        add_inplace(*gl.ffn_b2, column_sums(dg));
        Matrix df = matmul_nt(dg, lp.ffn_w2);
        for (size_t i = 0; i < df.data.size(); ++i)
            df.data[i] *= gelu_grad(lc.ffn_pre.data[i]);
        add_inplace(*gl.ffn_w1, matmul_tn(lc.x1, df));
        add_inplace(*gl.ffn_b1, column_sums(df));
        add_inplace(dx1, matmul_nt(df, lp.ffn_w1));

        // x1 = LN1(x_in + o)
        Matrix dsum1 = layer_norm_backward(dx1, lc.ln1, lp.ln1_gain, *gl.ln1_gain, *gl.ln1_bias);
        Matrix dx_in = dsum1;  // residual branch
        Matrix do_ = dsum1;
        dropout_backward(do_, lc.o_mask);

        add_inplace(*gl.wo, matmul_tn(lc.attn_concat, do_));
        add_inplace(*gl.bo, column_sums(do_));
        Matrix da = matmul_nt(do_, lp.wo);

        Matrix dq(T, d), dk(T, d), dv(T, d);
        for (size_t h = 0; h < H; ++h) {
            const Matrix& prob = lc.probs[h];
            // dP = dA_h V_h^T ; dV_h = P^T dA_h
            Matrix dprob(T, T);
            for (size_t i = 0; i < T; ++i) {
                const double* dar = da.row(i) + h * dh;
                double* dpr = dprob.row(i);
                for (size_t j = 0; j < T; ++j) {
                    const double* vr = lc.v.row(j) + h * dh;
                    double s = 0.0;
                    for (size_t c = 0; c < dh; ++c) s += dar[c] * vr[c];
                    dpr[j] = s;
                }
            }
            for (size_t j = 0; j < T; ++j) {
                double* dvr = dv.row(j) + h * dh;
                for (size_t i = 0; i < T; ++i) {
                    double w = prob.at(i, j);
                    if (w == 0.0) continue;
                    const double* dar = da.row(i) + h * dh;
                    for (size_t c = 0; c < dh; ++c) dvr[c] += w * dar[c];
                }
            }
            // softmax backward, then the 1/sqrt(dh) scale
            for (size_t i = 0; i < T; ++i) {
                const double* pr = prob.row(i);
                double* dpr = dprob.row(i);
                double dot = 0.0;
                for (size_t j = 0; j < T; ++j) dot += dpr[j] * pr[j];
                for (size_t j = 0; j < T; ++j) dpr[j] = pr[j] * (dpr[j] - dot) * scale;
            }
            // dQ_h = dS K_h ; dK_h = dS^T Q_h
            for (size_t i = 0; i < T; ++i) {
                const double* dpr = dprob.row(i);
                double* dqr = dq.row(i) + h * dh;
                for (size_t j = 0; j < T; ++j) {
                    double w = dpr[j];
                    if (w == 0.0) continue;
                    const double* kr = lc.k.row(j) + h * dh;
                    for (size_t c = 0; c < dh; ++c) dqr[c] += w * kr[c];
                    double* dkr = dk.row(j) + h * dh;
                    const double* qr = lc.q.row(i) + h * dh;
                    for (size_t c = 0; c < dh; ++c) dkr[c] += w * qr[c];
                }
            }
        }

        add_inplace(*gl.wq, matmul_tn(lc.x_in, dq));
        add_inplace(*gl.bq, column_sums(dq));
        add_inplace(*gl.wk, matmul_tn(lc.x_in, dk));
        add_inplace(*gl.bk, column_sums(dk));
        add_inplace(*gl.wv, matmul_tn(lc.x_in, dv));
        add_inplace(*gl.bv, column_sums(dv));
        add_inplace(dx_in, matmul_nt(dq, lp.wq));
        add_inplace(dx_in, matmul_nt(dk, lp.wk));
        add_inplace(dx_in, matmul_nt(dv, lp.wv));
        dx = std::move(dx_in);
    }

    dropout_backward(dx, cache.emb_mask);
    Matrix demb = layer_norm_backward(dx, cache.emb_ln, model.emb_ln_gain, *grads.emb_ln_gain,
                                      *grads.emb_ln_bias);
    for (size_t t = 0; t < T; ++t) {
        const double* dr = demb.row(t);
        double* tok = grads.tok_emb->row(ids[t]);
        double* pos = grads.pos_emb->row(t);
        for (size_t c = 0; c < d; ++c) {
            tok[c] += dr[c];
            pos[c] += dr[c];
        }
    }
}

void validate_batch(const TaggerModel& model, const Batch& batch, bool need_labels) {
    const auto& cfg = model.config;
    if (batch.batch_size == 0 || batch.seq_len == 0) throw InputError("empty batch");
    if (batch.seq_len > cfg.max_seq_len)
        throw InputError("sequence length " + std::to_string(batch.seq_len) +
                         " exceeds max_seq_len " + std::to_string(cfg.max_seq_len) +
                         "; window the input first");
    size_t n = batch.batch_size * batch.seq_len;
    if (batch.ids.size() != n || batch.attn_mask.size() != n)
        throw InputError("batch tensor sizes do not match batch_size * seq_len");
    for (uint32_t id : batch.ids)
        if (id >= cfg.vocab_size) throw InputError("token id out of range");
    if (need_labels) {
        if (batch.labels.size() != n || batch.label_mask.size() != n)
            throw InputError("labeled batch requires labels and label_mask");
        for (size_t i = 0; i < n; ++i)
            if (batch.label_mask[i] && batch.labels[i] >= kNumLabels)
                throw InputError("label id out of range");
    }
}

}  // namespace

void TaggerConfig::validate() const {
    if (d_model == 0 || n_heads == 0 || d_model % n_heads != 0)
        throw InputError("d_model must be a positive multiple of n_heads");
    if (n_layers < 1) throw InputError("n_layers must be >= 1");
    if (max_seq_len < 1) throw InputError("max_seq_len must be >= 1");
    if (vocab_size < 2) throw InputError("vocab must include <pad> and <unk>");
    if (dropout_prob < 0.0 || dropout_prob >= 1.0)
        throw InputError("dropout_prob must lie in [0,1)");
    if (ffn_dim == 0) throw InputError("ffn_dim must be >= 1");
}

uint32_t TaggerModel::encode_token(const std::string& token) const {
    if (token_to_id_.empty()) {
        for (uint32_t i = 0; i < vocab.size(); ++i) token_to_id_.emplace(vocab[i], i);
    }
    auto it = token_to_id_.find(token);
    return it == token_to_id_.end() ? kTagUnkId : it->second;
}

std::vector<uint32_t> TaggerModel::encode(const TokenSequence& tokens) const {
    std::vector<uint32_t> ids;
    ids.reserve(tokens.size());
    for (const auto& tok : tokens) ids.push_back(encode_token(tok));
    return ids;
}

std::vector<std::pair<std::string, Matrix*>> TaggerModel::named_tensors() {
    std::vector<std::pair<std::string, Matrix*>> out;
    out.emplace_back("tok_emb", &tok_emb);
    out.emplace_back("pos_emb", &pos_emb);
    out.emplace_back("emb_ln.gain", &emb_ln_gain);
    out.emplace_back("emb_ln.bias", &emb_ln_bias);
    for (size_t l = 0; l < layers.size(); ++l) {
        std::string p = "layer" + std::to_string(l) + ".";
        LayerParams& lp = layers[l];
        out.emplace_back(p + "wq", &lp.wq);
        out.emplace_back(p + "bq", &lp.bq);
        out.emplace_back(p + "wk", &lp.wk);
        out.emplace_back(p + "bk", &lp.bk);
        out.emplace_back(p + "wv", &lp.wv);
        out.emplace_back(p + "bv", &lp.bv);
        out.emplace_back(p + "wo", &lp.wo);
        out.emplace_back(p + "bo", &lp.bo);
        out.emplace_back(p + "ln1.gain", &lp.ln1_gain);
        out.emplace_back(p + "ln1.bias", &lp.ln1_bias);
        out.emplace_back(p + "ffn.w1", &lp.ffn_w1);
        out.emplace_back(p + "ffn.b1", &lp.ffn_b1);
        out.emplace_back(p + "ffn.w2", &lp.ffn_w2);
        out.emplace_back(p + "ffn.b2", &lp.ffn_b2);
        out.emplace_back(p + "ln2.gain", &lp.ln2_gain);
        out.emplace_back(p + "ln2.bias", &lp.ln2_bias);
    }
    out.emplace_back("head.w", &head_w);
    out.emplace_back("head.b", &head_b);
    return out;
}

std::vector<std::pair<std::string, const Matrix*>> TaggerModel::named_tensors() const {
    auto mutable_view = const_cast<TaggerModel*>(this)->named_tensors();
    std::vector<std::pair<std::string, const Matrix*>> out;
    out.reserve(mutable_view.size());
    for (auto& [name, m] : mutable_view) out.emplace_back(name, m);
    return out;
}

TaggerModel init_tagger(const TaggerConfig& cfg, const std::vector<std::string>& vocab) {
    cfg.validate();
    if (vocab.size() != cfg.vocab_size)
        throw InputError("vocab size does not match config.vocab_size");

    TaggerModel model;
    model.config = cfg;
    model.vocab = vocab;
    const size_t d = cfg.d_model;
    model.tok_emb = Matrix(cfg.vocab_size, d);
    model.pos_emb = Matrix(cfg.max_seq_len, d);
    model.emb_ln_gain = Matrix(1, d);
    model.emb_ln_bias = Matrix(1, d);
    model.layers.resize(cfg.n_layers);
    for (auto& lp : model.layers) {
        lp.wq = Matrix(d, d);
        lp.bq = Matrix(1, d);
        lp.wk = Matrix(d, d);
        lp.bk = Matrix(1, d);
        lp.wv = Matrix(d, d);
        lp.bv = Matrix(1, d);
        lp.wo = Matrix(d, d);
        lp.bo = Matrix(1, d);
        lp.ln1_gain = Matrix(1, d);
        lp.ln1_bias = Matrix(1, d);
        lp.ffn_w1 = Matrix(d, cfg.ffn_dim);
        lp.ffn_b1 = Matrix(1, cfg.ffn_dim);
        lp.ffn_w2 = Matrix(cfg.ffn_dim, d);
        lp.ffn_b2 = Matrix(1, d);
        lp.ln2_gain = Matrix(1, d);
        lp.ln2_bias = Matrix(1, d);
    }
    model.head_w = Matrix(d, kNumLabels);
    model.head_b = Matrix(1, kNumLabels);

    auto tensors = model.named_tensors();
    for (size_t i = 0; i < tensors.size(); ++i) {
        auto& [name, m] = tensors[i];
        if (name.ends_with("gain")) {
            std::fill(m->data.begin(), m->data.end(), 1.0);
            continue;
        }
        bool is_bias = name.ends_with("bias") || name.ends_with(".b") || name.ends_with("b1") ||
                       name.ends_with("b2") || name.ends_with("bq") || name.ends_with("bk") ||
                       name.ends_with("bv") || name.ends_with("bo");
        if (is_bias) continue;  // biases start at zero
        Rng rng(derive_seed(cfg.seed, i));
        for (double& v : m->data) v = rng.normal(0.0, kInitStd);
    }
    return model;
}

ForwardResult forward(const TaggerModel& model, const Batch& batch, bool capture_hidden) {
    validate_batch(model, batch, false);
    ForwardResult result;
    result.logits.reserve(batch.batch_size);
    if (capture_hidden) result.layer_outputs.resize(batch.batch_size);
    for (size_t s = 0; s < batch.batch_size; ++s) {
        SeqCache cache;
        forward_seq(model, batch.ids.data() + s * batch.seq_len,
                    batch.attn_mask.data() + s * batch.seq_len, batch.seq_len, nullptr, cache);
        if (capture_hidden) {
            auto& outs = result.layer_outputs[s];
            outs.push_back(cache.x0);
            for (const auto& lc : cache.layers) outs.push_back(lc.x2);
        }
        result.logits.push_back(std::move(cache.logits));
    }
    return result;
}

void Gradients::accumulate(const Gradients& other) {
    for (size_t i = 0; i < tensors.size(); ++i) add_inplace(tensors[i], other.tensors[i]);
}

void Gradients::scale(double s) {
    for (auto& m : tensors)
        for (double& v : m.data) v *= s;
}

Gradients zero_gradients(const TaggerModel& model) {
    Gradients g;
    for (const auto& [name, m] : model.named_tensors()) {
        (void)name;
        g.tensors.emplace_back(m->rows, m->cols);
    }
    return g;
}

double loss_and_grads(const TaggerModel& model, const Batch& batch, Gradients& grads,
                      Rng* train_rng) {
    validate_batch(model, batch, true);
    size_t n_masked = 0;
    for (uint8_t m : batch.label_mask) n_masked += m;
    if (n_masked == 0) throw InputError("batch has no unmasked label positions");

    GradView view(grads, model.layers.size());
    double loss = 0.0;
    const double inv_n = 1.0 / static_cast<double>(n_masked);

    for (size_t s = 0; s < batch.batch_size; ++s) {
        const uint32_t* ids = batch.ids.data() + s * batch.seq_len;
        const uint8_t* attn = batch.attn_mask.data() + s * batch.seq_len;
        const uint8_t* labels = batch.labels.data() + s * batch.seq_len;
        const uint8_t* lmask = batch.label_mask.data() + s * batch.seq_len;

        SeqCache cache;
        forward_seq(model, ids, attn, batch.seq_len, train_rng, cache);

        Matrix dlogits(batch.seq_len, kNumLabels);
        for (size_t t = 0; t < batch.seq_len; ++t) {
            if (!lmask[t]) continue;
            const double* lr = cache.logits.row(t);
            double mx = *std::max_element(lr, lr + kNumLabels);
            double sum = 0.0;
            for (int c = 0; c < kNumLabels; ++c) sum += std::exp(lr[c] - mx);
            double log_sum = std::log(sum) + mx;
            loss += (log_sum - lr[labels[t]]) * inv_n;
            double* dr = dlogits.row(t);
            for (int c = 0; c < kNumLabels; ++c) {
                double p = std::exp(lr[c] - log_sum);
                dr[c] = (p - (c == labels[t] ? 1.0 : 0.0)) * inv_n;
            }
        }
        backward_seq(model, ids, batch.seq_len, cache, dlogits, view);
    }
    if (!std::isfinite(loss)) throw std::runtime_error("non-finite training loss");
    return loss;
}

double batch_loss(const TaggerModel& model, const Batch& batch) {
    validate_batch(model, batch, true);
    size_t n_masked = 0;
    for (uint8_t m : batch.label_mask) n_masked += m;
    if (n_masked == 0) throw InputError("batch has no unmasked label positions");

    ForwardResult fr = forward(model, batch, false);
    double loss = 0.0;
    for (size_t s = 0; s < batch.batch_size; ++s) {
        const Matrix& logits = fr.logits[s];
        for (size_t t = 0; t < batch.seq_len; ++t) {
            size_t idx = s * batch.seq_len + t;
            if (!batch.label_mask[idx]) continue;
            const double* lr = logits.row(t);
            double mx = *std::max_element(lr, lr + kNumLabels);
            double sum = 0.0;
            for (int c = 0; c < kNumLabels; ++c) sum += std::exp(lr[c] - mx);
            loss += std::log(sum) + mx - lr[batch.labels[idx]];
        }
    }
    return loss / static_cast<double>(n_masked);
}

TaggerModel truncate_layers(const TaggerModel& model, uint32_t k, bool reset_head) {
    if (k < 1 || k > model.config.n_layers)
        throw InputError("truncation layer count must lie in [1, n_layers]");
    TaggerConfig cfg = model.config;
    cfg.n_layers = k;
    TaggerModel out = init_tagger(cfg, model.vocab);
    out.tok_emb = model.tok_emb;
    out.pos_emb = model.pos_emb;
    out.emb_ln_gain = model.emb_ln_gain;
    out.emb_ln_bias = model.emb_ln_bias;
    for (uint32_t l = 0; l < k; ++l) out.layers[l] = model.layers[l];
    if (!reset_head) {
        out.head_w = model.head_w;
        out.head_b = model.head_b;
    }
    return out;
}

Matrix window_logits(const TaggerModel& model, const std::vector<uint32_t>& ids, size_t lo,
                     size_t hi) {
    Batch batch;
    batch.batch_size = 1;
    batch.seq_len = hi - lo;
    batch.ids.assign(ids.begin() + static_cast<long>(lo), ids.begin() + static_cast<long>(hi));
    batch.attn_mask.assign(hi - lo, 1);
    return std::move(forward(model, batch, false).logits[0]);
}

std::vector<PunctLabel> predict(const TaggerModel& model, const TokenSequence& tokens) {
    if (tokens.empty()) throw InputError("cannot predict on an empty token sequence");
    std::vector<uint32_t> ids = model.encode(tokens);
    const size_t T = ids.size();
    const size_t L = model.config.max_seq_len;

    auto argmax_row = [](const double* row) {
        int best = 0;
        for (int c = 1; c < kNumLabels; ++c)
            if (row[c] > row[best]) best = c;
        return static_cast<PunctLabel>(best);
    };

    std::vector<PunctLabel> labels(T, PunctLabel::None);
    if (T <= L) {
        Matrix logits = window_logits(model, ids, 0, T);
        for (size_t t = 0; t < T; ++t) labels[t] = argmax_row(logits.row(t));
        return labels;
    }

    // overlapping windows, stride = half window, stitched at the midpoints
    // between window centers so every position uses its most central window
    const size_t stride = std::max<size_t>(1, L / 2);
    std::vector<size_t> starts;
    for (size_t s = 0;; s += stride) {
        if (s + L >= T) {
            starts.push_back(T - L);
            break;
        }
        starts.push_back(s);
    }
    size_t lo = 0;
    for (size_t w = 0; w < starts.size(); ++w) {
        size_t s = starts[w];
        size_t hi = w + 1 < starts.size() ? (s + starts[w + 1] + L) / 2 : T;
        Matrix logits = window_logits(model, ids, s, s + L);
        for (size_t t = lo; t < hi; ++t) labels[t] = argmax_row(logits.row(t - s));
        lo = hi;
    }
    return labels;
}

// ---------------------------------------------------------------------------
// checkpoints: raw little-endian float32 tensors with named shapes

void TaggerModel::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FileError("cannot open for writing: " + path);
    binio::write_magic(out, kCkptMagic, kCkptVersion);
    binio::write_pod<uint32_t>(out, config.vocab_size);
    binio::write_pod<uint32_t>(out, config.d_model);
    binio::write_pod<uint32_t>(out, config.n_heads);
    binio::write_pod<uint32_t>(out, config.n_layers);
    binio::write_pod<uint32_t>(out, config.ffn_dim);
    binio::write_pod<uint32_t>(out, config.max_seq_len);
    binio::write_pod<double>(out, config.dropout_prob);
    binio::write_pod<uint64_t>(out, config.seed);
    binio::write_pod<uint32_t>(out, static_cast<uint32_t>(vocab.size()));
    for (const auto& tok : vocab) binio::write_string(out, tok);

    auto tensors = named_tensors();
    binio::write_pod<uint32_t>(out, static_cast<uint32_t>(tensors.size()));
    for (const auto& [name, m] : tensors) {
        binio::write_string(out, name);
        binio::write_pod<uint32_t>(out, static_cast<uint32_t>(m->rows));
        binio::write_pod<uint32_t>(out, static_cast<uint32_t>(m->cols));
        for (double v : m->data) binio::write_pod<float>(out, static_cast<float>(v));
    }
    if (!out) throw FileError("write failed: " + path);
}

TaggerModel TaggerModel::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError("cannot open for reading: " + path);
    binio::check_magic(in, kCkptMagic, kCkptVersion, "tagger checkpoint");

    TaggerConfig cfg;
    cfg.vocab_size = binio::read_pod<uint32_t>(in);
    cfg.d_model = binio::read_pod<uint32_t>(in);
    cfg.n_heads = binio::read_pod<uint32_t>(in);
    cfg.n_layers = binio::read_pod<uint32_t>(in);
    cfg.ffn_dim = binio::read_pod<uint32_t>(in);
    cfg.max_seq_len = binio::read_pod<uint32_t>(in);
    cfg.dropout_prob = binio::read_pod<double>(in);
    cfg.seed = binio::read_pod<uint64_t>(in);
    uint32_t vocab_n = binio::read_pod<uint32_t>(in);
    if (vocab_n != cfg.vocab_size) throw FileError("checkpoint vocab size mismatch");
    std::vector<std::string> vocab(vocab_n);
    for (auto& tok : vocab) tok = binio::read_string(in);

    TaggerModel model = init_tagger(cfg, vocab);
    auto tensors = model.named_tensors();
    uint32_t count = binio::read_pod<uint32_t>(in);
    if (count != tensors.size()) throw FileError("checkpoint tensor count mismatch");
    for (auto& [name, m] : tensors) {
        std::string got = binio::read_string(in);
        if (got != name) throw FileError("checkpoint tensor order mismatch: " + got);
        uint32_t rows = binio::read_pod<uint32_t>(in);
        uint32_t cols = binio::read_pod<uint32_t>(in);
        if (rows != m->rows || cols != m->cols)
            throw FileError("checkpoint tensor shape mismatch: " + name);
        for (double& v : m->data) v = static_cast<double>(binio::read_pod<float>(in));
    }
    return model;
}

}  // namespace punctr
