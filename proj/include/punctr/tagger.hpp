#ifndef PUNCTR_TAGGER_HPP
#define PUNCTR_TAGGER_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "punctr/punct_codec.hpp"
#include "punctr/rng.hpp"
#include "punctr/tensor.hpp"
#include "punctr/tokens.hpp"

namespace punctr {

// Tagger-side reserved ids (independent of the n-gram LM alphabet).
constexpr uint32_t kPadId = 0;
constexpr uint32_t kTagUnkId = 1;

struct TaggerConfig {
    uint32_t vocab_size = 0;  // includes <pad> and <unk>
    uint32_t d_model = 64;
    uint32_t n_heads = 4;
    uint32_t n_layers = 4;
    uint32_t ffn_dim = 256;
    uint32_t max_seq_len = 300;
    double dropout_prob = 0.1;
    uint64_t seed = 13;

    void validate() const;
    bool operator==(const TaggerConfig&) const = default;
};

struct LayerParams {
    Matrix wq, bq, wk, bk, wv, bv, wo, bo;  // attention projections, y = x W + b
    Matrix ln1_gain, ln1_bias;
    Matrix ffn_w1, ffn_b1, ffn_w2, ffn_b2;
    Matrix ln2_gain, ln2_bias;
};

// Small bidirectional transformer encoder with a per-token 4-way
// classification head. Post-layer-norm blocks, GELU feed-forward, learned
// positional embeddings. Immutable models are safe for concurrent forward
// passes; each call owns its workspace.
struct TaggerModel {
    TaggerConfig config;
    std::vector<std::string> vocab;  // id -> token; [0]=<pad>, [1]=<unk>
    Matrix tok_emb;                  // vocab_size x d_model
    Matrix pos_emb;                  // max_seq_len x d_model
    Matrix emb_ln_gain, emb_ln_bias;
    std::vector<LayerParams> layers;  // bottom (input-adjacent) first
    Matrix head_w;                    // d_model x 4
    Matrix head_b;                    // 1 x 4

    uint32_t encode_token(const std::string& token) const;
    std::vector<uint32_t> encode(const TokenSequence& tokens) const;

    // every parameter tensor paired with a stable name, bottom-up order
    std::vector<std::pair<std::string, Matrix*>> named_tensors();
    std::vector<std::pair<std::string, const Matrix*>> named_tensors() const;

    void save(const std::string& path) const;
    static TaggerModel load(const std::string& path);

private:
    mutable std::unordered_map<std::string, uint32_t> token_to_id_;  // lazy
};

// Fresh model with scaled-normal weights (std 0.02), zero biases, unit
// layer-norm gains. Each tensor draws from its own derived seed stream, so
// models differing only in one dimension share all other tensors.
TaggerModel init_tagger(const TaggerConfig& cfg, const std::vector<std::string>& vocab);

// Padded batch. labels/label_mask may be empty for inference-only batches.
struct Batch {
    size_t batch_size = 0;
    size_t seq_len = 0;
    std::vector<uint32_t> ids;        // batch_size * seq_len
    std::vector<uint8_t> attn_mask;   // 1 = real token, 0 = padding
    std::vector<uint8_t> labels;      // gold label ids, 0..3
    std::vector<uint8_t> label_mask;  // 1 = contributes to the loss
};

struct ForwardResult {
    std::vector<Matrix> logits;  // per sequence: seq_len x 4
    // hidden states after layer k (0 = embeddings) per sequence
    std::vector<std::vector<Matrix>> layer_outputs;
};

// Inference-mode forward (dropout off). Throws InputError when seq_len
// exceeds max_seq_len or an id is out of range.
ForwardResult forward(const TaggerModel& model, const Batch& batch, bool capture_hidden = false);

struct Gradients {
    std::vector<Matrix> tensors;  // parallel to named_tensors() order
    void accumulate(const Gradients& other);
    void scale(double s);
};

Gradients zero_gradients(const TaggerModel& model);

// Mean cross-entropy over unmasked positions plus gradients for every
// trainable tensor. Dropout applies when train_rng is non-null. Throws
// InputError for an all-masked batch.
double loss_and_grads(const TaggerModel& model, const Batch& batch, Gradients& grads,
                      Rng* train_rng = nullptr);

// Loss only (no gradients), for dev-set evaluation.
double batch_loss(const TaggerModel& model, const Batch& batch);

// New model with the bottom k layers and the classification head copied
// bit-for-bit (optionally a freshly initialized head).
TaggerModel truncate_layers(const TaggerModel& model, uint32_t k, bool reset_head = false);

// Argmax labels for one utterance; inputs longer than max_seq_len run as
// overlapping windows (stride = max_seq_len/2) stitched at window centers.
std::vector<PunctLabel> predict(const TaggerModel& model, const TokenSequence& tokens);

// Single-window helper used by predict: logits for ids[lo, hi).
Matrix window_logits(const TaggerModel& model, const std::vector<uint32_t>& ids, size_t lo,
                     size_t hi);

}  // namespace punctr

#endif  // PUNCTR_TAGGER_HPP
