#ifndef PUNCTR_NGRAM_LM_HPP
#define PUNCTR_NGRAM_LM_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "punctr/tokens.hpp"

namespace punctr {

// Reserved token ids. BOS pads contexts and is never predicted; EOS is a
// scored event; every out-of-vocabulary token maps to UNK.
constexpr uint32_t kBosId = 0;
constexpr uint32_t kEosId = 1;
constexpr uint32_t kUnkId = 2;
constexpr uint32_t kFirstWordId = 3;

extern const char* const kBosToken;  // "<s>"
extern const char* const kEosToken;  // "</s>"
extern const char* const kUnkToken;  // "<unk>"

// An n-gram packed as token ids; char32_t keys make lexicographic order equal
// numeric id order.
using NgramKey = std::u32string;

// A corpus that can be streamed more than once (counting is two-pass).
class Corpus {
public:
    virtual ~Corpus() = default;
    virtual void for_each(const std::function<void(const TokenSequence&)>& fn) const = 0;
};

class VectorCorpus : public Corpus {
public:
    explicit VectorCorpus(std::vector<TokenSequence> sequences)
        : sequences_(std::move(sequences)) {}
    void for_each(const std::function<void(const TokenSequence&)>& fn) const override {
        for (const auto& s : sequences_) fn(s);
    }

private:
    std::vector<TokenSequence> sequences_;
};

// Exact counts of every n-gram window (lengths 1..order) over sequences
// padded with order-1 BOS markers and one EOS. Tokens below the vocabulary
// frequency threshold are replaced by UNK before counting.
struct NgramCounts {
    int order = 0;
    int min_token_freq = 1;
    // token string -> id, for real words only (ids >= kFirstWordId)
    std::unordered_map<std::string, uint32_t> vocab;
    // level m table at index m-1
    std::vector<std::unordered_map<NgramKey, uint64_t>> tables;

    uint64_t count(const NgramKey& key) const;
    size_t vocab_size() const { return vocab.size(); }
};

NgramCounts count_ngrams(const Corpus& corpus, int order, int min_token_freq = 2);

enum class Smoothing : uint8_t {
    MaximumLikelihood = 0,
    KneserNey = 1,       // interpolated, fixed discount
    UniformFallback = 2  // constant 1/|scorable vocab|; testing mode
};

struct SmoothingConfig {
    Smoothing scheme = Smoothing::KneserNey;
    double discount = 0.75;  // must lie in (0,1) for Kneser-Ney
};

// Backoff-form n-gram model over natural-log probabilities. Immutable after
// training; concurrent read-only scoring is safe.
class LanguageModel {
public:
    int order() const { return order_; }
    const SmoothingConfig& smoothing() const { return smoothing_; }

    // vocabulary words + UNK + EOS: the alphabet every conditional
    // distribution normalizes over (BOS excluded)
    size_t scorable_vocab_size() const { return id_to_token_.size() - 1; }

    uint32_t token_id(const std::string& token) const;
    const std::string& token_string(uint32_t id) const { return id_to_token_.at(id); }
    size_t num_ids() const { return id_to_token_.size(); }

    // log p(word | context): context is the preceding ids, longest usable
    // suffix applied. word must not be BOS.
    double cond_log_prob(const std::vector<uint32_t>& context, uint32_t word) const;

    // Sum over i of log p(w_i | previous tokens) + log p(EOS | final context),
    // with OOV tokens mapped to UNK. Throws InputError on an empty sequence.
    double sequence_log_prob(const TokenSequence& seq) const;

    // exp(-log_prob / M) with M = token count + 1 (the EOS event is scored).
    double perplexity(const TokenSequence& seq) const;

    void save(const std::string& path) const;
    static LanguageModel load(const std::string& path);

    static LanguageModel train(const NgramCounts& counts, const SmoothingConfig& cfg);

private:
    friend LanguageModel train_lm(const NgramCounts&, const SmoothingConfig&);

    int order_ = 0;
    SmoothingConfig smoothing_;
    std::vector<std::string> id_to_token_;  // index = id; [0]=BOS,[1]=EOS,[2]=UNK
    std::unordered_map<std::string, uint32_t> token_to_id_;
    // log_prob_[L]: key = context of length L + word id -> log p(word|context)
    std::vector<std::unordered_map<NgramKey, double>> log_prob_;
    // log_backoff_[L]: key = context of length L -> log backoff weight
    // (in ML mode the entry just marks the context as seen)
    std::vector<std::unordered_map<NgramKey, double>> log_backoff_;
    double uniform_log_prob_ = 0.0;  // -log(scorable vocab size)
    // ML mode keeps raw tables for the backoff-to-shorter-context rule
    bool ml_mode_ = false;

    double lookup(const NgramKey& context, uint32_t word) const;
};

// Trains a model from counts. Throws InputError for empty counts or a
// Kneser-Ney discount outside (0,1).
LanguageModel train_lm(const NgramCounts& counts, const SmoothingConfig& cfg);

}  // namespace punctr

#endif  // PUNCTR_NGRAM_LM_HPP
