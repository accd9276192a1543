#include "punctr/ngram_lm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "punctr/binio.hpp"
#include "punctr/util.hpp"

namespace punctr {

const char* const kBosToken = "<s>";
const char* const kEosToken = "</s>";
const char* const kUnkToken = "<unk>";

namespace {

constexpr char kLmMagic[4] = {'P', 'N', 'L', 'M'};
constexpr uint32_t kLmVersion = 1;

bool is_reserved(const std::string& tok) {
    return tok == kBosToken || tok == kEosToken || tok == kUnkToken;
}

NgramKey key_of(const uint32_t* ids, size_t n) {
    NgramKey key;
    key.reserve(n);
    for (size_t i = 0; i < n; ++i) key.push_back(static_cast<char32_t>(ids[i]));
    return key;
}

}  // namespace

uint64_t NgramCounts::count(const NgramKey& key) const {
    if (key.empty() || key.size() > tables.size()) return 0;
    const auto& table = tables[key.size() - 1];
    auto it = table.find(key);
    return it == table.end() ? 0 : it->second;
}

NgramCounts count_ngrams(const Corpus& corpus, int order, int min_token_freq) {
    if (order < 1) throw InputError("n-gram order must be >= 1");
    if (min_token_freq < 1) throw InputError("min_token_freq must be >= 1");

    // pass 1: raw token frequencies
    std::unordered_map<std::string, uint64_t> freq;
    uint64_t n_sequences = 0;
    corpus.for_each([&](const TokenSequence& seq) {
        if (seq.empty()) return;
        ++n_sequences;
        for (const auto& tok : seq) ++freq[tok];
    });
    if (n_sequences == 0) throw InputError("corpus is empty");

    NgramCounts counts;
    counts.order = order;
    counts.min_token_freq = min_token_freq;

    // deterministic ids: surviving tokens in lexicographic order
    std::vector<std::string> kept;
    for (const auto& [tok, f] : freq)
        if (f >= static_cast<uint64_t>(min_token_freq) && !is_reserved(tok)) kept.push_back(tok);
    std::sort(kept.begin(), kept.end());
    for (size_t i = 0; i < kept.size(); ++i)
        counts.vocab.emplace(kept[i], kFirstWordId + static_cast<uint32_t>(i));

    counts.tables.assign(static_cast<size_t>(order), {});

    // pass 2: exact window counts over BOS-padded sequences
    std::vector<uint32_t> padded;
    corpus.for_each([&](const TokenSequence& seq) {
        if (seq.empty()) return;
        padded.assign(static_cast<size_t>(order - 1), kBosId);
        for (const auto& tok : seq) {
            auto it = counts.vocab.find(tok);
            padded.push_back(it == counts.vocab.end() ? kUnkId : it->second);
        }
        padded.push_back(kEosId);
        for (int m = 1; m <= order; ++m) {
            auto& table = counts.tables[static_cast<size_t>(m - 1)];
            for (size_t i = 0; i + static_cast<size_t>(m) <= padded.size(); ++i)
                ++table[key_of(padded.data() + i, static_cast<size_t>(m))];
        }
    });
    return counts;
}

// ---------------------------------------------------------------------------
// training

namespace {

struct ContextStats {
    double denom = 0.0;   // total continuation mass over the prediction alphabet
    uint64_t types = 0;   // distinct continuations
};

// Aggregates per-context totals from an n-gram table, skipping continuations
// that fall outside the prediction alphabet (BOS).
std::unordered_map<NgramKey, ContextStats> context_stats(
    const std::unordered_map<NgramKey, uint64_t>& table) {
    std::unordered_map<NgramKey, ContextStats> stats;
    for (const auto& [key, count] : table) {
        if (key.back() == static_cast<char32_t>(kBosId)) continue;
        NgramKey ctx = key.substr(0, key.size() - 1);
        auto& s = stats[ctx];
        s.denom += static_cast<double>(count);
        s.types += 1;
    }
    return stats;
}

}  // namespace

LanguageModel train_lm(const NgramCounts& counts, const SmoothingConfig& cfg) {
    if (counts.order < 1 || counts.tables.empty() || counts.tables[0].empty())
        throw InputError("cannot train a language model from empty counts");
    if (cfg.scheme == Smoothing::KneserNey && !(cfg.discount > 0.0 && cfg.discount < 1.0))
        throw InputError("Kneser-Ney discount must lie in (0,1)");

    LanguageModel lm;
    lm.order_ = counts.order;
    lm.smoothing_ = cfg;
    lm.ml_mode_ = cfg.scheme == Smoothing::MaximumLikelihood;

    lm.id_to_token_.resize(kFirstWordId + counts.vocab.size());
    lm.id_to_token_[kBosId] = kBosToken;
    lm.id_to_token_[kEosId] = kEosToken;
    lm.id_to_token_[kUnkId] = kUnkToken;
    for (const auto& [tok, id] : counts.vocab) lm.id_to_token_[id] = tok;
    for (uint32_t id = 0; id < lm.id_to_token_.size(); ++id)
        lm.token_to_id_.emplace(lm.id_to_token_[id], id);

    const double S = static_cast<double>(lm.scorable_vocab_size());
    lm.uniform_log_prob_ = -std::log(S);
    lm.log_prob_.assign(static_cast<size_t>(lm.order_), {});
    lm.log_backoff_.assign(static_cast<size_t>(lm.order_), {});

    if (cfg.scheme == Smoothing::UniformFallback) return lm;

    const int order = counts.order;
    if (cfg.scheme == Smoothing::MaximumLikelihood) {
        for (int L = 0; L < order; ++L) {
            const auto& table = counts.tables[static_cast<size_t>(L)];  // (L+1)-grams
            auto stats = context_stats(table);
            for (const auto& [key, count] : table) {
                if (key.back() == static_cast<char32_t>(kBosId)) continue;
                NgramKey ctx = key.substr(0, key.size() - 1);
                double denom = stats.at(ctx).denom;
                lm.log_prob_[static_cast<size_t>(L)][key] =
                    std::log(static_cast<double>(count) / denom);
            }
            // mark seen contexts: under ML an unseen word in a seen context
            // has probability zero rather than backing off
            for (const auto& [ctx, s] : stats)
                lm.log_backoff_[static_cast<size_t>(L)][ctx] = 0.0;
        }
        return lm;
    }

    // Interpolated Kneser-Ney with fixed discount. The highest level uses raw
    // counts; lower levels use continuation counts (distinct left extensions
    // drawn from the next level up). Bottoms out at the uniform distribution
    // over the prediction alphabet.
    const double D = cfg.discount;
    for (int L = 0; L < order; ++L) {
        std::unordered_map<NgramKey, double> adjusted;
        if (L == order - 1) {
            for (const auto& [key, count] : counts.tables[static_cast<size_t>(L)])
                adjusted.emplace(key, static_cast<double>(count));
        } else {
            // continuation counts from the (L+2)-gram table
            for (const auto& [key, count] : counts.tables[static_cast<size_t>(L + 1)]) {
                (void)count;
                if (key.back() == static_cast<char32_t>(kBosId)) continue;
                adjusted[key.substr(1)] += 1.0;
            }
        }

        std::unordered_map<NgramKey, ContextStats> stats;
        for (const auto& [key, value] : adjusted) {
            if (key.back() == static_cast<char32_t>(kBosId)) continue;
            NgramKey ctx = key.substr(0, key.size() - 1);
            auto& s = stats[ctx];
            s.denom += value;
            s.types += 1;
        }

        for (const auto& [ctx, s] : stats) {
            double gamma = D * static_cast<double>(s.types) / s.denom;
            lm.log_backoff_[static_cast<size_t>(L)][ctx] = std::log(gamma);
        }
        for (const auto& [key, value] : adjusted) {
            if (key.back() == static_cast<char32_t>(kBosId)) continue;
            NgramKey ctx = key.substr(0, key.size() - 1);
            const auto& s = stats.at(ctx);
            double gamma = D * static_cast<double>(s.types) / s.denom;
            // lower-order probability from the levels already built
            std::vector<uint32_t> lower_ctx;
            for (size_t i = 1; i < ctx.size(); ++i)
                lower_ctx.push_back(static_cast<uint32_t>(ctx[i]));
            double p_low = L == 0 ? 1.0 / S
                                  : std::exp(lm.cond_log_prob(
                                        lower_ctx, static_cast<uint32_t>(key.back())));
            double p = std::max(value - D, 0.0) / s.denom + gamma * p_low;
            lm.log_prob_[static_cast<size_t>(L)][key] = std::log(p);
        }
    }
    return lm;
}

LanguageModel LanguageModel::train(const NgramCounts& counts, const SmoothingConfig& cfg) {
    return train_lm(counts, cfg);
}

// ---------------------------------------------------------------------------
// scoring

uint32_t LanguageModel::token_id(const std::string& token) const {
    if (is_reserved(token)) return kUnkId;
    auto it = token_to_id_.find(token);
    return it == token_to_id_.end() ? kUnkId : it->second;
}

double LanguageModel::lookup(const NgramKey& context, uint32_t word) const {
    double acc = 0.0;
    size_t len = context.size();
    for (size_t L = len;; --L) {
        NgramKey suffix = context.substr(len - L);
        NgramKey key = suffix;
        key.push_back(static_cast<char32_t>(word));
        const auto& probs = log_prob_[L];
        auto it = probs.find(key);
        if (it != probs.end()) return acc + it->second;
        const auto& bows = log_backoff_[L];
        auto bit = bows.find(suffix);
        if (ml_mode_) {
            // seen context, unseen word: probability zero
            if (bit != bows.end()) return -std::numeric_limits<double>::infinity();
        } else if (bit != bows.end()) {
            acc += bit->second;
        }
        if (L == 0) {
            if (ml_mode_) return -std::numeric_limits<double>::infinity();
            return acc + uniform_log_prob_;
        }
    }
}

double LanguageModel::cond_log_prob(const std::vector<uint32_t>& context, uint32_t word) const {
    if (word == kBosId) throw InputError("BOS is never predicted");
    if (smoothing_.scheme == Smoothing::UniformFallback) return uniform_log_prob_;
    size_t ctx_len = std::min(context.size(), static_cast<size_t>(order_ - 1));
    NgramKey key = key_of(context.data() + (context.size() - ctx_len), ctx_len);
    return lookup(key, word);
}

double LanguageModel::sequence_log_prob(const TokenSequence& seq) const {
    if (seq.empty()) throw InputError("cannot score an empty sequence");
    std::vector<uint32_t> stream(static_cast<size_t>(order_ - 1), kBosId);
    stream.reserve(stream.size() + seq.size());
    for (const auto& tok : seq) stream.push_back(token_id(tok));

    double total = 0.0;
    size_t ctx = static_cast<size_t>(order_ - 1);
    for (size_t i = 0; i < seq.size() + 1; ++i) {
        uint32_t word = i < seq.size() ? stream[ctx + i] : kEosId;
        std::vector<uint32_t> context(stream.begin() + static_cast<long>(i),
                                      stream.begin() + static_cast<long>(i + ctx));
        total += cond_log_prob(context, word);
    }
    return total;
}

double LanguageModel::perplexity(const TokenSequence& seq) const {
    double lp = sequence_log_prob(seq);
    double events = static_cast<double>(seq.size()) + 1.0;  // tokens + EOS
    return std::exp(-lp / events);
}

// ---------------------------------------------------------------------------
// persistence

void LanguageModel::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FileError("cannot open for writing: " + path);
    binio::write_magic(out, kLmMagic, kLmVersion);
    binio::write_pod<uint32_t>(out, static_cast<uint32_t>(order_));
    binio::write_pod<uint8_t>(out, static_cast<uint8_t>(smoothing_.scheme));
    binio::write_pod<double>(out, smoothing_.discount);
    binio::write_pod<uint32_t>(out, static_cast<uint32_t>(id_to_token_.size() - kFirstWordId));
    for (size_t id = kFirstWordId; id < id_to_token_.size(); ++id)
        binio::write_string(out, id_to_token_[id]);

    auto write_table = [&out](const std::unordered_map<NgramKey, double>& table) {
        std::vector<NgramKey> keys;
        keys.reserve(table.size());
        for (const auto& [key, v] : table) keys.push_back(key);
        std::sort(keys.begin(), keys.end());
        binio::write_pod<uint64_t>(out, keys.size());
        for (const auto& key : keys) {
            for (char32_t id : key) binio::write_pod<uint32_t>(out, static_cast<uint32_t>(id));
            binio::write_pod<double>(out, table.at(key));
        }
    };
    for (int L = 0; L < order_; ++L) {
        write_table(log_prob_[static_cast<size_t>(L)]);
        write_table(log_backoff_[static_cast<size_t>(L)]);
    }
    if (!out) throw FileError("write failed: " + path);
}

LanguageModel LanguageModel::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError("cannot open for reading: " + path);
    binio::check_magic(in, kLmMagic, kLmVersion, "language model file");

    LanguageModel lm;
    lm.order_ = static_cast<int>(binio::read_pod<uint32_t>(in));
    lm.smoothing_.scheme = static_cast<Smoothing>(binio::read_pod<uint8_t>(in));
    lm.smoothing_.discount = binio::read_pod<double>(in);
    lm.ml_mode_ = lm.smoothing_.scheme == Smoothing::MaximumLikelihood;
    uint32_t n_words = binio::read_pod<uint32_t>(in);
    lm.id_to_token_.resize(kFirstWordId + n_words);
    lm.id_to_token_[kBosId] = kBosToken;
    lm.id_to_token_[kEosId] = kEosToken;
    lm.id_to_token_[kUnkId] = kUnkToken;
    for (uint32_t i = 0; i < n_words; ++i)
        lm.id_to_token_[kFirstWordId + i] = binio::read_string(in);
    for (uint32_t id = 0; id < lm.id_to_token_.size(); ++id)
        lm.token_to_id_.emplace(lm.id_to_token_[id], id);
    lm.uniform_log_prob_ = -std::log(static_cast<double>(lm.scorable_vocab_size()));

    auto read_table = [&in](size_t key_len) {
        std::unordered_map<NgramKey, double> table;
        uint64_t n = binio::read_pod<uint64_t>(in);
        table.reserve(n);
        for (uint64_t i = 0; i < n; ++i) {
            NgramKey key;
            key.reserve(key_len);
            for (size_t k = 0; k < key_len; ++k)
                key.push_back(static_cast<char32_t>(binio::read_pod<uint32_t>(in)));
            table.emplace(std::move(key), binio::read_pod<double>(in));
        }
        return table;
    };
    lm.log_prob_.resize(static_cast<size_t>(lm.order_));
    lm.log_backoff_.resize(static_cast<size_t>(lm.order_));
    for (int L = 0; L < lm.order_; ++L) {
        lm.log_prob_[static_cast<size_t>(L)] = read_table(static_cast<size_t>(L) + 1);
        lm.log_backoff_[static_cast<size_t>(L)] = read_table(static_cast<size_t>(L));
    }
    return lm;
}

}  // namespace punctr
