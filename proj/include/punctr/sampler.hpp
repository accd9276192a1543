#ifndef PUNCTR_SAMPLER_HPP
#define PUNCTR_SAMPLER_HPP

#include <cstdint>
#include <functional>
#include <istream>
#include <queue>
#include <string>
#include <vector>

#include "punctr/ngram_lm.hpp"
#include "punctr/normalizer.hpp"

namespace punctr {

struct ScoredUtterance {
    uint64_t source_index = 0;  // 0-based line number in the scored stream
    double perplexity = 0.0;
    std::string text;  // original line, unmodified

    bool operator==(const ScoredUtterance&) const = default;
};

struct ScoreStats {
    uint64_t scored = 0;
    uint64_t skipped_empty = 0;  // empty / no-token lines, warned and skipped
};

// Streams lines through the model: each non-empty line is normalized exactly
// as LM training data is (lowercase, punctuation stripped via the codec) and
// scored by perplexity. Emits one ScoredUtterance per scorable line, in
// source order. Lines with no word tokens are counted and skipped.
ScoreStats score_corpus(const LanguageModel& lm, std::istream& lines,
                        const std::function<void(const ScoredUtterance&)>& sink);
ScoreStats score_corpus(const LanguageModel& lm, const std::vector<std::string>& lines,
                        const std::function<void(const ScoredUtterance&)>& sink);

// Bounded selector for the k lowest-perplexity utterances. Holds at most k
// records at any time; ties break toward the smaller source index.
class TopKSelector {
public:
    explicit TopKSelector(size_t k);

    void add(const ScoredUtterance& u);
    size_t peak_retained() const { return peak_retained_; }

    // The selection sorted by (perplexity, source_index) ascending.
    std::vector<ScoredUtterance> take();

private:
    struct Worse {
        bool operator()(const ScoredUtterance& a, const ScoredUtterance& b) const {
            if (a.perplexity != b.perplexity) return a.perplexity < b.perplexity;
            return a.source_index < b.source_index;
        }
    };
    size_t k_;
    size_t peak_retained_ = 0;
    std::priority_queue<ScoredUtterance, std::vector<ScoredUtterance>, Worse> heap_;
};

// Convenience wrapper over TopKSelector. Throws InputError when k == 0.
std::vector<ScoredUtterance> select_top_k(const std::vector<ScoredUtterance>& scored, size_t k);

}  // namespace punctr

#endif  // PUNCTR_SAMPLER_HPP
