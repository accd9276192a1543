#include "punctr/sampler.hpp"

#include <algorithm>

#include "punctr/punct_codec.hpp"
#include "punctr/util.hpp"

namespace punctr {

namespace {

void score_one(const LanguageModel& lm, uint64_t index, const std::string& line,
               const std::function<void(const ScoredUtterance&)>& sink, ScoreStats& stats) {
    TokenSequence tokens = split_whitespace(strip_punctuation(line));
    if (tokens.empty()) {
        ++stats.skipped_empty;
        return;
    }
    sink({index, lm.perplexity(tokens), line});
    ++stats.scored;
}

}  // namespace

ScoreStats score_corpus(const LanguageModel& lm, std::istream& lines,
                        const std::function<void(const ScoredUtterance&)>& sink) {
    ScoreStats stats;
    std::string line;
    uint64_t index = 0;
    while (std::getline(lines, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        score_one(lm, index++, line, sink, stats);
    }
    return stats;
}

ScoreStats score_corpus(const LanguageModel& lm, const std::vector<std::string>& lines,
                        const std::function<void(const ScoredUtterance&)>& sink) {
    ScoreStats stats;
    for (uint64_t index = 0; index < lines.size(); ++index)
        score_one(lm, index, lines[index], sink, stats);
    return stats;
}

TopKSelector::TopKSelector(size_t k) : k_(k) {
    if (k == 0) throw InputError("k must be >= 1");
}

void TopKSelector::add(const ScoredUtterance& u) {
    heap_.push(u);
    peak_retained_ = std::max(peak_retained_, heap_.size());
    if (heap_.size() > k_) heap_.pop();  // drop the current worst
}

std::vector<ScoredUtterance> TopKSelector::take() {
    std::vector<ScoredUtterance> out(heap_.size());
    for (size_t i = heap_.size(); i-- > 0;) {
        out[i] = heap_.top();
        heap_.pop();
    }
    return out;
}

std::vector<ScoredUtterance> select_top_k(const std::vector<ScoredUtterance>& scored, size_t k) {
    TopKSelector sel(k);
    for (const auto& u : scored) sel.add(u);
    return sel.take();
}

}  // namespace punctr
