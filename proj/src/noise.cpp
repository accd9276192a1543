#include "punctr/noise.hpp"

#include <algorithm>

#include "punctr/rng.hpp"
#include "punctr/util.hpp"

namespace punctr {

LabeledSequence inject_noise(const LabeledSequence& seq, const NoiseConfig& cfg) {
    if (cfg.filler_prob < 0.0 || cfg.filler_prob > 1.0 || cfg.repeat_prob < 0.0 ||
        cfg.repeat_prob > 1.0)
        throw InputError("noise probabilities must lie in [0,1]");
    if (seq.tokens.size() != seq.labels.size())
        throw InputError("token/label length mismatch");

    Rng rng(cfg.seed);
    LabeledSequence out;
    for (size_t i = 0; i < seq.tokens.size(); ++i) {
        if (!cfg.filler_lexicon.empty() && rng.bernoulli(cfg.filler_prob)) {
            size_t pick = static_cast<size_t>(rng.below(cfg.filler_lexicon.size()));
            out.tokens.push_back(cfg.filler_lexicon[pick]);
            out.labels.push_back(PunctLabel::None);
        }
        out.tokens.push_back(seq.tokens[i]);
        out.labels.push_back(seq.labels[i]);
        if (rng.bernoulli(cfg.repeat_prob)) {
            // duplicate the 1-2 token span just emitted; the copy goes in
            // front with NONE labels so the original keeps its labels
            size_t span = std::min(1 + static_cast<size_t>(rng.below(2)), out.tokens.size());
            size_t at = out.tokens.size() - span;
            std::vector<std::string> copy(out.tokens.end() - static_cast<long>(span),
                                          out.tokens.end());
            out.tokens.insert(out.tokens.begin() + static_cast<long>(at), copy.begin(),
                              copy.end());
            out.labels.insert(out.labels.begin() + static_cast<long>(at), span,
                              PunctLabel::None);
        }
    }
    return out;
}

}  // namespace punctr
