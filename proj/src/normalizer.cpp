#include "punctr/normalizer.hpp"

#include "punctr/util.hpp"

namespace punctr {

const FillerLexicon& default_fillers() {
    static const FillerLexicon lex = {"um", "uh", "uhm", "eh", "hmm", "mhm", "erm"};
    return lex;
}

TokenSequence remove_fillers(const TokenSequence& tokens, const FillerLexicon& lexicon) {
    if (lexicon.empty()) throw InputError("filler lexicon must not be empty");
    TokenSequence out;
    for (const auto& tok : tokens)
        if (!lexicon.count(tok)) out.push_back(tok);
    if (out.empty() && !tokens.empty())
        throw InputError("utterance consists entirely of filler tokens");
    return out;
}

LabeledSequence remove_fillers(const LabeledSequence& seq, const FillerLexicon& lexicon) {
    if (lexicon.empty()) throw InputError("filler lexicon must not be empty");
    LabeledSequence out;
    for (size_t i = 0; i < seq.tokens.size(); ++i) {
        if (lexicon.count(seq.tokens[i])) {
            // merge onto the previous survivor; its own (earlier) label wins
            if (!out.labels.empty() && out.labels.back() == PunctLabel::None)
                out.labels.back() = seq.labels[i];
        } else {
            out.tokens.push_back(seq.tokens[i]);
            out.labels.push_back(seq.labels[i]);
        }
    }
    if (out.tokens.empty() && !seq.tokens.empty())
        throw InputError("utterance consists entirely of filler tokens");
    return out;
}

namespace {

// Collapses the leftmost duplicate span (longest span first at each start
// position), erasing the earlier copy so the final copy (which carries the
// gold labels in generated data) survives. Returns false at fixpoint.
bool collapse_once(TokenSequence& tokens, std::vector<PunctLabel>* labels, int max_span) {
    for (size_t i = 0; i < tokens.size(); ++i) {
        for (size_t span = static_cast<size_t>(max_span); span >= 1; --span) {
            if (i + 2 * span > tokens.size()) continue;
            bool equal = true;
            for (size_t p = 0; p < span; ++p) {
                if (tokens[i + p] != tokens[i + span + p]) {
                    equal = false;
                    break;
                }
            }
            if (!equal) continue;
            if (labels) {
                for (size_t p = 0; p < span; ++p) {
                    if ((*labels)[i + p] != PunctLabel::None &&
                        (*labels)[i + span + p] == PunctLabel::None)
                        (*labels)[i + span + p] = (*labels)[i + p];
                }
                labels->erase(labels->begin() + static_cast<long>(i),
                              labels->begin() + static_cast<long>(i + span));
            }
            tokens.erase(tokens.begin() + static_cast<long>(i),
                         tokens.begin() + static_cast<long>(i + span));
            return true;
        }
    }
    return false;
}

}  // namespace

TokenSequence remove_repetitions(const TokenSequence& tokens, int max_span) {
    if (max_span < 1) throw InputError("max_span must be >= 1");
    TokenSequence out = tokens;
    while (collapse_once(out, nullptr, max_span)) {
    }
    return out;
}

LabeledSequence remove_repetitions(const LabeledSequence& seq, int max_span) {
    if (max_span < 1) throw InputError("max_span must be >= 1");
    LabeledSequence out = seq;
    while (collapse_once(out.tokens, &out.labels, max_span)) {
    }
    return out;
}

TokenSequence normalize_line(const std::string& line, const NormalizerConfig& cfg) {
    TokenSequence tokens = split_whitespace(cfg.lowercase ? lowercase(line) : line);
    if (tokens.empty()) return tokens;
    TokenSequence kept;
    for (const auto& tok : tokens)
        if (!cfg.fillers.count(tok)) kept.push_back(tok);
    if (kept.empty()) return kept;  // all-filler line: empty, caller decides
    return remove_repetitions(kept, cfg.max_repetition_span);
}

LabeledSequence normalize_labeled(const LabeledSequence& seq, const NormalizerConfig& cfg) {
    LabeledSequence out = remove_fillers(seq, cfg.fillers);
    return remove_repetitions(out, cfg.max_repetition_span);
}

}  // namespace punctr
