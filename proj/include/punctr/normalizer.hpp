#ifndef PUNCTR_NORMALIZER_HPP
#define PUNCTR_NORMALIZER_HPP

#include <set>
#include <string>

#include "punctr/punct_codec.hpp"
#include "punctr/tokens.hpp"

namespace punctr {

using FillerLexicon = std::set<std::string>;

// {um, uh, uhm, eh, hmm, mhm, erm}
const FillerLexicon& default_fillers();

// Removes every token found in the lexicon, preserving the order of the
// survivors. Throws InputError if the lexicon is empty or nothing survives.
TokenSequence remove_fillers(const TokenSequence& tokens, const FillerLexicon& lexicon);

// Labeled variant: a removed token's label merges onto the previous surviving
// token, the earlier non-None label winning. A label removed before the first
// survivor is dropped.
LabeledSequence remove_fillers(const LabeledSequence& seq, const FillerLexicon& lexicon);

// Collapses consecutive duplicate spans of length 1..max_span to one copy,
// scanning left to right with the longest span first, repeated to fixpoint.
TokenSequence remove_repetitions(const TokenSequence& tokens, int max_span = 3);

// Labeled variant: keeps the last copy of a collapsed span; at each span
// position the earlier non-None label wins.
LabeledSequence remove_repetitions(const LabeledSequence& seq, int max_span = 3);

struct NormalizerConfig {
    FillerLexicon fillers = default_fillers();
    int max_repetition_span = 3;
    bool lowercase = true;
};

// Full cleanup for one raw transcript line: tokenize (and lowercase unless
// disabled), drop fillers, collapse repetitions. Leading false starts that
// are immediately restated fall out of the span collapse. Returns the empty
// sequence when nothing survives (all-filler or empty line).
TokenSequence normalize_line(const std::string& line, const NormalizerConfig& cfg = {});

// Cleanup for labeled data built from noisy punctuated text.
LabeledSequence normalize_labeled(const LabeledSequence& seq, const NormalizerConfig& cfg = {});

}  // namespace punctr

#endif  // PUNCTR_NORMALIZER_HPP
