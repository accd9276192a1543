#ifndef PUNCTR_PUNCT_CODEC_HPP
#define PUNCTR_PUNCT_CODEC_HPP

#include <cstdint>
#include <string>

#include "punctr/tokens.hpp"

namespace punctr {

// Per-token punctuation target: the mark following the token, if any.
enum class PunctLabel : uint8_t { Period = 0, Comma = 1, QuestionMark = 2, None = 3 };

constexpr int kNumLabels = 4;
constexpr int kNumScoredLabels = 3;  // None is not a scored class

const char* label_name(PunctLabel label);
PunctLabel label_from_name(const std::string& name);

// Parallel tokens and labels; tokens are lowercase words free of punctuation.
struct LabeledSequence {
    TokenSequence tokens;
    std::vector<PunctLabel> labels;

    bool operator==(const LabeledSequence&) const = default;
};

// Converts punctuated text to (tokens, labels). Tokens are lowercased and
// stripped of punctuation; each label is the mark directly following the
// token ('.' and '!' -> Period, ',' -> Comma, '?' -> QuestionMark). Runs of
// punctuation collapse to the first recognized mark; unrecognized marks are
// dropped. Apostrophes and hyphens between word characters stay inside the
// token ("don't", "real-time"). Throws InputError if no word token remains.
LabeledSequence extract_labels(const std::string& text);

// Inverse codec: joins tokens with single spaces and attaches each non-None
// mark directly after its token. No capitalization is applied.
std::string apply_labels(const LabeledSequence& seq);

// extract_labels followed by joining the bare tokens: ASR-like text with all
// punctuation removed.
std::string strip_punctuation(const std::string& text);

}  // namespace punctr

#endif  // PUNCTR_PUNCT_CODEC_HPP
