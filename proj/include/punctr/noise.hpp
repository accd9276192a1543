#ifndef PUNCTR_NOISE_HPP
#define PUNCTR_NOISE_HPP

#include <cstdint>
#include <vector>

#include "punctr/normalizer.hpp"
#include "punctr/punct_codec.hpp"

namespace punctr {

// Disfluency injector settings. Noise is insertion-only so gold labels stay
// well-defined.
struct NoiseConfig {
    double filler_prob = 0.1;  // per inter-token gap (before each token)
    double repeat_prob = 0.05;  // per token, duplicates the preceding 1-2 token span
    uint64_t seed = 7;
    std::vector<std::string> filler_lexicon = {"um", "uh", "uhm", "eh", "hmm", "mhm", "erm"};
};

// Inserts fillers (label NONE) and duplicated spans (copies carry NONE, the
// final copy keeps the original labels). Deterministic given cfg.seed; for
// per-utterance parallelism derive seeds with derive_seed(seed, index).
LabeledSequence inject_noise(const LabeledSequence& seq, const NoiseConfig& cfg);

}  // namespace punctr

#endif  // PUNCTR_NOISE_HPP
