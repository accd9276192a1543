#ifndef PUNCTR_DATASET_HPP
#define PUNCTR_DATASET_HPP

#include <string>
#include <vector>

#include "punctr/punct_codec.hpp"
#include "punctr/tagger.hpp"

namespace punctr {

// JSONL dataset: one {"tokens": [...], "labels": [...]} object per line,
// labels as the four literal strings.
std::vector<LabeledSequence> load_jsonl(const std::string& path);
void save_jsonl(const std::string& path, const std::vector<LabeledSequence>& data);

// Word-level vocabulary: <pad>, <unk>, then corpus tokens by descending
// frequency (ties lexicographic). min_freq filters rare words to <unk>.
std::vector<std::string> build_vocab(const std::vector<std::vector<LabeledSequence>>& datasets,
                                     int min_freq = 1);

std::vector<std::string> load_vocab(const std::string& path);
void save_vocab(const std::string& path, const std::vector<std::string>& vocab);

// Sequences encoded once for the training loop.
struct EncodedDataset {
    std::vector<std::vector<uint32_t>> ids;
    std::vector<std::vector<uint8_t>> labels;

    size_t size() const { return ids.size(); }
};

// Encodes and windows: sequences longer than max_seq_len split into
// non-overlapping max_seq_len chunks for training.
EncodedDataset encode_dataset(const TaggerModel& model,
                              const std::vector<LabeledSequence>& data);

// Pads the selected examples into one batch (pad id 0, masks set).
Batch make_batch(const EncodedDataset& data, const std::vector<size_t>& indices);

}  // namespace punctr

#endif  // PUNCTR_DATASET_HPP
