#ifndef PUNCTR_TOKENS_HPP
#define PUNCTR_TOKENS_HPP

#include <string>
#include <vector>

namespace punctr {

// An utterance as ordered word tokens. Tokens never contain whitespace.
using TokenSequence = std::vector<std::string>;

// Splits on ASCII whitespace; never yields empty tokens.
TokenSequence split_whitespace(const std::string& line);

// ASCII lowercasing; non-ASCII bytes pass through unchanged.
std::string lowercase(const std::string& s);

std::string join_tokens(const TokenSequence& tokens);

}  // namespace punctr

#endif  // PUNCTR_TOKENS_HPP
