#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "miniens/text/clean.hpp"

namespace miniens::bpe {

// Byte-level BPE vocabulary. Ids are dense; the four specials come first,
// then the byte alphabet seen in the training corpus (ascending byte value),
// then merged tokens in learned order. Tokens are raw byte strings.
struct BpeVocab {
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;
    static constexpr int kCls = 2;
    static constexpr int kSep = 3;

    std::vector<std::string> id_to_token;
    std::unordered_map<std::string, int> token_to_id;
    std::vector<std::pair<std::string, std::string>> merges;
    std::uint64_t tag = 0;  // content fingerprint; two vocabs mix only if tags match

    int size() const { return static_cast<int>(id_to_token.size()); }

    static const std::array<std::string, 4>& special_tokens();
};

// Fixed-length model input. input_ids[0] is CLS, the last unmasked position
// is SEP, and attention_mask is a prefix of ones.
struct TokenizedInput {
    std::vector<int> input_ids;
    std::vector<int> attention_mask;
    std::uint64_t vocab_tag = 0;
};

// Learns merges by repeatedly joining the most frequent adjacent token pair
// (ties broken by lexicographically smallest (left, right)) until vocab_size
// is reached or no pair occurs at least twice. Pairs never span the space
// between words. Requires vocab_size >= 4 + |distinct bytes in corpus|.
BpeVocab train_bpe(const std::vector<text::CleanText>& corpus, int vocab_size);

// Splits on spaces, applies merges in learned order within each word, maps
// out-of-alphabet bytes to UNK, then frames as CLS + body + SEP with padding.
// The body is truncated to max_seq_len - 2. Requires max_seq_len >= 3.
TokenizedInput encode(const text::CleanText& text, const BpeVocab& vocab, int max_seq_len);

// Concatenates the bytes of all non-special tokens. Inverse of encode for
// in-vocabulary text that fits the sequence length.
std::string decode(const std::vector<int>& ids, const BpeVocab& vocab);

// Token rendering for the vocab files: bytes outside 0x21..0x7E are written
// as \xHH (lowercase hex), backslash as \\, everything else verbatim.
std::string escape_token(const std::string& token);
std::string unescape_token(const std::string& escaped);

// Two-file plain-text format: vocab.txt holds one escaped token per line
// (line number = id); merges.txt holds one "left right" escaped pair per
// line in learned order. Both LF-terminated.
void save_vocab(const BpeVocab& vocab, const std::filesystem::path& dir);
BpeVocab load_vocab(const std::filesystem::path& dir);

}  // namespace miniens::bpe
