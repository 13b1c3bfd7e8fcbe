#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace picl {

using token_id = std::int32_t;

// Byte-level BPE vocabulary: token string -> id, id -> token string, and
// merge ranks. Token strings are over the byte-to-printable-codepoint
// alphabet, so every possible input byte is representable.
class bpe_vocab {
public:
    static bpe_vocab load(const std::filesystem::path& vocab_json,
                          const std::filesystem::path& merges_txt);

    std::size_t size() const noexcept { return id_to_token_.size(); }
    const std::string& token(token_id id) const;  // throws data_error if out of range
    token_id id_of(std::string_view token) const; // -1 if absent

    // Rank of a merge pair, or -1 if the pair never merges.
    std::int64_t merge_rank(std::string_view left, std::string_view right) const;

    // Ids are contiguous from 0, every byte-alphabet symbol is present, and
    // every merge's concatenation exists in the vocabulary.
    void validate() const;

private:
    std::unordered_map<std::string, token_id> token_to_id_;
    std::vector<std::string> id_to_token_;
    std::unordered_map<std::string, std::int64_t> merge_rank_;  // "left right"
};

// Splits text into pre-tokenization pieces: contractions, optionally
// space-prefixed letter/number/punctuation runs, and whitespace runs that
// donate their last character to a following piece. Returns views into text.
std::vector<std::string_view> split_pieces(std::string_view text);

std::vector<token_id> encode(const bpe_vocab& vocab, std::string_view text);
std::string decode(const bpe_vocab& vocab, std::span<const token_id> ids);

}  // namespace picl
