#include "picl/bpe.hpp"

#include <array>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "picl/common.hpp"
#include "picl/unicode.hpp"

namespace picl {

namespace {

// Maps each byte to a printable codepoint: printable ASCII and two Latin-1
// blocks keep their value, everything else shifts to 0x100..0x142.
struct byte_alphabet {
    std::array<std::uint32_t, 256> byte_to_cp{};
    std::unordered_map<std::uint32_t, unsigned char> cp_to_byte;

    byte_alphabet() {
        int next = 0;
        for (int b = 0; b < 256; ++b) {
            const bool keep = (b >= 0x21 && b <= 0x7E) || (b >= 0xA1 && b <= 0xAC) ||
                              (b >= 0xAE && b <= 0xFF);
            const std::uint32_t cp = keep ? static_cast<std::uint32_t>(b)
                                          : static_cast<std::uint32_t>(256 + next++);
            byte_to_cp[static_cast<std::size_t>(b)] = cp;
            cp_to_byte.emplace(cp, static_cast<unsigned char>(b));
        }
    }
};

const byte_alphabet& alphabet() {
    static const byte_alphabet table;
    return table;
}

// One symbol = one codepoint of the byte alphabet.
std::vector<std::string> symbol_list(std::string_view piece) {
    std::vector<std::string> symbols;
    symbols.reserve(piece.size());
    for (unsigned char b : piece) symbols.push_back(encode_utf8(alphabet().byte_to_cp[b]));
    return symbols;
}

}  // namespace

bpe_vocab bpe_vocab::load(const std::filesystem::path& vocab_json,
                          const std::filesystem::path& merges_txt) {
    std::ifstream vin(vocab_json);
    if (!vin) throw data_error("cannot open vocabulary file: " + vocab_json.string());
    nlohmann::json v;
    try {
        v = nlohmann::json::parse(vin);
    } catch (const nlohmann::json::exception& e) {
        throw data_error("malformed vocabulary JSON: " + std::string(e.what()));
    }
    if (!v.is_object()) throw data_error("vocabulary JSON is not an object");

    bpe_vocab out;
    out.id_to_token_.resize(v.size());
    std::vector<bool> seen(v.size(), false);
    for (const auto& [tok, idj] : v.items()) {
        if (!idj.is_number_integer()) throw data_error("non-integer id for token: " + tok);
        const std::int64_t id = idj.get<std::int64_t>();
        if (id < 0 || id >= static_cast<std::int64_t>(v.size()))
            throw data_error("token id out of range: " + tok);
        if (seen[static_cast<std::size_t>(id)])
            throw data_error("duplicate token id in vocabulary: " + std::to_string(id));
        seen[static_cast<std::size_t>(id)] = true;
        out.id_to_token_[static_cast<std::size_t>(id)] = tok;
        out.token_to_id_.emplace(tok, static_cast<token_id>(id));
    }

    std::ifstream min(merges_txt);
    if (!min) throw data_error("cannot open merges file: " + merges_txt.string());
    std::string line;
    std::int64_t rank = 0;
    bool first = true;
    while (std::getline(min, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (first && line.rfind("#version:", 0) == 0) {
            first = false;
            continue;
        }
        first = false;
        if (line.empty()) continue;
        const auto space = line.find(' ');
        if (space == std::string::npos || space == 0 || space == line.size() - 1)
            throw data_error("malformed merge line: " + line);
        out.merge_rank_.emplace(line, rank++);
    }

    out.validate();
    return out;
}

const std::string& bpe_vocab::token(token_id id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size())
        throw data_error("token id out of range: " + std::to_string(id));
    return id_to_token_[static_cast<std::size_t>(id)];
}

token_id bpe_vocab::id_of(std::string_view tok) const {
    auto it = token_to_id_.find(std::string(tok));
    return it == token_to_id_.end() ? -1 : it->second;
}

std::int64_t bpe_vocab::merge_rank(std::string_view left, std::string_view right) const {
    std::string key;
    key.reserve(left.size() + 1 + right.size());
    key.append(left);
    key.push_back(' ');
    key.append(right);
    auto it = merge_rank_.find(key);
    return it == merge_rank_.end() ? -1 : it->second;
}

void bpe_vocab::validate() const {
    for (int b = 0; b < 256; ++b) {
        const std::string sym = encode_utf8(alphabet().byte_to_cp[static_cast<std::size_t>(b)]);
        if (token_to_id_.find(sym) == token_to_id_.end())
            throw data_error("vocabulary is missing byte symbol for byte " + std::to_string(b));
    }
    for (const auto& [pair, rank] : merge_rank_) {
        const auto space = pair.find(' ');
        const std::string merged = pair.substr(0, space) + pair.substr(space + 1);
        if (token_to_id_.find(merged) == token_to_id_.end())
            throw data_error("merge result missing from vocabulary: " + merged);
    }
}

// The scanner mirrors the reference pattern, alternatives tried in order:
//   's 't 're 've 'm 'll 'd | " ?"letters | " ?"numbers | " ?"others
//   | whitespace-not-before-nonspace | whitespace
std::vector<std::string_view> split_pieces(std::string_view text) {
    const std::vector<decoded_char> cps = decode_utf8(text);
    const std::size_t n = cps.size();
    std::vector<std::string_view> pieces;

    auto classify_other = [](std::uint32_t cp) {
        return !is_whitespace(cp) && !is_letter(cp) && !is_number(cp);
    };
    auto slice = [&](std::size_t from, std::size_t to) {
        const std::size_t b0 = cps[from].offset;
        const std::size_t b1 = cps[to - 1].offset + cps[to - 1].len;
        pieces.push_back(text.substr(b0, b1 - b0));
    };

    std::size_t i = 0;
    while (i < n) {
        // Contractions: apostrophe plus a fixed lowercase suffix.
        if (cps[i].cp == '\'') {
            std::size_t took = 0;
            if (i + 1 < n) {
                const std::uint32_t c1 = cps[i + 1].cp;
                if (c1 == 's' || c1 == 't' || c1 == 'm' || c1 == 'd') took = 2;
                if (i + 2 < n && took == 0) {
                    const std::uint32_t c2 = cps[i + 2].cp;
                    if ((c1 == 'r' && c2 == 'e') || (c1 == 'v' && c2 == 'e') ||
                        (c1 == 'l' && c2 == 'l'))
                        took = 3;
                }
            }
            if (took != 0) {
                slice(i, i + took);
                i += took;
                continue;
            }
        }

        const bool leading_space = cps[i].cp == ' ';
        const std::size_t start_after_space = leading_space ? i + 1 : i;

        // " ?"letters / numbers / others, each a maximal run of one class.
        bool matched = false;
        for (auto* pred : {&is_letter, &is_number}) {
            if (start_after_space < n && (*pred)(cps[start_after_space].cp)) {
                std::size_t j = start_after_space;
                while (j < n && (*pred)(cps[j].cp)) ++j;
                slice(i, j);
                i = j;
                matched = true;
                break;
            }
        }
        if (matched) continue;
        if (start_after_space < n && classify_other(cps[start_after_space].cp)) {
            std::size_t j = start_after_space;
            while (j < n && classify_other(cps[j].cp)) ++j;
            slice(i, j);
            i = j;
            continue;
        }

        if (is_whitespace(cps[i].cp)) {
            std::size_t j = i;
            while (j < n && is_whitespace(cps[j].cp)) ++j;
            if (j < n && j - i > 1) {
                // Keep the final whitespace char for the next piece.
                slice(i, j - 1);
                i = j - 1;
            } else {
                slice(i, j);
                i = j;
            }
            continue;
        }

        // A lone apostrophe or a space not followed by a matchable run:
        // falls through to the "others" class as a single-char piece.
        slice(i, i + 1);
        ++i;
    }
    return pieces;
}

std::vector<token_id> encode(const bpe_vocab& vocab, std::string_view text) {
    std::vector<token_id> out;
    for (std::string_view piece : split_pieces(text)) {
        std::vector<std::string> symbols = symbol_list(piece);

        // Classic merge loop: find the lowest-rank adjacent pair, merge all
        // its occurrences left to right, repeat until no pair has a rank.
        while (symbols.size() >= 2) {
            std::int64_t best = std::numeric_limits<std::int64_t>::max();
            std::size_t best_at = 0;
            for (std::size_t k = 0; k + 1 < symbols.size(); ++k) {
                const std::int64_t r = vocab.merge_rank(symbols[k], symbols[k + 1]);
                if (r >= 0 && r < best) {
                    best = r;
                    best_at = k;
                }
            }
            if (best == std::numeric_limits<std::int64_t>::max()) break;

            const std::string left = symbols[best_at];
            const std::string right = symbols[best_at + 1];
            std::vector<std::string> merged;
            merged.reserve(symbols.size());
            for (std::size_t k = 0; k < symbols.size();) {
                if (k + 1 < symbols.size() && symbols[k] == left && symbols[k + 1] == right) {
                    merged.push_back(left + right);
                    k += 2;
                } else {
                    merged.push_back(symbols[k]);
                    k += 1;
                }
            }
            symbols = std::move(merged);
        }

        for (const std::string& sym : symbols) {
            const token_id id = vocab.id_of(sym);
            if (id < 0) throw data_error("symbol missing from vocabulary: " + sym);
            out.push_back(id);
        }
    }
    return out;
}

std::string decode(const bpe_vocab& vocab, std::span<const token_id> ids) {
    std::string symbols;
    for (token_id id : ids) symbols += vocab.token(id);
    std::string out;
    out.reserve(symbols.size());
    for (const decoded_char& dc : decode_utf8(symbols)) {
        auto it = alphabet().cp_to_byte.find(dc.cp);
        if (it == alphabet().cp_to_byte.end())
            throw data_error("token contains a codepoint outside the byte alphabet");
        out.push_back(static_cast<char>(it->second));
    }
    return out;
}

}  // namespace picl
