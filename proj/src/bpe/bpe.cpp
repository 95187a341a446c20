#include "miniens/bpe/bpe.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "miniens/error.hpp"
#include "miniens/hash.hpp"

namespace miniens::bpe {

namespace {

std::vector<std::string> split_words(const std::string& s) {
    std::vector<std::string> words;
    std::string cur;
    for (const char c : s) {
        if (c == ' ') {
            if (!cur.empty()) words.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) words.push_back(std::move(cur));
    return words;
}

std::vector<std::string> byte_tokens(const std::string& word) {
    std::vector<std::string> toks;
    toks.reserve(word.size());
    for (const char c : word) toks.emplace_back(1, c);
    return toks;
}

// One greedy left-to-right pass; a merged token is not re-paired with its
// right neighbour within the same pass.
void apply_merge(std::vector<std::string>& toks, const std::string& left, const std::string& right) {
    std::size_t write = 0;
    std::size_t read = 0;
    while (read < toks.size()) {
        if (read + 1 < toks.size() && toks[read] == left && toks[read + 1] == right) {
            toks[write++] = left + right;
            read += 2;
        } else {
            if (write != read) toks[write] = std::move(toks[read]);
            ++write;
            ++read;
        }
    }
    toks.resize(write);
}

std::uint64_t vocab_fingerprint(const BpeVocab& v) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (const auto& t : v.id_to_token) {
        h = fnv1a64(t, h);
        h = fnv1a64(std::string_view("\x1f", 1), h);
    }
    for (const auto& [l, r] : v.merges) {
        h = fnv1a64(l, h);
        h = fnv1a64(std::string_view("\x1e", 1), h);
        h = fnv1a64(r, h);
        h = fnv1a64(std::string_view("\x1f", 1), h);
    }
    return h;
}

void add_token(BpeVocab& v, const std::string& tok) {
    const int id = v.size();
    v.id_to_token.push_back(tok);
    if (!v.token_to_id.emplace(tok, id).second) {
        throw MalformedRow("duplicate token in vocabulary: " + escape_token(tok));
    }
}

}  // namespace

const std::array<std::string, 4>& BpeVocab::special_tokens() {
    static const std::array<std::string, 4> kSpecials{"<pad>", "<unk>", "<cls>", "<sep>"};
    return kSpecials;
}

BpeVocab train_bpe(const std::vector<text::CleanText>& corpus, int vocab_size) {
    std::map<std::string, long long> word_freq;
    std::set<unsigned char> alphabet;
    bool any_text = false;
    for (const auto& t : corpus) {
        if (t.content.empty()) continue;
        any_text = true;
        for (const char c : t.content) alphabet.insert(static_cast<unsigned char>(c));
        for (auto& w : split_words(t.content)) ++word_freq[w];
    }
    if (!any_text) throw EmptyCorpus("train_bpe needs at least one non-empty text");
    const int min_size = 4 + static_cast<int>(alphabet.size());
    if (vocab_size < min_size) {
        throw InvalidArgument("vocab_size " + std::to_string(vocab_size) + " below minimum " +
                              std::to_string(min_size) + " (specials + byte alphabet)");
    }

    BpeVocab vocab;
    for (const auto& s : BpeVocab::special_tokens()) add_token(vocab, s);
    for (const unsigned char b : alphabet) add_token(vocab, std::string(1, static_cast<char>(b)));

    std::vector<std::pair<std::vector<std::string>, long long>> words;
    words.reserve(word_freq.size());
    for (const auto& [w, f] : word_freq) words.emplace_back(byte_tokens(w), f);

    while (vocab.size() < vocab_size) {
        // Ordered map so the lexicographically smallest pair wins ties.
        std::map<std::pair<std::string, std::string>, long long> pair_counts;
        for (const auto& [toks, freq] : words) {
            for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
                pair_counts[{toks[i], toks[i + 1]}] += freq;
            }
        }
        const std::pair<std::string, std::string>* best = nullptr;
        long long best_count = 1;  // a winning pair must occur at least twice
        for (const auto& [pair, count] : pair_counts) {
            if (count > best_count) {
                best_count = count;
                best = &pair;
            }
        }
        if (best == nullptr) break;

        const auto [left, right] = *best;
        add_token(vocab, left + right);
        vocab.merges.emplace_back(left, right);
        for (auto& [toks, freq] : words) apply_merge(toks, left, right);
    }

    vocab.tag = vocab_fingerprint(vocab);
    return vocab;
}

TokenizedInput encode(const text::CleanText& text, const BpeVocab& vocab, int max_seq_len) {
    if (max_seq_len < 3) {
        throw InvalidArgument("max_seq_len must be >= 3, got " + std::to_string(max_seq_len));
    }

    std::vector<int> body;
    const std::vector<std::string> words = split_words(text.content);
    const auto space_it = vocab.token_to_id.find(" ");
    for (std::size_t w = 0; w < words.size(); ++w) {
        if (w > 0) body.push_back(space_it != vocab.token_to_id.end() ? space_it->second : BpeVocab::kUnk);
        std::vector<std::string> toks = byte_tokens(words[w]);
        for (const auto& [l, r] : vocab.merges) apply_merge(toks, l, r);
        for (const auto& t : toks) {
            const auto it = vocab.token_to_id.find(t);
            body.push_back(it != vocab.token_to_id.end() ? it->second : BpeVocab::kUnk);
        }
    }
    if (body.size() > static_cast<std::size_t>(max_seq_len - 2)) {
        body.resize(static_cast<std::size_t>(max_seq_len - 2));
    }

    TokenizedInput out;
    out.vocab_tag = vocab.tag;
    out.input_ids.assign(static_cast<std::size_t>(max_seq_len), BpeVocab::kPad);
    out.attention_mask.assign(static_cast<std::size_t>(max_seq_len), 0);
    out.input_ids[0] = BpeVocab::kCls;
    std::copy(body.begin(), body.end(), out.input_ids.begin() + 1);
    out.input_ids[body.size() + 1] = BpeVocab::kSep;
    for (std::size_t i = 0; i < body.size() + 2; ++i) out.attention_mask[i] = 1;
    return out;
}

std::string decode(const std::vector<int>& ids, const BpeVocab& vocab) {
    std::string out;
    for (const int id : ids) {
        if (id < 0 || id >= vocab.size()) {
            throw IdOutOfRange("token id " + std::to_string(id) + " outside vocabulary of size " +
                               std::to_string(vocab.size()));
        }
        if (id == BpeVocab::kPad || id == BpeVocab::kUnk || id == BpeVocab::kCls ||
            id == BpeVocab::kSep) {
            continue;
        }
        out += vocab.id_to_token[static_cast<std::size_t>(id)];
    }
    return out;
}

std::string escape_token(const std::string& token) {
    std::string out;
    for (const char c : token) {
        const unsigned char b = static_cast<unsigned char>(c);
        if (b == '\\') {
            out += "\\\\";
        } else if (b >= 0x21 && b <= 0x7E) {
            out.push_back(c);
        } else {
            char buf[8];
            std::snprintf(buf, sizeof(buf), "\\x%02x", b);
            out += buf;
        }
    }
    return out;
}

std::string unescape_token(const std::string& escaped) {
    std::string out;
    std::size_t i = 0;
    const auto hex = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        return -1;
    };
    while (i < escaped.size()) {
        if (escaped[i] != '\\') {
            out.push_back(escaped[i]);
            ++i;
            continue;
        }
        if (i + 1 < escaped.size() && escaped[i + 1] == '\\') {
            out.push_back('\\');
            i += 2;
            continue;
        }
        if (i + 3 < escaped.size() && escaped[i + 1] == 'x') {
            const int hi = hex(escaped[i + 2]);
            const int lo = hex(escaped[i + 3]);
            if (hi >= 0 && lo >= 0) {
                out.push_back(static_cast<char>(hi * 16 + lo));
                i += 4;
                continue;
            }
        }
        throw MalformedRow("bad escape in token: " + escaped);
    }
    return out;
}

void save_vocab(const BpeVocab& vocab, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream f(dir / "vocab.txt", std::ios::binary);
        for (const auto& t : vocab.id_to_token) f << escape_token(t) << '\n';
    }
    {
        std::ofstream f(dir / "merges.txt", std::ios::binary);
        for (const auto& [l, r] : vocab.merges) f << escape_token(l) << ' ' << escape_token(r) << '\n';
    }
}

BpeVocab load_vocab(const std::filesystem::path& dir) {
    const auto vocab_path = dir / "vocab.txt";
    const auto merges_path = dir / "merges.txt";
    std::ifstream vf(vocab_path, std::ios::binary);
    if (!vf) throw MissingData("cannot open " + vocab_path.string());

    BpeVocab vocab;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(vf, line)) {
        ++lineno;
        try {
            add_token(vocab, unescape_token(line));
        } catch (const MalformedRow& e) {
            throw MalformedRow(vocab_path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (vocab.size() < 4) throw MalformedRow(vocab_path.string() + ": fewer than 4 tokens");
    const auto& specials = BpeVocab::special_tokens();
    for (std::size_t i = 0; i < specials.size(); ++i) {
        if (vocab.id_to_token[i] != specials[i]) {
            throw MalformedRow(vocab_path.string() + ": token " + std::to_string(i) +
                               " must be " + specials[i]);
        }
    }

    std::ifstream mf(merges_path, std::ios::binary);
    if (!mf) throw MissingData("cannot open " + merges_path.string());
    lineno = 0;
    while (std::getline(mf, line)) {
        ++lineno;
        const auto sp = line.find(' ');
        if (sp == std::string::npos || sp == 0 || sp + 1 >= line.size()) {
            throw MalformedRow(merges_path.string() + ":" + std::to_string(lineno) +
                               ": expected 'left right'");
        }
        std::string left = unescape_token(line.substr(0, sp));
        std::string right = unescape_token(line.substr(sp + 1));
        if (!vocab.token_to_id.contains(left + right)) {
            throw MalformedRow(merges_path.string() + ":" + std::to_string(lineno) +
                               ": merge result not in vocabulary");
        }
        vocab.merges.emplace_back(std::move(left), std::move(right));
    }

    vocab.tag = vocab_fingerprint(vocab);
    return vocab;
}

}  // namespace miniens::bpe
