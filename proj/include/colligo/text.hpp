#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "colligo/corpus.hpp"

namespace colligo {

// Word vocabulary with greedy longest-match subword fallback for OOV words.
// Ids are dense; [SEP] and [UNK] are always present at ids 0 and 1.
class Vocabulary {
public:
    static constexpr int kSepId = 0;
    static constexpr int kUnkId = 1;

    Vocabulary();
    // words must not contain the special tokens; order becomes id order.
    explicit Vocabulary(std::vector<std::string> words, int min_freq = 1);

    int size() const { return static_cast<int>(tokens_.size()); }
    const std::string& token(int id) const;
    // -1 when absent.
    int id_of(const std::string& token) const;
    bool contains(const std::string& token) const { return id_of(token) >= 0; }
    int min_freq() const { return min_freq_; }
    std::size_t max_word_len() const { return max_word_len_; }
    const std::vector<std::string>& tokens() const { return tokens_; }

    // One token per line, line number = id, specials first.
    void save(const std::string& path) const;
    static Vocabulary load(const std::string& path);

    // FNV-1a over tokens joined by '\n'; ties checkpoints to the vocabulary.
    std::uint64_t hash() const;

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> ids_;
    std::size_t max_word_len_ = 0;
    int min_freq_ = 1;
};

struct TokenSequence {
    std::vector<int> ids;
    std::string source;
};

// Frequency vocabulary over every rendered product and query text in the
// bundle: tokens with frequency >= min_freq, ordered by frequency descending
// then lexicographically.
Vocabulary build_vocab(const CorpusBundle& bundle, int min_freq);

// Lowercase, split on whitespace/punctuation, keep [SEP]/[UNK] markers intact.
// In-vocab words map directly; OOV words fall back to greedy longest-match
// over in-vocab substrings, with unmatched residue collapsing to one [UNK].
TokenSequence tokenize(const std::string& text, const Vocabulary& vocab);

// "title [SEP] section [SEP] June 15". Not lowercased; tokenize handles case.
std::string render_query(const std::string& title, const std::string& section_name, const Date& date);

// Lowercased product text: title, leaf-first categories, price, brand, tags,
// then extra attribute values, joined with " [SEP] ". Empty attributes are
// skipped and at most 11 attributes are rendered.
std::string render_product(const Product& p);

// Lowercased word stream of a text, markers excluded; shared by the
// vocabulary builder and BM25 space-tokenization tests.
std::vector<std::string> split_words(const std::string& text);

}  // namespace colligo
