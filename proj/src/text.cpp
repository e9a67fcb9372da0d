#include "colligo/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include "colligo/hash.hpp"

namespace colligo {

namespace {

constexpr const char* kSepToken = "[SEP]";
constexpr const char* kUnkToken = "[UNK]";

bool is_word_char(unsigned char c) {
    return std::isalnum(c) || c >= 0x80;  // keep UTF-8 continuation bytes intact
}

char lower(unsigned char c) { return static_cast<char>(std::tolower(c)); }

// Marker-aware scan: emits lowercased words plus [SEP]/[UNK] marker hits.
struct Piece {
    enum Kind { Word, Sep, Unk } kind;
    std::string word;
};

std::vector<Piece> scan(const std::string& text) {
    std::vector<Piece> out;
    std::string current;
    const auto flush = [&] {
        if (!current.empty()) {
            out.push_back({Piece::Word, std::move(current)});
            current.clear();
        }
    };
    for (std::size_t i = 0; i < text.size();) {
        const unsigned char c = static_cast<unsigned char>(text[i]);
        if (c == '[' && i + 5 <= text.size()) {
            std::string marker = text.substr(i, 5);
            std::transform(marker.begin(), marker.end(), marker.begin(),
                           [](unsigned char m) { return lower(m); });
            if (marker == "[sep]" || marker == "[unk]") {
                flush();
                out.push_back({marker == "[sep]" ? Piece::Sep : Piece::Unk, {}});
                i += 5;
                continue;
            }
        }
        if (is_word_char(c)) {
            current += lower(c);
        } else {
            flush();
        }
        ++i;
    }
    flush();
    return out;
}

}  // namespace

std::vector<std::string> split_words(const std::string& text) {
    std::vector<std::string> words;
    for (auto& piece : scan(text)) {
        if (piece.kind == Piece::Word) words.push_back(std::move(piece.word));
    }
    return words;
}

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{}, 1) {}

Vocabulary::Vocabulary(std::vector<std::string> words, int min_freq) : min_freq_(min_freq) {
    tokens_.reserve(words.size() + 2);
    tokens_.push_back(kSepToken);
    tokens_.push_back(kUnkToken);
    for (std::string& w : words) tokens_.push_back(std::move(w));
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        if (!ids_.emplace(tokens_[i], static_cast<int>(i)).second) {
            throw ConfigError("duplicate vocabulary token '" + tokens_[i] + "'");
        }
        if (i >= 2) max_word_len_ = std::max(max_word_len_, tokens_[i].size());
    }
}

const std::string& Vocabulary::token(int id) const {
    if (id < 0 || id >= size()) throw LookupError("token id " + std::to_string(id) + " out of range");
    return tokens_[static_cast<std::size_t>(id)];
}

int Vocabulary::id_of(const std::string& token) const {
    const auto it = ids_.find(token);
    return it == ids_.end() ? -1 : it->second;
}

void Vocabulary::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write '" + path + "'");
    for (const std::string& t : tokens_) out << t << '\n';
}

Vocabulary Vocabulary::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    if (lines.size() < 2 || lines[0] != kSepToken || lines[1] != kUnkToken) {
        throw ParseError(path + ": vocabulary must start with [SEP] and [UNK]");
    }
    return Vocabulary(std::vector<std::string>(lines.begin() + 2, lines.end()));
}

std::uint64_t Vocabulary::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const std::string& t : tokens_) {
        h = fnv1a64(t, h);
        h = fnv1a64("\n", h);
    }
    return h;
}

Vocabulary build_vocab(const CorpusBundle& bundle, int min_freq) {
    if (min_freq < 1) throw ConfigError("min_freq must be >= 1");
    std::unordered_map<std::string, std::int64_t> freq;
    const auto count = [&](const std::string& text) {
        for (const std::string& w : split_words(text)) ++freq[w];
    };
    for (const Product& p : bundle.products) count(render_product(p));
    for (const Collection& c : bundle.collections) {
        for (const Section& sec : c.sections) {
            count(render_query(c.title, sec.name, c.start_date));
        }
    }

    std::vector<std::pair<std::string, std::int64_t>> entries(freq.begin(), freq.end());
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<std::string> words;
    for (auto& [word, n] : entries) {
        if (n >= min_freq) words.push_back(std::move(word));
    }
    return Vocabulary(std::move(words), min_freq);
}

TokenSequence tokenize(const std::string& text, const Vocabulary& vocab) {
    TokenSequence seq;
    seq.source = text;
    for (const Piece& piece : scan(text)) {
        if (piece.kind == Piece::Sep) {
            seq.ids.push_back(Vocabulary::kSepId);
            continue;
        }
        if (piece.kind == Piece::Unk) {
            seq.ids.push_back(Vocabulary::kUnkId);
            continue;
        }
        const int direct = vocab.id_of(piece.word);
        if (direct >= 0) {
            seq.ids.push_back(direct);
            continue;
        }
        // Greedy longest-match over in-vocab substrings; unmatched spans
        // collapse into a single [UNK].
        const std::string& w = piece.word;
        std::size_t pos = 0;
        bool pending_unk = false;
        while (pos < w.size()) {
            int match = -1;
            std::size_t match_len = 0;
            const std::size_t cap = std::min(vocab.max_word_len(), w.size() - pos);
            for (std::size_t len = cap; len >= 1; --len) {
                const int id = vocab.id_of(w.substr(pos, len));
                if (id >= 0) {
                    match = id;
                    match_len = len;
                    break;
                }
            }
            if (match >= 0) {
                if (pending_unk) {
                    seq.ids.push_back(Vocabulary::kUnkId);
                    pending_unk = false;
                }
                seq.ids.push_back(match);
                pos += match_len;
            } else {
                pending_unk = true;
                ++pos;
            }
        }
        if (pending_unk) seq.ids.push_back(Vocabulary::kUnkId);
    }
    return seq;
}

std::string render_query(const std::string& title, const std::string& section_name, const Date& date) {
    return title + " [SEP] " + section_name + " [SEP] " + date.month_day();
}

std::string render_product(const Product& p) {
    std::vector<std::string> attrs;
    attrs.push_back(p.title);

    std::string cats;
    for (auto it = p.category_path.rbegin(); it != p.category_path.rend(); ++it) {
        if (!cats.empty()) cats += ' ';
        cats += *it;
    }
    attrs.push_back(cats);
    attrs.push_back(std::to_string(p.price));
    attrs.push_back(p.brand);

    std::string tags;
    for (const std::string& t : p.tags) {
        if (!tags.empty()) tags += ' ';
        tags += t;
    }
    attrs.push_back(tags);
    for (const auto& [key, value] : p.extra_attrs) attrs.push_back(value);

    std::string out;
    int rendered = 0;
    for (const std::string& a : attrs) {
        if (a.empty()) continue;
        if (rendered == 11) break;
        if (rendered > 0) out += " [SEP] ";
        for (const char c : a) out += lower(static_cast<unsigned char>(c));
        ++rendered;
    }
    return out;
}

}  // namespace colligo
