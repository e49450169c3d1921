#include "sbd/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "sbd/errors.hpp"
#include "sbd/rng.hpp"

namespace fs = std::filesystem;

namespace sbd::corpus {

namespace {

constexpr char32_t kEllipsis = U'…';
constexpr char32_t kNbsp = U' ';

bool is_separated_punct(char32_t cp) {
    switch (cp) {
        case U'.': case U',': case U';': case U':':
        case U'!': case U'?': case U'"': case U'(': case U')':
            return true;
        default:
            return cp == kEllipsis;
    }
}

bool is_space_cp(char32_t cp) {
    return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' ||
           cp == U'\v' || cp == U'\f' || cp == kNbsp;
}

// ASCII A-Z plus the Latin-1 supplement uppercase range (covers all of
// Portuguese); everything else passes through untouched.
char32_t to_lower_cp(char32_t cp) {
    if (cp >= U'A' && cp <= U'Z') return cp + 0x20;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
    return cp;
}

// Decodes one UTF-8 codepoint at i; malformed bytes are passed through
// one at a time.
char32_t decode_utf8(std::string_view s, std::size_t& i) {
    unsigned char b0 = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    char32_t cp = b0;
    if ((b0 & 0x80) == 0x00) {
        len = 1;
    } else if ((b0 & 0xE0) == 0xC0) {
        len = 2; cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3; cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4; cp = b0 & 0x07;
    } else {
        ++i;
        return b0;
    }
    if (i + len > s.size()) { ++i; return b0; }
    for (std::size_t k = 1; k < len; ++k) {
        unsigned char bk = static_cast<unsigned char>(s[i + k]);
        if ((bk & 0xC0) != 0x80) { ++i; return b0; }
        cp = (cp << 6) | (bk & 0x3F);
    }
    i += len;
    return cp;
}

void encode_utf8(char32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

bool is_blank_line(const std::string& line) {
    for (char c : line)
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    return true;
}

} // namespace

std::vector<Token> normalize(std::string_view text) {
    std::vector<Token> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    };
    std::size_t i = 0;
    while (i < text.size()) {
        char32_t cp = to_lower_cp(decode_utf8(text, i));
        if (is_space_cp(cp)) {
            flush();
        } else if (is_separated_punct(cp)) {
            flush();
            std::string mark;
            encode_utf8(cp, mark);
            tokens.push_back(std::move(mark));
        } else {
            encode_utf8(cp, current);
        }
    }
    flush();
    return tokens;
}

bool is_punctuation_token(const Token& t) {
    if (t.empty()) return false;
    std::size_t i = 0;
    char32_t cp = decode_utf8(t, i);
    return i == t.size() && is_separated_punct(cp);
}

bool is_terminal_punctuation(const Token& t) {
    return t == "." || t == "!" || t == "?" || t == "…";
}

std::size_t Transcript::sentence_count() const {
    std::size_t n = 0;
    for (Label l : labels)
        if (l == Label::B) ++n;
    return n;
}

void Transcript::validate() const {
    if (labels.size() != tokens.size())
        throw DataError("transcript '" + id + "': " + std::to_string(labels.size()) +
                        " labels for " + std::to_string(tokens.size()) + " tokens");
    if (!tokens.empty() && labels.back() != Label::B)
        throw DataError("transcript '" + id + "': final token not labeled B");
}

void Dataset::validate() const {
    std::unordered_set<std::string> seen;
    for (const Transcript& t : transcripts) {
        t.validate();
        if (!seen.insert(t.id).second)
            throw DataError("dataset '" + name + "': duplicate transcript id '" + t.id + "'");
    }
}

Transcript load_segmented(std::istream& in, const std::string& id, const std::string& origin) {
    Transcript t;
    t.id = id;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<Token> toks = normalize(line);
        if (toks.empty())
            throw FormatError(origin + ": line " + std::to_string(line_no) +
                              " normalizes to zero tokens");
        for (std::size_t i = 0; i < toks.size(); ++i) {
            t.tokens.push_back(std::move(toks[i]));
            t.labels.push_back(i + 1 == toks.size() ? Label::B : Label::NB);
        }
    }
    return t;
}

Transcript load_segmented(const std::string& path, const std::string& id) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open '" + path + "' for reading");
    std::string tid = id.empty() ? fs::path(path).stem().string() : id;
    return load_segmented(in, tid, path);
}

namespace {

// Blank lines separate transcripts; ids are <stem>#<index>.
Dataset load_dataset_file(const std::string& path, const std::string& name) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open '" + path + "' for reading");
    std::string stem = fs::path(path).stem().string();
    Dataset d;
    d.name = name.empty() ? stem : name;

    std::vector<std::string> block;
    std::string line;
    std::size_t block_start = 1, line_no = 0;
    auto flush_block = [&] {
        if (block.empty()) return;
        std::ostringstream joined;
        for (const std::string& l : block) joined << l << '\n';
        std::istringstream bs(joined.str());
        Transcript t = load_segmented(bs, stem + "#" + std::to_string(d.transcripts.size()),
                                      path + " (transcript starting at line " +
                                          std::to_string(block_start) + ")");
        d.transcripts.push_back(std::move(t));
        block.clear();
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (is_blank_line(line)) {
            flush_block();
        } else {
            if (block.empty()) block_start = line_no;
            block.push_back(line);
        }
    }
    flush_block();
    return d;
}

Dataset load_dataset_dir(const std::string& path, const std::string& name) {
    Dataset d;
    d.name = name.empty() ? fs::path(path).filename().string() : name;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path))
        if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const fs::path& f : files)
        d.transcripts.push_back(load_segmented(f.string(), f.stem().string()));
    return d;
}

} // namespace

Dataset load_dataset(const std::string& path, const std::string& name) {
    std::error_code ec;
    if (fs::is_directory(path, ec))
        return load_dataset_dir(path, name);
    Dataset d = load_dataset_file(path, name);
    d.validate();
    return d;
}

std::vector<Token> strip_labels(const Transcript& t, bool keep_punct) {
    std::vector<Token> out;
    out.reserve(t.tokens.size());
    for (const Token& tok : t.tokens) {
        if (!keep_punct && is_terminal_punctuation(tok)) continue;
        out.push_back(tok);
    }
    return out;
}

std::string reconstruct_segmented(const Transcript& t) {
    std::string out;
    for (std::size_t i = 0; i < t.tokens.size(); ++i) {
        out += t.tokens[i];
        out += (t.labels[i] == Label::B) ? '\n' : ' ';
    }
    return out;
}

int FoldSplit::fold_of(const std::string& id) const {
    auto it = assignments.find(id);
    if (it == assignments.end())
        throw ArgumentError("fold split: unknown transcript id '" + id + "'");
    return it->second;
}

FoldSplit kfold(const Dataset& d, int k, std::uint64_t seed) {
    if (k < 2)
        throw ArgumentError("kfold: k must be >= 2, got " + std::to_string(k));
    if (static_cast<std::size_t>(k) > d.transcripts.size())
        throw ArgumentError("kfold: k=" + std::to_string(k) + " exceeds " +
                            std::to_string(d.transcripts.size()) + " transcripts");
    std::vector<std::size_t> order(d.transcripts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    shuffle(order, rng);

    FoldSplit split;
    split.k = k;
    for (std::size_t pos = 0; pos < order.size(); ++pos)
        split.assignments[d.transcripts[order[pos]].id] = static_cast<int>(pos % k);
    return split;
}

} // namespace sbd::corpus
