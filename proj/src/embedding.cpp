#include "sbd/embedding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "sbd/errors.hpp"

namespace sbd::emb {

const char* mode_name(Mode m) { return m == Mode::kCbow ? "cbow" : "sg"; }

const char* family_name(Family f) {
    switch (f) {
        case Family::kPlain: return "w2v";
        case Family::kOrder: return "order";
        case Family::kSubword: return "subword";
    }
    return "?";
}

Mode parse_mode(const std::string& s) {
    if (s == "cbow") return Mode::kCbow;
    if (s == "sg" || s == "skipgram") return Mode::kSkipgram;
    throw ArgumentError("unknown mode '" + s + "' (expected cbow|sg)");
}

Family parse_family(const std::string& s) {
    if (s == "w2v" || s == "plain") return Family::kPlain;
    if (s == "order") return Family::kOrder;
    if (s == "subword") return Family::kSubword;
    throw ArgumentError("unknown method '" + s + "' (expected w2v|order|subword)");
}

InductionConfig InductionConfig::defaults(Family family, Mode mode) {
    InductionConfig cfg;
    cfg.family = family;
    cfg.mode = mode;
    cfg.window = family == Family::kOrder ? 2 : 5;
    cfg.initial_lr = mode == Mode::kCbow ? 0.05 : 0.025;
    return cfg;
}

void InductionConfig::validate() const {
    if (dim < 1) throw ArgumentError("induction: dim must be positive");
    if (window < 1) throw ArgumentError("induction: window must be >= 1");
    if (negatives < 1) throw ArgumentError("induction: negatives must be >= 1");
    if (epochs < 1) throw ArgumentError("induction: epochs must be >= 1");
    if (!(initial_lr > 0.0)) throw ArgumentError("induction: learning rate must be positive");
    if (subsample < 0.0) throw ArgumentError("induction: subsample threshold must be >= 0");
    if (noise_power < 0.0) throw ArgumentError("induction: noise power must be >= 0");
    if (workers < 1) throw ArgumentError("induction: workers must be >= 1");
    if (family == Family::kSubword) {
        if (ngram_min < 1 || ngram_max < ngram_min)
            throw ArgumentError("induction: bad n-gram range");
        if (buckets < 1) throw ArgumentError("induction: buckets must be positive");
    }
}

std::string InductionConfig::method_tag() const {
    switch (family) {
        case Family::kPlain:
            return mode == Mode::kCbow ? "w2v-cbow" : "w2v-sg";
        case Family::kOrder:
            return mode == Mode::kCbow ? "order-cwindow" : "order-ssg";
        case Family::kSubword:
            return mode == Mode::kCbow ? "subword-cbow" : "subword-sg";
    }
    return "?";
}

bool EmbeddingTable::compose_oov(const std::string& word, std::vector<double>& out) const {
    if (!subword) return false;
    out.assign(dim, 0.0);
    subword->add_ngram_rows(word, out.data());
    return true;
}

void EmbeddingTable::validate() const {
    if (vectors.rows() != vocab.size() || vectors.cols() != dim)
        throw DataError("embedding table shape does not match vocabulary");
    if (!vectors.all_finite())
        throw DataError("embedding table contains non-finite values");
}

namespace {

void append_double(std::string& out, double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v); // shortest round-trip form
    out.append(buf, res.ptr);
}

void write_matrix_rows(std::ofstream& out, const nn::Tensor2& m,
                       const std::function<std::string(int)>& label) {
    std::string line;
    for (int r = 0; r < m.rows(); ++r) {
        line.clear();
        line += label(r);
        const double* row = m.row_ptr(r);
        for (int c = 0; c < m.cols(); ++c) {
            line += ' ';
            append_double(line, row[c]);
        }
        line += '\n';
        out << line;
    }
}

double parse_double(const std::string& s, const std::string& where, std::size_t line_no) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw FormatError(where + ": line " + std::to_string(line_no) + ": bad float '" + s + "'");
    if (!std::isfinite(v))
        throw FormatError(where + ": line " + std::to_string(line_no) + ": non-finite value");
    return v;
}

} // namespace

void save_embeddings(const EmbeddingTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << table.size() << ' ' << table.dim << '\n';
    write_matrix_rows(out, table.vectors, [&](int r) { return table.vocab.entry(r).word; });
    if (!out) throw IoError("write failed on '" + path + "'");

    if (table.subword) {
        const SubwordTable& sw = *table.subword;
        std::ofstream side(path + ".subword");
        if (!side) throw IoError("cannot open '" + path + ".subword' for writing");
        side << sw.bucket_count() << ' ' << sw.dim() << ' ' << sw.n_min << ' ' << sw.n_max << ' '
             << sw.hash_seed << '\n';
        write_matrix_rows(side, sw.buckets, [](int) { return std::string(); });
        if (!side) throw IoError("write failed on '" + path + ".subword'");
    }
}

namespace {

// rows of "label? f1 .. fd"; label_expected toggles the leading word
void read_matrix_rows(std::istream& in, nn::Tensor2& m, bool labeled,
                      std::vector<std::string>* labels, const std::string& where) {
    std::string line;
    std::size_t line_no = 1; // header consumed already
    for (int r = 0; r < m.rows(); ++r) {
        if (!std::getline(in, line))
            throw FormatError(where + ": expected " + std::to_string(m.rows()) +
                              " rows, file ends after " + std::to_string(r));
        ++line_no;
        std::istringstream ls(line);
        if (labeled) {
            std::string word;
            if (!(ls >> word))
                throw FormatError(where + ": line " + std::to_string(line_no) + ": empty row");
            labels->push_back(std::move(word));
        }
        std::string field;
        for (int c = 0; c < m.cols(); ++c) {
            if (!(ls >> field))
                throw FormatError(where + ": line " + std::to_string(line_no) + ": row has fewer than " +
                                  std::to_string(m.cols()) + " values");
            m(r, c) = parse_double(field, where, line_no);
        }
        std::string extra;
        if (ls >> extra)
            throw FormatError(where + ": line " + std::to_string(line_no) + ": trailing field '" +
                              extra + "'");
    }
    std::string leftover;
    while (std::getline(in, leftover)) {
        if (!leftover.empty())
            throw FormatError(where + ": more rows than the header declares");
    }
}

} // namespace

EmbeddingTable load_embeddings(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::string header;
    if (!std::getline(in, header)) throw FormatError(path + ": missing header");
    std::istringstream hs(header);
    long long m = -1, d = -1;
    std::string extra;
    if (!(hs >> m >> d) || (hs >> extra) || m < 0 || d < 1)
        throw FormatError(path + ": line 1: malformed header '" + header + "'");

    EmbeddingTable table;
    table.dim = static_cast<int>(d);
    table.vectors = nn::Tensor2(static_cast<int>(m), static_cast<int>(d));
    std::vector<std::string> words;
    words.reserve(m);
    read_matrix_rows(in, table.vectors, true, &words, path);
    table.vocab = Vocabulary::from_ordered_words(std::move(words));
    if (table.vocab.size() != static_cast<int>(m))
        throw FormatError(path + ": duplicate words in table");

    std::ifstream side(path + ".subword");
    if (side) {
        std::string sh;
        if (!std::getline(side, sh)) throw FormatError(path + ".subword: missing header");
        std::istringstream shs(sh);
        long long buckets = -1, sd = -1;
        int n_min = 0, n_max = 0;
        std::uint64_t seed = 0;
        if (!(shs >> buckets >> sd >> n_min >> n_max >> seed) || buckets < 1 || sd != d)
            throw FormatError(path + ".subword: line 1: malformed header '" + sh + "'");
        SubwordTable sw;
        sw.buckets = nn::Tensor2(static_cast<int>(buckets), static_cast<int>(sd));
        sw.n_min = n_min;
        sw.n_max = n_max;
        sw.hash_seed = seed;
        read_matrix_rows(side, sw.buckets, false, nullptr, path + ".subword");
        table.subword = std::move(sw);
    }
    return table;
}

double cosine(const double* a, const double* b, int dim) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (int i = 0; i < dim; ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<std::pair<std::string, double>> nearest_neighbors(const EmbeddingTable& table,
                                                              const std::string& word, int n) {
    if (n < 1) throw ArgumentError("nearest_neighbors: n must be >= 1");
    int query_id = table.id_of(word);
    std::vector<double> composed;
    const double* query = nullptr;
    if (query_id >= 0) {
        query = table.vectors.row_ptr(query_id);
    } else if (table.compose_oov(word, composed)) {
        query = composed.data();
    } else {
        throw ArgumentError("nearest_neighbors: '" + word + "' not in vocabulary");
    }

    std::vector<std::pair<std::string, double>> scored;
    scored.reserve(table.size());
    for (int i = 0; i < table.size(); ++i) {
        if (i == query_id) continue;
        scored.emplace_back(table.vocab.entry(i).word,
                            cosine(query, table.vectors.row_ptr(i), table.dim));
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    if (static_cast<int>(scored.size()) > n) scored.resize(n);
    return scored;
}

} // namespace sbd::emb
