#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sbd::corpus {

// Normalized token: lowercase, no whitespace, punctuation split off.
using Token = std::string;

enum class Label : std::uint8_t { NB = 0, B = 1 };

// One speech transcript with a gold boundary label per token. The final
// token of a non-empty transcript is always labeled B.
struct Transcript {
    std::string id;
    std::vector<Token> tokens;
    std::vector<Label> labels;

    std::size_t sentence_count() const;
    void validate() const; // throws DataError on broken invariants
};

struct Dataset {
    std::string name;
    std::vector<Transcript> transcripts;

    void validate() const; // unique ids, valid transcripts
};

// Partition of a dataset's transcripts into k folds; sizes differ by at
// most one transcript.
struct FoldSplit {
    int k = 0;
    std::unordered_map<std::string, int> assignments;

    int fold_of(const std::string& id) const;
};

// Lowercases (ASCII + Latin-1 supplement), splits the punctuation marks
// . , ; : ! ? ... " ( ) into their own tokens, then tokenizes on
// whitespace. Stopwords are kept. Empty input gives an empty list.
std::vector<Token> normalize(std::string_view text);

bool is_punctuation_token(const Token& t);
// . ! ? and the ellipsis; the marks that can close a sentence
bool is_terminal_punctuation(const Token& t);

// One sentence per line; the last token of each line is labeled B.
// Throws IoError if unreadable, FormatError (with the line number) if a
// line normalizes to zero tokens.
Transcript load_segmented(const std::string& path, const std::string& id = "");
Transcript load_segmented(std::istream& in, const std::string& id,
                          const std::string& origin = "<stream>");

// A file (blank line separates transcripts) or a directory (one
// transcript per file, sorted by filename).
Dataset load_dataset(const std::string& path, const std::string& name = "");

// Tokens without labels; strip mode drops terminal punctuation tokens.
std::vector<Token> strip_labels(const Transcript& t, bool keep_punct = false);

// Inverse of load_segmented on normalized text: space-joined tokens with
// a newline after every B.
std::string reconstruct_segmented(const Transcript& t);

// Seeded shuffle + round-robin assignment. Throws ArgumentError when
// k < 2 or k exceeds the number of transcripts.
FoldSplit kfold(const Dataset& d, int k, std::uint64_t seed);

} // namespace sbd::corpus
