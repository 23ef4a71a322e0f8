#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <json.hpp>

namespace facts::vectorize {

struct TokenConfig {
    std::size_t min_length = 2;  // in characters
    std::set<std::string> stopwords;
};

/// Small built-in English/German function-word list.
std::set<std::string> default_stopwords();

/// One term per line, `#` starts a comment, terms are lowercased.
std::set<std::string> load_stopwords(const std::filesystem::path& path);

/// Lowercases, splits on every non-letter code point and drops short tokens
/// and stopwords.
std::vector<std::string> tokenize(std::string_view text, const TokenConfig& cfg);

using TokenizedDoc = std::vector<std::string>;

class Vocabulary {
public:
    Vocabulary() = default;
    /// `terms` must be sorted and unique.
    explicit Vocabulary(std::vector<std::string> terms);

    std::size_t size() const noexcept { return terms_.size(); }
    bool empty() const noexcept { return terms_.empty(); }
    const std::vector<std::string>& terms() const noexcept { return terms_; }
    const std::string& term(std::size_t ordinal) const { return terms_.at(ordinal); }
    /// Ordinal of `term`, or -1.
    std::ptrdiff_t find(std::string_view term) const;

    bool operator==(const Vocabulary& other) const { return terms_ == other.terms_; }

private:
    std::vector<std::string> terms_;
    std::map<std::string, std::size_t, std::less<>> index_;
};

/// Terms found in at least `min_doc_count` distinct docs, ascending.
/// Throws EmptyVocabulary when nothing survives.
Vocabulary build_vocabulary(const std::vector<TokenizedDoc>& docs, std::size_t min_doc_count = 1);

struct DocId {
    std::string source_id;
    std::size_t chunk_index = 0;
    bool operator==(const DocId&) const = default;
};

using CountMatrix = Eigen::SparseMatrix<int, Eigen::RowMajor>;

/// Bag-of-words counts, one row per answer-document.
struct DocTermMatrix {
    Vocabulary vocab;
    std::vector<DocId> doc_ids;
    CountMatrix counts;

    Eigen::Index n_docs() const { return counts.rows(); }
    Eigen::Index n_terms() const { return counts.cols(); }
    std::int64_t total_tokens() const;
    /// Corpus count of every term.
    Eigen::VectorXd term_totals() const;
    /// Token count of every document.
    Eigen::VectorXi doc_lengths() const;
};

/// Docs with no in-vocabulary token are dropped (with a warning).
/// `doc_ids` labels `docs` one to one.
DocTermMatrix build_dtm(const std::vector<TokenizedDoc>& docs, const Vocabulary& vocab,
                        const std::vector<DocId>& doc_ids);

nlohmann::json to_json(const DocTermMatrix& dtm);
DocTermMatrix dtm_from_json(const nlohmann::json& j);

bool operator==(const DocTermMatrix& a, const DocTermMatrix& b);

}  // namespace facts::vectorize
