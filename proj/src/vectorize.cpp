#include "facts/vectorize.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "facts/error.hpp"
#include "facts/io.hpp"
#include "facts/utf8.hpp"

namespace facts::vectorize {

std::set<std::string> default_stopwords() {
    return {
        // English
        "a", "about", "also", "an", "and", "are", "as", "at", "be", "been", "but", "by", "can",
        "could", "do", "does", "for", "from", "has", "have", "how", "however", "if", "in", "into",
        "is", "it", "its", "more", "most", "much", "not", "of", "on", "or", "other", "our",
        "should", "so", "such", "than", "that", "the", "their", "them", "there", "these", "they",
        "this", "those", "through", "to", "was", "we", "well", "were", "what", "when", "where",
        "which", "while", "who", "will", "with", "would",
        // German
        "auch", "auf", "aus", "bei", "das", "dass", "dem", "den", "der", "des", "die", "ein",
        "eine", "einem", "einen", "einer", "es", "für", "hat", "im", "ist", "mit", "nicht",
        "oder", "sich", "sie", "sind", "und", "von", "wird", "werden", "wie", "zu", "zum", "zur",
    };
}

std::set<std::string> load_stopwords(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    std::set<std::string> out;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(start, end - start);
        start = end + 1;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::u32string decoded = utf8::decode(line);
        std::u32string term;
        for (char32_t cp : decoded)
            if (cp != U' ' && cp != U'\t' && cp != U'\r') term.push_back(utf8::to_lower(cp));
        if (!term.empty()) out.insert(utf8::encode(term));
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view text, const TokenConfig& cfg) {
    std::vector<std::string> tokens;
    std::u32string current;
    auto flush = [&] {
        if (current.size() >= cfg.min_length) {
            std::string term = utf8::encode(current);
            if (!cfg.stopwords.contains(term)) tokens.push_back(std::move(term));
        }
        current.clear();
    };
    for (char32_t cp : utf8::decode(text)) {
        if (utf8::is_letter(cp)) current.push_back(utf8::to_lower(cp));
        else flush();
    }
    flush();
    return tokens;
}

Vocabulary::Vocabulary(std::vector<std::string> terms) : terms_(std::move(terms)) {
    for (std::size_t i = 0; i < terms_.size(); ++i) index_.emplace(terms_[i], i);
}

std::ptrdiff_t Vocabulary::find(std::string_view term) const {
    const auto it = index_.find(term);
    return it == index_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

Vocabulary build_vocabulary(const std::vector<TokenizedDoc>& docs, std::size_t min_doc_count) {
    std::map<std::string, std::size_t> doc_freq;
    for (const auto& doc : docs) {
        std::set<std::string_view> distinct(doc.begin(), doc.end());
        for (auto term : distinct) ++doc_freq[std::string(term)];
    }
    std::vector<std::string> terms;
    for (auto& [term, count] : doc_freq)
        if (count >= std::max<std::size_t>(1, min_doc_count)) terms.push_back(term);
    if (terms.empty()) throw EmptyVocabulary();
    return Vocabulary(std::move(terms));
}

std::int64_t DocTermMatrix::total_tokens() const {
    std::int64_t n = 0;
    for (Eigen::Index d = 0; d < counts.outerSize(); ++d)
        for (CountMatrix::InnerIterator it(counts, d); it; ++it) n += it.value();
    return n;
}

Eigen::VectorXd DocTermMatrix::term_totals() const {
    Eigen::VectorXd totals = Eigen::VectorXd::Zero(n_terms());
    for (Eigen::Index d = 0; d < counts.outerSize(); ++d)
        for (CountMatrix::InnerIterator it(counts, d); it; ++it) totals(it.col()) += it.value();
    return totals;
}

Eigen::VectorXi DocTermMatrix::doc_lengths() const {
    Eigen::VectorXi lengths = Eigen::VectorXi::Zero(n_docs());
    for (Eigen::Index d = 0; d < counts.outerSize(); ++d)
        for (CountMatrix::InnerIterator it(counts, d); it; ++it) lengths(d) += it.value();
    return lengths;
}

DocTermMatrix build_dtm(const std::vector<TokenizedDoc>& docs, const Vocabulary& vocab,
                        const std::vector<DocId>& doc_ids) {
    if (vocab.empty()) throw EmptyVocabulary();
    if (doc_ids.size() != docs.size())
        throw DimensionMismatch("build_dtm: " + std::to_string(docs.size()) + " docs but " +
                                std::to_string(doc_ids.size()) + " ids");
    DocTermMatrix dtm;
    dtm.vocab = vocab;
    std::vector<Eigen::Triplet<int>> triplets;
    Eigen::Index row = 0;
    for (std::size_t d = 0; d < docs.size(); ++d) {
        std::map<std::size_t, int> counts;
        for (const auto& token : docs[d])
            if (const auto w = vocab.find(token); w >= 0) ++counts[static_cast<std::size_t>(w)];
        if (counts.empty()) {
            spdlog::warn("dropping answer {}#{}: no in-vocabulary tokens", doc_ids[d].source_id,
                         doc_ids[d].chunk_index);
            continue;
        }
        for (auto [w, c] : counts)
            triplets.emplace_back(row, static_cast<Eigen::Index>(w), c);
        dtm.doc_ids.push_back(doc_ids[d]);
        ++row;
    }
    dtm.counts.resize(row, static_cast<Eigen::Index>(vocab.size()));
    dtm.counts.setFromTriplets(triplets.begin(), triplets.end());
    dtm.counts.makeCompressed();
    return dtm;
}

nlohmann::json to_json(const DocTermMatrix& dtm) {
    nlohmann::json ids = nlohmann::json::array();
    for (const auto& id : dtm.doc_ids) ids.push_back({id.source_id, id.chunk_index});
    nlohmann::json entries = nlohmann::json::array();
    for (Eigen::Index d = 0; d < dtm.counts.outerSize(); ++d)
        for (CountMatrix::InnerIterator it(dtm.counts, d); it; ++it)
            entries.push_back({d, it.col(), it.value()});
    return {{"vocab", dtm.vocab.terms()}, {"doc_ids", ids}, {"entries", entries}};
}

DocTermMatrix dtm_from_json(const nlohmann::json& j) {
    try {
        DocTermMatrix dtm;
        dtm.vocab = Vocabulary(j.at("vocab").get<std::vector<std::string>>());
        for (const auto& id : j.at("doc_ids"))
            dtm.doc_ids.push_back({id.at(0).get<std::string>(), id.at(1).get<std::size_t>()});
        std::vector<Eigen::Triplet<int>> triplets;
        for (const auto& e : j.at("entries"))
            triplets.emplace_back(e.at(0).get<Eigen::Index>(), e.at(1).get<Eigen::Index>(),
                                  e.at(2).get<int>());
        dtm.counts.resize(static_cast<Eigen::Index>(dtm.doc_ids.size()),
                          static_cast<Eigen::Index>(dtm.vocab.size()));
        dtm.counts.setFromTriplets(triplets.begin(), triplets.end());
        dtm.counts.makeCompressed();
        return dtm;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed document-term matrix JSON: ") + e.what());
    }
}

bool operator==(const DocTermMatrix& a, const DocTermMatrix& b) {
    if (!(a.vocab == b.vocab) || a.doc_ids != b.doc_ids) return false;
    if (a.counts.rows() != b.counts.rows() || a.counts.cols() != b.counts.cols()) return false;
    return Eigen::MatrixXi(a.counts) == Eigen::MatrixXi(b.counts);
}

}  // namespace facts::vectorize
