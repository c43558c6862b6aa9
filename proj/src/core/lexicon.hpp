#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "core/embedding_store.hpp"
#include "core/quadstats.hpp"

namespace ssd {

// Per-language word -> (dimension -> score) table. Words are lowercased on
// ingestion (ASCII only; multibyte sequences pass through); embedding lookups
// stay case-sensitive.
struct NormLexicon {
    std::string language;
    std::vector<std::string> dimensions;
    std::vector<std::string> words;              // insertion order after dedup
    std::vector<std::vector<double>> scores;     // words.size() x dimensions.size()
    std::unordered_map<std::string, std::size_t> index;
    std::size_t duplicates_dropped = 0;

    bool has_dimension(const std::string& name) const;
    std::size_t dimension_index(const std::string& name) const;
    std::size_t size() const { return words.size(); }
};

// CSV with header `word,<dim1>[,<dim2>...]`. Duplicate words (after
// lowercasing) keep the first occurrence; the drop count is recorded and
// logged to stderr.
NormLexicon load_lexicon(const std::string& path, const std::string& language);

// Lexicon rows joined with their embedding vectors, in stable lexicon order.
struct JoinedSample {
    std::vector<std::string> words;
    RowMatrix X;                 // N x d, rows are exact embedding vectors
    std::vector<double> y;       // raw scores for the joined dimension
    std::string language;
    std::string dimension;
    std::size_t dropped_oov = 0;

    Eigen::Index n() const { return X.rows(); }
    Eigen::Index dim() const { return X.cols(); }
};

struct JoinOptions {
    std::size_t min_n = 10;
    bool require_preprocessed = true;
};

JoinedSample join(const NormLexicon& lexicon, const EmbeddingSpace& space,
                  const std::string& dimension, const JoinOptions& opts = {});

}  // namespace ssd
