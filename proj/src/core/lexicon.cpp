#include "core/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iostream>

#include "core/error.hpp"

namespace ssd {

namespace {

std::string ascii_lower(std::string s) {
    for (char& c : s)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string trim(std::string s) {
    auto issp = [](unsigned char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    std::size_t b = 0, e = s.size();
    while (b < e && issp(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && issp(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return out;
}

}  // namespace

bool NormLexicon::has_dimension(const std::string& name) const {
    return std::find(dimensions.begin(), dimensions.end(), name) != dimensions.end();
}

std::size_t NormLexicon::dimension_index(const std::string& name) const {
    auto it = std::find(dimensions.begin(), dimensions.end(), name);
    if (it == dimensions.end())
        throw_validation("lexicon " + language + ": dimension `" + name +
                         "` not declared");
    return static_cast<std::size_t>(it - dimensions.begin());
}

NormLexicon load_lexicon(const std::string& path, const std::string& language) {
    std::ifstream in(path);
    if (!in) throw_validation("cannot open lexicon file: " + path);

    NormLexicon lex;
    lex.language = language;

    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) throw_parse(path + ": empty lexicon file");
    ++line_no;
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
        static_cast<unsigned char>(line[1]) == 0xBB &&
        static_cast<unsigned char>(line[2]) == 0xBF)
        line.erase(0, 3);  // UTF-8 BOM

    auto header = split_csv(line);
    if (header.size() < 2 || ascii_lower(header[0]) != "word")
        throw_parse(path + ": missing header `word,<dim1>[,...]`");
    for (std::size_t j = 1; j < header.size(); ++j) {
        if (header[j].empty())
            throw_parse(path + ": empty dimension name in header");
        lex.dimensions.push_back(ascii_lower(header[j]));
    }

    bool any_row = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_csv(line);
        if (fields.size() != header.size())
            throw_parse(path + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " fields, got " +
                        std::to_string(fields.size()));
        any_row = true;

        std::string word = ascii_lower(fields[0]);
        if (word.empty())
            throw_parse(path + ":" + std::to_string(line_no) + ": empty word");

        std::vector<double> row(lex.dimensions.size());
        for (std::size_t j = 0; j < lex.dimensions.size(); ++j) {
            const std::string& tok = fields[j + 1];
            double v;
            auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec != std::errc() || ptr != tok.data() + tok.size())
                throw_parse(path + ":" + std::to_string(line_no) +
                            ": non-numeric score `" + tok + "` for word `" + word + "`");
            row[j] = v;
        }

        if (lex.index.count(word)) {
            ++lex.duplicates_dropped;
            std::cerr << "lexicon " << path << ":" << line_no << ": duplicate word `"
                      << word << "`, keeping first occurrence\n";
            continue;
        }
        lex.index.emplace(word, lex.words.size());
        lex.words.push_back(std::move(word));
        lex.scores.push_back(std::move(row));
    }
    if (!any_row) throw_parse(path + ": lexicon has a header but no entries");
    return lex;
}

JoinedSample join(const NormLexicon& lexicon, const EmbeddingSpace& space,
                  const std::string& dimension, const JoinOptions& opts) {
    const std::size_t dim_idx = lexicon.dimension_index(dimension);
    if (opts.require_preprocessed && !(space.l2_normalized && space.first_pc_removed))
        throw_validation("join: space `" + space.language +
                         "` is not preprocessed (l2_normalized + first_pc_removed)");

    JoinedSample out;
    out.language = lexicon.language;
    out.dimension = dimension;

    std::vector<Eigen::Index> rows;
    rows.reserve(lexicon.size());
    for (std::size_t i = 0; i < lexicon.size(); ++i) {
        auto r = space.row_of(lexicon.words[i]);
        if (!r) {
            ++out.dropped_oov;
            continue;
        }
        rows.push_back(*r);
        out.words.push_back(lexicon.words[i]);
        out.y.push_back(lexicon.scores[i][dim_idx]);
    }

    if (out.words.size() < opts.min_n)
        throw_validation("join: only " + std::to_string(out.words.size()) +
                         " of " + std::to_string(lexicon.size()) + " lexicon words in `" +
                         lexicon.language + "` vocabulary (floor " +
                         std::to_string(opts.min_n) + ")");

    out.X.resize(static_cast<Eigen::Index>(rows.size()), space.dim());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.X.row(static_cast<Eigen::Index>(i)) = space.vectors.row(rows[i]);
    return out;
}

}  // namespace ssd
