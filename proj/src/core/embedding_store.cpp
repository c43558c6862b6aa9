#include "core/embedding_store.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace ssd {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r'))
            ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r')
            ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

bool parse_double(std::string_view token, double& out) {
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

bool parse_size(std::string_view token, std::size_t& out) {
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

}  // namespace

void EmbeddingSpace::rebuild_index() {
    index.clear();
    index.reserve(vocab.size());
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(vocab.size()); ++i)
        index.emplace(vocab[static_cast<std::size_t>(i)], i);
}

std::optional<Eigen::Index> EmbeddingSpace::row_of(const std::string& word) const {
    auto it = index.find(word);
    if (it == index.end()) return std::nullopt;
    return it->second;
}

std::optional<Eigen::RowVectorXd> EmbeddingSpace::lookup(const std::string& word) const {
    auto row = row_of(word);
    if (!row) return std::nullopt;
    return vectors.row(*row);
}

EmbeddingSpace load_embeddings(const std::string& path, std::size_t max_vocab,
                               const std::string& language) {
    std::ifstream in(path);
    if (!in) throw_validation("cannot open embeddings file: " + path);

    EmbeddingSpace space;
    space.language = language;

    std::string line;
    std::size_t line_no = 0;
    std::size_t declared_rows = 0;
    Eigen::Index d = -1;
    std::vector<double> values;  // row-major staging

    bool first_content_line = true;
    while (std::getline(in, line)) {
        ++line_no;
        auto tokens = split_ws(line);
        if (tokens.empty()) continue;

        if (first_content_line) {
            first_content_line = false;
            // "V d" header: exactly two integer tokens.
            std::size_t v = 0, dd = 0;
            if (tokens.size() == 2 && parse_size(tokens[0], v) && parse_size(tokens[1], dd)) {
                declared_rows = v;
                continue;
            }
        }

        if (tokens.size() < 3)
            throw_parse(path + ":" + std::to_string(line_no) +
                        ": expected `word f1 ... fd` with d >= 2, got " +
                        std::to_string(tokens.size()) + " tokens");

        const Eigen::Index row_d = static_cast<Eigen::Index>(tokens.size()) - 1;
        if (d < 0) {
            d = row_d;
        } else if (row_d != d) {
            throw_parse(path + ":" + std::to_string(line_no) +
                        ": inconsistent dimensionality (" + std::to_string(row_d) +
                        " vs " + std::to_string(d) + ")");
        }

        std::string word(tokens[0]);
        if (space.index.count(word))
            throw_parse(path + ":" + std::to_string(line_no) + ": duplicate word `" +
                        word + "`");
        space.index.emplace(word, static_cast<Eigen::Index>(space.vocab.size()));
        space.vocab.push_back(std::move(word));

        for (Eigen::Index j = 0; j < d; ++j) {
            double x;
            if (!parse_double(tokens[static_cast<std::size_t>(j) + 1], x))
                throw_parse(path + ":" + std::to_string(line_no) +
                            ": unparseable float `" +
                            std::string(tokens[static_cast<std::size_t>(j) + 1]) + "`");
            values.push_back(x);
        }

        if (max_vocab > 0 && space.vocab.size() >= max_vocab) break;
    }

    if (space.vocab.empty()) throw_parse(path + ": no vector rows found");
    (void)declared_rows;  // informational only; truncated files are accepted

    const Eigen::Index v = static_cast<Eigen::Index>(space.vocab.size());
    space.vectors = Eigen::Map<RowMatrix>(values.data(), v, d);
    return space;
}

void save_embeddings(const EmbeddingSpace& space, const std::string& path,
                     int significant_digits, bool header) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw_validation("cannot open for writing: " + path);
    if (header)
        std::fprintf(f, "%" PRIdMAX " %" PRIdMAX "\n",
                     static_cast<std::intmax_t>(space.size()),
                     static_cast<std::intmax_t>(space.dim()));
    for (Eigen::Index i = 0; i < space.size(); ++i) {
        std::fputs(space.vocab[static_cast<std::size_t>(i)].c_str(), f);
        for (Eigen::Index j = 0; j < space.dim(); ++j)
            std::fprintf(f, " %.*g", significant_digits, space.vectors(i, j));
        std::fputc('\n', f);
    }
    std::fclose(f);
}

EmbeddingSpace l2_normalize(const EmbeddingSpace& space) {
    EmbeddingSpace out = space;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        const double norm = out.vectors.row(i).norm();
        if (norm <= 1e-300)
            throw_degenerate("l2_normalize: zero-norm row for word `" +
                             out.vocab[static_cast<std::size_t>(i)] + "`");
        out.vectors.row(i) /= norm;
    }
    out.l2_normalized = true;
    return out;
}

Eigen::VectorXd top_principal_direction(const RowMatrix& rows,
                                        const RemoveComponentOptions& opts) {
    const Eigen::Index n = rows.rows();
    const Eigen::Index d = rows.cols();
    if (n < 2) throw_validation("top_principal_direction: need at least 2 rows");

    const Eigen::RowVectorXd mean = rows.colwise().mean();
    const RowMatrix centered = rows.rowwise() - mean;
    if (centered.squaredNorm() <= 1e-30)
        throw_degenerate("remove_first_component: zero variance (all rows identical)");

    Rng rng(opts.start_seed);
    Eigen::VectorXd v(d);
    for (Eigen::Index j = 0; j < d; ++j) v(j) = rng.gaussian();
    v.normalize();

    for (int it = 0; it < opts.max_iterations; ++it) {
        Eigen::VectorXd next = centered.transpose() * (centered * v);
        const double norm = next.norm();
        if (norm <= 1e-300)
            throw_degenerate("remove_first_component: degenerate power iteration");
        next /= norm;
        const double align = std::abs(next.dot(v));
        v = next;
        if (1.0 - align < opts.tolerance) break;
    }
    return v;
}

namespace {

void strip_direction(EmbeddingSpace& space, const Eigen::RowVectorXd& mean,
                     const Eigen::VectorXd& u, bool renormalize) {
    const Eigen::VectorXd proj = (space.vectors.rowwise() - mean) * u;
    space.vectors.noalias() -= proj * u.transpose();
    if (renormalize) {
        for (Eigen::Index i = 0; i < space.size(); ++i) {
            const double norm = space.vectors.row(i).norm();
            if (norm <= 1e-300)
                throw_degenerate(
                    "remove_first_component: row reduced to zero for word `" +
                    space.vocab[static_cast<std::size_t>(i)] + "`");
            space.vectors.row(i) /= norm;
        }
    }
    space.first_pc_removed = true;
    space.removed_direction = u;
}

}  // namespace

EmbeddingSpace remove_first_component(const EmbeddingSpace& space,
                                      const RemoveComponentOptions& opts) {
    EmbeddingSpace out = space;
    const Eigen::VectorXd u = top_principal_direction(space.vectors, opts);
    const Eigen::RowVectorXd mean = space.vectors.colwise().mean();
    strip_direction(out, mean, u, opts.renormalize);
    return out;
}

std::vector<EmbeddingSpace> remove_first_component_joint(
    const std::vector<EmbeddingSpace>& spaces, const RemoveComponentOptions& opts) {
    if (spaces.empty()) return {};
    const Eigen::Index d = spaces.front().dim();
    Eigen::Index total = 0;
    for (const auto& s : spaces) {
        if (s.dim() != d)
            throw_validation("joint component removal: dimension mismatch across spaces");
        total += s.size();
    }
    RowMatrix stacked(total, d);
    Eigen::Index at = 0;
    for (const auto& s : spaces) {
        stacked.middleRows(at, s.size()) = s.vectors;
        at += s.size();
    }
    const Eigen::VectorXd u = top_principal_direction(stacked, opts);
    const Eigen::RowVectorXd mean = stacked.colwise().mean();

    std::vector<EmbeddingSpace> out;
    out.reserve(spaces.size());
    for (const auto& s : spaces) {
        EmbeddingSpace next = s;
        strip_direction(next, mean, u, opts.renormalize);
        out.push_back(std::move(next));
    }
    return out;
}

}  // namespace ssd
