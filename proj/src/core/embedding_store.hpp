#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace ssd {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Vocabulary plus dense vector matrix; row i of `vectors` belongs to
// vocab[i]. Immutable after construction: preprocessing ops return a new
// space, so concurrent readers are always safe.
struct EmbeddingSpace {
    std::string language;
    std::vector<std::string> vocab;
    RowMatrix vectors;
    bool l2_normalized = false;
    bool first_pc_removed = false;
    // Direction stripped by remove_first_component, kept for reports/tests.
    std::optional<Eigen::VectorXd> removed_direction;

    std::unordered_map<std::string, Eigen::Index> index;

    Eigen::Index size() const { return vectors.rows(); }
    Eigen::Index dim() const { return vectors.cols(); }

    void rebuild_index();
    std::optional<Eigen::RowVectorXd> lookup(const std::string& word) const;
    std::optional<Eigen::Index> row_of(const std::string& word) const;
};

// Whitespace-separated text format: optional "V d" header line, then one
// `word f1 ... fd` line per word. max_vocab 0 means no limit.
EmbeddingSpace load_embeddings(const std::string& path, std::size_t max_vocab = 0,
                               const std::string& language = "");

void save_embeddings(const EmbeddingSpace& space, const std::string& path,
                     int significant_digits = 9, bool header = true);

EmbeddingSpace l2_normalize(const EmbeddingSpace& space);

struct RemoveComponentOptions {
    bool renormalize = true;     // unit rows afterward, keeps inner products cosines
    double tolerance = 1e-10;    // power-iteration convergence
    int max_iterations = 5000;
    std::uint64_t start_seed = 0x5eed5eedULL;  // fixed-seed start vector
};

// Strips each row's centered projection onto the top principal direction of
// the mean-centered matrix. Pre-renormalization, centered rows are orthogonal
// to the returned direction to fp precision.
EmbeddingSpace remove_first_component(const EmbeddingSpace& space,
                                      const RemoveComponentOptions& opts = {});

// Joint variant for multilingual runs: one direction computed on the
// concatenated vocabulary, then stripped from every space.
std::vector<EmbeddingSpace> remove_first_component_joint(
    const std::vector<EmbeddingSpace>& spaces,
    const RemoveComponentOptions& opts = {});

// Top principal direction of the mean-centered matrix by power iteration.
Eigen::VectorXd top_principal_direction(const RowMatrix& rows,
                                        const RemoveComponentOptions& opts = {});

}  // namespace ssd
