#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/embedding_store.hpp"
#include "core/gradient_fit.hpp"

namespace ssd {

struct DifferenceGradient {
    Eigen::VectorXd delta;       // g_a.direction - g_b.direction, exact
    Eigen::VectorXd delta_unit;  // delta / ||delta||
    std::string language_a;
    std::string language_b;
    std::string dimension;
    double source_cos = 0.0;     // cos(g_a, g_b), for context
};

DifferenceGradient difference_gradient(const Gradient& g_a, const Gradient& g_b);

enum class Pole { positive, negative };

// The M vocabulary words with the highest projection onto +/-delta_unit,
// ties broken by vocabulary order.
std::vector<std::string> select_pole_candidates(const EmbeddingSpace& space,
                                                const DifferenceGradient& dg,
                                                Pole pole, std::size_t m);

struct Cluster {
    std::vector<std::string> words;  // most representative (closest to centroid) first
    std::size_t n = 0;
    double centroid_cos = 0.0;  // cos(centroid, delta_unit), signed
    double coherence = 0.0;     // mean pairwise cosine, 1.0 for singletons
};

struct ClusterReport {
    Pole pole = Pole::positive;
    std::vector<Cluster> clusters;  // sorted by centroid_cos descending
    int k = 0;
    double silhouette = 0.0;
    std::string vocabulary_source;
};

struct KMeansResult {
    std::vector<int> assignment;
    RowMatrix centroids;
    double objective = 0.0;  // sum of squared distances to assigned centroid
    int iterations = 0;
};

struct KMeansOptions {
    int max_iterations = 300;
    int restarts = 10;  // best objective kept; derived seeds per restart
    int reseed_cap = 5; // empty-cluster reseeds per restart
};

// Seeded Lloyd iterations with greedy farthest-first init.
KMeansResult kmeans(const RowMatrix& rows, int k, std::uint64_t seed,
                    const KMeansOptions& opts = {});

// Mean silhouette with Euclidean distance (monotone in cosine distance on
// unit rows); singleton clusters contribute 0.
double silhouette_score(const RowMatrix& rows, const std::vector<int>& assignment,
                        int k);

struct ClusterPoleOptions {
    int k_min = 2;
    int k_max = 10;
    KMeansOptions kmeans;
};

ClusterReport cluster_pole(const std::vector<std::string>& words,
                           const EmbeddingSpace& space, const DifferenceGradient& dg,
                           Pole pole, std::uint64_t seed,
                           const ClusterPoleOptions& opts = {});

// Single-pass variant: one clustering over the union of both poles'
// candidates; clusters signed by centroid projection.
std::pair<ClusterReport, ClusterReport> cluster_both_poles_single_pass(
    const std::vector<std::string>& positive_words,
    const std::vector<std::string>& negative_words, const EmbeddingSpace& space,
    const DifferenceGradient& dg, std::uint64_t seed,
    const ClusterPoleOptions& opts = {});

// centroid_cos = cos(mean row, delta_unit); coherence = mean cosine over all
// unordered distinct pairs (1.0 when n == 1).
std::pair<double, double> cluster_metrics(const RowMatrix& cluster_rows,
                                          const DifferenceGradient& dg);

}  // namespace ssd
