#include "core/difference_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace ssd {

namespace {

constexpr double kDeltaGuard = 1e-9;

RowMatrix rows_for_words(const std::vector<std::string>& words,
                         const EmbeddingSpace& space) {
    RowMatrix rows(static_cast<Eigen::Index>(words.size()), space.dim());
    for (std::size_t i = 0; i < words.size(); ++i) {
        auto r = space.row_of(words[i]);
        if (!r)
            throw_validation("cluster candidates: word `" + words[i] +
                             "` not in vocabulary of `" + space.language + "`");
        rows.row(static_cast<Eigen::Index>(i)) = space.vectors.row(*r);
    }
    return rows;
}

}  // namespace

DifferenceGradient difference_gradient(const Gradient& g_a, const Gradient& g_b) {
    if (g_a.direction.size() != g_b.direction.size())
        throw_validation("difference_gradient: dimension mismatch");
    DifferenceGradient dg;
    dg.delta = g_a.direction - g_b.direction;
    const double norm = dg.delta.norm();
    if (norm <= kDeltaGuard)
        throw_degenerate("difference_gradient: gradients coincide (||delta|| <= 1e-9)");
    dg.delta_unit = dg.delta / norm;
    dg.language_a = g_a.language;
    dg.language_b = g_b.language;
    dg.dimension = g_a.dimension;
    dg.source_cos = std::min(1.0, std::max(-1.0, g_a.direction.dot(g_b.direction)));
    return dg;
}

std::vector<std::string> select_pole_candidates(const EmbeddingSpace& space,
                                                const DifferenceGradient& dg,
                                                Pole pole, std::size_t m) {
    if (!(space.l2_normalized && space.first_pc_removed))
        throw_validation("select_pole_candidates: space is not preprocessed");
    if (m < 10) throw_validation("select_pole_candidates: M must be >= 10");
    const std::size_t v = static_cast<std::size_t>(space.size());
    if (m > v)
        throw_validation("select_pole_candidates: M=" + std::to_string(m) +
                         " exceeds vocabulary size " + std::to_string(v));

    const double sign = pole == Pole::positive ? 1.0 : -1.0;
    const Eigen::VectorXd proj = space.vectors * (sign * dg.delta_unit);

    std::vector<std::size_t> order(v);
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + static_cast<long>(m), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          const double pa = proj(static_cast<Eigen::Index>(a));
                          const double pb = proj(static_cast<Eigen::Index>(b));
                          if (pa != pb) return pa > pb;
                          return a < b;  // ties by vocabulary order
                      });

    std::vector<std::string> out;
    out.reserve(m);
    for (std::size_t i = 0; i < m; ++i) out.push_back(space.vocab[order[i]]);
    return out;
}

KMeansResult kmeans(const RowMatrix& rows, int k, std::uint64_t seed,
                    const KMeansOptions& opts) {
    const Eigen::Index n = rows.rows();
    if (k < 1 || static_cast<Eigen::Index>(k) > n)
        throw_validation("kmeans: k out of range");
    if ((rows.rowwise() - rows.row(0)).squaredNorm() <= 1e-24)
        throw_degenerate("kmeans: all candidate vectors identical (zero dispersion)");

    auto run_once = [&](Rng& rng) -> std::optional<KMeansResult> {
        // Greedy farthest-first init from a seeded start point.
        std::vector<Eigen::Index> centers;
        centers.push_back(static_cast<Eigen::Index>(rng.bounded(
            static_cast<std::uint64_t>(n))));
        Eigen::VectorXd min_d2 =
            (rows.rowwise() - rows.row(centers[0])).rowwise().squaredNorm();
        while (static_cast<int>(centers.size()) < k) {
            Eigen::Index far = 0;
            double best = -1.0;
            for (Eigen::Index i = 0; i < n; ++i)
                if (min_d2(i) > best) {
                    best = min_d2(i);
                    far = i;
                }
            centers.push_back(far);
            min_d2 = min_d2.cwiseMin(
                (rows.rowwise() - rows.row(far)).rowwise().squaredNorm());
        }

        RowMatrix centroids(k, rows.cols());
        for (int c = 0; c < k; ++c) centroids.row(c) = rows.row(centers[static_cast<std::size_t>(c)]);

        KMeansResult result;
        result.assignment.assign(static_cast<std::size_t>(n), -1);
        for (int it = 0; it < opts.max_iterations; ++it) {
            bool changed = false;
            for (Eigen::Index i = 0; i < n; ++i) {
                int best_c = 0;
                double best_d = std::numeric_limits<double>::infinity();
                for (int c = 0; c < k; ++c) {
                    const double d = (rows.row(i) - centroids.row(c)).squaredNorm();
                    if (d < best_d) {
                        best_d = d;
                        best_c = c;
                    }
                }
                if (result.assignment[static_cast<std::size_t>(i)] != best_c) {
                    result.assignment[static_cast<std::size_t>(i)] = best_c;
                    changed = true;
                }
            }
            result.iterations = it + 1;
            if (!changed) break;

            centroids.setZero();
            std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
            for (Eigen::Index i = 0; i < n; ++i) {
                const int c = result.assignment[static_cast<std::size_t>(i)];
                centroids.row(c) += rows.row(i);
                ++counts[static_cast<std::size_t>(c)];
            }
            for (int c = 0; c < k; ++c) {
                if (counts[static_cast<std::size_t>(c)] == 0) return std::nullopt;
                centroids.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
            }
        }

        result.objective = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            result.objective +=
                (rows.row(i) -
                 centroids.row(result.assignment[static_cast<std::size_t>(i)]))
                    .squaredNorm();
        result.centroids = std::move(centroids);
        return result;
    };

    std::optional<KMeansResult> best;
    for (int r = 0; r < opts.restarts; ++r) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        std::optional<KMeansResult> run;
        for (int attempt = 0; attempt < opts.reseed_cap && !run; ++attempt)
            run = run_once(rng);  // rng stream continues into the reseed
        if (run && (!best || run->objective < best->objective)) best = std::move(run);
    }
    if (!best)
        throw_degenerate("kmeans: every restart produced an empty cluster");
    return *best;
}

double silhouette_score(const RowMatrix& rows, const std::vector<int>& assignment,
                        int k) {
    const Eigen::Index n = rows.rows();
    if (k < 2 || static_cast<Eigen::Index>(k) >= n)
        throw_validation("silhouette: need 2 <= k < n");

    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (int c : assignment) ++counts[static_cast<std::size_t>(c)];

    double total = 0.0;
    std::vector<double> sums(static_cast<std::size_t>(k));
    for (Eigen::Index i = 0; i < n; ++i) {
        std::fill(sums.begin(), sums.end(), 0.0);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            sums[static_cast<std::size_t>(assignment[static_cast<std::size_t>(j)])] +=
                (rows.row(i) - rows.row(j)).norm();
        }
        const int own = assignment[static_cast<std::size_t>(i)];
        if (counts[static_cast<std::size_t>(own)] <= 1) continue;  // singleton: s = 0
        const double a = sums[static_cast<std::size_t>(own)] /
                         static_cast<double>(counts[static_cast<std::size_t>(own)] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            if (c == own || counts[static_cast<std::size_t>(c)] == 0) continue;
            b = std::min(b, sums[static_cast<std::size_t>(c)] /
                                static_cast<double>(counts[static_cast<std::size_t>(c)]));
        }
        const double m = std::max(a, b);
        total += m > 0 ? (b - a) / m : 0.0;
    }
    return total / static_cast<double>(n);
}

std::pair<double, double> cluster_metrics(const RowMatrix& cluster_rows,
                                          const DifferenceGradient& dg) {
    const Eigen::Index n = cluster_rows.rows();
    if (n < 1) throw_validation("cluster_metrics: empty cluster");

    const Eigen::VectorXd centroid = cluster_rows.colwise().mean();
    const double cn = centroid.norm();
    if (cn <= 1e-300) throw_degenerate("cluster_metrics: zero-norm centroid");
    const double centroid_cos = centroid.dot(dg.delta_unit) / cn;

    if (n == 1) return {centroid_cos, 1.0};

    // Mean pairwise cosine via the normalized-row Gram identity:
    // sum_{i != j} <u_i, u_j> = ||sum u||^2 - n.
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(cluster_rows.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        const double norm = cluster_rows.row(i).norm();
        if (norm <= 1e-300)
            throw_degenerate("cluster_metrics: zero-norm member row");
        sum += cluster_rows.row(i).transpose() / norm;
    }
    const double pair_sum = sum.squaredNorm() - static_cast<double>(n);
    const double coherence = pair_sum / static_cast<double>(n * (n - 1));
    return {centroid_cos, coherence};
}

namespace {

ClusterReport build_report(const std::vector<std::string>& words,
                           const RowMatrix& rows, const KMeansResult& km, int k,
                           double sil, const DifferenceGradient& dg, Pole pole,
                           const std::string& vocabulary_source,
                           const std::vector<int>* keep_sign = nullptr,
                           int want_sign = 0) {
    ClusterReport report;
    report.pole = pole;
    report.k = k;
    report.silhouette = sil;
    report.vocabulary_source = vocabulary_source;

    for (int c = 0; c < k; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < km.assignment.size(); ++i)
            if (km.assignment[i] == c) members.push_back(i);
        if (members.empty()) continue;
        if (keep_sign && (*keep_sign)[static_cast<std::size_t>(c)] != want_sign)
            continue;

        RowMatrix sub(static_cast<Eigen::Index>(members.size()), rows.cols());
        for (std::size_t i = 0; i < members.size(); ++i)
            sub.row(static_cast<Eigen::Index>(i)) =
                rows.row(static_cast<Eigen::Index>(members[i]));
        auto [ccos, coh] = cluster_metrics(sub, dg);

        // Most representative members first: by cosine to the centroid.
        const Eigen::VectorXd centroid = sub.colwise().mean();
        std::vector<std::pair<double, std::size_t>> ranked;
        for (std::size_t i = 0; i < members.size(); ++i) {
            const auto row = rows.row(static_cast<Eigen::Index>(members[i]));
            const double denom = row.norm() * centroid.norm();
            ranked.emplace_back(denom > 0 ? row.dot(centroid) / denom : 0.0,
                                members[i]);
        }
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });

        Cluster cluster;
        cluster.n = members.size();
        cluster.centroid_cos = ccos;
        cluster.coherence = coh;
        for (const auto& [score, idx] : ranked) cluster.words.push_back(words[idx]);
        report.clusters.push_back(std::move(cluster));
    }

    std::sort(report.clusters.begin(), report.clusters.end(),
              [](const Cluster& a, const Cluster& b) {
                  return a.centroid_cos > b.centroid_cos;
              });
    return report;
}

struct BestK {
    int k = 0;
    double silhouette = -2.0;
    KMeansResult km;
};

BestK scan_k(const RowMatrix& rows, std::uint64_t seed, const ClusterPoleOptions& opts) {
    const Eigen::Index n = rows.rows();
    if (opts.k_min < 2) throw_validation("cluster_pole: k_min must be >= 2");
    if (n < static_cast<Eigen::Index>(opts.k_max) + 1)
        throw_validation("cluster_pole: need at least k_max+1 candidates, got " +
                         std::to_string(n));

    BestK best;
    for (int k = opts.k_min; k <= opts.k_max; ++k) {
        if (static_cast<Eigen::Index>(k) >= n) break;  // silhouette undefined
        KMeansResult km = kmeans(rows, k, derive_seed(seed, static_cast<std::uint64_t>(k)),
                                 opts.kmeans);
        const double sil = silhouette_score(rows, km.assignment, k);
        if (sil > best.silhouette) {  // ties keep the smaller k
            best.k = k;
            best.silhouette = sil;
            best.km = std::move(km);
        }
    }
    if (best.k == 0) throw_degenerate("cluster_pole: no k produced a clustering");
    return best;
}

}  // namespace

ClusterReport cluster_pole(const std::vector<std::string>& words,
                           const EmbeddingSpace& space, const DifferenceGradient& dg,
                           Pole pole, std::uint64_t seed,
                           const ClusterPoleOptions& opts) {
    const RowMatrix rows = rows_for_words(words, space);
    BestK best = scan_k(rows, seed, opts);
    return build_report(words, rows, best.km, best.k, best.silhouette, dg, pole,
                        space.language);
}

std::pair<ClusterReport, ClusterReport> cluster_both_poles_single_pass(
    const std::vector<std::string>& positive_words,
    const std::vector<std::string>& negative_words, const EmbeddingSpace& space,
    const DifferenceGradient& dg, std::uint64_t seed,
    const ClusterPoleOptions& opts) {
    std::vector<std::string> words = positive_words;
    for (const auto& w : negative_words)
        if (std::find(words.begin(), words.end(), w) == words.end())
            words.push_back(w);

    const RowMatrix rows = rows_for_words(words, space);
    BestK best = scan_k(rows, seed, opts);

    // Sign each cluster by its centroid projection onto delta_unit.
    std::vector<int> signs(static_cast<std::size_t>(best.k), 0);
    for (int c = 0; c < best.k; ++c) {
        const double proj = best.km.centroids.row(c).dot(dg.delta_unit);
        signs[static_cast<std::size_t>(c)] = proj >= 0 ? +1 : -1;
    }
    ClusterReport pos = build_report(words, rows, best.km, best.k, best.silhouette,
                                     dg, Pole::positive, space.language, &signs, +1);
    ClusterReport neg = build_report(words, rows, best.km, best.k, best.silhouette,
                                     dg, Pole::negative, space.language, &signs, -1);
    return {std::move(pos), std::move(neg)};
}

}  // namespace ssd
