#include "core/inference.hpp"

#include <cmath>

#include "core/error.hpp"
#include "core/parallel.hpp"
#include "core/rng.hpp"

namespace ssd {

namespace {

constexpr double kBetaGuard = 1e-12;
constexpr double kAtanhClamp = 1.0 - 1e-12;

double clamp_cos(double v) { return std::min(1.0, std::max(-1.0, v)); }

// Fixed-design refitter for the alignment test: X (hence Z and the column
// stds) never changes, only the label pairing does.
struct FixedDesignRefitter {
    RowMatrix Z;
    Eigen::VectorXd stds;
    std::vector<double> y_tilde;

    explicit FixedDesignRefitter(const JoinedSample& s) {
        auto [z, stats] = standardize(s.X);
        Z = std::move(z);
        stds = stats.stds;
        y_tilde = zscore(s.y).values;
    }

    Eigen::VectorXd refit(std::span<const std::size_t> perm) const {
        Eigen::VectorXd yp(static_cast<Eigen::Index>(perm.size()));
        for (std::size_t i = 0; i < perm.size(); ++i)
            yp(static_cast<Eigen::Index>(i)) = y_tilde[perm[i]];
        Eigen::VectorXd beta = (Z.transpose() * yp).cwiseQuotient(stds);
        const double norm = beta.norm();
        if (norm <= kBetaGuard)
            throw_degenerate("permutation refit: degenerate gradient");
        return beta / norm;
    }
};

// Closed-form K=1 fit on an index-selected subset of pooled rows, matching
// closed_form_pls1 (per-group standardization, per-group z-scored labels)
// without materializing the subset matrix.
Eigen::VectorXd fit_k1_indexed(const RowMatrix& pool,
                               std::span<const double> labels,
                               std::span<const std::size_t> idx) {
    const Eigen::Index d = pool.cols();
    const std::size_t n = idx.size();
    if (n < 2) throw_validation("fit_k1_indexed: group too small");

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (std::size_t i = 0; i < n; ++i)
        mean += pool.row(static_cast<Eigen::Index>(idx[i]));
    mean /= static_cast<double>(n);

    Eigen::VectorXd var = Eigen::VectorXd::Zero(d);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = pool.row(static_cast<Eigen::Index>(idx[i]));
        var += (row.transpose() - mean).cwiseAbs2();
    }
    var /= static_cast<double>(n);
    const Eigen::VectorXd stds = var.cwiseSqrt();
    for (Eigen::Index j = 0; j < d; ++j)
        if (!(stds(j) > kBetaGuard))
            throw_degenerate("group refit: near-constant column");

    std::vector<double> group_y(n);
    for (std::size_t i = 0; i < n; ++i) group_y[i] = labels[idx[i]];
    const ZscoreResult yz = zscore(group_y);

    Eigen::VectorXd c = Eigen::VectorXd::Zero(d);
    double ysum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        c += yz.values[i] * pool.row(static_cast<Eigen::Index>(idx[i])).transpose();
        ysum += yz.values[i];
    }
    Eigen::VectorXd beta = (c - mean * ysum).cwiseQuotient(var);
    const double norm = beta.norm();
    if (norm <= kBetaGuard) throw_degenerate("group refit: degenerate gradient");
    return beta / norm;
}

double observed_rho(const JoinedSample& a, const JoinedSample& b) {
    if (a.dim() != b.dim())
        throw_validation("inference: samples have different embedding dimensions");
    const Gradient ga = closed_form_pls1(a);
    const Gradient gb = closed_form_pls1(b);
    return clamp_cos(ga.direction.dot(gb.direction));
}

double pseudo_p(const std::vector<double>& null_samples, double rho_obs, Tail tail) {
    std::size_t count = 0;
    for (double v : null_samples) {
        if (tail == Tail::upper ? v >= rho_obs : v <= rho_obs) ++count;
    }
    return static_cast<double>(1 + count) /
           static_cast<double>(null_samples.size() + 1);
}

}  // namespace

double cosine(const Gradient& g_a, const Gradient& g_b) {
    if (g_a.direction.size() != g_b.direction.size())
        throw_validation("cosine: gradient dimensions differ (" +
                         std::to_string(g_a.direction.size()) + " vs " +
                         std::to_string(g_b.direction.size()) + ")");
    return clamp_cos(g_a.direction.dot(g_b.direction));
}

PermutationResult alignment_test(const JoinedSample& a, const JoinedSample& b,
                                 std::size_t n, const ResampleOptions& opts) {
    if (n < 1) throw_validation("alignment_test: need at least 1 permutation");

    PermutationResult result;
    result.rho_observed = observed_rho(a, b);
    result.n = n;
    result.tail = Tail::upper;
    result.seed = opts.seed;
    result.null_samples.resize(n);

    const FixedDesignRefitter ra(a), rb(b);

    parallel_for(n, opts.threads, [&](std::size_t t) {
        Rng rng(derive_seed(opts.seed, t));
        for (int attempt = 0;; ++attempt) {
            if (attempt >= opts.retry_cap)
                throw Error(ErrorKind::degenerate,
                            "alignment_test: permutation " + std::to_string(t) +
                                " exhausted " + std::to_string(opts.retry_cap) +
                                " degenerate-refit retries");
            const auto pa = rng.permutation(ra.y_tilde.size());
            const auto pb = rng.permutation(rb.y_tilde.size());
            try {
                const Eigen::VectorXd ga = ra.refit(pa);
                const Eigen::VectorXd gb = rb.refit(pb);
                result.null_samples[t] = clamp_cos(ga.dot(gb));
                return;
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::degenerate) throw;
            }
        }
    });

    result.p_value = pseudo_p(result.null_samples, result.rho_observed, Tail::upper);
    return result;
}

PermutationResult difference_test(const JoinedSample& a, const JoinedSample& b,
                                  std::size_t n, const ResampleOptions& opts) {
    if (n < 1) throw_validation("difference_test: need at least 1 permutation");
    if (a.dim() != b.dim())
        throw_validation("difference_test: samples have different dimensions");

    PermutationResult result;
    result.rho_observed = observed_rho(a, b);
    result.n = n;
    result.tail = Tail::lower;
    result.seed = opts.seed;
    result.null_samples.resize(n);

    // Pool rows with labels z-scored within language.
    const std::size_t n_a = static_cast<std::size_t>(a.n());
    const std::size_t n_b = static_cast<std::size_t>(b.n());
    const std::size_t total = n_a + n_b;
    RowMatrix pool(static_cast<Eigen::Index>(total), a.dim());
    pool.topRows(a.n()) = a.X;
    pool.bottomRows(b.n()) = b.X;
    std::vector<double> labels(total);
    {
        const ZscoreResult za = zscore(a.y);
        const ZscoreResult zb = zscore(b.y);
        std::copy(za.values.begin(), za.values.end(), labels.begin());
        std::copy(zb.values.begin(), zb.values.end(), labels.begin() + static_cast<long>(n_a));
    }

    parallel_for(n, opts.threads, [&](std::size_t t) {
        Rng rng(derive_seed(opts.seed, t));
        for (int attempt = 0;; ++attempt) {
            if (attempt >= opts.retry_cap)
                throw Error(ErrorKind::degenerate,
                            "difference_test: permutation " + std::to_string(t) +
                                " exhausted " + std::to_string(opts.retry_cap) +
                                " degenerate-refit retries");
            const auto idx = rng.permutation(total);
            try {
                const std::span<const std::size_t> all(idx);
                const Eigen::VectorXd ga =
                    fit_k1_indexed(pool, labels, all.subspan(0, n_a));
                const Eigen::VectorXd gb =
                    fit_k1_indexed(pool, labels, all.subspan(n_a));
                result.null_samples[t] = clamp_cos(ga.dot(gb));
                return;
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::degenerate) throw;
            }
        }
    });

    result.p_value = pseudo_p(result.null_samples, result.rho_observed, Tail::lower);
    return result;
}

std::pair<double, double> fisher_interval(double rho_observed, double sigma_z) {
    const double clamped =
        std::min(kAtanhClamp, std::max(-kAtanhClamp, rho_observed));
    const double z_obs = std::atanh(clamped);
    return {std::tanh(z_obs - 1.96 * sigma_z), std::tanh(z_obs + 1.96 * sigma_z)};
}

BootstrapResult bootstrap_interval(const JoinedSample& a, const JoinedSample& b,
                                   std::size_t replicates,
                                   const ResampleOptions& opts) {
    if (replicates < 100)
        throw_validation("bootstrap_interval: need B >= 100 replicates");
    if (a.dim() != b.dim())
        throw_validation("bootstrap_interval: samples have different dimensions");

    BootstrapResult result;
    result.replicates = replicates;
    result.seed = opts.seed;
    result.replicate_rhos.resize(replicates);

    const double rho_raw = observed_rho(a, b);
    result.rho_observed = std::min(kAtanhClamp, std::max(-kAtanhClamp, rho_raw));

    const std::size_t n_a = static_cast<std::size_t>(a.n());
    const std::size_t n_b = static_cast<std::size_t>(b.n());

    parallel_for(replicates, opts.threads, [&](std::size_t r) {
        Rng rng(derive_seed(opts.seed, r));
        for (int attempt = 0;; ++attempt) {
            if (attempt >= opts.retry_cap)
                throw Error(ErrorKind::degenerate,
                            "bootstrap_interval: replicate " + std::to_string(r) +
                                " exhausted " + std::to_string(opts.retry_cap) +
                                " degenerate-refit retries");
            std::vector<std::size_t> ia(n_a), ib(n_b);
            for (auto& v : ia) v = rng.bounded(n_a);
            for (auto& v : ib) v = rng.bounded(n_b);
            try {
                const Eigen::VectorXd ga = fit_k1_indexed(a.X, a.y, ia);
                const Eigen::VectorXd gb = fit_k1_indexed(b.X, b.y, ib);
                result.replicate_rhos[r] = clamp_cos(ga.dot(gb));
                return;
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::degenerate) throw;
            }
        }
    });

    double mean_z = 0.0;
    std::vector<double> zs(replicates);
    for (std::size_t r = 0; r < replicates; ++r) {
        const double c = std::min(kAtanhClamp,
                                  std::max(-kAtanhClamp, result.replicate_rhos[r]));
        zs[r] = std::atanh(c);
        mean_z += zs[r];
    }
    mean_z /= static_cast<double>(replicates);
    double var_z = 0.0;
    for (double z : zs) var_z += (z - mean_z) * (z - mean_z);
    var_z /= static_cast<double>(replicates - 1);
    result.sigma_z = std::sqrt(var_z);

    auto [lo, hi] = fisher_interval(result.rho_observed, result.sigma_z);
    // tanh(atanh(x)) can land one ulp off x; keep rho inside the interval.
    result.ci_low = std::min(lo, result.rho_observed);
    result.ci_high = std::max(hi, result.rho_observed);
    return result;
}

}  // namespace ssd
