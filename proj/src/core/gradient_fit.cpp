#include "core/gradient_fit.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>

#include "core/error.hpp"
#include "core/parallel.hpp"
#include "core/rng.hpp"

namespace ssd {

namespace {

constexpr double kStdGuard = 1e-12;
constexpr double kBetaGuard = 1e-12;
constexpr double kMinP = 1e-300;

Eigen::Map<const Eigen::VectorXd> as_vec(std::span<const double> y) {
    return {y.data(), static_cast<Eigen::Index>(y.size())};
}

StandardizationStats column_stats(const RowMatrix& X) {
    const Eigen::Index n = X.rows();
    StandardizationStats stats;
    stats.means = X.colwise().mean();
    stats.stds =
        ((X.rowwise() - stats.means.transpose()).colwise().squaredNorm() /
         static_cast<double>(n))
            .cwiseSqrt()
            .transpose();

    std::string bad;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        if (!(stats.stds(j) > kStdGuard)) {
            if (!bad.empty()) bad += ", ";
            bad += std::to_string(j);
        }
    }
    if (!bad.empty())
        throw_degenerate("standardize: near-constant column(s) [" + bad + "]");
    return stats;
}

}  // namespace

std::pair<RowMatrix, StandardizationStats> standardize(const RowMatrix& X) {
    if (X.rows() < 2) throw_validation("standardize: need at least 2 rows");
    StandardizationStats stats = column_stats(X);
    RowMatrix Z = (X.rowwise() - stats.means.transpose()).array().rowwise() /
                  stats.stds.transpose().array();
    return {std::move(Z), std::move(stats)};
}

Gradient closed_form_pls1(const RowMatrix& X, std::span<const double> y) {
    if (X.rows() != static_cast<Eigen::Index>(y.size()))
        throw_validation("closed_form_pls1: X rows and y length differ");
    const StandardizationStats stats = column_stats(X);
    const ZscoreResult yt = zscore(y);
    const Eigen::Map<const Eigen::VectorXd> ytv(yt.values.data(),
                                                static_cast<Eigen::Index>(yt.values.size()));

    // (Z^T ytilde)_j = ((X^T ytilde)_j - mean_j * sum(ytilde)) / s_j
    const double ysum = ytv.sum();
    const Eigen::VectorXd c = X.transpose() * ytv;
    Eigen::VectorXd beta =
        (c - stats.means * ysum).cwiseQuotient(stats.stds.cwiseProduct(stats.stds));

    const double norm = beta.norm();
    if (norm <= kBetaGuard)
        throw_degenerate("closed_form_pls1: labels orthogonal to all columns "
                         "(||beta|| <= 1e-12)");
    Gradient g;
    g.direction = beta / norm;
    g.k = 1;
    // Orientation corr(<dir,x>, y) >= 0 holds by construction here:
    // dir^T (X^T ytilde - means*sum) = sum_j (Z^T ytilde)_j^2 / (s_j ||beta||).
    return g;
}

Gradient closed_form_pls1(const JoinedSample& sample) {
    Gradient g = closed_form_pls1(sample.X, sample.y);
    g.language = sample.language;
    g.dimension = sample.dimension;
    return g;
}

double PlsModel::predict(const Eigen::RowVectorXd& x) const {
    const Eigen::VectorXd z =
        (x.transpose() - stats.means).cwiseQuotient(stats.stds);
    return y_mean + y_std * z.dot(coef);
}

Eigen::VectorXd PlsModel::predict(const RowMatrix& X) const {
    const RowMatrix Z = (X.rowwise() - stats.means.transpose()).array().rowwise() /
                        stats.stds.transpose().array();
    return (Z * coef * y_std).array() + y_mean;
}

PlsFit fit_pls(const RowMatrix& X, std::span<const double> y, int k) {
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    if (n != static_cast<Eigen::Index>(y.size()))
        throw_validation("fit_pls: X rows and y length differ");
    const int k_cap = static_cast<int>(std::min<Eigen::Index>(d, n - 1));
    if (k < 1 || k > k_cap)
        throw_validation("fit_pls: K=" + std::to_string(k) +
                         " out of range [1, min(d, N-1)=" + std::to_string(k_cap) + "]");

    auto [Z, stats] = standardize(X);
    const ZscoreResult ys = zscore(y);
    Eigen::VectorXd y_res = as_vec(ys.values);

    RowMatrix Z_res = Z;
    Eigen::MatrixXd W(d, k), P(d, k);
    Eigen::VectorXd q(k);

    for (int c = 0; c < k; ++c) {
        Eigen::VectorXd w = Z_res.transpose() * y_res;
        const double wn = w.norm();
        if (wn < kBetaGuard)
            throw_degenerate("fit_pls: deflated residual degenerate before K=" +
                             std::to_string(k) + " components (achievable K=" +
                             std::to_string(c) + ")");
        w /= wn;
        const Eigen::VectorXd t = Z_res * w;
        const double tt = t.squaredNorm();
        if (tt < kBetaGuard)
            throw_degenerate("fit_pls: zero-score component (achievable K=" +
                             std::to_string(c) + ")");
        const Eigen::VectorXd p = Z_res.transpose() * t / tt;
        const double qc = y_res.dot(t) / tt;
        W.col(c) = w;
        P.col(c) = p;
        q(c) = qc;
        Z_res.noalias() -= t * p.transpose();
        y_res.noalias() -= qc * t;
    }

    // Coefficients in standardized space: B = W (P^T W)^{-1} q.
    const Eigen::MatrixXd PtW = P.transpose() * W;
    const Eigen::VectorXd B = W * PtW.colPivHouseholderQr().solve(q);

    PlsModel model;
    model.stats = stats;
    model.coef = B;
    model.y_mean = ys.mean;
    model.y_std = ys.std_dev;
    model.k = k;

    Eigen::VectorXd beta = B.cwiseQuotient(stats.stds);
    const double bn = beta.norm();
    if (bn <= kBetaGuard)
        throw_degenerate("fit_pls: degenerate coefficient vector");
    beta /= bn;

    // PLS deflation leaves the sign arbitrary for K > 1; orient the reported
    // direction so its projection correlates non-negatively with y.
    const Eigen::VectorXd proj = X * beta;
    const Eigen::VectorXd yv = as_vec(y);
    const double cov =
        (proj.array() - proj.mean()).matrix().dot((yv.array() - yv.mean()).matrix());
    if (cov < 0) beta = -beta;

    PlsFit fit;
    fit.gradient.direction = std::move(beta);
    fit.gradient.k = k;
    fit.model = std::move(model);
    return fit;
}

PlsFit fit_pls(const JoinedSample& sample, int k) {
    PlsFit fit = fit_pls(sample.X, sample.y, k);
    fit.gradient.language = sample.language;
    fit.gradient.dimension = sample.dimension;
    return fit;
}

double r_squared_in_sample(const PlsModel& model, const RowMatrix& X,
                           std::span<const double> y) {
    const Eigen::VectorXd pred = model.predict(X);
    const Eigen::VectorXd yv = as_vec(y);
    const double mean = yv.mean();
    const double ss_tot = (yv.array() - mean).square().sum();
    if (ss_tot <= 0) throw_degenerate("r_squared: constant labels");
    const double ss_res = (yv - pred).squaredNorm();
    return 1.0 - ss_res / ss_tot;
}

namespace {

RowMatrix take_rows(const RowMatrix& X, std::span<const std::size_t> idx) {
    RowMatrix out(static_cast<Eigen::Index>(idx.size()), X.cols());
    for (std::size_t i = 0; i < idx.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) =
            X.row(static_cast<Eigen::Index>(idx[i]));
    return out;
}

std::vector<double> take(std::span<const double> y, std::span<const std::size_t> idx) {
    std::vector<double> out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) out[i] = y[idx[i]];
    return out;
}

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const Eigen::ArrayXd ca = a.array() - a.mean();
    const Eigen::ArrayXd cb = b.array() - b.mean();
    const double denom = std::sqrt(ca.square().sum() * cb.square().sum());
    if (denom <= 0) return 0.0;
    return (ca * cb).sum() / denom;
}

}  // namespace

int select_k(const RowMatrix& X, std::span<const double> y, int k_max,
             const SelectKOptions& opts) {
    if (k_max < 1) throw_validation("select_k: k_max must be >= 1");
    if (opts.folds < 2) throw_validation("select_k: need at least 2 folds");
    const std::size_t n = y.size();
    if (n < static_cast<std::size_t>(opts.folds))
        throw_validation("select_k: fewer samples than folds");

    Rng rng(opts.seed);
    std::vector<std::size_t> order = rng.permutation(n);

    std::vector<std::pair<std::size_t, std::size_t>> fold_bounds;
    for (int f = 0; f < opts.folds; ++f) {
        const std::size_t lo = n * static_cast<std::size_t>(f) /
                               static_cast<std::size_t>(opts.folds);
        const std::size_t hi = n * static_cast<std::size_t>(f + 1) /
                               static_cast<std::size_t>(opts.folds);
        fold_bounds.emplace_back(lo, hi);
    }

    std::size_t min_train = n;
    for (auto [lo, hi] : fold_bounds) min_train = std::min(min_train, n - (hi - lo));
    int k_eff = std::min<int>(k_max, static_cast<int>(std::min<std::size_t>(
                                         static_cast<std::size_t>(X.cols()),
                                         min_train - 1)));
    if (k_eff < 1) throw_validation("select_k: not enough training data for any K");

    std::vector<double> cv_mean, cv_se;
    for (int k = 1; k <= k_eff; ++k) {
        std::vector<double> fold_mse;
        bool degenerate = false;
        for (auto [lo, hi] : fold_bounds) {
            std::vector<std::size_t> test_idx(order.begin() + static_cast<long>(lo),
                                              order.begin() + static_cast<long>(hi));
            std::vector<std::size_t> train_idx;
            train_idx.reserve(n - test_idx.size());
            for (std::size_t i = 0; i < n; ++i)
                if (i < lo || i >= hi) train_idx.push_back(order[i]);

            PlsFit fit;
            try {
                fit = fit_pls(take_rows(X, train_idx), take(y, train_idx), k);
            } catch (const Error& e) {
                if (e.kind() == ErrorKind::degenerate) {
                    degenerate = true;
                    break;
                }
                throw;
            }
            const RowMatrix Xte = take_rows(X, test_idx);
            const std::vector<double> yte = take(y, test_idx);
            const Eigen::VectorXd pred = fit.model.predict(Xte);
            double mse = 0.0;
            for (std::size_t i = 0; i < yte.size(); ++i) {
                const double e = yte[i] - pred(static_cast<Eigen::Index>(i));
                mse += e * e;
            }
            fold_mse.push_back(mse / static_cast<double>(yte.size()));
        }
        if (degenerate) break;  // deeper components unreachable on this data

        double mean = 0.0;
        for (double m : fold_mse) mean += m;
        mean /= static_cast<double>(fold_mse.size());
        double var = 0.0;
        for (double m : fold_mse) var += (m - mean) * (m - mean);
        var /= static_cast<double>(fold_mse.size() - 1);
        cv_mean.push_back(mean);
        cv_se.push_back(std::sqrt(var / static_cast<double>(fold_mse.size())));
    }
    if (cv_mean.empty())
        throw_degenerate("select_k: no component count completed cross-validation");

    std::size_t best = 0;
    for (std::size_t i = 1; i < cv_mean.size(); ++i)
        if (cv_mean[i] < cv_mean[best]) best = i;
    const double threshold = cv_mean[best] + cv_se[best];
    for (std::size_t i = 0; i < cv_mean.size(); ++i)
        if (cv_mean[i] <= threshold) return static_cast<int>(i) + 1;
    return static_cast<int>(best) + 1;
}

FitReport corrected_t_test(const RowMatrix& X, std::span<const double> y, int k,
                           const TTestOptions& opts) {
    if (opts.splits < 2) throw_validation("corrected_t_test: need J >= 2 splits");
    if (!(opts.test_fraction > 0.0 && opts.test_fraction < 1.0))
        throw_validation("corrected_t_test: test_fraction must be in (0, 1)");
    const std::size_t n = y.size();
    const std::size_t n_test = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(opts.test_fraction *
                                                static_cast<double>(n))));
    const std::size_t n_train = n - n_test;
    if (n_train < 2) throw_validation("corrected_t_test: train split too small");

    const int J = opts.splits;
    std::vector<double> skills(static_cast<std::size_t>(J));
    std::vector<double> preds_r(static_cast<std::size_t>(J));

    parallel_for(static_cast<std::size_t>(J), opts.threads, [&](std::size_t j) {
        Rng rng(derive_seed(opts.seed, j));
        std::vector<std::size_t> order = rng.permutation(n);
        std::vector<std::size_t> test_idx(order.begin(),
                                          order.begin() + static_cast<long>(n_test));
        std::vector<std::size_t> train_idx(order.begin() + static_cast<long>(n_test),
                                           order.end());
        PlsFit fit;
        try {
            fit = fit_pls(take_rows(X, train_idx), take(y, train_idx), k);
        } catch (const Error& e) {
            throw Error(e.kind(), "corrected_t_test: split " + std::to_string(j) +
                                      " failed: " + e.what());
        }
        const RowMatrix Xte = take_rows(X, test_idx);
        const std::vector<double> yte_v = take(y, test_idx);
        const Eigen::Map<const Eigen::VectorXd> yte(yte_v.data(),
                                                    static_cast<Eigen::Index>(yte_v.size()));
        const Eigen::VectorXd pred = fit.model.predict(Xte);

        const double train_mean = fit.model.y_mean;
        const double ss_res = (yte - pred).squaredNorm();
        const double ss_tot = (yte.array() - train_mean).square().sum();
        if (ss_tot <= kMinP)
            throw Error(ErrorKind::degenerate,
                        "corrected_t_test: split " + std::to_string(j) +
                            " has zero baseline error");
        skills[j] = 1.0 - ss_res / ss_tot;
        preds_r[j] = pearson(pred, yte);
    });

    double mean_skill = 0.0, mean_r = 0.0;
    for (int j = 0; j < J; ++j) {
        mean_skill += skills[static_cast<std::size_t>(j)];
        mean_r += preds_r[static_cast<std::size_t>(j)];
    }
    mean_skill /= J;
    mean_r /= J;

    double var = 0.0;
    for (int j = 0; j < J; ++j) {
        const double d = skills[static_cast<std::size_t>(j)] - mean_skill;
        var += d * d;
    }
    var /= (J - 1);

    const double corrected =
        var * (1.0 / J + static_cast<double>(n_test) / static_cast<double>(n_train));
    double p;
    if (corrected <= kMinP) {
        p = mean_skill > 0 ? kMinP : 1.0;
    } else {
        const double t = mean_skill / std::sqrt(corrected);
        const boost::math::students_t dist(static_cast<double>(J - 1));
        p = boost::math::cdf(boost::math::complement(dist, t));
    }

    FitReport report;
    report.r_squared = mean_skill;
    report.r_pred = mean_r;
    report.p_value = std::min(1.0, std::max(kMinP, p));
    report.splits = J;
    report.split_scores = std::move(skills);
    return report;
}

}  // namespace ssd
