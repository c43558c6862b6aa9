#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "core/embedding_store.hpp"
#include "core/lexicon.hpp"

namespace ssd {

struct StandardizationStats {
    Eigen::VectorXd means;  // per column
    Eigen::VectorXd stds;   // population, all > 1e-12
};

// Per-split scores of the corrected resampled t-test.
struct FitReport {
    double r_squared = 0.0;  // mean test-set R^2 over splits (can be negative)
    double r_pred = 0.0;     // mean test-set Pearson r over splits
    double p_value = 1.0;    // clamped to [1e-300, 1]
    int splits = 0;
    std::vector<double> split_scores;  // the R^2 skill per split
};

// Unit direction in raw embedding coordinates along which the label
// increases, oriented so corr(<direction, x>, y) >= 0 on training data.
struct Gradient {
    Eigen::VectorXd direction;
    std::string language;
    std::string dimension;
    int k = 1;
    std::optional<FitReport> fit;
};

// Column-wise standardization: Z_ij = (x_ij - mean_j) / std_j.
std::pair<RowMatrix, StandardizationStats> standardize(const RowMatrix& X);

// Closed-form single-component PLS1: beta_j = (Z^T ytilde)_j / s_j with
// ytilde = zscore(y), direction = beta / ||beta||.
Gradient closed_form_pls1(const RowMatrix& X, std::span<const double> y);
Gradient closed_form_pls1(const JoinedSample& sample);

// Trained PLS predictor: maps raw vectors to predicted labels using the
// training standardization and the regression coefficients.
struct PlsModel {
    StandardizationStats stats;
    Eigen::VectorXd coef;  // in standardized-X / z-scored-y space
    double y_mean = 0.0;
    double y_std = 1.0;
    int k = 0;

    double predict(const Eigen::RowVectorXd& x) const;
    Eigen::VectorXd predict(const RowMatrix& X) const;
};

struct PlsFit {
    Gradient gradient;
    PlsModel model;
};

// Iterative one-block PLS (NIPALS-style deflation) on (Z, ytilde).
PlsFit fit_pls(const RowMatrix& X, std::span<const double> y, int k);
PlsFit fit_pls(const JoinedSample& sample, int k);

// In-sample R^2 of the fitted predictor.
double r_squared_in_sample(const PlsModel& model, const RowMatrix& X,
                           std::span<const double> y);

struct SelectKOptions {
    int folds = 5;
    std::uint64_t seed = 0;
};

// One-standard-error rule over k-fold CV MSE: smallest k whose CV error is
// within one SE of the minimum.
int select_k(const RowMatrix& X, std::span<const double> y, int k_max,
             const SelectKOptions& opts = {});

struct TTestOptions {
    int splits = 30;
    double test_fraction = 0.2;
    std::uint64_t seed = 0;
    int threads = 0;  // 0 = auto
};

// Corrected resampled t-test over repeated train-test splits: the corrected
// variance is var(scores) * (1/J + n_test/n_train), df = J - 1, upper tail
// against skill <= 0.
FitReport corrected_t_test(const RowMatrix& X, std::span<const double> y, int k,
                           const TTestOptions& opts = {});

}  // namespace ssd
