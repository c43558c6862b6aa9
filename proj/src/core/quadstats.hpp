#pragma once

#include <span>
#include <vector>

namespace ssd {

struct ZscoreResult {
    std::vector<double> values;
    double mean = 0.0;
    double std_dev = 0.0;  // population (divide by N)
};

// Z-scores with __float128 internals and one final rounding per element, so
// the output is exactly invariant under affine relabelings a*y + b whenever
// the relabeled inputs are themselves exact. Throws a degenerate error when
// the population std is <= 1e-12.
ZscoreResult zscore(std::span<const double> values);

// Mean/population-std pair on the same quad path, no exception on zero
// variance (callers that need the guard use zscore()).
void quad_mean_std(std::span<const double> values, double& mean, double& std_dev);

}  // namespace ssd
