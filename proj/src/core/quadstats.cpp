#include "core/quadstats.hpp"

#include <quadmath.h>

#include "core/error.hpp"

namespace ssd {

namespace {

void mean_std_q(std::span<const double> values, __float128& mean, __float128& sd) {
    const std::size_t n = values.size();
    __float128 sum = 0;
    for (double v : values) sum += (__float128)v;
    mean = sum / (__float128)n;
    __float128 ssq = 0;
    for (double v : values) {
        const __float128 d = (__float128)v - mean;
        ssq += d * d;
    }
    sd = sqrtq(ssq / (__float128)n);
}

}  // namespace

void quad_mean_std(std::span<const double> values, double& mean, double& std_dev) {
    __float128 m, s;
    mean_std_q(values, m, s);
    mean = (double)m;
    std_dev = (double)s;
}

ZscoreResult zscore(std::span<const double> values) {
    if (values.size() < 2)
        throw_validation("zscore: need at least 2 values, got " +
                         std::to_string(values.size()));
    __float128 m, s;
    mean_std_q(values, m, s);
    if (s <= (__float128)1e-12)
        throw_degenerate("zscore: zero-variance input (std <= 1e-12)");

    ZscoreResult out;
    out.mean = (double)m;
    out.std_dev = (double)s;
    out.values.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        out.values[i] = (double)(((__float128)values[i] - m) / s);
    return out;
}

}  // namespace ssd
