#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/gradient_fit.hpp"
#include "core/lexicon.hpp"

namespace ssd {

enum class Tail { upper, lower };

struct PermutationResult {
    double rho_observed = 0.0;
    std::vector<double> null_samples;
    double p_value = 1.0;  // always in [1/(n+1), 1]
    std::size_t n = 0;
    Tail tail = Tail::upper;
    std::uint64_t seed = 0;
};

struct BootstrapResult {
    double rho_observed = 0.0;  // arctanh-clamped, so it sits inside the CI
    double sigma_z = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t replicates = 0;
    std::vector<double> replicate_rhos;
    std::uint64_t seed = 0;
};

// cos(g_a, g_b) = g_a^T g_b for unit-normalized gradients, clamped to [-1, 1].
double cosine(const Gradient& g_a, const Gradient& g_b);

struct ResampleOptions {
    std::uint64_t seed = 0;
    int threads = 0;       // 0 = auto (SSD_THREADS env or hardware)
    int retry_cap = 10;    // degenerate refits per replicate
};

// H0: rho = 0. Shuffles the word-to-label pairing within each sample,
// refits both K=1 gradients, upper-tail p with pseudocount.
PermutationResult alignment_test(const JoinedSample& a, const JoinedSample& b,
                                 std::size_t n, const ResampleOptions& opts = {});

// H0: rho = 1. Pools both samples (labels z-scored within language), shuffles
// the language assignment at fixed group sizes, lower-tail p.
PermutationResult difference_test(const JoinedSample& a, const JoinedSample& b,
                                  std::size_t n, const ResampleOptions& opts = {});

// Hybrid interval: spread from bootstrap replicates on the Fisher-z scale,
// centered on the observed rho, back-transformed through tanh.
BootstrapResult bootstrap_interval(const JoinedSample& a, const JoinedSample& b,
                                   std::size_t replicates,
                                   const ResampleOptions& opts = {});

// [tanh(z_obs - 1.96 sigma), tanh(z_obs + 1.96 sigma)] with
// z_obs = arctanh(clamp(rho, 1 - 1e-12)).
std::pair<double, double> fisher_interval(double rho_observed, double sigma_z);

}  // namespace ssd
