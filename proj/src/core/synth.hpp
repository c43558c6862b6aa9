#pragma once

#include <cstdint>
#include <string>

#include "core/embedding_store.hpp"
#include "core/lexicon.hpp"

namespace ssd {

// Paired synthetic spaces with planted gradients. Both spaces share one
// embedding-row matrix (a perfectly aligned pair); the two lexicons label the
// shared rows through their own planted direction and noise stream, so
// angle 0 with zero noise yields byte-identical samples.
struct SynthSpec {
    Eigen::Index d = 50;
    std::size_t n_a = 1000;
    std::size_t n_b = 1000;
    double angle_deg = 0.0;      // in [0, 180]
    double noise_sigma = 0.1;    // label noise std
    std::size_t vocab_size = 0;  // 0 = max(n_a, n_b)
    std::uint64_t seed = 0;
    // Optional dominant common-variance direction, drawn orthogonal to the
    // planted gradient plane, so first-PC removal is well-defined and does
    // not clip the signal.
    double anisotropy = 0.0;
    // Affine relabeling applied to emitted labels (z-score invariance knob).
    double label_scale = 1.0;
    double label_offset = 0.0;

    std::string to_json() const;
    static SynthSpec from_json(const std::string& text);
};

struct SynthData {
    EmbeddingSpace space_a;
    EmbeddingSpace space_b;
    NormLexicon lexicon_a;
    NormLexicon lexicon_b;
    Eigen::VectorXd w_a;
    Eigen::VectorXd w_b;
};

// Lexicon dimension name used for synthetic labels.
inline constexpr const char* kSynthDimension = "synthetic";

SynthData generate(const SynthSpec& spec);

// Emits emb_{a,b}.vec, lex_{a,b}.csv plus a manifest with the true
// directions, all at 9 significant digits.
struct SynthFiles {
    std::string embeddings_a;
    std::string embeddings_b;
    std::string lexicon_a;
    std::string lexicon_b;
    std::string manifest;
    std::string run_config;
};

SynthFiles write_synth(const SynthData& data, const SynthSpec& spec,
                       const std::string& out_dir);

}  // namespace ssd
