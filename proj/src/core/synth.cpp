#include "core/synth.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numbers>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace ssd {

using nlohmann::json;

std::string SynthSpec::to_json() const {
    json j{{"d", d},
           {"n_a", n_a},
           {"n_b", n_b},
           {"angle_deg", angle_deg},
           {"noise_sigma", noise_sigma},
           {"vocab_size", vocab_size},
           {"seed", seed},
           {"anisotropy", anisotropy},
           {"label_scale", label_scale},
           {"label_offset", label_offset}};
    return j.dump(2);
}

SynthSpec SynthSpec::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw_parse(std::string("synth spec: invalid JSON: ") + e.what());
    }
    SynthSpec spec;
    spec.d = j.value("d", spec.d);
    spec.n_a = j.value("n_a", spec.n_a);
    spec.n_b = j.value("n_b", spec.n_b);
    spec.angle_deg = j.value("angle_deg", spec.angle_deg);
    spec.noise_sigma = j.value("noise_sigma", spec.noise_sigma);
    spec.vocab_size = j.value("vocab_size", spec.vocab_size);
    spec.seed = j.value("seed", spec.seed);
    spec.anisotropy = j.value("anisotropy", spec.anisotropy);
    spec.label_scale = j.value("label_scale", spec.label_scale);
    spec.label_offset = j.value("label_offset", spec.label_offset);
    return spec;
}

namespace {

void validate(const SynthSpec& spec) {
    if (spec.d < 2) throw_validation("synth: d must be >= 2");
    if (spec.n_a < 2 || spec.n_b < 2) throw_validation("synth: sample sizes must be >= 2");
    if (!(spec.angle_deg >= 0.0 && spec.angle_deg <= 180.0))
        throw_validation("synth: angle_deg must be in [0, 180]");
    if (spec.noise_sigma < 0.0) throw_validation("synth: noise_sigma must be >= 0");
    if (spec.anisotropy < 0.0) throw_validation("synth: anisotropy must be >= 0");
    if (spec.anisotropy > 0.0 && spec.d < 3)
        throw_validation("synth: anisotropy needs d >= 3");
    if (spec.label_scale == 0.0) throw_validation("synth: label_scale must be nonzero");
}

std::string word_name(std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "w%06zu", i);
    return buf;
}

}  // namespace

SynthData generate(const SynthSpec& spec) {
    validate(spec);
    const std::size_t vocab =
        spec.vocab_size > 0 ? spec.vocab_size : std::max(spec.n_a, spec.n_b);
    if (vocab < std::max(spec.n_a, spec.n_b))
        throw_validation("synth: vocab_size smaller than lexicon sizes");

    Rng rng(spec.seed);

    RowMatrix X(static_cast<Eigen::Index>(vocab), spec.d);
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = 0; j < spec.d; ++j) X(i, j) = rng.gaussian();

    Eigen::VectorXd w_a(spec.d);
    for (Eigen::Index j = 0; j < spec.d; ++j) w_a(j) = rng.gaussian();
    w_a.normalize();

    Eigen::VectorXd plane(spec.d);
    for (Eigen::Index j = 0; j < spec.d; ++j) plane(j) = rng.gaussian();
    plane -= plane.dot(w_a) * w_a;
    plane -= plane.dot(w_a) * w_a;  // second pass tightens orthogonality
    plane.normalize();

    Eigen::VectorXd w_b;
    if (spec.angle_deg == 0.0) {
        w_b = w_a;
    } else if (spec.angle_deg == 180.0) {
        w_b = -w_a;
    } else {
        const double theta = spec.angle_deg * std::numbers::pi / 180.0;
        w_b = std::cos(theta) * w_a + std::sin(theta) * plane;
    }

    if (spec.anisotropy > 0.0) {
        Eigen::VectorXd u(spec.d);
        for (Eigen::Index j = 0; j < spec.d; ++j) u(j) = rng.gaussian();
        u -= u.dot(w_a) * w_a;
        u -= u.dot(plane) * plane;
        u.normalize();
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            X.row(i) += spec.anisotropy * rng.gaussian() * u.transpose();
    }

    auto make_space = [&](const std::string& language) {
        EmbeddingSpace space;
        space.language = language;
        space.vectors = X;
        space.vocab.reserve(vocab);
        for (std::size_t i = 0; i < vocab; ++i) space.vocab.push_back(word_name(i));
        space.rebuild_index();
        return space;
    };

    auto make_lexicon = [&](const std::string& language, std::size_t n,
                            const Eigen::VectorXd& w) {
        NormLexicon lex;
        lex.language = language;
        lex.dimensions = {kSynthDimension};
        for (std::size_t i = 0; i < n; ++i) {
            double y = X.row(static_cast<Eigen::Index>(i)).dot(w);
            if (spec.noise_sigma > 0.0) y += spec.noise_sigma * rng.gaussian();
            y = spec.label_scale * y + spec.label_offset;
            lex.index.emplace(word_name(i), lex.words.size());
            lex.words.push_back(word_name(i));
            lex.scores.push_back({y});
        }
        return lex;
    };

    SynthData data;
    data.space_a = make_space("a");
    data.space_b = make_space("b");
    data.lexicon_a = make_lexicon("a", spec.n_a, w_a);
    data.lexicon_b = make_lexicon("b", spec.n_b, w_b);
    data.w_a = std::move(w_a);
    data.w_b = std::move(w_b);
    return data;
}

SynthFiles write_synth(const SynthData& data, const SynthSpec& spec,
                       const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    SynthFiles files;
    files.embeddings_a = (fs::path(out_dir) / "emb_a.vec").string();
    files.embeddings_b = (fs::path(out_dir) / "emb_b.vec").string();
    files.lexicon_a = (fs::path(out_dir) / "lex_a.csv").string();
    files.lexicon_b = (fs::path(out_dir) / "lex_b.csv").string();
    files.manifest = (fs::path(out_dir) / "synth_manifest.json").string();
    files.run_config = (fs::path(out_dir) / "config.json").string();

    save_embeddings(data.space_a, files.embeddings_a, 9);
    save_embeddings(data.space_b, files.embeddings_b, 9);

    auto write_lexicon = [](const NormLexicon& lex, const std::string& path) {
        std::FILE* f = std::fopen(path.c_str(), "w");
        if (!f) throw_validation("cannot open for writing: " + path);
        std::fprintf(f, "word,%s\n", kSynthDimension);
        for (std::size_t i = 0; i < lex.size(); ++i)
            std::fprintf(f, "%s,%.9g\n", lex.words[i].c_str(), lex.scores[i][0]);
        std::fclose(f);
    };
    write_lexicon(data.lexicon_a, files.lexicon_a);
    write_lexicon(data.lexicon_b, files.lexicon_b);

    json manifest{
        {"spec", json::parse(spec.to_json())},
        {"true_cos", std::min(1.0, std::max(-1.0, data.w_a.dot(data.w_b)))},
        {"w_a", std::vector<double>(data.w_a.data(), data.w_a.data() + data.w_a.size())},
        {"w_b", std::vector<double>(data.w_b.data(), data.w_b.data() + data.w_b.size())},
        {"files",
         {{"embeddings_a", "emb_a.vec"},
          {"embeddings_b", "emb_b.vec"},
          {"lexicon_a", "lex_a.csv"},
          {"lexicon_b", "lex_b.csv"}}}};
    std::ofstream(files.manifest) << manifest.dump(2) << "\n";

    // Ready-to-run configuration pointing at the generated files.
    json config{
        {"languages",
         {{"a", {{"embeddings", "emb_a.vec"}, {"lexicon", "lex_a.csv"}}},
          {"b", {{"embeddings", "emb_b.vec"}, {"lexicon", "lex_b.csv"}}}}},
        {"dimensions", {kSynthDimension}},
        {"preprocess", {{"l2_normalize", true}, {"remove_first_component", true}}},
        {"params", {{"min_n", 10}}},
        {"seed", spec.seed},
        {"out_dir", "reports"}};
    std::ofstream(files.run_config) << config.dump(2) << "\n";
    return files;
}

}  // namespace ssd
