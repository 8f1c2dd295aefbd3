#include "entstats/local.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "entstats/rng.hpp"

namespace entstats {

IdfTable idf_table(const KnowledgeBase& kb) {
    const double n = static_cast<double>(kb.entities.size());
    std::map<std::string, std::int64_t> df;
    for (const auto& [id, ent] : kb.entities) {
        for (const auto& [token, count] : ent.full_text) ++df[token];
    }
    IdfTable table;
    table.default_idf = std::log(1.0 + n) + 1.0;
    for (const auto& [token, d] : df) {
        table.idf[token] = std::log((1.0 + n) / (1.0 + static_cast<double>(d))) + 1.0;
    }
    return table;
}

double similarity(const TokenBag& a, const TokenBag& b, SimilarityKind kind, const IdfTable* idf) {
    switch (kind) {
    case SimilarityKind::count_dot: {
        double dot = 0.0;
        for (const auto& [token, ca] : a) {
            auto it = b.find(token);
            if (it != b.end()) dot += static_cast<double>(ca) * static_cast<double>(it->second);
        }
        return dot;
    }
    case SimilarityKind::tfidf_cosine: {
        if (idf == nullptr) throw Error("similarity: tfidf_cosine needs an idf table");
        double dot = 0.0, na = 0.0, nb = 0.0;
        for (const auto& [token, ca] : a) {
            const double va = static_cast<double>(ca) * idf->at(token);
            na += va * va;
            auto it = b.find(token);
            if (it != b.end()) {
                dot += va * static_cast<double>(it->second) * idf->at(token);
            }
        }
        for (const auto& [token, cb] : b) {
            const double vb = static_cast<double>(cb) * idf->at(token);
            nb += vb * vb;
        }
        if (na == 0.0 || nb == 0.0) return 0.0;
        return dot / (std::sqrt(na) * std::sqrt(nb));
    }
    case SimilarityKind::jaccard: {
        if (a.empty() && b.empty()) return 0.0;
        std::size_t inter = 0;
        for (const auto& [token, ca] : a) inter += b.count(token);
        const std::size_t uni = a.size() + b.size() - inter;
        return static_cast<double>(inter) / static_cast<double>(uni);
    }
    }
    throw Error("similarity: unknown kind");
}

FeatureExtractor::FeatureExtractor(const KnowledgeBase& kb, std::size_t window_k)
    : kb_(&kb), idf_(idf_table(kb)), window_k_(window_k) {}

LocalFeatureVector FeatureExtractor::extract(const Document& doc, const Spot& spot,
                                             EntityId candidate) const {
    if (!std::binary_search(spot.candidates.begin(), spot.candidates.end(), candidate)) {
        throw Error("extract_features: entity " + std::to_string(candidate) +
                    " is not a candidate of '" + spot.surface + "'");
    }
    const Entity& ent = kb_->entity(candidate);
    const TokenBag context = context_window(doc, spot, window_k_);

    LocalFeatureVector f{};
    std::size_t i = 0;
    for (TextSource src : kTextSources) {
        const TokenBag& text = entity_text(ent, src);
        f[i++] = similarity(text, context, SimilarityKind::count_dot);
        f[i++] = similarity(text, context, SimilarityKind::tfidf_cosine, &idf_);
        f[i++] = similarity(text, context, SimilarityKind::jaccard);
    }
    f[kPriorFeature] = kb_->mention_prior(spot.surface, candidate);
    return f;
}

double dot(const WeightVector& w, const LocalFeatureVector& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < kFeatureCount; ++i) s += w[i] * f[i];
    return s;
}

WeightVector train_weights(const Corpus& corpus, const FeatureExtractor& fx,
                           const TrainConfig& cfg) {
    corpus.validate();
    if (cfg.epochs < 0) throw Error("train_weights: negative epoch count");
    if (cfg.learning_rate <= 0.0) throw Error("train_weights: learning rate must be positive");
    if (cfg.margin <= 0.0) throw Error("train_weights: margin must be positive");

    // Features per (spot, candidate), extracted once.
    struct TrainSpot {
        std::size_t gold_index = 0;
        std::vector<LocalFeatureVector> features;
    };
    std::vector<TrainSpot> data;
    bool any_multi = false;
    for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
        for (const Spot& spot : corpus.spots[d]) {
            if (!spot.gold) {
                throw Error("train_weights: spot without gold label in '" + spot.doc_id + "'");
            }
            TrainSpot ts;
            ts.features.reserve(spot.candidates.size());
            for (std::size_t j = 0; j < spot.candidates.size(); ++j) {
                if (spot.candidates[j] == *spot.gold) ts.gold_index = j;
                ts.features.push_back(fx.extract(corpus.documents[d], spot, spot.candidates[j]));
            }
            if (spot.candidates.size() >= 2) any_multi = true;
            data.push_back(std::move(ts));
        }
    }
    if (!any_multi) throw Error("train_weights: no spot with two or more candidates");

    WeightVector w{};
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(cfg.seed);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (cfg.shuffle) rng.shuffle(order);
        for (std::size_t idx : order) {
            const TrainSpot& ts = data[idx];
            const LocalFeatureVector& gold = ts.features[ts.gold_index];
            for (std::size_t j = 0; j < ts.features.size(); ++j) {
                if (j == ts.gold_index) continue;
                const LocalFeatureVector& other = ts.features[j];
                if (dot(w, gold) - dot(w, other) < cfg.margin) {
                    for (std::size_t i = 0; i < kFeatureCount; ++i) {
                        w[i] += cfg.learning_rate * (gold[i] - other[i]);
                    }
                }
            }
        }
    }
    return w;
}

void disambiguate_local(const FeatureExtractor& fx, const WeightVector& w, const Document& doc,
                        std::vector<Spot>& spots) {
    for (Spot& spot : spots) {
        if (spot.candidates.empty()) {
            throw Error("disambiguate_local: spot with empty candidate list in '" + spot.doc_id +
                        "'");
        }
        EntityId best = spot.candidates.front();
        double best_score = dot(w, fx.extract(doc, spot, best));
        for (std::size_t j = 1; j < spot.candidates.size(); ++j) {
            const double score = dot(w, fx.extract(doc, spot, spot.candidates[j]));
            if (score > best_score) {
                best_score = score;
                best = spot.candidates[j];
            }
        }
        spot.predicted = best;
    }
}

WeightVector load_weights(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    WeightVector w{};
    std::string line;
    std::size_t i = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (i >= kFeatureCount) throw Error(path.string() + ": more than 13 weight lines");
        try {
            std::size_t pos = 0;
            w[i] = std::stod(line, &pos);
            if (pos != line.size() || !std::isfinite(w[i])) throw std::invalid_argument(line);
        } catch (const std::exception&) {
            throw Error(path.string() + ":" + std::to_string(i + 1) + ": not a finite real: '" +
                        line + "'");
        }
        ++i;
    }
    if (i != kFeatureCount) {
        throw Error(path.string() + ": expected 13 weight lines, got " + std::to_string(i));
    }
    return w;
}

void save_weights(const WeightVector& w, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    for (double v : w) out << format_g17(v) << '\n';
}

} // namespace entstats
