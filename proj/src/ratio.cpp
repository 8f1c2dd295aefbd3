#include "entstats/ratio.hpp"

#include <algorithm>
#include <cmath>

namespace entstats {

MentionFeature mention_feature(const KnowledgeBase& kb, const Spot& spot) {
    if (spot.candidates.empty()) throw Error("mention_feature: spot has no candidates");
    std::vector<double> priors;
    priors.reserve(spot.candidates.size());
    double total = 0.0;
    for (EntityId cand : spot.candidates) {
        const double p = kb.mention_prior(spot.surface, cand);
        priors.push_back(p);
        total += p;
    }
    MentionFeature f;
    for (std::size_t i = 0; i < spot.candidates.size(); ++i) {
        // All-zero priors fall back to uniform so the feature stays a
        // distribution.
        f.values[spot.candidates[i]] =
            total > 0.0 ? priors[i] / total : 1.0 / static_cast<double>(spot.candidates.size());
    }
    return f;
}

namespace {

std::size_t dim_index(const std::vector<EntityId>& dims, EntityId e) {
    auto it = std::lower_bound(dims.begin(), dims.end(), e);
    if (it == dims.end() || *it != e) {
        throw Error("feature dimension " + std::to_string(e) + " outside the dimension set");
    }
    return static_cast<std::size_t>(it - dims.begin());
}

void check_sorted_unique(const std::vector<EntityId>& v, const char* what) {
    if (v.empty()) throw Error(std::string(what) + ": empty");
    if (!std::is_sorted(v.begin(), v.end()) ||
        std::adjacent_find(v.begin(), v.end()) != v.end()) {
        throw Error(std::string(what) + ": not sorted unique");
    }
}

} // namespace

MeanEmbedding class_means(const Corpus& labeled, const KnowledgeBase& kb,
                          const std::vector<EntityId>& classes,
                          const std::vector<EntityId>& dims) {
    check_sorted_unique(classes, "classes");
    check_sorted_unique(dims, "dims");
    MeanEmbedding emb;
    emb.classes = classes;
    emb.dims = dims;
    emb.means.assign(classes.size(), std::vector<double>(dims.size(), 0.0));
    emb.counts.assign(classes.size(), 0);

    for (std::size_t d = 0; d < labeled.documents.size(); ++d) {
        for (const Spot& spot : labeled.spots[d]) {
            if (!spot.gold) throw Error("class_means: spot without gold label");
            auto it = std::lower_bound(classes.begin(), classes.end(), *spot.gold);
            if (it == classes.end() || *it != *spot.gold) continue;
            const std::size_t c = static_cast<std::size_t>(it - classes.begin());
            const MentionFeature f = mention_feature(kb, spot);
            for (const auto& [e, v] : f.values) emb.means[c][dim_index(dims, e)] += v;
            ++emb.counts[c];
        }
    }
    for (std::size_t c = 0; c < classes.size(); ++c) {
        if (emb.counts[c] == 0) {
            throw Error("class " + std::to_string(classes[c]) + " has no labeled spot");
        }
        for (double& v : emb.means[c]) v /= static_cast<double>(emb.counts[c]);
    }
    return emb;
}

std::vector<double> unlabeled_mean(const Corpus& corpus, const KnowledgeBase& kb,
                                   const std::vector<EntityId>& dims) {
    check_sorted_unique(dims, "dims");
    std::vector<double> mean(dims.size(), 0.0);
    std::int64_t count = 0;
    for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
        for (const Spot& spot : corpus.spots[d]) {
            const MentionFeature f = mention_feature(kb, spot);
            for (const auto& [e, v] : f.values) mean[dim_index(dims, e)] += v;
            ++count;
        }
    }
    if (count == 0) throw Error("unlabeled_mean: empty corpus");
    for (double& v : mean) v /= static_cast<double>(count);
    return mean;
}

namespace {

// Euclidean projection onto the probability simplex.
std::vector<double> project_simplex(std::vector<double> v) {
    const std::size_t n = v.size();
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0;
    double tau = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cumulative += sorted[i];
        const double candidate = (cumulative - 1.0) / static_cast<double>(i + 1);
        if (sorted[i] - candidate > 0.0) tau = candidate;
    }
    double sum = 0.0;
    for (double& x : v) {
        x = std::max(0.0, x - tau);
        sum += x;
    }
    for (double& x : v) x /= sum; // float cleanup; sum is within rounding of 1
    return v;
}

} // namespace

SimplexVector estimate_mmd(const MeanEmbedding& means, const std::vector<double>& phi_u,
                           const EstimatorConfig& cfg, MmdDiagnostics* diag) {
    const std::size_t k = means.classes.size();
    const std::size_t d = means.dims.size();
    if (k == 0) throw Error("estimate_mmd: no classes");
    if (phi_u.size() != d) throw Error("estimate_mmd: dimension mismatch");
    if (cfg.max_iterations <= 0 || cfg.tolerance <= 0.0) {
        throw Error("estimate_mmd: max_iterations and tolerance must be positive");
    }
    for (const auto& row : means.means) {
        for (double v : row) {
            if (!std::isfinite(v)) throw Error("estimate_mmd: non-finite class mean");
        }
    }
    for (double v : phi_u) {
        if (!std::isfinite(v)) throw Error("estimate_mmd: non-finite unlabeled mean");
    }

    // Gram form: f(theta) = theta'G theta - 2 b'theta + c0.
    std::vector<std::vector<double>> gram(k, std::vector<double>(k, 0.0));
    std::vector<double> b(k, 0.0);
    double c0 = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i; j < k; ++j) {
            double dotv = 0.0;
            for (std::size_t t = 0; t < d; ++t) dotv += means.means[i][t] * means.means[j][t];
            gram[i][j] = gram[j][i] = dotv;
        }
        for (std::size_t t = 0; t < d; ++t) b[i] += means.means[i][t] * phi_u[t];
    }
    for (std::size_t t = 0; t < d; ++t) c0 += phi_u[t] * phi_u[t];

    auto eval = [&](const std::vector<double>& theta) {
        double v = c0;
        for (std::size_t i = 0; i < k; ++i) {
            v -= 2.0 * b[i] * theta[i];
            for (std::size_t j = 0; j < k; ++j) v += theta[i] * gram[i][j] * theta[j];
        }
        return v;
    };

    // Largest Gram eigenvalue by power iteration (Gram is PSD).
    double lambda = 0.0;
    {
        std::vector<double> v(k, 1.0 / std::sqrt(static_cast<double>(k)));
        for (int it = 0; it < 1000; ++it) {
            std::vector<double> gv(k, 0.0);
            for (std::size_t i = 0; i < k; ++i) {
                for (std::size_t j = 0; j < k; ++j) gv[i] += gram[i][j] * v[j];
            }
            double norm = 0.0;
            for (double x : gv) norm += x * x;
            norm = std::sqrt(norm);
            if (norm < 1e-300) break;
            const double next = norm;
            for (std::size_t i = 0; i < k; ++i) v[i] = gv[i] / norm;
            if (std::abs(next - lambda) <= 1e-13 * std::max(1.0, next)) {
                lambda = next;
                break;
            }
            lambda = next;
        }
    }

    std::vector<double> theta(k, 1.0 / static_cast<double>(k));
    double objective = eval(theta);
    int iterations = 0;

    if (lambda > 0.0) {
        const double step = 1.0 / lambda;
        for (; iterations < cfg.max_iterations; ++iterations) {
            std::vector<double> next(k);
            for (std::size_t i = 0; i < k; ++i) {
                double grad = -b[i];
                for (std::size_t j = 0; j < k; ++j) grad += gram[i][j] * theta[j];
                next[i] = theta[i] - step * grad;
            }
            next = project_simplex(std::move(next));
            const double next_objective = eval(next);
            if (next_objective > objective + 1e-12 * std::max(1.0, std::abs(objective))) {
                throw Error("estimate_mmd: objective increased; step size invariant violated");
            }
            const double decrease = objective - next_objective;
            theta = std::move(next);
            objective = next_objective;
            if (decrease < cfg.tolerance) {
                ++iterations;
                break;
            }
        }
    }

    if (diag != nullptr) {
        diag->iterations = iterations;
        diag->objective = objective;
    }
    SimplexVector out{means.classes, std::move(theta)};
    out.validate();
    return out;
}

SimplexVector label_and_collect(Tagger tagger, const FeatureExtractor& fx, const WeightVector& w,
                                const Corpus& corpus, const std::vector<EntityId>& classes) {
    check_sorted_unique(classes, "classes");
    if (corpus.spot_count() == 0) throw Error("label_and_collect: empty corpus");

    std::vector<std::int64_t> counts(classes.size(), 0);
    std::int64_t total = 0;
    for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
        if (corpus.spots[d].empty()) continue;
        std::vector<Spot> spots = corpus.spots[d];
        switch (tagger) {
        case Tagger::local:
            disambiguate_local(fx, w, corpus.documents[d], spots);
            break;
        case Tagger::collective_hillclimb: {
            const AssignmentProblem p = build_problem(fx, w, corpus.documents[d], spots);
            const Assignment a = hill_climb(p, 0, 0);
            const std::vector<EntityId> chosen = chosen_entities(p, a);
            for (std::size_t s = 0; s < spots.size(); ++s) spots[s].predicted = chosen[s];
            break;
        }
        }
        for (const Spot& spot : spots) {
            auto it = std::lower_bound(classes.begin(), classes.end(), *spot.predicted);
            if (it != classes.end() && *it == *spot.predicted) {
                ++counts[static_cast<std::size_t>(it - classes.begin())];
                ++total;
            }
        }
    }
    if (total == 0) throw Error("label_and_collect: no prediction fell in the class set");
    std::vector<double> p(classes.size());
    for (std::size_t i = 0; i < classes.size(); ++i) {
        p[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
    }
    return make_simplex(classes, std::move(p));
}

double l1_error(const SimplexVector& theta, const SimplexVector& truth) {
    if (theta.classes != truth.classes) throw Error("l1_error: class index sets differ");
    double err = 0.0;
    for (std::size_t i = 0; i < theta.p.size(); ++i) err += std::abs(theta.p[i] - truth.p[i]);
    return err;
}

SimplexVector gold_ratio(const Corpus& corpus, const std::vector<EntityId>& classes) {
    check_sorted_unique(classes, "classes");
    std::vector<std::int64_t> counts(classes.size(), 0);
    std::int64_t total = 0;
    for (const auto& list : corpus.spots) {
        for (const Spot& spot : list) {
            if (!spot.gold) throw Error("gold_ratio: spot without gold label");
            auto it = std::lower_bound(classes.begin(), classes.end(), *spot.gold);
            if (it != classes.end() && *it == *spot.gold) {
                ++counts[static_cast<std::size_t>(it - classes.begin())];
                ++total;
            }
        }
    }
    if (total == 0) throw Error("gold_ratio: no gold label in the class set");
    std::vector<double> p(classes.size());
    for (std::size_t i = 0; i < classes.size(); ++i) {
        p[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
    }
    return make_simplex(classes, std::move(p));
}

} // namespace entstats
