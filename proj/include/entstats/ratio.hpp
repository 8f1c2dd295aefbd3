#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "entstats/collective.hpp"
#include "entstats/corpus.hpp"
#include "entstats/kb.hpp"
#include "entstats/local.hpp"
#include "entstats/simplex.hpp"

namespace entstats {

// Sparse per-mention feature: candidate priors renormalized over the
// spot's candidate set; a probability vector over entity dimensions.
struct MentionFeature {
    std::map<EntityId, double> values;
};

MentionFeature mention_feature(const KnowledgeBase& kb, const Spot& spot);

// Per-class arithmetic means of mention features, dense over a fixed
// dimension order.
struct MeanEmbedding {
    std::vector<EntityId> classes;          // sorted
    std::vector<EntityId> dims;             // sorted
    std::vector<std::vector<double>> means; // [class][dim]
    std::vector<std::int64_t> counts;       // labeled spots per class
};

// Every class in `classes` needs at least one gold-labeled spot; spots
// whose gold lies outside the class set are ignored.
MeanEmbedding class_means(const Corpus& labeled, const KnowledgeBase& kb,
                          const std::vector<EntityId>& classes,
                          const std::vector<EntityId>& dims);

std::vector<double> unlabeled_mean(const Corpus& corpus, const KnowledgeBase& kb,
                                   const std::vector<EntityId>& dims);

struct EstimatorConfig {
    int max_iterations = 10000;
    double tolerance = 1e-12; // stop when the objective decrease drops below this
    std::uint64_t seed = 0;
};

struct MmdDiagnostics {
    int iterations = 0;
    double objective = 0.0; // ||sum_y theta_y mean_y - phi_u||^2 at the returned theta
};

// argmin_theta ||sum_y theta_y mean_y - phi_u||^2 over the probability
// simplex, by projected gradient descent with step 1/L where L is the
// largest eigenvalue of the Gram matrix of the class means.
SimplexVector estimate_mmd(const MeanEmbedding& means, const std::vector<double>& phi_u,
                           const EstimatorConfig& cfg, MmdDiagnostics* diag = nullptr);

enum class Tagger { local, collective_hillclimb };

// Tags every spot with the chosen disambiguator, then counts predicted
// labels and normalizes over the class set.
SimplexVector label_and_collect(Tagger tagger, const FeatureExtractor& fx, const WeightVector& w,
                                const Corpus& corpus, const std::vector<EntityId>& classes);

// sum_y |theta_y - truth_y|; both vectors must share the class index set.
double l1_error(const SimplexVector& theta, const SimplexVector& truth);

// Empirical distribution of gold labels over the class set.
SimplexVector gold_ratio(const Corpus& corpus, const std::vector<EntityId>& classes);

} // namespace entstats
