#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "entstats/corpus.hpp"
#include "entstats/kb.hpp"
#include "entstats/simplex.hpp"

namespace entstats {

// Label used for statistics collection: predicted when present, else gold.
std::optional<EntityId> spot_label(const Spot& spot);

struct SenseGroup {
    std::string name;
    std::vector<EntityId> senses; // sorted
};

// groups.tsv: group_name TAB entity_id per line.
std::vector<SenseGroup> load_groups(const std::filesystem::path& path);

// One group per surface form, senses = its candidates. Errors when an
// entity is a candidate of two surfaces (groups must partition).
std::vector<SenseGroup> derive_groups(const MentionTable& table);

struct SenseStats {
    struct Group {
        std::string name;
        std::vector<EntityId> senses;
        std::vector<std::int64_t> counts;
        bool defined = false;       // false: no occurrence, distribution undefined
        std::vector<double> probs;  // empty unless defined
    };
    std::vector<Group> groups; // sorted by name
};

SenseStats sense_prior(const Corpus& tagged, const std::vector<SenseGroup>& groups);

// Sentence-level unordered co-occurrence counts; each entity and pair is
// counted at most once per sentence.
struct BigramTable {
    std::map<EntityId, std::int64_t> unigrams;
    std::map<std::pair<EntityId, EntityId>, std::int64_t> pairs; // key (min, max)

    std::int64_t unigram(EntityId e) const;
    std::int64_t pair_count(EntityId a, EntityId b) const;
    double conditional(EntityId e2, EntityId e1) const; // P(e2 | e1); n(e1) must be > 0
};

BigramTable entity_bigrams(const Corpus& tagged);

// Star around a center entity: neighbors E with P(E|X) > eps, edge weight
// P(E|X) + P(X|E).
struct CoocGraph {
    EntityId center = 0;
    struct Edge {
        EntityId entity = 0;
        double weight = 0.0;
    };
    std::vector<Edge> edges; // sorted by entity id
};

CoocGraph build_cooc_graph(const BigramTable& table, EntityId x, double eps);

struct PprScores {
    std::vector<EntityId> nodes; // center first, then neighbors by id
    std::vector<double> scores;  // nonnegative, sum 1

    double score_of(EntityId e) const;
};

using PprObserver = std::function<void(int iteration, const std::vector<double>& scores)>;

// Power iteration with restart to the center at probability 1 - damping,
// starting from all mass on the center. Dangling nodes restart fully to
// the center. Stops when the max per-node change drops below tol.
PprScores personalized_pagerank(const CoocGraph& graph, double damping, double tol,
                                int iteration_cap = 10000, const PprObserver& observer = nullptr);

// Top-k by score excluding the center, ties to the smallest id.
std::vector<std::pair<EntityId, double>> top_related(const CoocGraph& graph,
                                                     const PprScores& scores, std::size_t k);

// TSV writers shared by the CLI and the test suite; fixed 12-digit reals.
void write_sense_priors(const SenseStats& stats, const std::filesystem::path& path);
void write_bigrams(const BigramTable& table, const std::filesystem::path& path);
void write_related(const std::vector<std::pair<EntityId, double>>& ranked,
                   const std::filesystem::path& path);
void write_theta(const SimplexVector& theta, const std::filesystem::path& path);
void write_mention_priors(const KnowledgeBase& kb, const std::filesystem::path& path);

} // namespace entstats
