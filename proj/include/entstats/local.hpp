#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "entstats/corpus.hpp"
#include "entstats/kb.hpp"

namespace entstats {

// 12 similarity features ({first_paragraph, full_text, anchor_text,
// anchor_context} x {count dot, TFIDF cosine, Jaccard}, source-major)
// plus the mention prior at index 12.
inline constexpr std::size_t kFeatureCount = 13;
inline constexpr std::size_t kPriorFeature = 12;

using LocalFeatureVector = std::array<double, kFeatureCount>;
using WeightVector = std::array<double, kFeatureCount>;

enum class SimilarityKind { count_dot, tfidf_cosine, jaccard };

struct IdfTable {
    std::map<std::string, double> idf;
    double default_idf = 0.0; // unseen term, df = 0

    double at(const std::string& term) const {
        auto it = idf.find(term);
        return it == idf.end() ? default_idf : it->second;
    }
};

// idf(t) = ln((1 + N) / (1 + df(t))) + 1 over the KB entity full texts.
IdfTable idf_table(const KnowledgeBase& kb);

// idf may be null except for tfidf_cosine.
double similarity(const TokenBag& a, const TokenBag& b, SimilarityKind kind,
                  const IdfTable* idf = nullptr);

// Caches the IDF table and window size; extraction itself is pure.
class FeatureExtractor {
public:
    explicit FeatureExtractor(const KnowledgeBase& kb, std::size_t window_k = 25);

    LocalFeatureVector extract(const Document& doc, const Spot& spot, EntityId candidate) const;

    const KnowledgeBase& kb() const { return *kb_; }
    const IdfTable& idf() const { return idf_; }
    std::size_t window() const { return window_k_; }

private:
    const KnowledgeBase* kb_;
    IdfTable idf_;
    std::size_t window_k_;
};

double dot(const WeightVector& w, const LocalFeatureVector& f);

struct TrainConfig {
    int epochs = 20;
    double learning_rate = 0.1;
    double margin = 1.0;
    std::uint64_t seed = 0;
    bool shuffle = true;
};

// Online subgradient descent on the pairwise ranking hinge
//   sum_s sum_{c != gold} max(0, margin - w.f_s(gold) + w.f_s(c)).
// Every training spot needs a gold label; at least one spot must have
// two or more candidates.
WeightVector train_weights(const Corpus& corpus, const FeatureExtractor& fx,
                           const TrainConfig& cfg);

// Per-spot argmax of w.f over the candidates, ties to the smallest id.
// Fills Spot::predicted.
void disambiguate_local(const FeatureExtractor& fx, const WeightVector& w, const Document& doc,
                        std::vector<Spot>& spots);

// Weights file: one real per line, 13 lines.
WeightVector load_weights(const std::filesystem::path& path);
void save_weights(const WeightVector& w, const std::filesystem::path& path);

} // namespace entstats
