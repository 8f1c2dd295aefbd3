#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "entstats/core.hpp"
#include "entstats/kb.hpp"
#include "entstats/simplex.hpp"
#include "entstats/text.hpp"

namespace entstats {

// Half-open token index range [begin, end).
struct TokenSpan {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const { return end - begin; }
    bool operator==(const TokenSpan&) const = default;
};

struct Document {
    std::string doc_id;
    std::vector<std::string> tokens;
    std::vector<TokenSpan> sentence_bounds; // partition of [0, tokens.size()), in order

    bool operator==(const Document&) const = default;
};

struct Spot {
    std::string doc_id;
    TokenSpan span; // inside one sentence
    std::string surface;
    std::vector<EntityId> candidates; // nonempty, sorted by id
    std::optional<EntityId> gold;
    std::optional<EntityId> predicted;

    bool operator==(const Spot&) const = default;
};

struct Corpus {
    std::vector<Document> documents;
    std::vector<std::vector<Spot>> spots; // parallel to documents; sorted, non-overlapping

    std::size_t spot_count() const;
    void validate() const; // throws Error on invariant violation

    bool operator==(const Corpus&) const = default;
};

// corpus.jsonl: one document record per line, spots embedded. Round trips
// losslessly including gold and predicted labels.
Corpus load_corpus(const std::filesystem::path& path);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

// Greedy longest-match left-to-right scan of token n-grams (n <= 5)
// against the mention table, restarted per sentence. Matches never overlap.
std::vector<Spot> spot_mentions(const Document& doc, const MentionTable& table);
inline constexpr std::size_t kMaxSurfaceTokens = 5;

// Spot tokens plus up to k tokens each side, clipped at document bounds,
// as a lowercase bag.
TokenBag context_window(const Document& doc, const Spot& spot, std::size_t k);

// Seeded generator: gold entities drawn i.i.d. from theta; surface and
// context tokens drawn from fixed per-entity distributions (surfaces
// weighted by prior counts, context from first_paragraph). Each class
// consumes its own stream, so the conditional draw for the j-th spot of a
// class depends only on (seed, class, j), never on theta.
Corpus synth_corpus(const KnowledgeBase& kb, const SimplexVector& theta, std::size_t n_spots,
                    std::uint64_t seed);
inline constexpr std::size_t kSynthContextPerSide = 3;

} // namespace entstats
