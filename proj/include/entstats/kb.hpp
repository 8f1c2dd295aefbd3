#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "entstats/core.hpp"
#include "entstats/text.hpp"

namespace entstats {

// A catalog item a mention can denote. The four token bags are the text
// sources the local features compare against a mention's context.
struct Entity {
    EntityId id = 0;
    std::string title;
    TokenBag first_paragraph;
    TokenBag full_text;
    TokenBag anchor_text;
    TokenBag anchor_context; // anchor plus 5 surrounding tokens per incoming link

    bool operator==(const Entity&) const = default;
};

enum class TextSource { first_paragraph, full_text, anchor_text, anchor_context };
inline constexpr TextSource kTextSources[] = {
    TextSource::first_paragraph, TextSource::full_text,
    TextSource::anchor_text, TextSource::anchor_context};

const TokenBag& entity_text(const Entity& e, TextSource src);

struct InlinkIndex {
    std::map<EntityId, std::vector<EntityId>> inlinks; // sorted, deduplicated
    std::int64_t total_pages = 0;                      // c; >= every inlink set size

    const std::vector<EntityId>& of(EntityId e) const;

    bool operator==(const InlinkIndex&) const = default;
};

struct MentionCandidate {
    EntityId entity = 0;
    std::int64_t prior_count = 0;

    bool operator==(const MentionCandidate&) const = default;
};

// Surface form -> candidates sorted by entity id. Surfaces are stored
// normalized (tokenized, lowercased, space-joined).
using MentionTable = std::map<std::string, std::vector<MentionCandidate>>;

struct KnowledgeBase {
    std::map<EntityId, Entity> entities;
    InlinkIndex inlinks;
    MentionTable mentions;

    bool has_entity(EntityId e) const { return entities.count(e) > 0; }
    const Entity& entity(EntityId e) const; // throws on unknown id

    // Inlink-overlap relatedness, <= 0. Empty when either inlink set is
    // empty, the sets are disjoint, or the denominator degenerates to 0.
    std::optional<double> relatedness(EntityId a, EntityId b) const;

    // clamp(1 + relatedness, 0, 1); undefined relatedness maps to 0.
    double coherence(EntityId a, EntityId b) const;

    // prior_count(surface, e) / sum over the surface's candidates.
    // 0 if e is not a candidate; throws on unknown surface.
    double mention_prior(const std::string& surface, EntityId e) const;

    // All entities appearing as a candidate of some surface, sorted.
    std::vector<EntityId> candidate_universe() const;

    // Cross-reference and invariant check; throws Error on violation.
    void validate() const;

    bool operator==(const KnowledgeBase&) const = default;
};

// Catalog directory: entities.jsonl, links.tsv, mentions.tsv, and an
// optional kb.meta with a total_pages override.
KnowledgeBase load_kb(const std::filesystem::path& dir);
void save_kb(const KnowledgeBase& kb, const std::filesystem::path& dir);

} // namespace entstats
