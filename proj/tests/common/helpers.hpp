#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "entstats/collective.hpp"
#include "entstats/corpus.hpp"
#include "entstats/kb.hpp"
#include "entstats/rng.hpp"

namespace entstats::testing {

inline std::filesystem::path fixture_dir() { return ENTSTATS_FIXTURE_DIR; }
inline std::string cli_binary() { return ENTSTATS_CLI_BIN; }

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

// Minimal entity: id, title, and the four text sources given as raw strings.
inline Entity make_entity(EntityId id, const std::string& title, const std::string& para = "",
                          const std::string& full = "", const std::string& anchor = "",
                          const std::string& anchor_ctx = "") {
    Entity e;
    e.id = id;
    e.title = title;
    e.first_paragraph = make_bag(tokenize(para));
    e.full_text = make_bag(tokenize(full));
    e.anchor_text = make_bag(tokenize(anchor));
    e.anchor_context = make_bag(tokenize(anchor_ctx));
    return e;
}

// Random KB: n entities, Erdos-Renyi links, one unambiguous surface per
// entity. total_pages defaults to n.
inline KnowledgeBase make_random_kb(std::size_t n, std::uint64_t seed,
                                    double link_probability = 0.25) {
    KnowledgeBase kb;
    Rng rng(seed);
    for (std::size_t i = 1; i <= n; ++i) {
        const EntityId id = static_cast<EntityId>(i);
        kb.entities.emplace(id, make_entity(id, "entity " + std::to_string(i),
                                            "paragraph of entity " + std::to_string(i),
                                            "full text of entity " + std::to_string(i)));
        kb.mentions["surface" + std::to_string(i)].push_back({id, 1});
    }
    for (std::size_t src = 1; src <= n; ++src) {
        for (std::size_t dst = 1; dst <= n; ++dst) {
            if (src == dst) continue;
            if (rng.uniform() < link_probability) {
                kb.inlinks.inlinks[static_cast<EntityId>(dst)].push_back(
                    static_cast<EntityId>(src));
            }
        }
    }
    kb.inlinks.total_pages = static_cast<std::int64_t>(n);
    kb.validate();
    return kb;
}

// One-sentence document over the given tokens.
inline Document make_doc(const std::string& doc_id, const std::vector<std::string>& tokens) {
    Document doc;
    doc.doc_id = doc_id;
    doc.tokens = tokens;
    doc.sentence_bounds = {{0, tokens.size()}};
    return doc;
}

inline Spot make_spot(const std::string& doc_id, std::size_t begin, std::size_t end,
                      const std::string& surface, std::vector<EntityId> candidates) {
    Spot spot;
    spot.doc_id = doc_id;
    spot.span = {begin, end};
    spot.surface = surface;
    spot.candidates = std::move(candidates);
    return spot;
}

// Random assignment problem: node potentials in [-1, 1), edges in [0, 1).
inline AssignmentProblem make_random_problem(Rng& rng, std::size_t max_spots,
                                             std::size_t max_cands) {
    const std::size_t n = 1 + rng.below(max_spots);
    std::vector<std::vector<EntityId>> cands(n);
    std::vector<std::vector<double>> node(n);
    for (std::size_t s = 0; s < n; ++s) {
        const std::size_t c = 1 + rng.below(max_cands);
        for (std::size_t j = 0; j < c; ++j) {
            cands[s].push_back(static_cast<EntityId>(j + 1));
            node[s].push_back(rng.uniform() * 2.0 - 1.0);
        }
    }
    AssignmentProblem p(std::move(cands), std::move(node));
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t t = s + 1; t < n; ++t) {
            for (std::size_t j = 0; j < p.candidates(s).size(); ++j) {
                for (std::size_t k = 0; k < p.candidates(t).size(); ++k) {
                    p.set_edge(s, j, t, k, rng.uniform());
                }
            }
        }
    }
    return p;
}

// Unique scratch directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::uint64_t counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("entstats-" + tag + "-" + std::to_string(::getpid()) + "-" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

} // namespace entstats::testing
