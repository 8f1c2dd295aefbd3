#include "entstats/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "entstats/simplex.hpp"

namespace entstats {

namespace fs = std::filesystem;

std::optional<EntityId> spot_label(const Spot& spot) {
    if (spot.predicted) return spot.predicted;
    return spot.gold;
}

std::vector<SenseGroup> load_groups(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::map<std::string, std::set<EntityId>> raw;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw Error(path.filename().string() + ":" + std::to_string(lineno) +
                        ": expected 'group<TAB>entity_id'");
        }
        try {
            raw[line.substr(0, tab)].insert(std::stoll(line.substr(tab + 1)));
        } catch (const std::exception&) {
            throw Error(path.filename().string() + ":" + std::to_string(lineno) +
                        ": not an integer entity id");
        }
    }
    std::vector<SenseGroup> groups;
    for (const auto& [name, senses] : raw) {
        groups.push_back({name, {senses.begin(), senses.end()}});
    }
    return groups;
}

std::vector<SenseGroup> derive_groups(const MentionTable& table) {
    std::map<EntityId, std::string> owner;
    std::vector<SenseGroup> groups;
    for (const auto& [surface, cands] : table) {
        SenseGroup g{surface, {}};
        for (const auto& c : cands) {
            auto [it, inserted] = owner.emplace(c.entity, surface);
            if (!inserted) {
                throw Error("entity " + std::to_string(c.entity) + " is a candidate of both '" +
                            it->second + "' and '" + surface + "'; groups must partition");
            }
            g.senses.push_back(c.entity);
        }
        groups.push_back(std::move(g));
    }
    return groups;
}

SenseStats sense_prior(const Corpus& tagged, const std::vector<SenseGroup>& groups) {
    std::map<EntityId, std::pair<std::size_t, std::size_t>> where; // sense -> (group, index)
    for (std::size_t g = 0; g < groups.size(); ++g) {
        for (std::size_t i = 0; i < groups[g].senses.size(); ++i) {
            auto [it, inserted] = where.emplace(groups[g].senses[i], std::make_pair(g, i));
            if (!inserted) {
                throw Error("sense " + std::to_string(groups[g].senses[i]) +
                            " belongs to two groups");
            }
        }
    }

    SenseStats stats;
    stats.groups.reserve(groups.size());
    for (const auto& g : groups) {
        SenseStats::Group out;
        out.name = g.name;
        out.senses = g.senses;
        out.counts.assign(g.senses.size(), 0);
        stats.groups.push_back(std::move(out));
    }
    std::sort(stats.groups.begin(), stats.groups.end(),
              [](const auto& a, const auto& b) { return a.name < b.name; });
    // Rebuild the index against the sorted order.
    where.clear();
    for (std::size_t g = 0; g < stats.groups.size(); ++g) {
        for (std::size_t i = 0; i < stats.groups[g].senses.size(); ++i) {
            where.emplace(stats.groups[g].senses[i], std::make_pair(g, i));
        }
    }

    for (const auto& list : tagged.spots) {
        for (const Spot& spot : list) {
            const auto label = spot_label(spot);
            if (!label) continue;
            auto it = where.find(*label);
            if (it == where.end()) continue;
            ++stats.groups[it->second.first].counts[it->second.second];
        }
    }
    for (auto& g : stats.groups) {
        std::int64_t total = 0;
        for (std::int64_t c : g.counts) total += c;
        if (total > 0) {
            g.defined = true;
            g.probs.resize(g.counts.size());
            for (std::size_t i = 0; i < g.counts.size(); ++i) {
                g.probs[i] = static_cast<double>(g.counts[i]) / static_cast<double>(total);
            }
        }
    }
    return stats;
}

std::int64_t BigramTable::unigram(EntityId e) const {
    auto it = unigrams.find(e);
    return it == unigrams.end() ? 0 : it->second;
}

std::int64_t BigramTable::pair_count(EntityId a, EntityId b) const {
    auto it = pairs.find({std::min(a, b), std::max(a, b)});
    return it == pairs.end() ? 0 : it->second;
}

double BigramTable::conditional(EntityId e2, EntityId e1) const {
    const std::int64_t n1 = unigram(e1);
    if (n1 == 0) throw Error("entity " + std::to_string(e1) + " never observed");
    return static_cast<double>(pair_count(e1, e2)) / static_cast<double>(n1);
}

BigramTable entity_bigrams(const Corpus& tagged) {
    BigramTable table;
    for (std::size_t d = 0; d < tagged.documents.size(); ++d) {
        const Document& doc = tagged.documents[d];
        for (const TokenSpan& sent : doc.sentence_bounds) {
            std::set<EntityId> present;
            for (const Spot& spot : tagged.spots[d]) {
                if (spot.span.begin >= sent.begin && spot.span.end <= sent.end) {
                    const auto label = spot_label(spot);
                    if (label) present.insert(*label);
                }
            }
            for (auto it = present.begin(); it != present.end(); ++it) {
                ++table.unigrams[*it];
                for (auto jt = std::next(it); jt != present.end(); ++jt) {
                    ++table.pairs[{*it, *jt}];
                }
            }
        }
    }
    return table;
}

CoocGraph build_cooc_graph(const BigramTable& table, EntityId x, double eps) {
    if (table.unigram(x) == 0) throw Error("entity " + std::to_string(x) + " never observed");
    CoocGraph graph;
    graph.center = x;
    for (const auto& [pair, count] : table.pairs) {
        EntityId other;
        if (pair.first == x) other = pair.second;
        else if (pair.second == x) other = pair.first;
        else continue;
        if (count == 0) continue;
        const double p_e_given_x = table.conditional(other, x);
        if (p_e_given_x > eps) {
            graph.edges.push_back({other, p_e_given_x + table.conditional(x, other)});
        }
    }
    std::sort(graph.edges.begin(), graph.edges.end(),
              [](const auto& a, const auto& b) { return a.entity < b.entity; });
    return graph;
}

double PprScores::score_of(EntityId e) const {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i] == e) return scores[i];
    }
    throw Error("entity " + std::to_string(e) + " not in the graph");
}

PprScores personalized_pagerank(const CoocGraph& graph, double damping, double tol,
                                int iteration_cap, const PprObserver& observer) {
    if (damping <= 0.0 || damping >= 1.0) throw Error("ppr: damping must be in (0, 1)");
    if (tol <= 0.0) throw Error("ppr: tolerance must be positive");

    const std::size_t n = graph.edges.size() + 1; // center + neighbors
    PprScores result;
    result.nodes.push_back(graph.center);
    for (const auto& e : graph.edges) result.nodes.push_back(e.entity);

    // Row-normalized transitions over the undirected star. Neighbors hold
    // a single edge back to the center; a center with no edges dangles.
    double center_total = 0.0;
    for (const auto& e : graph.edges) center_total += e.weight;

    std::vector<double> p(n, 0.0);
    p[0] = 1.0; // all mass starts on the center
    if (observer) observer(0, p);

    for (int iter = 1; iter <= iteration_cap; ++iter) {
        std::vector<double> next(n, 0.0);
        // Walk step.
        if (center_total > 0.0) {
            for (std::size_t i = 0; i < graph.edges.size(); ++i) {
                next[i + 1] += damping * p[0] * (graph.edges[i].weight / center_total);
            }
        } else {
            next[0] += damping * p[0]; // dangling center restarts to itself
        }
        for (std::size_t i = 0; i < graph.edges.size(); ++i) {
            next[0] += damping * p[i + 1];
        }
        // Restart.
        double mass = 0.0;
        for (double v : p) mass += v;
        next[0] += (1.0 - damping) * mass;

        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) delta = std::max(delta, std::abs(next[i] - p[i]));
        p = std::move(next);
        if (observer) observer(iter, p);
        if (delta < tol) {
            result.scores = std::move(p);
            return result;
        }
    }
    throw Error("ppr: no convergence within " + std::to_string(iteration_cap) + " iterations");
}

std::vector<std::pair<EntityId, double>> top_related(const CoocGraph& graph,
                                                     const PprScores& scores, std::size_t k) {
    std::vector<std::pair<EntityId, double>> ranked;
    for (std::size_t i = 0; i < scores.nodes.size(); ++i) {
        if (scores.nodes[i] == graph.center) continue;
        ranked.emplace_back(scores.nodes[i], scores.scores[i]);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
}

namespace {

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

} // namespace

void write_sense_priors(const SenseStats& stats, const fs::path& path) {
    auto out = open_out(path);
    for (const auto& g : stats.groups) {
        for (std::size_t i = 0; i < g.senses.size(); ++i) {
            out << g.name << '\t' << g.senses[i] << '\t' << g.counts[i] << '\t'
                << (g.defined ? format_g12(g.probs[i]) : "NA") << '\n';
        }
    }
}

void write_bigrams(const BigramTable& table, const fs::path& path) {
    auto out = open_out(path);
    std::vector<std::pair<EntityId, EntityId>> ordered;
    for (const auto& [pair, count] : table.pairs) {
        if (count == 0) continue;
        ordered.emplace_back(pair.first, pair.second);
        ordered.emplace_back(pair.second, pair.first);
    }
    std::sort(ordered.begin(), ordered.end());
    for (const auto& [e1, e2] : ordered) {
        out << e1 << '\t' << e2 << '\t' << table.pair_count(e1, e2) << '\t'
            << format_g12(table.conditional(e2, e1)) << '\n';
    }
}

void write_related(const std::vector<std::pair<EntityId, double>>& ranked, const fs::path& path) {
    auto out = open_out(path);
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        out << (i + 1) << '\t' << ranked[i].first << '\t' << format_g12(ranked[i].second) << '\n';
    }
}

void write_theta(const SimplexVector& theta, const fs::path& path) {
    auto out = open_out(path);
    for (std::size_t i = 0; i < theta.classes.size(); ++i) {
        out << theta.classes[i] << '\t' << format_g12(theta.p[i]) << '\n';
    }
}

void write_mention_priors(const KnowledgeBase& kb, const fs::path& path) {
    auto out = open_out(path);
    for (const auto& [surface, cands] : kb.mentions) {
        for (const auto& c : cands) {
            out << surface << '\t' << c.entity << '\t'
                << format_g12(kb.mention_prior(surface, c.entity)) << '\n';
        }
    }
}

} // namespace entstats
