#include "entstats/kb.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace entstats {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

const TokenBag& entity_text(const Entity& e, TextSource src) {
    switch (src) {
    case TextSource::first_paragraph: return e.first_paragraph;
    case TextSource::full_text: return e.full_text;
    case TextSource::anchor_text: return e.anchor_text;
    case TextSource::anchor_context: return e.anchor_context;
    }
    throw Error("entity_text: bad source");
}

const std::vector<EntityId>& InlinkIndex::of(EntityId e) const {
    static const std::vector<EntityId> kEmpty;
    auto it = inlinks.find(e);
    return it == inlinks.end() ? kEmpty : it->second;
}

const Entity& KnowledgeBase::entity(EntityId e) const {
    auto it = entities.find(e);
    if (it == entities.end()) throw Error("unknown entity id " + std::to_string(e));
    return it->second;
}

std::optional<double> KnowledgeBase::relatedness(EntityId a, EntityId b) const {
    entity(a);
    entity(b);
    const auto& ga = inlinks.of(a);
    const auto& gb = inlinks.of(b);
    if (ga.empty() || gb.empty()) return std::nullopt;

    std::size_t inter = 0;
    for (std::size_t i = 0, j = 0; i < ga.size() && j < gb.size();) {
        if (ga[i] < gb[j]) ++i;
        else if (gb[j] < ga[i]) ++j;
        else { ++inter; ++i; ++j; }
    }
    if (inter == 0) return std::nullopt;

    const double mn = static_cast<double>(std::min(ga.size(), gb.size()));
    const double mx = static_cast<double>(std::max(ga.size(), gb.size()));
    const double denom = std::log(static_cast<double>(inlinks.total_pages)) - std::log(mn);
    if (denom <= 0.0) return std::nullopt;
    return (std::log(static_cast<double>(inter)) - std::log(mx)) / denom;
}

double KnowledgeBase::coherence(EntityId a, EntityId b) const {
    const auto r = relatedness(a, b);
    if (!r) return 0.0;
    return std::clamp(1.0 + *r, 0.0, 1.0);
}

double KnowledgeBase::mention_prior(const std::string& surface, EntityId e) const {
    auto it = mentions.find(surface);
    if (it == mentions.end()) throw Error("unknown surface '" + surface + "'");
    std::int64_t total = 0;
    std::int64_t mine = 0;
    for (const auto& cand : it->second) {
        total += cand.prior_count;
        if (cand.entity == e) mine = cand.prior_count;
    }
    return static_cast<double>(mine) / static_cast<double>(total);
}

std::vector<EntityId> KnowledgeBase::candidate_universe() const {
    std::set<EntityId> ids;
    for (const auto& [surface, cands] : mentions) {
        for (const auto& c : cands) ids.insert(c.entity);
    }
    return {ids.begin(), ids.end()};
}

void KnowledgeBase::validate() const {
    for (const auto& [id, ent] : entities) {
        if (ent.id != id) throw Error("entity id mismatch for " + std::to_string(id));
    }
    std::size_t max_inlinks = 0;
    for (const auto& [dst, srcs] : inlinks.inlinks) {
        if (!has_entity(dst)) throw Error("inlink target " + std::to_string(dst) + " not in catalog");
        for (EntityId src : srcs) {
            if (!has_entity(src)) throw Error("inlink source " + std::to_string(src) + " not in catalog");
        }
        if (!std::is_sorted(srcs.begin(), srcs.end())) throw Error("inlink set not sorted");
        max_inlinks = std::max(max_inlinks, srcs.size());
    }
    if (inlinks.total_pages < static_cast<std::int64_t>(max_inlinks)) {
        throw Error("total_pages smaller than an inlink set");
    }
    for (const auto& [surface, cands] : mentions) {
        if (cands.empty()) throw Error("surface '" + surface + "' has no candidates");
        std::int64_t total = 0;
        EntityId prev = -1;
        for (const auto& c : cands) {
            if (!has_entity(c.entity)) {
                throw Error("surface '" + surface + "' references unknown entity " +
                            std::to_string(c.entity));
            }
            if (c.prior_count < 0) throw Error("negative prior count for '" + surface + "'");
            if (c.entity <= prev) throw Error("candidates of '" + surface + "' not sorted by id");
            prev = c.entity;
            total += c.prior_count;
        }
        if (total == 0) throw Error("surface '" + surface + "' has all-zero prior counts");
    }
}

namespace {

std::string location(const fs::path& file, std::size_t line) {
    return file.filename().string() + ":" + std::to_string(line);
}

std::ifstream open_or_throw(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw Error("cannot open " + file.string());
    return in;
}

TokenBag bag_field(const ordered_json& rec, const char* key, const fs::path& file, std::size_t line) {
    if (!rec.contains(key) || !rec[key].is_string()) {
        throw Error(location(file, line) + ": missing string field '" + std::string(key) + "'");
    }
    return make_bag(tokenize(rec[key].get<std::string>()));
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == '\t') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::int64_t parse_int(const std::string& s, const fs::path& file, std::size_t line) {
    try {
        std::size_t pos = 0;
        std::int64_t v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(location(file, line) + ": not an integer: '" + s + "'");
    }
}

} // namespace

KnowledgeBase load_kb(const fs::path& dir) {
    KnowledgeBase kb;

    const fs::path entities_file = dir / "entities.jsonl";
    {
        std::ifstream in = open_or_throw(entities_file);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            ordered_json rec;
            try {
                rec = ordered_json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw Error(location(entities_file, lineno) + ": " + e.what());
            }
            if (!rec.contains("id") || !rec["id"].is_number_integer()) {
                throw Error(location(entities_file, lineno) + ": missing integer field 'id'");
            }
            Entity ent;
            ent.id = rec["id"].get<EntityId>();
            if (!rec.contains("title") || !rec["title"].is_string()) {
                throw Error(location(entities_file, lineno) + ": missing string field 'title'");
            }
            ent.title = rec["title"].get<std::string>();
            ent.first_paragraph = bag_field(rec, "first_paragraph", entities_file, lineno);
            ent.full_text = bag_field(rec, "full_text", entities_file, lineno);
            ent.anchor_text = bag_field(rec, "anchor_text", entities_file, lineno);
            ent.anchor_context = bag_field(rec, "anchor_context", entities_file, lineno);
            if (!kb.entities.emplace(ent.id, std::move(ent)).second) {
                throw Error(location(entities_file, lineno) + ": duplicate entity id " +
                            std::to_string(rec["id"].get<EntityId>()));
            }
        }
    }

    const fs::path links_file = dir / "links.tsv";
    {
        std::ifstream in = open_or_throw(links_file);
        std::string line;
        std::size_t lineno = 0;
        std::map<EntityId, std::set<EntityId>> sets;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            auto cols = split_tabs(line);
            if (cols.size() != 2) {
                throw Error(location(links_file, lineno) + ": expected 'src<TAB>dst'");
            }
            const EntityId src = parse_int(cols[0], links_file, lineno);
            const EntityId dst = parse_int(cols[1], links_file, lineno);
            if (!kb.has_entity(src)) {
                throw Error(location(links_file, lineno) + ": unknown source entity " +
                            std::to_string(src));
            }
            if (!kb.has_entity(dst)) {
                throw Error(location(links_file, lineno) + ": unknown target entity " +
                            std::to_string(dst));
            }
            sets[dst].insert(src);
        }
        for (auto& [dst, srcs] : sets) {
            kb.inlinks.inlinks[dst] = {srcs.begin(), srcs.end()};
        }
    }

    const fs::path mentions_file = dir / "mentions.tsv";
    {
        std::ifstream in = open_or_throw(mentions_file);
        std::string line;
        std::size_t lineno = 0;
        std::map<std::string, std::map<EntityId, std::int64_t>> table;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            auto cols = split_tabs(line);
            if (cols.size() != 3) {
                throw Error(location(mentions_file, lineno) +
                            ": expected 'surface<TAB>entity_id<TAB>prior_count'");
            }
            const std::string surface = join_tokens(tokenize(cols[0]));
            if (surface.empty()) {
                throw Error(location(mentions_file, lineno) + ": empty surface");
            }
            const EntityId ent = parse_int(cols[1], mentions_file, lineno);
            const std::int64_t count = parse_int(cols[2], mentions_file, lineno);
            if (!kb.has_entity(ent)) {
                throw Error(location(mentions_file, lineno) + ": unknown entity " +
                            std::to_string(ent));
            }
            if (count < 0) {
                throw Error(location(mentions_file, lineno) + ": negative prior count");
            }
            table[surface][ent] += count;
        }
        for (const auto& [surface, cands] : table) {
            auto& list = kb.mentions[surface];
            for (const auto& [ent, count] : cands) list.push_back({ent, count});
        }
    }

    kb.inlinks.total_pages = static_cast<std::int64_t>(kb.entities.size());
    const fs::path meta_file = dir / "kb.meta";
    if (fs::exists(meta_file)) {
        std::ifstream in = open_or_throw(meta_file);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line[0] == '#') continue;
            auto eq = line.find('=');
            if (eq == std::string::npos) {
                throw Error(location(meta_file, lineno) + ": expected key=value");
            }
            const std::string key = line.substr(0, eq);
            const std::string value = line.substr(eq + 1);
            if (key == "total_pages") {
                kb.inlinks.total_pages = parse_int(value, meta_file, lineno);
            } else {
                throw Error(location(meta_file, lineno) + ": unknown key '" + key + "'");
            }
        }
    }

    kb.validate();
    return kb;
}

void save_kb(const KnowledgeBase& kb, const fs::path& dir) {
    fs::create_directories(dir);

    {
        std::ofstream out(dir / "entities.jsonl");
        if (!out) throw Error("cannot write " + (dir / "entities.jsonl").string());
        for (const auto& [id, ent] : kb.entities) {
            ordered_json rec;
            rec["id"] = ent.id;
            rec["title"] = ent.title;
            rec["first_paragraph"] = join_tokens(bag_to_tokens(ent.first_paragraph));
            rec["full_text"] = join_tokens(bag_to_tokens(ent.full_text));
            rec["anchor_text"] = join_tokens(bag_to_tokens(ent.anchor_text));
            rec["anchor_context"] = join_tokens(bag_to_tokens(ent.anchor_context));
            out << rec.dump() << '\n';
        }
    }
    {
        std::ofstream out(dir / "links.tsv");
        std::vector<std::pair<EntityId, EntityId>> edges; // (src, dst)
        for (const auto& [dst, srcs] : kb.inlinks.inlinks) {
            for (EntityId src : srcs) edges.emplace_back(src, dst);
        }
        std::sort(edges.begin(), edges.end());
        for (const auto& [src, dst] : edges) out << src << '\t' << dst << '\n';
    }
    {
        std::ofstream out(dir / "mentions.tsv");
        for (const auto& [surface, cands] : kb.mentions) {
            for (const auto& c : cands) {
                out << surface << '\t' << c.entity << '\t' << c.prior_count << '\n';
            }
        }
    }
    {
        std::ofstream out(dir / "kb.meta");
        out << "total_pages=" << kb.inlinks.total_pages << '\n';
    }
}

} // namespace entstats
