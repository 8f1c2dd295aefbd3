#include "entstats/corpus.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "entstats/rng.hpp"

namespace entstats {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::size_t Corpus::spot_count() const {
    std::size_t n = 0;
    for (const auto& list : spots) n += list.size();
    return n;
}

void Corpus::validate() const {
    if (documents.size() != spots.size()) throw Error("corpus: documents/spots size mismatch");
    for (std::size_t d = 0; d < documents.size(); ++d) {
        const Document& doc = documents[d];
        std::size_t expect = 0;
        for (const auto& sent : doc.sentence_bounds) {
            if (sent.begin != expect || sent.end <= sent.begin) {
                throw Error("corpus: document '" + doc.doc_id + "' sentence bounds do not partition");
            }
            expect = sent.end;
        }
        if (expect != doc.tokens.size()) {
            throw Error("corpus: document '" + doc.doc_id + "' sentence bounds do not cover tokens");
        }
        std::size_t prev_end = 0;
        bool first = true;
        for (const Spot& spot : spots[d]) {
            if (spot.doc_id != doc.doc_id) {
                throw Error("corpus: spot doc_id '" + spot.doc_id + "' does not match document");
            }
            if (spot.span.end > doc.tokens.size() || spot.span.begin >= spot.span.end) {
                throw Error("corpus: spot span out of range in '" + doc.doc_id + "'");
            }
            if (!first && spot.span.begin < prev_end) {
                throw Error("corpus: overlapping or unsorted spots in '" + doc.doc_id + "'");
            }
            first = false;
            prev_end = spot.span.end;
            const bool inside_one = std::any_of(
                doc.sentence_bounds.begin(), doc.sentence_bounds.end(), [&](const TokenSpan& s) {
                    return spot.span.begin >= s.begin && spot.span.end <= s.end;
                });
            if (!inside_one) {
                throw Error("corpus: spot span crosses a sentence bound in '" + doc.doc_id + "'");
            }
            if (spot.candidates.empty()) {
                throw Error("corpus: spot with empty candidate list in '" + doc.doc_id + "'");
            }
            if (!std::is_sorted(spot.candidates.begin(), spot.candidates.end()) ||
                std::adjacent_find(spot.candidates.begin(), spot.candidates.end()) !=
                    spot.candidates.end()) {
                throw Error("corpus: candidates not sorted unique in '" + doc.doc_id + "'");
            }
            for (const auto& label : {spot.gold, spot.predicted}) {
                if (label &&
                    !std::binary_search(spot.candidates.begin(), spot.candidates.end(), *label)) {
                    throw Error("corpus: label " + std::to_string(*label) +
                                " not among candidates in '" + doc.doc_id + "'");
                }
            }
        }
    }
}

Corpus load_corpus(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    Corpus corpus;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::string where = path.filename().string() + ":" + std::to_string(lineno);
        ordered_json rec;
        try {
            rec = ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw Error(where + ": " + e.what());
        }
        try {
            Document doc;
            doc.doc_id = rec.at("doc_id").get<std::string>();
            doc.tokens = rec.at("tokens").get<std::vector<std::string>>();
            for (const auto& b : rec.at("sentence_bounds")) {
                doc.sentence_bounds.push_back({b.at(0).get<std::size_t>(), b.at(1).get<std::size_t>()});
            }
            std::vector<Spot> spots;
            for (const auto& s : rec.at("spots")) {
                Spot spot;
                spot.doc_id = doc.doc_id;
                spot.span = {s.at("span").at(0).get<std::size_t>(),
                             s.at("span").at(1).get<std::size_t>()};
                spot.surface = s.at("surface").get<std::string>();
                spot.candidates = s.at("candidates").get<std::vector<EntityId>>();
                if (s.contains("gold")) spot.gold = s["gold"].get<EntityId>();
                if (s.contains("predicted")) spot.predicted = s["predicted"].get<EntityId>();
                spots.push_back(std::move(spot));
            }
            corpus.documents.push_back(std::move(doc));
            corpus.spots.push_back(std::move(spots));
        } catch (const nlohmann::json::exception& e) {
            throw Error(where + ": " + e.what());
        }
    }
    try {
        corpus.validate();
    } catch (const Error& e) {
        throw Error(path.filename().string() + ": " + e.what());
    }
    return corpus;
}

void save_corpus(const Corpus& corpus, const fs::path& path) {
    corpus.validate();
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
        const Document& doc = corpus.documents[d];
        ordered_json rec;
        rec["doc_id"] = doc.doc_id;
        rec["tokens"] = doc.tokens;
        auto bounds = ordered_json::array();
        for (const auto& s : doc.sentence_bounds) bounds.push_back({s.begin, s.end});
        rec["sentence_bounds"] = std::move(bounds);
        auto spots = ordered_json::array();
        for (const Spot& spot : corpus.spots[d]) {
            ordered_json s;
            s["span"] = {spot.span.begin, spot.span.end};
            s["surface"] = spot.surface;
            s["candidates"] = spot.candidates;
            if (spot.gold) s["gold"] = *spot.gold;
            if (spot.predicted) s["predicted"] = *spot.predicted;
            spots.push_back(std::move(s));
        }
        rec["spots"] = std::move(spots);
        out << rec.dump() << '\n';
    }
}

std::vector<Spot> spot_mentions(const Document& doc, const MentionTable& table) {
    std::vector<Spot> out;
    std::vector<std::string> lowered(doc.tokens.size());
    for (std::size_t i = 0; i < doc.tokens.size(); ++i) lowered[i] = lowercase(doc.tokens[i]);

    for (const TokenSpan& sent : doc.sentence_bounds) {
        std::size_t i = sent.begin;
        while (i < sent.end) {
            std::size_t matched = 0;
            const std::vector<MentionCandidate>* cands = nullptr;
            std::string matched_surface;
            const std::size_t max_len = std::min(kMaxSurfaceTokens, sent.end - i);
            std::string key;
            for (std::size_t len = 1; len <= max_len; ++len) {
                if (len > 1) key.push_back(' ');
                key += lowered[i + len - 1];
                auto it = table.find(key);
                if (it != table.end()) {
                    matched = len;
                    cands = &it->second;
                    matched_surface = key;
                }
            }
            if (matched > 0) {
                Spot spot;
                spot.doc_id = doc.doc_id;
                spot.span = {i, i + matched};
                spot.surface = matched_surface;
                for (const auto& c : *cands) spot.candidates.push_back(c.entity);
                out.push_back(std::move(spot));
                i += matched;
            } else {
                ++i;
            }
        }
    }
    return out;
}

TokenBag context_window(const Document& doc, const Spot& spot, std::size_t k) {
    if (spot.span.end > doc.tokens.size() || spot.span.begin >= spot.span.end) {
        throw Error("context_window: span out of range");
    }
    const std::size_t lo = spot.span.begin > k ? spot.span.begin - k : 0;
    const std::size_t hi = std::min(doc.tokens.size(), spot.span.end + k);
    TokenBag bag;
    for (std::size_t i = lo; i < hi; ++i) ++bag[lowercase(doc.tokens[i])];
    return bag;
}

namespace {

struct ClassGenerator {
    std::vector<std::string> surfaces;        // normalized surface forms with this class
    std::vector<double> surface_weights;      // prior counts; uniform if all zero
    std::vector<std::string> context_tokens;  // first_paragraph support
    std::vector<double> context_weights;      // first_paragraph counts
    Rng rng;
};

std::string zero_pad(std::size_t v, int width) {
    std::string s = std::to_string(v);
    while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
    return s;
}

} // namespace

Corpus synth_corpus(const KnowledgeBase& kb, const SimplexVector& theta, std::size_t n_spots,
                    std::uint64_t seed) {
    theta.validate();

    std::vector<ClassGenerator> gens;
    gens.reserve(theta.classes.size());
    for (std::size_t c = 0; c < theta.classes.size(); ++c) {
        const EntityId y = theta.classes[c];
        ClassGenerator gen{{}, {}, {}, {}, Rng(derive_seed(seed, "class", static_cast<std::uint64_t>(y)))};
        for (const auto& [surface, cands] : kb.mentions) {
            for (const auto& cand : cands) {
                if (cand.entity == y) {
                    gen.surfaces.push_back(surface);
                    gen.surface_weights.push_back(static_cast<double>(cand.prior_count));
                }
            }
        }
        if (theta.p[c] > 0.0 && gen.surfaces.empty()) {
            throw Error("synth_corpus: entity " + std::to_string(y) +
                        " has positive weight but no surface form");
        }
        const bool all_zero =
            std::all_of(gen.surface_weights.begin(), gen.surface_weights.end(),
                        [](double w) { return w == 0.0; });
        if (all_zero) {
            std::fill(gen.surface_weights.begin(), gen.surface_weights.end(), 1.0);
        }
        if (kb.has_entity(y)) {
            for (const auto& [token, count] : kb.entity(y).first_paragraph) {
                gen.context_tokens.push_back(token);
                gen.context_weights.push_back(static_cast<double>(count));
            }
        }
        gens.push_back(std::move(gen));
    }

    Rng label_rng(derive_seed(seed, "labels"));
    Corpus corpus;
    corpus.documents.reserve(n_spots);
    corpus.spots.reserve(n_spots);

    for (std::size_t i = 0; i < n_spots; ++i) {
        // Inverse CDF over theta in class order. The fallback walks back
        // to a positive-mass class in case rounding left acc below 1.
        const double u = label_rng.uniform();
        std::size_t cls = theta.classes.size() - 1;
        double acc = 0.0;
        for (std::size_t c = 0; c < theta.classes.size(); ++c) {
            acc += theta.p[c];
            if (u < acc) {
                cls = c;
                break;
            }
        }
        while (cls > 0 && theta.p[cls] == 0.0) --cls;
        ClassGenerator& gen = gens[cls];
        const std::string& surface = gen.surfaces[sample_categorical(gen.rng, gen.surface_weights)];
        const std::vector<std::string> surface_tokens = split_tokens(surface);

        std::vector<std::string> left, right;
        if (!gen.context_tokens.empty()) {
            for (std::size_t j = 0; j < kSynthContextPerSide; ++j) {
                left.push_back(gen.context_tokens[sample_categorical(gen.rng, gen.context_weights)]);
            }
            for (std::size_t j = 0; j < kSynthContextPerSide; ++j) {
                right.push_back(gen.context_tokens[sample_categorical(gen.rng, gen.context_weights)]);
            }
        }

        Document doc;
        doc.doc_id = "synth-" + zero_pad(i, 6);
        doc.tokens = left;
        doc.tokens.insert(doc.tokens.end(), surface_tokens.begin(), surface_tokens.end());
        doc.tokens.insert(doc.tokens.end(), right.begin(), right.end());
        doc.sentence_bounds = {{0, doc.tokens.size()}};

        Spot spot;
        spot.doc_id = doc.doc_id;
        spot.span = {left.size(), left.size() + surface_tokens.size()};
        spot.surface = surface;
        for (const auto& cand : kb.mentions.at(surface)) spot.candidates.push_back(cand.entity);
        spot.gold = theta.classes[cls];

        corpus.documents.push_back(std::move(doc));
        corpus.spots.push_back({std::move(spot)});
    }
    return corpus;
}

} // namespace entstats
