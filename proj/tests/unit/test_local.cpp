#include <doctest.h>

#include <cmath>
#include <sstream>

#include "entstats/local.hpp"

#include "../common/helpers.hpp"

using namespace entstats;
using namespace entstats::testing;

TEST_CASE("idf_table") {
    // kb3 full texts: N = 3; "amazon" appears in all three? No: in 1 and 2.
    const KnowledgeBase kb = load_kb(fixture_dir() / "kb3");
    const IdfTable idf = idf_table(kb);
    SUBCASE("term in every entity has idf 1") {
        // No term is in all three kb3 entities; build a direct case.
        KnowledgeBase all;
        for (EntityId i = 1; i <= 3; ++i) {
            all.entities.emplace(i, make_entity(i, "e", "", "shared"));
            all.mentions["s" + std::to_string(i)].push_back({i, 1});
        }
        all.inlinks.total_pages = 3;
        CHECK(idf_table(all).at("shared") == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("unseen term gets ln(1 + N) + 1") {
        CHECK(idf.at("zzz") == doctest::Approx(std::log(4.0) + 1.0).epsilon(1e-15));
    }
    SUBCASE("N = 3, df = 1") {
        // "river" appears only in entity 2's full text.
        CHECK(idf.at("river") == doctest::Approx(std::log(2.0) + 1.0).epsilon(1e-15));
        CHECK(idf.at("river") == doctest::Approx(1.6931).epsilon(1e-4));
    }
}

TEST_CASE("similarity") {
    const TokenBag x = make_bag({"x"});
    const TokenBag xy = make_bag({"x", "y"});
    const TokenBag xx = make_bag({"x", "x"});
    const TokenBag z = make_bag({"z"});
    const TokenBag empty;
    IdfTable unit_idf;
    unit_idf.default_idf = 1.0;

    SUBCASE("identical nonempty bags have jaccard 1") {
        CHECK(similarity(xy, xy, SimilarityKind::jaccard) == 1.0);
    }
    SUBCASE("disjoint bags score 0 under every kind") {
        CHECK(similarity(xy, z, SimilarityKind::count_dot) == 0.0);
        CHECK(similarity(xy, z, SimilarityKind::tfidf_cosine, &unit_idf) == 0.0);
        CHECK(similarity(xy, z, SimilarityKind::jaccard) == 0.0);
    }
    SUBCASE("count dot product uses counts") {
        CHECK(similarity(xy, xx, SimilarityKind::count_dot) == 2.0);
    }
    SUBCASE("zero vectors give cosine 0") {
        CHECK(similarity(empty, xy, SimilarityKind::tfidf_cosine, &unit_idf) == 0.0);
        CHECK(similarity(empty, empty, SimilarityKind::jaccard) == 0.0);
    }
    SUBCASE("cosine of identical bags is 1") {
        CHECK(similarity(xy, xy, SimilarityKind::tfidf_cosine, &unit_idf) ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("cosine needs the idf table") {
        CHECK_THROWS_AS(similarity(x, x, SimilarityKind::tfidf_cosine, nullptr), Error);
    }
    SUBCASE("jaccard and cosine stay in [0, 1] on random bags") {
        Rng rng(11);
        const std::vector<std::string> vocab{"a", "b", "c", "d", "e", "f"};
        for (int t = 0; t < 300; ++t) {
            std::vector<std::string> ta, tb;
            for (std::size_t i = rng.below(6); i > 0; --i) ta.push_back(vocab[rng.below(6)]);
            for (std::size_t i = rng.below(6); i > 0; --i) tb.push_back(vocab[rng.below(6)]);
            const TokenBag a = make_bag(ta), b = make_bag(tb);
            for (auto kind : {SimilarityKind::tfidf_cosine, SimilarityKind::jaccard}) {
                const double v = similarity(a, b, kind, &unit_idf);
                CHECK(v >= 0.0);
                CHECK(v <= 1.0 + 1e-12);
            }
            CHECK(similarity(a, b, SimilarityKind::count_dot) >= 0.0);
        }
    }
}

TEST_CASE("extract_features") {
    const KnowledgeBase kb = load_kb(fixture_dir() / "kbstats");
    const FeatureExtractor fx(kb, 2);
    const Corpus corpus = load_corpus(fixture_dir() / "corpus5.jsonl");
    const Document& d1 = corpus.documents[0];
    const Spot& amazon = corpus.spots[0][0];

    SUBCASE("matches the frozen golden file bit-exactly") {
        std::istringstream golden(read_file(fixture_dir() / "golden" / "features.tsv"));
        std::string line;
        for (EntityId cand : {1, 2}) {
            REQUIRE(std::getline(golden, line));
            std::string produced = "d1:0:" + std::to_string(cand);
            const LocalFeatureVector f = fx.extract(d1, amazon, cand);
            for (double v : f) produced += "\t" + format_g12(v);
            CHECK(produced == line);
        }
    }
    SUBCASE("is a pure function: identical calls are bitwise identical") {
        CHECK(fx.extract(d1, amazon, 1) == fx.extract(d1, amazon, 1));
    }
    SUBCASE("candidate with all-empty text sources has zero similarity features") {
        KnowledgeBase bare;
        bare.entities.emplace(1, make_entity(1, "empty one"));
        bare.entities.emplace(2, make_entity(2, "other"));
        bare.mentions["thing"] = {{1, 3}, {2, 1}};
        bare.inlinks.total_pages = 2;
        const FeatureExtractor bfx(bare, 5);
        const Document doc = make_doc("d", {"thing", "happened"});
        const Spot spot = make_spot("d", 0, 1, "thing", {1, 2});
        const LocalFeatureVector f = bfx.extract(doc, spot, 1);
        for (std::size_t i = 0; i < kPriorFeature; ++i) CHECK(f[i] == 0.0);
        CHECK(f[kPriorFeature] == doctest::Approx(0.75).epsilon(1e-15));
    }
    SUBCASE("context equal to first_paragraph gives jaccard 1 on that source") {
        KnowledgeBase tiny;
        tiny.entities.emplace(1, make_entity(1, "t", "alpha beta"));
        tiny.mentions["alpha"] = {{1, 1}};
        tiny.inlinks.total_pages = 1;
        const FeatureExtractor tfx(tiny, 1);
        const Document doc = make_doc("d", {"alpha", "beta"});
        const Spot spot = make_spot("d", 0, 1, "alpha", {1});
        CHECK(tfx.extract(doc, spot, 1)[2] == 1.0); // first_paragraph jaccard
    }
    SUBCASE("candidate outside the spot's list throws") {
        CHECK_THROWS_AS(fx.extract(d1, amazon, 5), Error);
    }
}

namespace {

// Two entities share one surface; all text sources empty, so only the
// prior feature separates them. Gold is always the higher-prior one.
struct SeparableFixture {
    KnowledgeBase kb;
    Corpus corpus;

    SeparableFixture() {
        kb.entities.emplace(1, make_entity(1, "low"));
        kb.entities.emplace(2, make_entity(2, "high"));
        kb.mentions["it"] = {{1, 1}, {2, 3}};
        kb.inlinks.total_pages = 2;
        for (int i = 0; i < 4; ++i) {
            Document doc = make_doc("d" + std::to_string(i), {"it", "was", "seen"});
            Spot spot = make_spot(doc.doc_id, 0, 1, "it", {1, 2});
            spot.gold = 2;
            corpus.documents.push_back(doc);
            corpus.spots.push_back({spot});
        }
    }
};

} // namespace

TEST_CASE("train_weights") {
    SUBCASE("zero epochs returns the zero vector") {
        const SeparableFixture f;
        const FeatureExtractor fx(f.kb, 25);
        TrainConfig cfg;
        cfg.epochs = 0;
        CHECK(train_weights(f.corpus, fx, cfg) == WeightVector{});
    }
    SUBCASE("deterministic under the same seed and config") {
        const SeparableFixture f;
        const FeatureExtractor fx(f.kb, 25);
        TrainConfig cfg;
        cfg.epochs = 5;
        cfg.seed = 31;
        CHECK(train_weights(f.corpus, fx, cfg) == train_weights(f.corpus, fx, cfg));
    }
    SUBCASE("linearly separable fixture reaches 100% training accuracy") {
        const SeparableFixture f;
        const FeatureExtractor fx(f.kb, 25);
        TrainConfig cfg;
        cfg.epochs = 20;
        const WeightVector w = train_weights(f.corpus, fx, cfg);
        for (std::size_t d = 0; d < f.corpus.documents.size(); ++d) {
            std::vector<Spot> spots = f.corpus.spots[d];
            disambiguate_local(fx, w, f.corpus.documents[d], spots);
            for (const Spot& s : spots) CHECK(s.predicted == s.gold);
        }
    }
    SUBCASE("degenerate training set without a multi-candidate spot") {
        KnowledgeBase kb;
        kb.entities.emplace(1, make_entity(1, "only"));
        kb.mentions["one"] = {{1, 1}};
        kb.inlinks.total_pages = 1;
        Corpus corpus;
        corpus.documents.push_back(make_doc("d", {"one"}));
        Spot spot = make_spot("d", 0, 1, "one", {1});
        spot.gold = 1;
        corpus.spots.push_back({spot});
        const FeatureExtractor fx(kb, 25);
        CHECK_THROWS_WITH_AS(train_weights(corpus, fx, {}), doctest::Contains("two or more"),
                             Error);
    }
    SUBCASE("spot without gold is rejected") {
        SeparableFixture f;
        f.corpus.spots[0][0].gold.reset();
        const FeatureExtractor fx(f.kb, 25);
        CHECK_THROWS_WITH_AS(train_weights(f.corpus, fx, {}), doctest::Contains("gold"), Error);
    }
    SUBCASE("one hinge update never increases the violated pair's loss") {
        const KnowledgeBase kb = load_kb(fixture_dir() / "kbstats");
        const FeatureExtractor fx(kb, 2);
        const Corpus corpus = load_corpus(fixture_dir() / "corpus5.jsonl");
        const LocalFeatureVector fg = fx.extract(corpus.documents[0], corpus.spots[0][0], 1);
        const LocalFeatureVector fo = fx.extract(corpus.documents[0], corpus.spots[0][0], 2);
        WeightVector w{}; // zero: the pair is violated (0 < margin)
        const double margin = 1.0, lr = 0.01;
        const double loss_before = margin - dot(w, fg) + dot(w, fo);
        REQUIRE(loss_before > 0.0);
        for (std::size_t i = 0; i < kFeatureCount; ++i) w[i] += lr * (fg[i] - fo[i]);
        const double loss_after = margin - dot(w, fg) + dot(w, fo);
        CHECK(loss_after <= loss_before);
    }
}

TEST_CASE("disambiguate_local") {
    const KnowledgeBase kb = load_kb(fixture_dir() / "kbstats");
    const FeatureExtractor fx(kb, 2);
    const Corpus corpus = load_corpus(fixture_dir() / "corpus5.jsonl");

    SUBCASE("single-candidate spot resolves regardless of weights") {
        std::vector<Spot> spots = corpus.spots[0]; // d1: amazon, brazil
        WeightVector w{};
        w[0] = -5.0;
        disambiguate_local(fx, w, corpus.documents[0], spots);
        CHECK(spots[1].predicted == 5);
    }
    SUBCASE("prior-only weight vector picks the highest-prior candidate") {
        WeightVector w{};
        w[kPriorFeature] = 1.0;
        for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
            std::vector<Spot> spots = corpus.spots[d];
            disambiguate_local(fx, w, corpus.documents[d], spots);
            for (const Spot& s : spots) {
                EntityId best = s.candidates.front();
                for (EntityId cand : s.candidates) {
                    if (kb.mention_prior(s.surface, cand) > kb.mention_prior(s.surface, best)) {
                        best = cand;
                    }
                }
                CHECK(s.predicted == best);
            }
        }
    }
    SUBCASE("matches a brute-force score comparison with a trained w") {
        TrainConfig cfg;
        cfg.epochs = 3;
        Corpus labeled = corpus;
        for (auto& spots : labeled.spots) {
            for (auto& s : spots) s.gold = s.predicted;
        }
        const WeightVector w = train_weights(labeled, fx, cfg);
        for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
            std::vector<Spot> spots = corpus.spots[d];
            disambiguate_local(fx, w, corpus.documents[d], spots);
            for (const Spot& s : spots) {
                EntityId best = s.candidates.front();
                double best_score = dot(w, fx.extract(corpus.documents[d], s, best));
                for (EntityId cand : s.candidates) {
                    const double score = dot(w, fx.extract(corpus.documents[d], s, cand));
                    if (score > best_score) {
                        best_score = score;
                        best = cand;
                    }
                }
                CHECK(s.predicted == best);
            }
        }
    }
    SUBCASE("argmax is invariant under positive rescaling of w") {
        WeightVector w{};
        w[1] = 0.3;
        w[4] = 1.1;
        w[kPriorFeature] = 0.5;
        WeightVector scaled = w;
        for (double& v : scaled) v *= 3.7;
        for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
            std::vector<Spot> a = corpus.spots[d], b = corpus.spots[d];
            disambiguate_local(fx, w, corpus.documents[d], a);
            disambiguate_local(fx, scaled, corpus.documents[d], b);
            CHECK(a == b);
        }
    }
    SUBCASE("ties break to the smallest entity id") {
        std::vector<Spot> spots = {corpus.spots[0][0]};
        const WeightVector w{}; // all scores 0
        disambiguate_local(fx, w, corpus.documents[0], spots);
        CHECK(spots[0].predicted == 1);
    }
}

TEST_CASE("weights file round trip") {
    WeightVector w{};
    for (std::size_t i = 0; i < kFeatureCount; ++i) w[i] = 0.1 * static_cast<double>(i) - 0.3;
    w[3] = 1.0 / 3.0;
    TempDir dir("weights");
    save_weights(w, dir.path() / "w.txt");
    CHECK(load_weights(dir.path() / "w.txt") == w);
    SUBCASE("wrong line count is rejected") {
        write_file(dir.path() / "short.txt", "0.5\n1\n");
        CHECK_THROWS_WITH_AS(load_weights(dir.path() / "short.txt"),
                             doctest::Contains("expected 13"), Error);
    }
}
