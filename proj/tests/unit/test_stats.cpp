#include <doctest.h>

#include <cmath>

#include "entstats/stats.hpp"

#include "../common/helpers.hpp"
#include "../common/oracles.hpp"

using namespace entstats;
using namespace entstats::testing;

namespace {

Corpus tagged_corpus() { return load_corpus(fixture_dir() / "corpus5.jsonl"); }

Spot labeled_spot(const std::string& doc_id, std::size_t begin, std::size_t end, EntityId label) {
    Spot s = make_spot(doc_id, begin, end, "s" + std::to_string(label), {label});
    s.predicted = label;
    return s;
}

} // namespace

TEST_CASE("sense_prior tallies labels within groups") {
    const KnowledgeBase kb = load_kb(fixture_dir() / "kbstats");
    const Corpus corpus = tagged_corpus();
    const SenseStats stats = sense_prior(corpus, derive_groups(kb.mentions));
    REQUIRE(stats.groups.size() == 3);

    SUBCASE("matches the hand tally") {
        const auto& amazon = stats.groups[0];
        CHECK(amazon.name == "amazon");
        CHECK(amazon.counts == std::vector<std::int64_t>{2, 3});
        CHECK(amazon.probs[0] == doctest::Approx(0.4).epsilon(1e-15));
        CHECK(amazon.probs[1] == doctest::Approx(0.6).epsilon(1e-15));
        const auto& jaguar = stats.groups[2];
        CHECK(jaguar.counts == std::vector<std::int64_t>{1, 2});
        CHECK(jaguar.probs[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    }
    SUBCASE("single-sense group has probability 1") {
        const auto& brazil = stats.groups[1];
        CHECK(brazil.senses == std::vector<EntityId>{5});
        CHECK(brazil.probs == std::vector<double>{1.0});
    }
    SUBCASE("defined distributions sum to 1") {
        for (const auto& g : stats.groups) {
            REQUIRE(g.defined);
            double sum = 0.0;
            for (double p : g.probs) sum += p;
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    SUBCASE("unused group is reported as undefined, not zeros") {
        std::vector<SenseGroup> groups = derive_groups(kb.mentions);
        groups.push_back({"zzz", {9}});
        const SenseStats with_idle = sense_prior(corpus, groups);
        const auto& idle = with_idle.groups.back();
        CHECK(idle.name == "zzz");
        CHECK_FALSE(idle.defined);
        CHECK(idle.probs.empty());
        CHECK(idle.counts == std::vector<std::int64_t>{0});
    }
    SUBCASE("a sense in two groups is an error") {
        std::vector<SenseGroup> groups = derive_groups(kb.mentions);
        groups.push_back({"dup", {1}});
        CHECK_THROWS_WITH_AS(sense_prior(corpus, groups), doctest::Contains("two groups"), Error);
    }
    SUBCASE("gold labels are used when predictions are absent") {
        Corpus goldonly = corpus;
        for (auto& spots : goldonly.spots) {
            for (auto& s : spots) {
                s.gold = s.predicted;
                s.predicted.reset();
            }
        }
        const SenseStats again = sense_prior(goldonly, derive_groups(kb.mentions));
        CHECK(again.groups[0].counts == stats.groups[0].counts);
    }
}

TEST_CASE("derive_groups rejects overlapping surfaces") {
    MentionTable table;
    table["a"] = {{1, 1}, {2, 1}};
    table["b"] = {{2, 1}};
    CHECK_THROWS_WITH_AS(derive_groups(table), doctest::Contains("partition"), Error);
}

TEST_CASE("entity_bigrams") {
    SUBCASE("one sentence with two entities") {
        Corpus corpus;
        corpus.documents.push_back(make_doc("d", {"sa", "sb"}));
        corpus.spots.push_back({labeled_spot("d", 0, 1, 7), labeled_spot("d", 1, 2, 9)});
        const BigramTable table = entity_bigrams(corpus);
        CHECK(table.pair_count(7, 9) == 1);
        CHECK(table.pair_count(9, 7) == 1);
        CHECK(table.unigram(7) == 1);
        CHECK(table.conditional(9, 7) == 1.0);
    }
    SUBCASE("an entity appearing twice in a sentence counts once") {
        Corpus corpus;
        corpus.documents.push_back(make_doc("d", {"sa", "sb", "sa"}));
        corpus.spots.push_back({labeled_spot("d", 0, 1, 7), labeled_spot("d", 1, 2, 9),
                                labeled_spot("d", 2, 3, 7)});
        const BigramTable table = entity_bigrams(corpus);
        CHECK(table.pair_count(7, 9) == 1);
        CHECK(table.unigram(7) == 1);
    }
    SUBCASE("fixture corpus matches the hand tally") {
        const BigramTable table = entity_bigrams(tagged_corpus());
        CHECK(table.unigram(1) == 2);
        CHECK(table.unigram(2) == 3);
        CHECK(table.unigram(5) == 3);
        CHECK(table.pair_count(2, 5) == 2);
        CHECK(table.conditional(5, 2) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
        CHECK(table.conditional(2, 5) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
        CHECK(table.conditional(4, 1) == doctest::Approx(0.5).epsilon(1e-15));
    }
    SUBCASE("symmetry and conditional range on the fixture") {
        const BigramTable table = entity_bigrams(tagged_corpus());
        for (const auto& [pair, count] : table.pairs) {
            CHECK(count == table.pair_count(pair.second, pair.first));
            CHECK(count <= std::min(table.unigram(pair.first), table.unigram(pair.second)));
            CHECK(table.conditional(pair.second, pair.first) <= 1.0);
            CHECK(table.conditional(pair.second, pair.first) >= 0.0);
        }
    }
    SUBCASE("unlabeled spots are ignored") {
        Corpus corpus;
        corpus.documents.push_back(make_doc("d", {"sa", "sb"}));
        Spot bare = make_spot("d", 0, 1, "sa", {7});
        corpus.spots.push_back({bare, labeled_spot("d", 1, 2, 9)});
        const BigramTable table = entity_bigrams(corpus);
        CHECK(table.unigram(7) == 0);
        CHECK(table.unigram(9) == 1);
    }
}

TEST_CASE("build_cooc_graph") {
    const BigramTable table = entity_bigrams(tagged_corpus());
    SUBCASE("eps = 1 filters every neighbor") {
        CHECK(build_cooc_graph(table, 2, 1.0).edges.empty());
    }
    SUBCASE("eps = 0 keeps every co-occurring entity") {
        const CoocGraph g = build_cooc_graph(table, 1, 0.0);
        REQUIRE(g.edges.size() == 2);
        CHECK(g.edges[0].entity == 4);
        CHECK(g.edges[1].entity == 5);
        // P(4|1) + P(1|4) = 1/2 + 1/2; P(5|1) + P(1|5) = 1/2 + 1/3.
        CHECK(g.edges[0].weight == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(g.edges[1].weight == doctest::Approx(0.5 + 1.0 / 3.0).epsilon(1e-12));
    }
    SUBCASE("asymmetric conditionals 0.5 and 0.25 give weight 0.75") {
        BigramTable t;
        t.unigrams[1] = 2;
        t.unigrams[2] = 4;
        t.pairs[{1, 2}] = 1;
        const CoocGraph g = build_cooc_graph(t, 1, 0.0);
        REQUIRE(g.edges.size() == 1);
        CHECK(g.edges[0].weight == doctest::Approx(0.75).epsilon(1e-15));
    }
    SUBCASE("unobserved center is an error") {
        CHECK_THROWS_WITH_AS(build_cooc_graph(table, 42, 0.0), doctest::Contains("never observed"),
                             Error);
    }
    SUBCASE("the eps filter applies to P(E|X), not the weight") {
        BigramTable t;
        t.unigrams[1] = 10;
        t.unigrams[2] = 1;
        t.pairs[{1, 2}] = 1; // P(2|1) = 0.1, P(1|2) = 1
        CHECK(build_cooc_graph(t, 1, 0.15).edges.empty());
        CHECK(build_cooc_graph(t, 1, 0.05).edges.size() == 1);
    }
}

TEST_CASE("personalized_pagerank") {
    SUBCASE("star with equal weights: all leaves tie exactly") {
        CoocGraph g;
        g.center = 10;
        g.edges = {{11, 0.5}, {12, 0.5}, {13, 0.5}, {14, 0.5}};
        const PprScores scores = personalized_pagerank(g, 0.85, 1e-12);
        for (std::size_t i = 2; i < scores.scores.size(); ++i) {
            CHECK(scores.scores[i] == scores.scores[1]); // bitwise ties
        }
        double sum = 0.0;
        for (double v : scores.scores) sum += v;
        CHECK(std::abs(sum - 1.0) < 1e-9);
    }
    SUBCASE("damping near 0 concentrates all mass on the center") {
        CoocGraph g;
        g.center = 1;
        g.edges = {{2, 1.0}, {3, 3.0}};
        const PprScores scores = personalized_pagerank(g, 1e-6, 1e-14);
        CHECK(scores.score_of(1) == doctest::Approx(1.0).epsilon(1e-5));
    }
    SUBCASE("3-node fixture matches the dense oracle to 1e-8") {
        CoocGraph g;
        g.center = 1;
        g.edges = {{2, 0.9}, {3, 0.3}};
        const PprScores scores = personalized_pagerank(g, 0.85, 1e-10);
        const std::vector<double> oracle = ppr_dense_oracle(g, 0.85, 1e-12, 100000);
        REQUIRE(oracle.size() == scores.scores.size());
        for (std::size_t i = 0; i < oracle.size(); ++i) {
            CHECK(std::abs(scores.scores[i] - oracle[i]) < 1e-8);
        }
    }
    SUBCASE("scores sum to 1 at every iteration") {
        CoocGraph g;
        g.center = 1;
        g.edges = {{2, 0.2}, {3, 1.4}, {4, 0.8}};
        int calls = 0;
        personalized_pagerank(g, 0.85, 1e-10, 10000,
                              [&](int, const std::vector<double>& p) {
                                  double sum = 0.0;
                                  for (double v : p) sum += v;
                                  CHECK(std::abs(sum - 1.0) < 1e-9);
                                  ++calls;
                              });
        CHECK(calls > 2);
    }
    SUBCASE("center with no neighbors keeps all mass") {
        CoocGraph g;
        g.center = 1;
        const PprScores scores = personalized_pagerank(g, 0.85, 1e-12);
        CHECK(scores.score_of(1) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("iteration cap reports non-convergence") {
        CoocGraph g;
        g.center = 1;
        g.edges = {{2, 1.0}};
        CHECK_THROWS_WITH_AS(personalized_pagerank(g, 0.85, 1e-12, 2),
                             doctest::Contains("convergence"), Error);
    }
    SUBCASE("bad damping is rejected") {
        CoocGraph g;
        g.center = 1;
        CHECK_THROWS_AS(personalized_pagerank(g, 1.0, 1e-8), Error);
        CHECK_THROWS_AS(personalized_pagerank(g, 0.5, -1.0), Error);
    }
}

TEST_CASE("top_related") {
    CoocGraph g;
    g.center = 1;
    g.edges = {{2, 0.5}, {3, 2.0}, {4, 0.5}};
    const PprScores scores = personalized_pagerank(g, 0.85, 1e-12);
    SUBCASE("k = 0 yields nothing") { CHECK(top_related(g, scores, 0).empty()); }
    SUBCASE("the heavier edge ranks first, validated by the oracle") {
        const auto ranked = top_related(g, scores, 1);
        REQUIRE(ranked.size() == 1);
        CHECK(ranked[0].first == 3);
        const auto oracle = ppr_dense_oracle(g, 0.85, 1e-12, 100000);
        CHECK(oracle[2] > oracle[1]); // node order: center, 2, 3, 4
    }
    SUBCASE("k beyond the node count returns all non-center nodes, ties by id") {
        const auto ranked = top_related(g, scores, 10);
        REQUIRE(ranked.size() == 3);
        CHECK(ranked[0].first == 3);
        CHECK(ranked[1].first == 2); // ties with 4, smaller id first
        CHECK(ranked[2].first == 4);
    }
}

TEST_CASE("stats writers match the frozen golden files bit-exactly") {
    const KnowledgeBase kb = load_kb(fixture_dir() / "kbstats");
    const Corpus corpus = tagged_corpus();
    TempDir dir("stats-golden");

    write_sense_priors(sense_prior(corpus, derive_groups(kb.mentions)), dir.path() / "sp.tsv");
    CHECK(read_file(dir.path() / "sp.tsv") ==
          read_file(fixture_dir() / "golden" / "sense_priors.tsv"));

    write_bigrams(entity_bigrams(corpus), dir.path() / "bg.tsv");
    CHECK(read_file(dir.path() / "bg.tsv") == read_file(fixture_dir() / "golden" / "bigrams.tsv"));

    write_mention_priors(kb, dir.path() / "mp.tsv");
    CHECK(read_file(dir.path() / "mp.tsv") ==
          read_file(fixture_dir() / "golden" / "mention_priors.tsv"));
}
