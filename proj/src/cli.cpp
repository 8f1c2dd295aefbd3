#include "entstats/cli.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "entstats/collective.hpp"
#include "entstats/corpus.hpp"
#include "entstats/kb.hpp"
#include "entstats/local.hpp"
#include "entstats/ratio.hpp"
#include "entstats/rng.hpp"
#include "entstats/simplex.hpp"
#include "entstats/stats.hpp"

namespace entstats::cli {

namespace fs = std::filesystem;

namespace {

struct RunConfig {
    std::string kb_path;
    std::string corpus_path;
    std::string weights_path;
    std::string out_dir = ".";
    std::string labeled_path;
    std::string unlabeled_path;
    std::string eval_path;
    std::string groups_path;
    std::vector<std::string> theta_parts; // id:prob entries, comma- or space-separated
    std::string synth_name = "synth.jsonl";
    std::string solver = "local";
    std::string dump_dir; // when set, tag writes per-document problem TSVs here
    std::uint64_t seed = 42;
    std::size_t window_k = 25;
    int epochs = 20;
    double learning_rate = 0.1;
    double margin = 1.0;
    int restarts = 2;
    double mmd_tolerance = 1e-12;
    int mmd_iterations = 10000;
    double eps = 0.01;
    double damping = 0.85;
    double ppr_tolerance = 1e-8;
    int ppr_cap = 10000;
    EntityId center = -1;
    std::size_t n_spots = 1000;
    std::size_t topk = 10;
    int threads = 1;
};

void require_field(bool ok, const std::string& field, const std::string& why) {
    if (!ok) throw Error(field + ": " + why);
}

fs::path existing_path(const std::string& value, const std::string& field) {
    require_field(!value.empty(), field, "required");
    require_field(fs::exists(value), field, "no such path '" + value + "'");
    return value;
}

void check_ranges(const RunConfig& cfg) {
    require_field(cfg.epochs >= 0, "epochs", "must be nonnegative");
    require_field(cfg.learning_rate > 0.0, "rate", "must be positive");
    require_field(cfg.margin > 0.0, "margin", "must be positive");
    require_field(cfg.restarts >= 0, "restarts", "must be nonnegative");
    require_field(cfg.mmd_tolerance > 0.0, "mmd-tol", "must be positive");
    require_field(cfg.mmd_iterations > 0, "mmd-iters", "must be positive");
    require_field(cfg.eps >= 0.0 && cfg.eps <= 1.0, "eps", "must be in [0, 1]");
    require_field(cfg.damping > 0.0 && cfg.damping < 1.0, "damping", "must be in (0, 1)");
    require_field(cfg.ppr_tolerance > 0.0, "ppr-tol", "must be positive");
    require_field(cfg.ppr_cap > 0, "ppr-cap", "must be positive");
    require_field(cfg.threads >= 1, "threads", "must be at least 1");
    require_field(cfg.solver == "local" || cfg.solver == "hillclimb" || cfg.solver == "lp",
                  "solver", "must be local, hillclimb, or lp");
}

fs::path out_file(const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.out_dir);
    return fs::path(cfg.out_dir) / name;
}

SimplexVector parse_theta(const std::vector<std::string>& parts) {
    std::string joined;
    for (const auto& part : parts) {
        if (!joined.empty()) joined.push_back(',');
        joined += part;
    }
    require_field(!joined.empty(), "theta", "required (format id:prob,id:prob,...)");
    std::map<EntityId, double> entries;
    std::size_t start = 0;
    while (start <= joined.size()) {
        std::size_t comma = joined.find(',', start);
        if (comma == std::string::npos) comma = joined.size();
        const std::string part = joined.substr(start, comma - start);
        const auto colon = part.find(':');
        require_field(colon != std::string::npos, "theta", "bad component '" + part + "'");
        try {
            const EntityId id = std::stoll(part.substr(0, colon));
            const double p = std::stod(part.substr(colon + 1));
            require_field(entries.emplace(id, p).second, "theta",
                          "duplicate class " + std::to_string(id));
        } catch (const Error&) {
            throw;
        } catch (const std::exception&) {
            throw Error("theta: bad component '" + part + "'");
        }
        start = comma + 1;
    }
    std::vector<EntityId> classes;
    std::vector<double> p;
    for (const auto& [id, prob] : entries) {
        classes.push_back(id);
        p.push_back(prob);
    }
    try {
        return make_simplex(std::move(classes), std::move(p));
    } catch (const Error& e) {
        throw Error(std::string("theta: ") + e.what());
    }
}

// Deterministic worker pool: item i's result lands in slot i no matter
// which worker ran it.
void parallel_for(std::size_t n_items, int threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || n_items <= 1) {
        for (std::size_t i = 0; i < n_items; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const int n_workers = std::min<int>(threads, static_cast<int>(n_items));
    for (int t = 0; t < n_workers; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n_items) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

int cmd_ingest(const RunConfig& cfg) {
    const KnowledgeBase kb = load_kb(existing_path(cfg.kb_path, "kb"));
    std::size_t link_count = 0;
    for (const auto& [dst, srcs] : kb.inlinks.inlinks) link_count += srcs.size();
    std::size_t mention_rows = 0;
    for (const auto& [surface, cands] : kb.mentions) mention_rows += cands.size();
    std::cout << "entities=" << kb.entities.size() << "\tlinks=" << link_count
              << "\tsurfaces=" << kb.mentions.size() << "\tmentions=" << mention_rows
              << "\ttotal_pages=" << kb.inlinks.total_pages << '\n';
    return 0;
}

int cmd_synth(const RunConfig& cfg) {
    const KnowledgeBase kb = load_kb(existing_path(cfg.kb_path, "kb"));
    const SimplexVector theta = parse_theta(cfg.theta_parts);
    require_field(cfg.n_spots >= 1, "spots", "must be at least 1");
    const Corpus corpus = synth_corpus(kb, theta, cfg.n_spots, derive_seed(cfg.seed, "synth"));
    save_corpus(corpus, out_file(cfg, cfg.synth_name));
    return 0;
}

int cmd_train(const RunConfig& cfg) {
    const KnowledgeBase kb = load_kb(existing_path(cfg.kb_path, "kb"));
    const Corpus corpus = load_corpus(existing_path(cfg.corpus_path, "corpus"));
    const FeatureExtractor fx(kb, cfg.window_k);
    TrainConfig tc;
    tc.epochs = cfg.epochs;
    tc.learning_rate = cfg.learning_rate;
    tc.margin = cfg.margin;
    tc.seed = derive_seed(cfg.seed, "train");
    tc.shuffle = true;
    const WeightVector w = train_weights(corpus, fx, tc);
    save_weights(w, out_file(cfg, "weights.txt"));
    return 0;
}

// Returns a solver report line for the diagnostic stream, empty for the
// local solver.
std::string tag_document(const RunConfig& cfg, const FeatureExtractor& fx, const WeightVector& w,
                         const Document& doc, std::vector<Spot>& spots, std::size_t doc_index) {
    if (spots.empty()) return {};
    if (cfg.solver == "local") {
        disambiguate_local(fx, w, doc, spots);
        return {};
    }
    const AssignmentProblem p = build_problem(fx, w, doc, spots);
    if (!cfg.dump_dir.empty()) {
        std::ofstream dump(fs::path(cfg.dump_dir) / (doc.doc_id + ".problem.tsv"));
        if (!dump) throw Error("cannot write problem dump for '" + doc.doc_id + "'");
        dump_problem(p, dump);
    }
    std::vector<EntityId> chosen;
    std::string diag;
    if (cfg.solver == "hillclimb") {
        HillClimbReport hc;
        const Assignment a =
            hill_climb(p, cfg.restarts, derive_seed(cfg.seed, "tag", doc_index), &hc);
        chosen = chosen_entities(p, a);
        diag = "tag: " + doc.doc_id + " objective=" + format_g12(objective(p, a)) +
               " sweeps=" + std::to_string(hc.sweeps);
    } else { // lp
        const LpRoundResult r = lp_round(p);
        chosen = chosen_entities(p, r.assignment);
        diag = "tag: " + doc.doc_id + " objective=" + format_g12(objective(p, r.assignment)) +
               " lp_value=" + format_g12(r.lp_value) +
               " iterations=" + std::to_string(r.iterations);
    }
    for (std::size_t s = 0; s < spots.size(); ++s) spots[s].predicted = chosen[s];
    return diag;
}

int cmd_tag(const RunConfig& cfg) {
    const KnowledgeBase kb = load_kb(existing_path(cfg.kb_path, "kb"));
    Corpus corpus = load_corpus(existing_path(cfg.corpus_path, "corpus"));
    const WeightVector w = load_weights(existing_path(cfg.weights_path, "weights"));
    const FeatureExtractor fx(kb, cfg.window_k);
    if (!cfg.dump_dir.empty()) fs::create_directories(cfg.dump_dir);
    std::vector<std::string> reports(corpus.documents.size());
    parallel_for(corpus.documents.size(), cfg.threads, [&](std::size_t d) {
        reports[d] = tag_document(cfg, fx, w, corpus.documents[d], corpus.spots[d], d);
    });
    for (const auto& line : reports) {
        if (!line.empty()) std::cerr << line << '\n';
    }
    save_corpus(corpus, out_file(cfg, "tagged.jsonl"));
    return 0;
}

int cmd_stats(const RunConfig& cfg) {
    const KnowledgeBase kb = load_kb(existing_path(cfg.kb_path, "kb"));
    const Corpus corpus = load_corpus(existing_path(cfg.corpus_path, "corpus"));
    require_field(cfg.center >= 0, "center", "required (entity id for related-entity ranking)");

    const std::vector<SenseGroup> groups = cfg.groups_path.empty()
                                               ? derive_groups(kb.mentions)
                                               : load_groups(existing_path(cfg.groups_path, "groups"));
    write_sense_priors(sense_prior(corpus, groups), out_file(cfg, "sense_priors.tsv"));

    const BigramTable table = entity_bigrams(corpus);
    write_bigrams(table, out_file(cfg, "bigrams.tsv"));

    const CoocGraph graph = build_cooc_graph(table, cfg.center, cfg.eps);
    int iterations = 0;
    const PprScores scores =
        personalized_pagerank(graph, cfg.damping, cfg.ppr_tolerance, cfg.ppr_cap,
                              [&](int iter, const std::vector<double>&) { iterations = iter; });
    write_related(top_related(graph, scores, cfg.topk), out_file(cfg, "related.tsv"));
    std::cerr << "ppr: iterations=" << iterations << '\n';
    return 0;
}

int cmd_estimate(const RunConfig& cfg) {
    const KnowledgeBase kb = load_kb(existing_path(cfg.kb_path, "kb"));
    const Corpus labeled = load_corpus(existing_path(cfg.labeled_path, "labeled"));
    const Corpus unlabeled = load_corpus(existing_path(cfg.unlabeled_path, "unlabeled"));
    const std::vector<EntityId> classes = kb.candidate_universe();

    const MeanEmbedding means = class_means(labeled, kb, classes, classes);
    const std::vector<double> phi_u = unlabeled_mean(unlabeled, kb, classes);
    EstimatorConfig ec{cfg.mmd_iterations, cfg.mmd_tolerance, derive_seed(cfg.seed, "estimate")};
    MmdDiagnostics diag;
    const SimplexVector theta = estimate_mmd(means, phi_u, ec, &diag);
    write_theta(theta, out_file(cfg, "theta.tsv"));
    std::cerr << "mmd: iterations=" << diag.iterations << " objective=" << format_g12(diag.objective)
              << '\n';
    return 0;
}

int cmd_compare(const RunConfig& cfg) {
    const KnowledgeBase kb = load_kb(existing_path(cfg.kb_path, "kb"));
    const Corpus labeled = load_corpus(existing_path(cfg.labeled_path, "labeled"));
    const Corpus eval = load_corpus(existing_path(cfg.eval_path, "eval"));
    const WeightVector w = load_weights(existing_path(cfg.weights_path, "weights"));
    require_field(cfg.solver == "local" || cfg.solver == "hillclimb", "solver",
                  "compare supports local or hillclimb");
    const std::vector<EntityId> classes = kb.candidate_universe();
    const FeatureExtractor fx(kb, cfg.window_k);

    const SimplexVector truth = gold_ratio(eval, classes);
    const Tagger tagger =
        cfg.solver == "local" ? Tagger::local : Tagger::collective_hillclimb;
    const SimplexVector baseline = label_and_collect(tagger, fx, w, eval, classes);

    const MeanEmbedding means = class_means(labeled, kb, classes, classes);
    const std::vector<double> phi_u = unlabeled_mean(eval, kb, classes);
    EstimatorConfig ec{cfg.mmd_iterations, cfg.mmd_tolerance, derive_seed(cfg.seed, "estimate")};
    MmdDiagnostics diag;
    const SimplexVector mmd = estimate_mmd(means, phi_u, ec, &diag);
    std::cerr << "mmd: iterations=" << diag.iterations
              << " objective=" << format_g12(diag.objective) << '\n';

    std::ofstream out(out_file(cfg, "report.tsv"));
    if (!out) throw Error("cannot write report.tsv");
    for (std::size_t i = 0; i < classes.size(); ++i) {
        out << "theta\t" << classes[i] << '\t' << format_g12(mmd.p[i]) << '\t'
            << format_g12(baseline.p[i]) << '\t' << format_g12(truth.p[i]) << '\n';
    }
    out << "l1\tmmd\t" << format_g12(l1_error(mmd, truth)) << '\n';
    out << "l1\tbaseline\t" << format_g12(l1_error(baseline, truth)) << '\n';
    return 0;
}

} // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"entity disambiguation and occurrence statistics toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key=value configuration file; flags win");

    RunConfig cfg;
    app.add_option("--kb", cfg.kb_path, "knowledge base directory");
    app.add_option("--corpus", cfg.corpus_path, "corpus.jsonl path");
    app.add_option("--weights", cfg.weights_path, "weights file path");
    app.add_option("--out", cfg.out_dir, "output directory");
    app.add_option("--labeled", cfg.labeled_path, "gold-labeled corpus path");
    app.add_option("--unlabeled", cfg.unlabeled_path, "unlabeled corpus path");
    app.add_option("--eval", cfg.eval_path, "evaluation corpus path (gold labels)");
    app.add_option("--groups", cfg.groups_path, "sense group file (group TAB entity_id)");
    app.add_option("--theta", cfg.theta_parts, "class ratios, id:prob,id:prob,...");
    app.add_option("--name", cfg.synth_name, "output file name for synth");
    app.add_option("--solver", cfg.solver, "local | hillclimb | lp");
    app.add_option("--dump-problems", cfg.dump_dir, "directory for per-document problem dumps");
    app.add_option("--seed", cfg.seed, "root seed; all stage seeds derive from it");
    app.add_option("--window", cfg.window_k, "context window per side");
    app.add_option("--epochs", cfg.epochs, "training epochs");
    app.add_option("--rate", cfg.learning_rate, "training learning rate");
    app.add_option("--margin", cfg.margin, "hinge margin");
    app.add_option("--restarts", cfg.restarts, "hill-climb random restarts");
    app.add_option("--mmd-tol", cfg.mmd_tolerance, "estimator stopping tolerance");
    app.add_option("--mmd-iters", cfg.mmd_iterations, "estimator iteration cap");
    app.add_option("--eps", cfg.eps, "co-occurrence threshold for the related-entity graph");
    app.add_option("--damping", cfg.damping, "personalized PageRank damping");
    app.add_option("--ppr-tol", cfg.ppr_tolerance, "PageRank convergence tolerance");
    app.add_option("--ppr-cap", cfg.ppr_cap, "PageRank iteration cap");
    app.add_option("--center", cfg.center, "center entity for related-entity ranking");
    app.add_option("--spots", cfg.n_spots, "number of spots to generate");
    app.add_option("--topk", cfg.topk, "related entities to keep");
    app.add_option("--threads", cfg.threads, "worker pool size for document-parallel stages");

    std::map<std::string, std::function<int(const RunConfig&)>> commands = {
        {"ingest", cmd_ingest},   {"synth", cmd_synth},       {"train", cmd_train},
        {"tag", cmd_tag},         {"stats", cmd_stats},       {"estimate", cmd_estimate},
        {"compare", cmd_compare},
    };
    for (const auto& [name, fn] : commands) {
        auto* sub = app.add_subcommand(name);
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    }

    try {
        check_ranges(cfg);
        for (const auto& [name, fn] : commands) {
            if (app.got_subcommand(name)) return fn(cfg);
        }
        std::cerr << "usage error: no subcommand\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}

int run(const std::vector<std::string>& args) {
    std::vector<std::string> full;
    full.emplace_back("entstats");
    full.insert(full.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    argv.reserve(full.size());
    for (const auto& s : full) argv.push_back(s.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

} // namespace entstats::cli
