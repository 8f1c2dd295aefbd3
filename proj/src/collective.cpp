#include "entstats/collective.hpp"

#include <algorithm>
#include <cmath>

#include "entstats/dense_lp.hpp"
#include "entstats/rng.hpp"

namespace entstats {

AssignmentProblem::AssignmentProblem(std::vector<std::vector<EntityId>> cands,
                                     std::vector<std::vector<double>> node)
    : cands_(std::move(cands)), node_(std::move(node)) {
    if (cands_.empty()) throw Error("assignment problem: no spots");
    if (cands_.size() != node_.size()) throw Error("assignment problem: cands/node mismatch");
    if (cands_.size() > kMaxSpots) throw Error("assignment problem: too many spots");
    for (std::size_t s = 0; s < cands_.size(); ++s) {
        if (cands_[s].empty()) throw Error("assignment problem: empty candidate list");
        if (cands_[s].size() > kMaxCandidatesPerSpot) {
            throw Error("assignment problem: too many candidates");
        }
        if (cands_[s].size() != node_[s].size()) {
            throw Error("assignment problem: node potential count mismatch");
        }
        for (double v : node_[s]) {
            if (!std::isfinite(v)) throw Error("assignment problem: non-finite node potential");
        }
    }
    const std::size_t n = cands_.size();
    edges_.resize(n * (n - 1) / 2);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t t = s + 1; t < n; ++t) {
            edges_[pair_index(s, t)].assign(cands_[s].size() * cands_[t].size(), 0.0);
        }
    }
}

std::size_t AssignmentProblem::pair_index(std::size_t s, std::size_t t) const {
    // rank of (s, t) with s < t in lexicographic order
    const std::size_t n = cands_.size();
    return s * n - s * (s + 1) / 2 + (t - s - 1);
}

double AssignmentProblem::edge(std::size_t s, std::size_t j, std::size_t t, std::size_t k) const {
    if (s == t) throw Error("assignment problem: edge within one spot");
    if (s > t) return edge(t, k, s, j);
    return edges_[pair_index(s, t)][j * cands_[t].size() + k];
}

void AssignmentProblem::set_edge(std::size_t s, std::size_t j, std::size_t t, std::size_t k,
                                 double w) {
    if (s == t) throw Error("assignment problem: edge within one spot");
    if (s > t) {
        set_edge(t, k, s, j, w);
        return;
    }
    edges_[pair_index(s, t)][j * cands_[t].size() + k] = w;
}

std::vector<EntityId> chosen_entities(const AssignmentProblem& p, const Assignment& a) {
    std::vector<EntityId> out(p.spot_count());
    for (std::size_t s = 0; s < p.spot_count(); ++s) {
        out[s] = p.candidates(s)[a.pick[s]];
    }
    return out;
}

AssignmentProblem build_problem(const FeatureExtractor& fx, const WeightVector& w,
                                const Document& doc, const std::vector<Spot>& spots) {
    if (spots.empty()) throw Error("build_problem: no spots");
    std::vector<std::vector<EntityId>> cands;
    std::vector<std::vector<double>> node;
    for (const Spot& spot : spots) {
        std::vector<double> potentials;
        potentials.reserve(spot.candidates.size());
        for (EntityId cand : spot.candidates) {
            potentials.push_back(dot(w, fx.extract(doc, spot, cand)));
        }
        cands.push_back(spot.candidates);
        node.push_back(std::move(potentials));
    }
    AssignmentProblem p(std::move(cands), std::move(node));
    for (std::size_t s = 0; s < p.spot_count(); ++s) {
        for (std::size_t t = s + 1; t < p.spot_count(); ++t) {
            for (std::size_t j = 0; j < p.candidates(s).size(); ++j) {
                for (std::size_t k = 0; k < p.candidates(t).size(); ++k) {
                    p.set_edge(s, j, t, k,
                               fx.kb().coherence(p.candidates(s)[j], p.candidates(t)[k]));
                }
            }
        }
    }
    return p;
}

namespace {

void check_assignment(const AssignmentProblem& p, const Assignment& a) {
    if (a.pick.size() != p.spot_count()) throw Error("assignment: spot count mismatch");
    for (std::size_t s = 0; s < p.spot_count(); ++s) {
        if (a.pick[s] >= p.candidates(s).size()) throw Error("assignment: pick out of range");
    }
}

} // namespace

double objective(const AssignmentProblem& p, const Assignment& a) {
    check_assignment(p, a);
    const std::size_t n = p.spot_count();
    double node_sum = 0.0;
    for (std::size_t s = 0; s < n; ++s) node_sum += p.node(s, a.pick[s]);
    double value = node_sum / static_cast<double>(n);
    if (n >= 2) {
        double edge_sum = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            for (std::size_t t = s + 1; t < n; ++t) {
                edge_sum += p.edge(s, a.pick[s], t, a.pick[t]);
            }
        }
        value += edge_sum / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
    }
    return value;
}

namespace {

Assignment node_argmax_start(const AssignmentProblem& p) {
    Assignment a;
    a.pick.resize(p.spot_count());
    for (std::size_t s = 0; s < p.spot_count(); ++s) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < p.candidates(s).size(); ++j) {
            if (p.node(s, j) > p.node(s, best)) best = j;
        }
        a.pick[s] = best;
    }
    return a;
}

// Objective contribution of choosing candidate j at spot s, others fixed.
double spot_score(const AssignmentProblem& p, const Assignment& a, std::size_t s, std::size_t j) {
    const std::size_t n = p.spot_count();
    double score = p.node(s, j) / static_cast<double>(n);
    if (n >= 2) {
        const double pair_norm = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
        for (std::size_t t = 0; t < n; ++t) {
            if (t == s) continue;
            score += p.edge(s, j, t, a.pick[t]) / pair_norm;
        }
    }
    return score;
}

int climb(const AssignmentProblem& p, Assignment& a) {
    int sweeps = 0;
    bool changed = true;
    while (changed) {
        ++sweeps;
        changed = false;
        for (std::size_t s = 0; s < p.spot_count(); ++s) {
            const double current = spot_score(p, a, s, a.pick[s]);
            std::size_t best = a.pick[s];
            double best_score = current;
            for (std::size_t j = 0; j < p.candidates(s).size(); ++j) {
                if (j == a.pick[s]) continue;
                const double score = spot_score(p, a, s, j);
                if (score > best_score) {
                    best_score = score;
                    best = j;
                }
            }
            if (best != a.pick[s]) {
                a.pick[s] = best;
                changed = true;
            }
        }
    }
    return sweeps;
}

} // namespace

Assignment hill_climb(const AssignmentProblem& p, int restarts, std::uint64_t seed,
                      HillClimbReport* report) {
    Assignment best = node_argmax_start(p);
    int sweeps = climb(p, best);
    double best_value = objective(p, best);

    Rng rng(seed);
    for (int r = 0; r < restarts; ++r) {
        Assignment a;
        a.pick.resize(p.spot_count());
        for (std::size_t s = 0; s < p.spot_count(); ++s) {
            a.pick[s] = rng.below(p.candidates(s).size());
        }
        sweeps += climb(p, a);
        const double value = objective(p, a);
        if (value > best_value) {
            best_value = value;
            best = a;
        }
    }
    if (report != nullptr) {
        report->sweeps = sweeps;
        report->restarts = restarts;
    }
    return best;
}

Assignment exhaustive_opt(const AssignmentProblem& p) {
    std::size_t space = 1;
    for (std::size_t s = 0; s < p.spot_count(); ++s) {
        space *= p.candidates(s).size();
        if (space > kMaxEnumeratedAssignments) {
            throw Error("exhaustive_opt: search space too large");
        }
    }

    Assignment current;
    current.pick.assign(p.spot_count(), 0);
    Assignment best = current;
    double best_value = objective(p, current);
    // Odometer enumeration in lexicographic order; strict improvement
    // keeps the lexicographically smallest optimum.
    for (;;) {
        std::size_t s = p.spot_count();
        while (s > 0) {
            --s;
            if (++current.pick[s] < p.candidates(s).size()) break;
            current.pick[s] = 0;
            if (s == 0) return best;
        }
        const double value = objective(p, current);
        if (value > best_value) {
            best_value = value;
            best = current;
        }
    }
}

LpRoundResult lp_round(const AssignmentProblem& p, int iteration_cap) {
    const std::size_t n = p.spot_count();
    const double pair_norm =
        n >= 2 ? static_cast<double>(n) * static_cast<double>(n - 1) / 2.0 : 1.0;

    int total_vars = 0;
    for (std::size_t s = 0; s < n; ++s) {
        total_vars += static_cast<int>(p.candidates(s).size());
    }
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t t = s + 1; t < n; ++t) {
            total_vars += static_cast<int>(p.candidates(s).size() * p.candidates(t).size());
        }
    }
    if (total_vars > kMaxLpVariables) {
        throw Error("lp_round: " + std::to_string(total_vars) + " variables exceed the cap of " +
                    std::to_string(kMaxLpVariables));
    }

    DenseSimplex lp;
    std::vector<std::vector<int>> z_var(n);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t j = 0; j < p.candidates(s).size(); ++j) {
            z_var[s].push_back(lp.add_variable(p.node(s, j) / static_cast<double>(n)));
        }
    }
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t t = s + 1; t < n; ++t) {
            for (std::size_t j = 0; j < p.candidates(s).size(); ++j) {
                for (std::size_t k = 0; k < p.candidates(t).size(); ++k) {
                    const int u = lp.add_variable(p.edge(s, j, t, k) / pair_norm);
                    lp.add_constraint({{u, 1.0}, {z_var[s][j], -1.0}}, DenseSimplex::Relation::le,
                                      0.0);
                    lp.add_constraint({{u, 1.0}, {z_var[t][k], -1.0}}, DenseSimplex::Relation::le,
                                      0.0);
                }
            }
        }
    }
    for (std::size_t s = 0; s < n; ++s) {
        std::vector<std::pair<int, double>> terms;
        for (int v : z_var[s]) terms.emplace_back(v, 1.0);
        lp.add_constraint(std::move(terms), DenseSimplex::Relation::eq, 1.0);
    }

    const DenseSimplex::Solution sol = lp.maximize(iteration_cap);

    LpRoundResult result;
    result.lp_value = sol.objective;
    result.iterations = sol.iterations;
    result.z.resize(n);
    for (std::size_t s = 0; s < n; ++s) {
        result.z[s].resize(p.candidates(s).size());
        for (std::size_t j = 0; j < p.candidates(s).size(); ++j) {
            result.z[s][j] = sol.x[static_cast<std::size_t>(z_var[s][j])];
        }
    }
    result.assignment = round_lp_solution(result.z);
    return result;
}

void dump_problem(const AssignmentProblem& p, std::ostream& out) {
    for (std::size_t s = 0; s < p.spot_count(); ++s) {
        for (std::size_t j = 0; j < p.candidates(s).size(); ++j) {
            out << "node\t" << s << '\t' << p.candidates(s)[j] << '\t'
                << format_g12(p.node(s, j)) << '\n';
        }
    }
    for (std::size_t s = 0; s < p.spot_count(); ++s) {
        for (std::size_t t = s + 1; t < p.spot_count(); ++t) {
            for (std::size_t j = 0; j < p.candidates(s).size(); ++j) {
                for (std::size_t k = 0; k < p.candidates(t).size(); ++k) {
                    out << "edge\t" << s << '\t' << p.candidates(s)[j] << '\t' << t << '\t'
                        << p.candidates(t)[k] << '\t' << format_g12(p.edge(s, j, t, k)) << '\n';
                }
            }
        }
    }
}

Assignment round_lp_solution(const std::vector<std::vector<double>>& z) {
    Assignment a;
    a.pick.resize(z.size());
    for (std::size_t s = 0; s < z.size(); ++s) {
        if (z[s].empty()) throw Error("round_lp_solution: empty spot");
        std::size_t pick = 0;
        bool found = false;
        for (std::size_t j = 0; j < z[s].size(); ++j) {
            if (z[s][j] >= 0.5 && (!found || z[s][j] > z[s][pick])) {
                pick = j;
                found = true;
            }
        }
        if (!found) {
            for (std::size_t j = 1; j < z[s].size(); ++j) {
                if (z[s][j] > z[s][pick]) pick = j;
            }
        }
        a.pick[s] = pick;
    }
    return a;
}

} // namespace entstats
