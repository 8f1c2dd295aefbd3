#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "entstats/corpus.hpp"
#include "entstats/kb.hpp"
#include "entstats/local.hpp"

namespace entstats {

inline constexpr std::size_t kMaxSpots = 12;
inline constexpr std::size_t kMaxCandidatesPerSpot = 8;
inline constexpr std::size_t kMaxEnumeratedAssignments = 100000;
inline constexpr int kMaxLpVariables = 600;

// One document's joint disambiguation problem: per-spot candidate lists,
// node potentials w.f, and pairwise coherence edges.
class AssignmentProblem {
public:
    AssignmentProblem(std::vector<std::vector<EntityId>> cands,
                      std::vector<std::vector<double>> node);

    std::size_t spot_count() const { return cands_.size(); }
    const std::vector<EntityId>& candidates(std::size_t s) const { return cands_[s]; }
    double node(std::size_t s, std::size_t j) const { return node_[s][j]; }

    // Symmetric in (s, j) <-> (t, k); s != t.
    double edge(std::size_t s, std::size_t j, std::size_t t, std::size_t k) const;
    void set_edge(std::size_t s, std::size_t j, std::size_t t, std::size_t k, double w);

private:
    std::size_t pair_index(std::size_t s, std::size_t t) const; // s < t
    std::vector<std::vector<EntityId>> cands_;
    std::vector<std::vector<double>> node_;
    std::vector<std::vector<double>> edges_; // [pair][j * |cands_t| + k]
};

// Candidate index per spot. Candidate lists are sorted by id, so
// lexicographic order on indices is lexicographic order on entity ids.
struct Assignment {
    std::vector<std::size_t> pick;

    bool operator==(const Assignment&) const = default;
};

std::vector<EntityId> chosen_entities(const AssignmentProblem& p, const Assignment& a);

AssignmentProblem build_problem(const FeatureExtractor& fx, const WeightVector& w,
                                const Document& doc, const std::vector<Spot>& spots);

// (1/C(n,2)) sum_{s<t} edge + (1/n) sum_s node; the coherence term is 0
// when there is a single spot.
double objective(const AssignmentProblem& p, const Assignment& a);

struct HillClimbReport {
    int sweeps = 0;   // across all starts
    int restarts = 0; // random starts actually climbed
};

// Greedy coordinate ascent: start from the per-spot node argmax, sweep
// spots in order switching to the best strictly-improving candidate,
// repeat until a full sweep changes nothing. Extra restarts climb from
// seeded random assignments; the best assignment found wins.
Assignment hill_climb(const AssignmentProblem& p, int restarts, std::uint64_t seed,
                      HillClimbReport* report = nullptr);

// Global optimum by enumeration; ties resolve to the lexicographically
// smallest pick vector. Requires the search space to be at most 100000.
Assignment exhaustive_opt(const AssignmentProblem& p);

// TSV dump of node potentials and edge weights for offline inspection:
// "node<TAB>spot<TAB>entity<TAB>potential" and
// "edge<TAB>spot<TAB>entity<TAB>spot'<TAB>entity'<TAB>weight" rows.
void dump_problem(const AssignmentProblem& p, std::ostream& out);

struct LpRoundResult {
    Assignment assignment;
    double lp_value = 0.0; // optimum of the relaxation, same scale as objective()
    int iterations = 0;
    std::vector<std::vector<double>> z; // relaxed per-spot candidate weights
};

// Threshold rounding: the candidate with z >= 0.5 when one exists
// (largest such z, ties to the smallest id), otherwise the argmax of z.
Assignment round_lp_solution(const std::vector<std::vector<double>>& z);

// LP relaxation with variables z per (spot, candidate) and u per
// cross-spot candidate pair, linking constraints u <= z on both sides,
// solved by the in-module dense simplex, then threshold-rounded.
LpRoundResult lp_round(const AssignmentProblem& p, int iteration_cap = 50000);

} // namespace entstats
