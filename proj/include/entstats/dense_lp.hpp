#pragma once

#include <utility>
#include <vector>

#include "entstats/core.hpp"

namespace entstats {

// Two-phase primal simplex on a dense tableau with Bland's pivot rule,
// which cannot cycle. Variables are nonnegative; the objective is
// maximized. Sized for desk-scale relaxations, not sparse problems.
class DenseSimplex {
public:
    enum class Relation { le, eq };

    // Returns the variable index.
    int add_variable(double objective_coeff);

    // terms: (variable index, coefficient) pairs.
    void add_constraint(std::vector<std::pair<int, double>> terms, Relation rel, double rhs);

    struct Solution {
        std::vector<double> x;
        double objective = 0.0;
        int iterations = 0;
    };

    // Throws Error on infeasible, unbounded, or iteration cap exceeded.
    Solution maximize(int iteration_cap = 50000) const;

    int variable_count() const { return static_cast<int>(objective_.size()); }

private:
    struct Row {
        std::vector<std::pair<int, double>> terms;
        Relation rel = Relation::le;
        double rhs = 0.0;
    };
    std::vector<double> objective_;
    std::vector<Row> rows_;
};

} // namespace entstats
