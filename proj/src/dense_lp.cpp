#include "entstats/dense_lp.hpp"

#include <algorithm>
#include <cmath>

namespace entstats {

namespace {

constexpr double kEps = 1e-9;

struct Tableau {
    // rows x (cols + 1); last column is the rhs.
    std::vector<std::vector<double>> t;
    std::vector<int> basis;   // basic variable per row
    std::vector<double> cost; // reduced-cost row, last cell = -z
    int cols = 0;

    void pivot(std::size_t row, int col) {
        auto& pr = t[row];
        const double inv = 1.0 / pr[static_cast<std::size_t>(col)];
        for (auto& v : pr) v *= inv;
        pr[static_cast<std::size_t>(col)] = 1.0; // exact
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (i == row) continue;
            const double factor = t[i][static_cast<std::size_t>(col)];
            if (factor == 0.0) continue;
            for (std::size_t j = 0; j <= static_cast<std::size_t>(cols); ++j) {
                t[i][j] -= factor * pr[j];
            }
            t[i][static_cast<std::size_t>(col)] = 0.0;
        }
        const double cfactor = cost[static_cast<std::size_t>(col)];
        if (cfactor != 0.0) {
            for (std::size_t j = 0; j <= static_cast<std::size_t>(cols); ++j) {
                cost[j] -= cfactor * pr[j];
            }
            cost[static_cast<std::size_t>(col)] = 0.0;
        }
        basis[row] = col;
    }

    // Minimizes the current cost row with Bland's rule. allowed[j] == false
    // excludes a column from entering (artificials in phase 2).
    void run(const std::vector<bool>& allowed, int iteration_cap, int& iterations) {
        for (;;) {
            int enter = -1;
            for (int j = 0; j < cols; ++j) {
                if (allowed[static_cast<std::size_t>(j)] &&
                    cost[static_cast<std::size_t>(j)] < -kEps) {
                    enter = j;
                    break;
                }
            }
            if (enter == -1) return;

            std::size_t leave = t.size();
            double best_ratio = 0.0;
            for (std::size_t i = 0; i < t.size(); ++i) {
                const double a = t[i][static_cast<std::size_t>(enter)];
                if (a <= kEps) continue;
                const double ratio = t[i][static_cast<std::size_t>(cols)] / a;
                if (leave == t.size() || ratio < best_ratio - kEps ||
                    (ratio < best_ratio + kEps && basis[i] < basis[leave])) {
                    leave = i;
                    best_ratio = ratio;
                }
            }
            if (leave == t.size()) throw Error("simplex: unbounded");
            if (++iterations > iteration_cap) throw Error("simplex: iteration cap exceeded");
            pivot(leave, enter);
        }
    }
};

} // namespace

int DenseSimplex::add_variable(double objective_coeff) {
    objective_.push_back(objective_coeff);
    return static_cast<int>(objective_.size()) - 1;
}

void DenseSimplex::add_constraint(std::vector<std::pair<int, double>> terms, Relation rel,
                                  double rhs) {
    for (const auto& [idx, coeff] : terms) {
        if (idx < 0 || idx >= variable_count()) throw Error("simplex: bad variable index");
        (void)coeff;
    }
    rows_.push_back({std::move(terms), rel, rhs});
}

DenseSimplex::Solution DenseSimplex::maximize(int iteration_cap) const {
    const int n = variable_count();
    const std::size_t m = rows_.size();

    // Column layout: structural | slack/surplus | artificial.
    enum class RowKind { slack, surplus_artificial, artificial };
    std::vector<RowKind> kind(m);
    int n_slack = 0, n_art = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const bool flipped = rows_[i].rhs < 0.0;
        Relation rel = rows_[i].rel;
        if (rel == Relation::le) {
            if (!flipped) {
                kind[i] = RowKind::slack;
                ++n_slack;
            } else { // becomes >= with rhs > 0
                kind[i] = RowKind::surplus_artificial;
                ++n_slack;
                ++n_art;
            }
        } else {
            kind[i] = RowKind::artificial;
            ++n_art;
        }
    }

    const int slack_start = n;
    const int art_start = n + n_slack;
    const int cols = n + n_slack + n_art;

    Tableau tab;
    tab.cols = cols;
    tab.t.assign(m, std::vector<double>(static_cast<std::size_t>(cols) + 1, 0.0));
    tab.basis.assign(m, -1);

    int next_slack = slack_start;
    int next_art = art_start;
    for (std::size_t i = 0; i < m; ++i) {
        const double sign = rows_[i].rhs < 0.0 ? -1.0 : 1.0;
        for (const auto& [idx, coeff] : rows_[i].terms) {
            tab.t[i][static_cast<std::size_t>(idx)] += sign * coeff;
        }
        tab.t[i][static_cast<std::size_t>(cols)] = sign * rows_[i].rhs;
        switch (kind[i]) {
        case RowKind::slack:
            tab.t[i][static_cast<std::size_t>(next_slack)] = 1.0;
            tab.basis[i] = next_slack++;
            break;
        case RowKind::surplus_artificial:
            tab.t[i][static_cast<std::size_t>(next_slack)] = -1.0;
            ++next_slack;
            tab.t[i][static_cast<std::size_t>(next_art)] = 1.0;
            tab.basis[i] = next_art++;
            break;
        case RowKind::artificial:
            tab.t[i][static_cast<std::size_t>(next_art)] = 1.0;
            tab.basis[i] = next_art++;
            break;
        }
    }

    int iterations = 0;
    std::vector<bool> allowed(static_cast<std::size_t>(cols), true);

    // Phase 1: minimize the sum of artificials.
    if (n_art > 0) {
        tab.cost.assign(static_cast<std::size_t>(cols) + 1, 0.0);
        for (int j = art_start; j < cols; ++j) tab.cost[static_cast<std::size_t>(j)] = 1.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (tab.basis[i] >= art_start) {
                for (std::size_t j = 0; j <= static_cast<std::size_t>(cols); ++j) {
                    tab.cost[j] -= tab.t[i][j];
                }
            }
        }
        tab.run(allowed, iteration_cap, iterations);
        const double infeasibility = -tab.cost[static_cast<std::size_t>(cols)];
        if (infeasibility > 1e-7) throw Error("simplex: infeasible");

        // Drive remaining artificials out of the basis; drop redundant rows.
        for (std::size_t i = 0; i < tab.t.size();) {
            if (tab.basis[i] < art_start) {
                ++i;
                continue;
            }
            int col = -1;
            for (int j = 0; j < art_start; ++j) {
                if (std::abs(tab.t[i][static_cast<std::size_t>(j)]) > kEps) {
                    col = j;
                    break;
                }
            }
            if (col >= 0) {
                tab.pivot(i, col);
                ++i;
            } else {
                tab.t.erase(tab.t.begin() + static_cast<std::ptrdiff_t>(i));
                tab.basis.erase(tab.basis.begin() + static_cast<std::ptrdiff_t>(i));
            }
        }
        for (int j = art_start; j < cols; ++j) allowed[static_cast<std::size_t>(j)] = false;
    }

    // Phase 2: minimize -objective.
    tab.cost.assign(static_cast<std::size_t>(cols) + 1, 0.0);
    for (int j = 0; j < n; ++j) tab.cost[static_cast<std::size_t>(j)] = -objective_[static_cast<std::size_t>(j)];
    for (std::size_t i = 0; i < tab.t.size(); ++i) {
        const int b = tab.basis[i];
        if (b < n) {
            const double cb = -objective_[static_cast<std::size_t>(b)];
            if (cb != 0.0) {
                for (std::size_t j = 0; j <= static_cast<std::size_t>(cols); ++j) {
                    tab.cost[j] -= cb * tab.t[i][j];
                }
            }
        }
    }
    tab.run(allowed, iteration_cap, iterations);

    Solution sol;
    sol.x.assign(static_cast<std::size_t>(n), 0.0);
    for (std::size_t i = 0; i < tab.t.size(); ++i) {
        if (tab.basis[i] < n) {
            sol.x[static_cast<std::size_t>(tab.basis[i])] = tab.t[i][static_cast<std::size_t>(tab.cols)];
        }
    }
    sol.objective = tab.cost[static_cast<std::size_t>(cols)]; // -z of the min problem
    sol.iterations = iterations;
    return sol;
}

} // namespace entstats
