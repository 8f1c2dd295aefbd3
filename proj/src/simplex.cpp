#include "entstats/simplex.hpp"

#include <algorithm>
#include <cmath>

namespace entstats {

void SimplexVector::validate() const {
    if (classes.size() != p.size()) throw Error("simplex: class/probability size mismatch");
    if (classes.empty()) throw Error("simplex: empty");
    if (!std::is_sorted(classes.begin(), classes.end()) ||
        std::adjacent_find(classes.begin(), classes.end()) != classes.end()) {
        throw Error("simplex: classes not sorted unique");
    }
    double sum = 0.0;
    for (double v : p) {
        if (!std::isfinite(v) || v < 0.0) throw Error("simplex: negative or non-finite entry");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw Error("simplex: entries sum to " + format_g17(sum));
}

double SimplexVector::prob_of(EntityId cls) const {
    auto it = std::lower_bound(classes.begin(), classes.end(), cls);
    if (it == classes.end() || *it != cls) return 0.0;
    return p[static_cast<std::size_t>(it - classes.begin())];
}

SimplexVector make_simplex(std::vector<EntityId> classes, std::vector<double> p) {
    SimplexVector v{std::move(classes), std::move(p)};
    v.validate();
    return v;
}

} // namespace entstats
