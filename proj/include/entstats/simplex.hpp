#pragma once

#include <vector>

#include "entstats/core.hpp"

namespace entstats {

// Class-ratio vector over a fixed set of entity classes: nonnegative,
// summing to 1 within 1e-9.
struct SimplexVector {
    std::vector<EntityId> classes; // sorted, unique
    std::vector<double> p;

    void validate() const; // throws Error on violation
    double prob_of(EntityId cls) const; // 0 if the class is absent

    bool operator==(const SimplexVector&) const = default;
};

SimplexVector make_simplex(std::vector<EntityId> classes, std::vector<double> p);

} // namespace entstats
