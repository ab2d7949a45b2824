#pragma once

#include <algorithm>
#include <string>
#include <vector>

namespace clusep {

/// A computed check: `value` compared against `tolerance`.
struct Assertion {
    std::string name;
    bool pass;
    double value;
    double tolerance;
};

inline Assertion check_at_most(std::string name, double value, double tolerance) {
    return {std::move(name), value <= tolerance, value, tolerance};
}

inline bool all_pass(const std::vector<Assertion>& as) {
    return std::all_of(as.begin(), as.end(), [](const Assertion& a) { return a.pass; });
}

}  // namespace clusep
