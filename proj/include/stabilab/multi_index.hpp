#pragma once

#include <numeric>
#include <string>
#include <vector>

namespace stabilab {

// Multi-index alpha in N_0^d.  Kept as a plain vector; d <= 3 throughout.
using MultiIndex = std::vector<int>;

inline int mi_order(const MultiIndex& a) { return std::accumulate(a.begin(), a.end(), 0); }

// Graded lexicographic: sort by |alpha| first, then lexicographically.
// Gives coefficient maps a canonical, dimension-stable iteration order.
struct GradedLess {
    bool operator()(const MultiIndex& a, const MultiIndex& b) const {
        const int oa = mi_order(a), ob = mi_order(b);
        if (oa != ob) return oa < ob;
        return a < b;
    }
};

inline std::string mi_to_string(const MultiIndex& a) {
    std::string s = "(";
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(a[i]);
    }
    return s + ")";
}

}  // namespace stabilab
