#pragma once

#include <numeric>
#include <vector>

#include "bpme/matrix.hpp"

namespace bpme {

namespace detail {

// BFS over the digraph of strictly positive entries. transpose=true follows
// edges backwards. Returns visited flags.
inline std::vector<char> reachable_from(const Matrix& a, int root, bool transpose) {
    const int n = static_cast<int>(a.rows());
    std::vector<char> seen(n, 0);
    std::vector<int> queue;
    queue.reserve(n);
    queue.push_back(root);
    seen[root] = 1;
    for (std::size_t q = 0; q < queue.size(); ++q) {
        const int u = queue[q];
        for (int v = 0; v < n; ++v) {
            const double w = transpose ? a(v, u) : a(u, v);
            if (w > 0.0 && !seen[v]) {
                seen[v] = 1;
                queue.push_back(v);
            }
        }
    }
    return seen;
}

}  // namespace detail

/// States that break strong connectivity of the positive-entry digraph:
/// everything state 0 cannot reach or cannot be reached from. Empty result
/// means the matrix is irreducible.
inline std::vector<int> strong_connectivity_defect(const Matrix& a) {
    const int n = static_cast<int>(a.rows());
    const auto fwd = detail::reachable_from(a, 0, false);
    const auto bwd = detail::reachable_from(a, 0, true);
    std::vector<int> defect;
    for (int v = 0; v < n; ++v)
        if (!fwd[v] || !bwd[v]) defect.push_back(v);
    return defect;
}

/// Period of a strongly connected digraph: gcd of all cycle lengths,
/// computed as the gcd of level[u]+1-level[v] over edges via BFS levels.
inline int digraph_period(const Matrix& a) {
    const int n = static_cast<int>(a.rows());
    std::vector<int> level(n, -1);
    std::vector<int> queue;
    queue.reserve(n);
    queue.push_back(0);
    level[0] = 0;
    for (std::size_t q = 0; q < queue.size(); ++q) {
        const int u = queue[q];
        for (int v = 0; v < n; ++v) {
            if (a(u, v) > 0.0 && level[v] < 0) {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    int g = 0;
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v)
            if (a(u, v) > 0.0) g = std::gcd(g, level[u] + 1 - level[v]);
    return g;
}

}  // namespace bpme
