#pragma once

#include "ftfi/graph.hpp"

#include <vector>

namespace ftfi {

/// Balanced split of a tree at a single shared vertex. Both sides contain the
/// pivot, induce connected subtrees, and hold at least ceil(n/4) vertices.
struct PivotDecomposition {
    VertexId pivot = 0;
    std::vector<VertexId> left_vertices;   // ascending ids, includes pivot
    std::vector<VertexId> right_vertices;  // ascending ids, includes pivot
};

/// Linear-time pivot decomposition. Requires at least 6 vertices; smaller
/// trees are stored densely by callers.
PivotDecomposition pivot_decompose(const WeightedTree& t);

namespace detail {
/// The same construction without the size precondition; valid for n >= 4.
PivotDecomposition pivot_decompose_unchecked(const WeightedTree& t);
} // namespace detail

} // namespace ftfi
