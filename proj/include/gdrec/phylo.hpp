// Unrooted weighted trees: neighbor joining, patristic distances, Newick.
#pragma once

#include <string>
#include <vector>

#include "gdrec/common.hpp"
#include "gdrec/gendist.hpp"

namespace gdrec::phylo {

struct PhyloTree {
    struct Node {
        std::string label;  // empty for internal nodes
    };
    struct Edge {
        int a = -1;
        int b = -1;
        double length = 0.0;
    };

    std::vector<Node> nodes;
    std::vector<Edge> edges;
    std::vector<std::string> warnings;  // e.g. negative-branch clamps

    int add_leaf(const std::string& label);
    int add_internal();
    void add_edge(int a, int b, double length);

    std::vector<int> leaf_ids() const;
    std::vector<std::string> leaf_labels() const;
    void validate() const;  // connected, acyclic, finite nonnegative lengths
};

// Saitou-Nei neighbor joining. Ties in the Q criterion break on the smallest
// (i, j) index pair over the active-node list. Negative branch lengths are
// clamped to zero with the deficit moved to the sibling edge; each clamp is
// recorded in tree.warnings.
PhyloTree neighbor_joining(const gendist::DistanceMatrix& dm);

// Leaf-to-leaf path lengths, rows ordered like tree.leaf_labels().
gendist::DistanceMatrix patristic_matrix(const PhyloTree& tree);

// Serialization roots the tree at the last-created internal node (or the
// second leaf for a two-leaf tree). `digits` is significant digits for
// branch lengths; 17 makes round trips lossless.
std::string to_newick(const PhyloTree& tree, int digits = 6);
PhyloTree parse_newick(const std::string& text);

// Split set (bipartitions by sorted-label signature) for topology equality.
std::vector<std::string> split_signatures(const PhyloTree& tree);

}  // namespace gdrec::phylo
