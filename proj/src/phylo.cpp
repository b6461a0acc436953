#include "gdrec/phylo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>
#include <set>
#include <sstream>

namespace gdrec::phylo {

int PhyloTree::add_leaf(const std::string& label) {
    nodes.push_back({label});
    return static_cast<int>(nodes.size()) - 1;
}

int PhyloTree::add_internal() {
    nodes.push_back({""});
    return static_cast<int>(nodes.size()) - 1;
}

void PhyloTree::add_edge(int a, int b, double length) {
    edges.push_back({a, b, length});
}

std::vector<int> PhyloTree::leaf_ids() const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i)
        if (!nodes[i].label.empty()) out.push_back(i);
    return out;
}

std::vector<std::string> PhyloTree::leaf_labels() const {
    std::vector<std::string> out;
    for (const Node& n : nodes)
        if (!n.label.empty()) out.push_back(n.label);
    return out;
}

namespace {

std::vector<std::vector<std::pair<int, double>>> adjacency(const PhyloTree& t) {
    std::vector<std::vector<std::pair<int, double>>> adj(t.nodes.size());
    for (const PhyloTree::Edge& e : t.edges) {
        adj[e.a].emplace_back(e.b, e.length);
        adj[e.b].emplace_back(e.a, e.length);
    }
    return adj;
}

}  // namespace

void PhyloTree::validate() const {
    if (nodes.empty()) throw DataError("tree: empty");
    for (const Edge& e : edges) {
        if (e.a < 0 || e.b < 0 || e.a >= static_cast<int>(nodes.size()) ||
            e.b >= static_cast<int>(nodes.size()))
            throw DataError("tree: edge endpoint out of range");
        if (!std::isfinite(e.length) || e.length < 0.0)
            throw NumericalError("tree: edge length invalid");
    }
    if (edges.size() + 1 != nodes.size())
        throw DataError("tree: not a tree (|E| != |V|-1)");
    // connectivity
    auto adj = adjacency(*this);
    std::vector<bool> seen(nodes.size(), false);
    std::queue<int> q;
    q.push(0);
    seen[0] = true;
    std::size_t count = 1;
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (auto [v, w] : adj[u]) {
            (void)w;
            if (!seen[v]) {
                seen[v] = true;
                ++count;
                q.push(v);
            }
        }
    }
    if (count != nodes.size()) throw DataError("tree: not connected");
}

PhyloTree neighbor_joining(const gendist::DistanceMatrix& dm) {
    const std::size_t n0 = dm.size();
    if (n0 < 2) throw DataError("neighbor_joining: need at least 2 taxa");

    PhyloTree tree;
    std::vector<int> active;  // tree node id per active cluster
    for (const std::string& l : dm.labels) active.push_back(tree.add_leaf(l));

    // working distances, indexed by position in `active`
    std::vector<std::vector<double>> d(n0, std::vector<double>(n0, 0.0));
    for (std::size_t i = 0; i < n0; ++i)
        for (std::size_t j = 0; j < n0; ++j) d[i][j] = dm.at(i, j);

    auto clamp_pair = [&tree](double& x, double& y, const std::string& where) {
        // keep x + y, move the deficit onto the sibling edge
        if (x < 0.0) {
            tree.warnings.push_back("negative branch length clamped at " + where);
            y += x;
            x = 0.0;
        }
        if (y < 0.0) {
            tree.warnings.push_back("negative branch length clamped at " + where);
            x += y;
            y = 0.0;
            if (x < 0.0) x = 0.0;
        }
    };

    while (active.size() > 3) {
        const std::size_t n = active.size();
        std::vector<double> rowsum(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) rowsum[i] += d[i][j];

        double best_q = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 1;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                double q = (static_cast<double>(n) - 2.0) * d[i][j] - rowsum[i] - rowsum[j];
                if (!std::isfinite(q))
                    throw NumericalError("neighbor_joining: non-finite Q value");
                if (q < best_q) {
                    best_q = q;
                    bi = i;
                    bj = j;
                }
            }
        }

        int u = tree.add_internal();
        double delta_i = 0.5 * d[bi][bj] +
                         (rowsum[bi] - rowsum[bj]) /
                             (2.0 * (static_cast<double>(n) - 2.0));
        double delta_j = d[bi][bj] - delta_i;
        if (!std::isfinite(delta_i) || !std::isfinite(delta_j))
            throw NumericalError("neighbor_joining: non-finite branch length");
        clamp_pair(delta_i, delta_j,
                   tree.nodes[active[bi]].label.empty() ? "internal join"
                                                        : tree.nodes[active[bi]].label);
        tree.add_edge(active[bi], u, delta_i);
        tree.add_edge(active[bj], u, delta_j);

        std::vector<double> du;
        du.reserve(n);
        for (std::size_t k = 0; k < n; ++k) {
            if (k == bi || k == bj) continue;
            du.push_back(0.5 * (d[bi][k] + d[bj][k] - d[bi][bj]));
        }

        // rebuild the working matrix without bi/bj, appending u
        std::vector<std::size_t> keep;
        for (std::size_t k = 0; k < n; ++k)
            if (k != bi && k != bj) keep.push_back(k);
        std::vector<std::vector<double>> nd(n - 1, std::vector<double>(n - 1, 0.0));
        for (std::size_t a = 0; a < keep.size(); ++a)
            for (std::size_t b = 0; b < keep.size(); ++b)
                nd[a][b] = d[keep[a]][keep[b]];
        for (std::size_t a = 0; a < keep.size(); ++a) {
            nd[a][n - 2] = du[a];
            nd[n - 2][a] = du[a];
        }
        d = std::move(nd);

        std::vector<int> na;
        for (std::size_t k : keep) na.push_back(active[k]);
        na.push_back(u);
        active = std::move(na);
    }

    if (active.size() == 3) {
        // terminal three-point join; negative pendants clamp to zero
        int u = tree.add_internal();
        double e0 = 0.5 * (d[0][1] + d[0][2] - d[1][2]);
        double e1 = 0.5 * (d[0][1] + d[1][2] - d[0][2]);
        double e2 = 0.5 * (d[0][2] + d[1][2] - d[0][1]);
        for (double* e : {&e0, &e1, &e2}) {
            if (!std::isfinite(*e))
                throw NumericalError("neighbor_joining: non-finite branch length");
            if (*e < 0.0) {
                tree.warnings.push_back("negative branch length clamped at terminal join");
                *e = 0.0;
            }
        }
        tree.add_edge(active[0], u, e0);
        tree.add_edge(active[1], u, e1);
        tree.add_edge(active[2], u, e2);
    } else if (active.size() == 2) {
        double len = d[0][1];
        if (len < 0.0) {
            tree.warnings.push_back("negative branch length clamped at root edge");
            len = 0.0;
        }
        tree.add_edge(active[0], active[1], len);
    }

    return tree;
}

gendist::DistanceMatrix patristic_matrix(const PhyloTree& tree) {
    tree.validate();
    auto adj = adjacency(tree);
    std::vector<int> leaves = tree.leaf_ids();
    const std::size_t n = leaves.size();
    std::vector<int> leaf_pos(tree.nodes.size(), -1);
    for (std::size_t i = 0; i < n; ++i) leaf_pos[leaves[i]] = static_cast<int>(i);

    gendist::DistanceMatrix dm;
    for (int id : leaves) dm.labels.push_back(tree.nodes[id].label);
    dm.values.assign(n * n, 0.0);

    for (std::size_t i = 0; i < n; ++i) {
        // single-source path lengths over the tree
        std::vector<double> dist(tree.nodes.size(),
                                 std::numeric_limits<double>::quiet_NaN());
        std::queue<int> q;
        dist[leaves[i]] = 0.0;
        q.push(leaves[i]);
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (auto [v, w] : adj[u]) {
                if (std::isnan(dist[v])) {
                    dist[v] = dist[u] + w;
                    q.push(v);
                }
            }
        }
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) dm.values[i * n + j] = dist[leaves[j]];
    }
    return dm;
}

namespace {

std::string format_length(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return buf;
}

void write_subtree(const PhyloTree& t,
                   const std::vector<std::vector<std::pair<int, double>>>& adj,
                   int node, int parent, std::ostringstream& out, int digits) {
    std::vector<std::pair<int, double>> children;
    for (auto [v, w] : adj[node])
        if (v != parent) children.emplace_back(v, w);
    if (children.empty()) {
        out << t.nodes[node].label;
        return;
    }
    out << '(';
    for (std::size_t i = 0; i < children.size(); ++i) {
        if (i) out << ',';
        write_subtree(t, adj, children[i].first, node, out, digits);
        out << ':' << format_length(children[i].second, digits);
    }
    out << ')';
    if (!t.nodes[node].label.empty()) out << t.nodes[node].label;
}

}  // namespace

std::string to_newick(const PhyloTree& tree, int digits) {
    tree.validate();
    auto adj = adjacency(tree);
    // root at the last internal node; a tree of two leaves roots at the
    // second leaf, giving the "(A:len)B;" form
    int root = -1;
    for (int i = static_cast<int>(tree.nodes.size()) - 1; i >= 0; --i) {
        if (tree.nodes[i].label.empty()) {
            root = i;
            break;
        }
    }
    if (root < 0) root = static_cast<int>(tree.nodes.size()) - 1;
    std::ostringstream out;
    write_subtree(tree, adj, root, -1, out, digits);
    out << ';';
    return out.str();
}

namespace {

struct NewickParser {
    const std::string& text;
    std::size_t pos = 0;
    PhyloTree tree;

    explicit NewickParser(const std::string& t) : text(t) {}

    [[noreturn]] void fail(const std::string& msg) const {
        throw NewickParseError("newick: " + msg + " at position " +
                               std::to_string(pos));
    }

    char peek() const { return pos < text.size() ? text[pos] : '\0'; }

    void skip_ws() {
        while (pos < text.size() &&
               (text[pos] == ' ' || text[pos] == '\t' || text[pos] == '\n' ||
                text[pos] == '\r'))
            ++pos;
    }

    std::string parse_label() {
        skip_ws();
        std::size_t start = pos;
        while (pos < text.size()) {
            char c = text[pos];
            if (c == '(' || c == ')' || c == ',' || c == ':' || c == ';' ||
                c == ' ' || c == '\t' || c == '\n' || c == '\r')
                break;
            ++pos;
        }
        return text.substr(start, pos - start);
    }

    double parse_length() {
        skip_ws();
        std::size_t start = pos;
        while (pos < text.size()) {
            char c = text[pos];
            if ((c >= '0' && c <= '9') || c == '.' || c == '-' || c == '+' ||
                c == 'e' || c == 'E')
                ++pos;
            else
                break;
        }
        if (start == pos) fail("expected branch length");
        try {
            return std::stod(text.substr(start, pos - start));
        } catch (const std::exception&) {
            pos = start;
            fail("bad branch length");
        }
    }

    // returns node id; edge to parent added by caller
    int parse_subtree() {
        skip_ws();
        if (peek() == '(') {
            ++pos;
            int node = tree.add_internal();
            while (true) {
                int child = parse_subtree();
                skip_ws();
                double len = 0.0;
                if (peek() == ':') {
                    ++pos;
                    len = parse_length();
                }
                tree.add_edge(node, child, len);
                skip_ws();
                if (peek() == ',') {
                    ++pos;
                    continue;
                }
                if (peek() == ')') {
                    ++pos;
                    break;
                }
                fail("expected ',' or ')'");
            }
            std::string label = parse_label();
            if (!label.empty()) tree.nodes[node].label = label;
            return node;
        }
        std::string label = parse_label();
        if (label.empty()) fail("expected leaf label");
        return tree.add_leaf(label);
    }
};

}  // namespace

PhyloTree parse_newick(const std::string& text) {
    NewickParser p(text);
    int root = p.parse_subtree();
    p.skip_ws();
    if (p.peek() == ':') {  // tolerated root length, ignored
        ++p.pos;
        p.parse_length();
        p.skip_ws();
    }
    if (p.peek() != ';') p.fail("expected ';'");
    ++p.pos;
    p.skip_ws();
    if (p.pos != p.text.size()) p.fail("trailing characters");

    PhyloTree tree = std::move(p.tree);

    // Unroot a degree-2 root by merging its two incident edges.
    std::vector<int> degree(tree.nodes.size(), 0);
    for (const PhyloTree::Edge& e : tree.edges) {
        ++degree[e.a];
        ++degree[e.b];
    }
    if (tree.nodes[root].label.empty() && degree[root] == 2) {
        int n1 = -1, n2 = -1;
        double len = 0.0;
        std::vector<PhyloTree::Edge> kept;
        for (const PhyloTree::Edge& e : tree.edges) {
            if (e.a == root || e.b == root) {
                int other = (e.a == root) ? e.b : e.a;
                len += e.length;
                (n1 < 0 ? n1 : n2) = other;
            } else {
                kept.push_back(e);
            }
        }
        kept.push_back({n1, n2, len});
        // drop the root node (it is safe to leave a hole only if root is last)
        if (root == static_cast<int>(tree.nodes.size()) - 1) {
            tree.nodes.pop_back();
        } else {
            // swap the last node into the hole and fix edge endpoints
            int last = static_cast<int>(tree.nodes.size()) - 1;
            tree.nodes[root] = tree.nodes[last];
            tree.nodes.pop_back();
            for (PhyloTree::Edge& e : kept) {
                if (e.a == last) e.a = root;
                if (e.b == last) e.b = root;
            }
        }
        tree.edges = std::move(kept);
    }

    tree.validate();
    return tree;
}

std::vector<std::string> split_signatures(const PhyloTree& tree) {
    auto adj = adjacency(tree);
    std::vector<int> leaves = tree.leaf_ids();
    const std::size_t n = leaves.size();
    std::string min_label;
    for (int id : leaves) {
        const std::string& l = tree.nodes[id].label;
        if (min_label.empty() || l < min_label) min_label = l;
    }

    std::vector<std::string> sigs;
    for (std::size_t ei = 0; ei < tree.edges.size(); ++ei) {
        const PhyloTree::Edge& e = tree.edges[ei];
        // leaves on the `a` side when the edge is removed
        std::set<std::string> side;
        std::vector<bool> seen(tree.nodes.size(), false);
        std::queue<int> q;
        q.push(e.a);
        seen[e.a] = true;
        seen[e.b] = true;  // block traversal across the removed edge
        if (!tree.nodes[e.a].label.empty()) side.insert(tree.nodes[e.a].label);
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (auto [v, w] : adj[u]) {
                (void)w;
                if (!seen[v]) {
                    seen[v] = true;
                    if (!tree.nodes[v].label.empty()) side.insert(tree.nodes[v].label);
                    q.push(v);
                }
            }
        }
        if (side.size() < 2 || side.size() > n - 2) continue;  // trivial split
        if (!side.count(min_label)) {
            std::set<std::string> comp;
            for (int id : leaves) {
                const std::string& l = tree.nodes[id].label;
                if (!side.count(l)) comp.insert(l);
            }
            side = std::move(comp);
        }
        std::string sig;
        for (const std::string& l : side) {
            if (!sig.empty()) sig += ',';
            sig += l;
        }
        sigs.push_back(std::move(sig));
    }
    std::sort(sigs.begin(), sigs.end());
    sigs.erase(std::unique(sigs.begin(), sigs.end()), sigs.end());
    return sigs;
}

}  // namespace gdrec::phylo
