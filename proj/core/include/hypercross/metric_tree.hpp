#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "hypercross/rational.hpp"

namespace hypercross {

// A finite tree with strictly positive rational edge lengths.  Immutable
// after construction; all queries are pure, so concurrent reads are safe.
class MetricTree {
public:
    struct Edge {
        std::string u, v;
        Rational length;
    };

    MetricTree(std::vector<std::string> nodes, std::vector<Edge> edges,
               std::vector<std::string> leaf_labels = {});

    const std::vector<std::string>& nodes() const { return nodes_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<std::string>& leaves() const { return leaves_; }

    bool has_node(const std::string& name) const { return index_.count(name) > 0; }
    int node_index(const std::string& name) const;
    int degree(int node) const { return int(adj_[node].size()); }

    Rational distance(const std::string& u, const std::string& v) const;
    Rational distance_by_index(int u, int v) const;

    // Vertex sequence of the unique simple path, endpoints included.
    std::vector<int> path(int u, int v) const;

    // The unique point on all three pairwise paths.  For node arguments
    // this is always a node; the edge-offset form is kept so callers can
    // represent interior points uniformly.
    struct TreePoint {
        bool at_node;
        int node;                 // valid when at_node
        int edge_u, edge_v;       // valid when !at_node
        Rational offset;          // distance from edge_u along (edge_u, edge_v)
        std::string describe(const MetricTree& t) const;
    };
    TreePoint median(const std::string& x, const std::string& y, const std::string& z) const;

    // (xy|zw) = max(0, d(x,z)+d(y,w)-d(x,y)-d(z,w))/2.  Repeated arguments
    // are allowed; the formula is simply clamped at 0.
    Rational crossratio(const std::string& x, const std::string& y,
                        const std::string& z, const std::string& w) const;

    // Distance between the vertex paths [x,y] and [z,w]; equals the
    // crossratio for distinct nodes.  Exhaustive over path vertex pairs,
    // kept as an independent route for tests.
    Rational path_distance(const std::string& x, const std::string& y,
                           const std::string& z, const std::string& w) const;

    std::string to_dot() const;
    std::string to_json() const;
    static MetricTree from_dot(const std::string& text);
    static MetricTree from_json(const std::string& text);

private:
    std::vector<std::string> nodes_;
    std::vector<Edge> edges_;
    std::vector<std::string> leaves_;
    std::unordered_map<std::string, int> index_;
    struct Adj {
        int to;
        Rational length;
    };
    std::vector<std::vector<Adj>> adj_;

    void validate() const;
};

}  // namespace hypercross
