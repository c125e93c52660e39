#include "hypercross/metric_tree.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"

namespace hypercross {

MetricTree::MetricTree(std::vector<std::string> nodes, std::vector<Edge> edges,
                       std::vector<std::string> leaf_labels)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), leaves_(std::move(leaf_labels)) {
    for (size_t i = 0; i < nodes_.size(); ++i) {
        if (!index_.emplace(nodes_[i], int(i)).second)
            throw std::invalid_argument("metric_tree: duplicate node id: " + nodes_[i]);
    }
    adj_.resize(nodes_.size());
    for (const auto& e : edges_) {
        int u = node_index(e.u);
        int v = node_index(e.v);
        adj_[u].push_back({v, e.length});
        adj_[v].push_back({u, e.length});
    }
    if (leaves_.empty()) {
        for (size_t i = 0; i < nodes_.size(); ++i)
            if (adj_[i].size() <= 1) leaves_.push_back(nodes_[i]);
    }
    validate();
}

void MetricTree::validate() const {
    if (nodes_.empty()) throw std::invalid_argument("metric_tree: no nodes");
    if (edges_.size() + 1 != nodes_.size())
        throw std::invalid_argument("metric_tree: edge count must be node count - 1");
    for (const auto& e : edges_)
        if (!(e.length > Rational(0)))
            throw std::invalid_argument("metric_tree: nonpositive edge length on " + e.u + "--" + e.v);
    // Connectivity: every node reachable from node 0.
    std::vector<char> seen(nodes_.size(), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    size_t count = 1;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (const auto& a : adj_[u])
            if (!seen[a.to]) {
                seen[a.to] = 1;
                ++count;
                stack.push_back(a.to);
            }
    }
    if (count != nodes_.size()) throw std::invalid_argument("metric_tree: not connected");
    for (const auto& l : leaves_)
        if (!has_node(l)) throw std::invalid_argument("metric_tree: unknown leaf label " + l);
}

int MetricTree::node_index(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::invalid_argument("metric_tree: unknown node: " + name);
    return it->second;
}

std::vector<int> MetricTree::path(int u, int v) const {
    // DFS parent tracking; trees are tiny.
    std::vector<int> parent(nodes_.size(), -2);
    std::vector<int> stack{u};
    parent[u] = -1;
    while (!stack.empty()) {
        int a = stack.back();
        stack.pop_back();
        if (a == v) break;
        for (const auto& e : adj_[a])
            if (parent[e.to] == -2) {
                parent[e.to] = a;
                stack.push_back(e.to);
            }
    }
    std::vector<int> rev;
    for (int a = v; a != -1; a = parent[a]) rev.push_back(a);
    return {rev.rbegin(), rev.rend()};
}

Rational MetricTree::distance_by_index(int u, int v) const {
    auto p = path(u, v);
    Rational d(0);
    for (size_t i = 0; i + 1 < p.size(); ++i) {
        for (const auto& e : adj_[p[i]])
            if (e.to == p[i + 1]) {
                d += e.length;
                break;
            }
    }
    return d;
}

Rational MetricTree::distance(const std::string& u, const std::string& v) const {
    return distance_by_index(node_index(u), node_index(v));
}

MetricTree::TreePoint MetricTree::median(const std::string& xs, const std::string& ys,
                                         const std::string& zs) const {
    int x = node_index(xs), y = node_index(ys), z = node_index(zs);
    // The last vertex of path(x,z) that also lies on path(x,y).
    auto pxy = path(x, y);
    std::vector<char> on_xy(nodes_.size(), 0);
    for (int a : pxy) on_xy[a] = 1;
    auto pxz = path(x, z);
    int med = x;
    for (int a : pxz)
        if (on_xy[a]) med = a;
    return TreePoint{true, med, -1, -1, Rational(0)};
}

std::string MetricTree::TreePoint::describe(const MetricTree& t) const {
    if (at_node) return t.nodes()[node];
    return t.nodes()[edge_u] + "--" + t.nodes()[edge_v] + "@" + offset.str();
}

Rational MetricTree::crossratio(const std::string& x, const std::string& y,
                                const std::string& z, const std::string& w) const {
    Rational v = distance(x, z) + distance(y, w) - distance(x, y) - distance(z, w);
    return max(Rational(0), v) / Rational(2);
}

Rational MetricTree::path_distance(const std::string& xs, const std::string& ys,
                                   const std::string& zs, const std::string& ws) const {
    auto p1 = path(node_index(xs), node_index(ys));
    auto p2 = path(node_index(zs), node_index(ws));
    std::optional<Rational> best;
    for (int a : p1)
        for (int b : p2) {
            Rational d = distance_by_index(a, b);
            if (!best || d < *best) best = d;
        }
    return *best;
}

std::string MetricTree::to_dot() const {
    std::ostringstream os;
    os << "graph tree {\n";
    for (const auto& n : nodes_) os << "  \"" << n << "\";\n";
    for (const auto& e : edges_)
        os << "  \"" << e.u << "\" -- \"" << e.v << "\" [len=\"" << e.length.str() << "\"];\n";
    os << "}\n";
    return os.str();
}

std::string MetricTree::to_json() const {
    nlohmann::json j;
    j["nodes"] = nodes_;
    auto edges = nlohmann::json::array();
    for (const auto& e : edges_) edges.push_back({e.u, e.v, e.length.str()});
    j["edges"] = edges;
    if (!leaves_.empty()) j["leaves"] = leaves_;
    return j.dump();
}

MetricTree MetricTree::from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    std::vector<std::string> nodes = j.at("nodes").get<std::vector<std::string>>();
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges"))
        edges.push_back({e.at(0).get<std::string>(), e.at(1).get<std::string>(),
                         Rational::parse(e.at(2).get<std::string>())});
    std::vector<std::string> leaves;
    if (j.contains("leaves")) leaves = j.at("leaves").get<std::vector<std::string>>();
    return MetricTree(std::move(nodes), std::move(edges), std::move(leaves));
}

namespace {

// Reads a possibly-quoted DOT identifier starting at i; advances i.
std::string dot_ident(const std::string& s, size_t& i) {
    while (i < s.size() && isspace((unsigned char)s[i])) ++i;
    if (i >= s.size()) throw std::invalid_argument("dot: unexpected end of input");
    std::string out;
    if (s[i] == '"') {
        ++i;
        while (i < s.size() && s[i] != '"') out.push_back(s[i++]);
        if (i >= s.size()) throw std::invalid_argument("dot: unterminated string");
        ++i;
    } else {
        while (i < s.size() && (isalnum((unsigned char)s[i]) || s[i] == '_' || s[i] == '/' ||
                                s[i] == '-' || s[i] == '.'))
            out.push_back(s[i++]);
        if (out.empty()) throw std::invalid_argument("dot: expected identifier near position " +
                                                     std::to_string(i));
    }
    return out;
}

}  // namespace

MetricTree MetricTree::from_dot(const std::string& text) {
    // Accepts the subset of DOT emitted by to_dot: node statements and
    // edge statements with a len attribute.
    size_t i = text.find('{');
    if (i == std::string::npos) throw std::invalid_argument("dot: missing '{'");
    ++i;
    std::vector<std::string> nodes;
    std::vector<Edge> edges;
    std::unordered_map<std::string, bool> seen;
    auto add_node = [&](const std::string& n) {
        if (!seen.count(n)) {
            seen[n] = true;
            nodes.push_back(n);
        }
    };
    while (true) {
        while (i < text.size() && (isspace((unsigned char)text[i]) || text[i] == ';')) ++i;
        if (i >= text.size()) throw std::invalid_argument("dot: missing '}'");
        if (text[i] == '}') break;
        std::string a = dot_ident(text, i);
        while (i < text.size() && isspace((unsigned char)text[i])) ++i;
        if (i + 1 < text.size() && text[i] == '-' && text[i + 1] == '-') {
            i += 2;
            std::string b = dot_ident(text, i);
            while (i < text.size() && isspace((unsigned char)text[i])) ++i;
            Rational len(1);
            if (i < text.size() && text[i] == '[') {
                size_t close = text.find(']', i);
                if (close == std::string::npos) throw std::invalid_argument("dot: unterminated attribute list");
                std::string attrs = text.substr(i + 1, close - i - 1);
                auto pos = attrs.find("len");
                if (pos != std::string::npos) {
                    auto eq = attrs.find('=', pos);
                    size_t k = eq + 1;
                    len = Rational::parse(dot_ident(attrs, k));
                }
                i = close + 1;
            }
            add_node(a);
            add_node(b);
            edges.push_back({a, b, len});
        } else {
            add_node(a);
        }
    }
    return MetricTree(std::move(nodes), std::move(edges));
}

}  // namespace hypercross
