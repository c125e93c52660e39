#include "hypercross/crossratio.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "hypercross/simplex.hpp"
#include "json.hpp"

namespace hypercross {

CrossratioTable::CrossratioTable(std::vector<std::string> ground) : ground_(std::move(ground)) {
    for (size_t i = 0; i < ground_.size(); ++i) {
        if (!index_.emplace(ground_[i], int(i)).second)
            throw std::invalid_argument("crossratio: duplicate ground label " + ground_[i]);
    }
}

int CrossratioTable::index_of(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) throw std::invalid_argument("crossratio: unknown label " + label);
    return it->second;
}

CrossratioTable::Key CrossratioTable::normal_key(int x, int y, int z, int w) {
    if (x > y) std::swap(x, y);
    if (z > w) std::swap(z, w);
    if (std::make_pair(x, y) > std::make_pair(z, w)) {
        std::swap(x, z);
        std::swap(y, w);
    }
    return {x, y, z, w};
}

void CrossratioTable::set(int x, int y, int z, int w, CrValue value) {
    if (x == y || z == w || x == z || x == w || y == z || y == w)
        throw std::invalid_argument("crossratio: set requires a distinct 4-tuple");
    if (!value.infinite && value.v < Rational(0))
        throw std::invalid_argument("crossratio: negative value");
    entries_[normal_key(x, y, z, w)] = value;
}

CrValue CrossratioTable::get(int x, int y, int z, int w) const {
    // Convention: if the two pairs share an element the value is 0, and a
    // repeat inside one pair makes both pair distances collapse to 0 too.
    if (x == z || x == w || y == z || y == w || x == y || z == w)
        return CrValue{Rational(0), false};
    auto it = entries_.find(normal_key(x, y, z, w));
    if (it == entries_.end())
        throw std::invalid_argument("crossratio: missing entry (" + ground_[x] + " " + ground_[y] +
                                    " | " + ground_[z] + " " + ground_[w] + ")");
    return it->second;
}

Rational CrossratioTable::value(int x, int y, int z, int w) const {
    CrValue v = get(x, y, z, w);
    if (v.infinite) throw std::domain_error("crossratio: infinite entry where finite required");
    return v.v;
}

bool CrossratioTable::total() const {
    int n = size();
    for (int x = 0; x < n; ++x)
        for (int y = x + 1; y < n; ++y)
            for (int z = 0; z < n; ++z)
                for (int w = z + 1; w < n; ++w) {
                    if (x == z || x == w || y == z || y == w) continue;
                    if (!entries_.count(normal_key(x, y, z, w))) return false;
                }
    return true;
}

CrossratioTable CrossratioTable::from_tree(const MetricTree& t,
                                           const std::vector<std::string>& ground) {
    std::vector<std::string> g = ground.empty() ? t.leaves() : ground;
    CrossratioTable tbl(g);
    int n = tbl.size();
    for (int x = 0; x < n; ++x)
        for (int y = x + 1; y < n; ++y)
            for (int z = x; z < n; ++z)
                for (int w = z + 1; w < n; ++w) {
                    if (x == z || x == w || y == z || y == w) continue;
                    tbl.set(x, y, z, w, CrValue{t.crossratio(g[x], g[y], g[z], g[w]), false});
                }
    return tbl;
}

CrossratioTable CrossratioTable::from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    CrossratioTable tbl(j.at("ground").get<std::vector<std::string>>());
    for (const auto& e : j.at("entries")) {
        int x = tbl.index_of(e.at(0).get<std::string>());
        int y = tbl.index_of(e.at(1).get<std::string>());
        int z = tbl.index_of(e.at(2).get<std::string>());
        int w = tbl.index_of(e.at(3).get<std::string>());
        std::string v = e.at(4).get<std::string>();
        if (v == "inf")
            tbl.set(x, y, z, w, CrValue{Rational(0), true});
        else
            tbl.set(x, y, z, w, CrValue{Rational::parse(v), false});
    }
    return tbl;
}

std::string CrossratioTable::to_json() const {
    nlohmann::json j;
    j["ground"] = ground_;
    auto arr = nlohmann::json::array();
    for (const auto& [k, v] : entries_)
        arr.push_back({ground_[k[0]], ground_[k[1]], ground_[k[2]], ground_[k[3]], v.str()});
    j["entries"] = arr;
    return j.dump();
}

namespace {

void for_each_subset(int n, int k, const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
        fn(idx);
        int i = k - 1;
        while (i >= 0 && idx[i] == n - k + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

bool tuple_has_infinite(const CrossratioTable& tbl, const std::vector<int>& f) {
    for (int a = 0; a < int(f.size()); ++a)
        for (int b = a + 1; b < int(f.size()); ++b)
            for (int c = a; c < int(f.size()); ++c)
                for (int d = c + 1; d < int(f.size()); ++d) {
                    if (a == c || a == d || b == c || b == d) continue;
                    if (tbl.get(f[a], f[b], f[c], f[d]).infinite) return true;
                }
    return false;
}

// Least constant over the three pairings of a 4-subset.
Rational four_subset_constant(const CrossratioTable& tbl, const std::vector<int>& f,
                              std::vector<int>* best_labeling) {
    // Labeling (x,y,z,w): the free pairing is (xy|zw); the other two must
    // be within k of 0.
    static const int pairings[3][4] = {{0, 1, 2, 3}, {0, 2, 1, 3}, {0, 3, 1, 2}};
    std::optional<Rational> best;
    for (const auto& p : pairings) {
        int x = f[p[0]], y = f[p[1]], z = f[p[2]], w = f[p[3]];
        Rational k = max(tbl.value(x, z, y, w), tbl.value(x, w, y, z));
        if (!best || k < *best) {
            best = k;
            if (best_labeling) *best_labeling = {x, y, z, w};
        }
    }
    return *best;
}

Rational five_subset_constant(const CrossratioTable& tbl, const std::vector<int>& f,
                              std::vector<int>* best_labeling) {
    std::vector<int> perm(5);
    std::iota(perm.begin(), perm.end(), 0);
    std::optional<Rational> best;
    do {
        int x = f[perm[0]], y = f[perm[1]], z = f[perm[2]], w = f[perm[3]], u = f[perm[4]];
        Rational k = (tbl.value(x, y, z, u) - tbl.value(x, y, w, u)).abs();
        if (best && !(k < *best)) continue;
        k = max(k, (tbl.value(x, u, z, w) - tbl.value(y, u, z, w)).abs());
        if (best && !(k < *best)) continue;
        k = max(k, (tbl.value(x, y, z, w) - tbl.value(x, y, z, u) - tbl.value(x, u, z, w)).abs());
        if (best && !(k < *best)) continue;
        // Every remaining distinct value on the subset must be near 0.
        // The five constrained keys are (xy|zu), (xy|wu), (xu|zw), (yu|zw), (xy|zw).
        bool pruned = false;
        for (int a = 0; a < 5 && !pruned; ++a)
            for (int b = a + 1; b < 5 && !pruned; ++b)
                for (int c = a; c < 5 && !pruned; ++c)
                    for (int d = c + 1; d < 5; ++d) {
                        if (a == c || a == d || b == c || b == d) continue;
                        auto key = CrossratioTable::normal_key(f[perm[a]], f[perm[b]],
                                                               f[perm[c]], f[perm[d]]);
                        if (key == CrossratioTable::normal_key(x, y, z, u)) continue;
                        if (key == CrossratioTable::normal_key(x, y, w, u)) continue;
                        if (key == CrossratioTable::normal_key(x, u, z, w)) continue;
                        if (key == CrossratioTable::normal_key(y, u, z, w)) continue;
                        if (key == CrossratioTable::normal_key(x, y, z, w)) continue;
                        k = max(k, tbl.value(key[0], key[1], key[2], key[3]));
                        if (best && !(k < *best)) {
                            pruned = true;
                            break;
                        }
                    }
        if (pruned) continue;
        if (!best || k < *best) {
            best = k;
            if (best_labeling) *best_labeling = {x, y, z, w, u};
            if (best->is_zero()) break;  // cannot improve on 0
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return *best;
}

}  // namespace

HyperbolicityCertificate hyperbolicity_constant(const CrossratioTable& tbl,
                                                std::optional<Rational> caller_bound) {
    if (tbl.size() < 4) throw std::invalid_argument("hyperbolicity: ground set too small");
    HyperbolicityCertificate cert;
    cert.k = Rational(0);
    for_each_subset(tbl.size(), 4, [&](const std::vector<int>& f) {
        if (tuple_has_infinite(tbl, f)) {
            cert.skipped_infinite.push_back(f);
            return;
        }
        std::vector<int> lab;
        Rational k = four_subset_constant(tbl, f, &lab);
        cert.witnesses.push_back({f, lab, k});
        if (k > cert.k) cert.k = k;
        if (caller_bound && k > *caller_bound && !cert.violation)
            cert.violation = cert.witnesses.back();
    });
    if (tbl.size() >= 5) {
        for_each_subset(tbl.size(), 5, [&](const std::vector<int>& f) {
            if (tuple_has_infinite(tbl, f)) {
                cert.skipped_infinite.push_back(f);
                return;
            }
            std::vector<int> lab;
            Rational k = five_subset_constant(tbl, f, &lab);
            cert.witnesses.push_back({f, lab, k});
            if (k > cert.k) cert.k = k;
            if (caller_bound && k > *caller_bound && !cert.violation)
                cert.violation = cert.witnesses.back();
        });
    }
    return cert;
}

namespace {

// Depth-first chain search for one ordered tuple.
bool find_chain(const CrossratioTable& tbl, const Rational& p, int x, int z, int w,
                std::vector<int>& chain, std::vector<char>& used, int max_len) {
    int m = int(chain.size()) - 1;  // index of the last placed element
    int last = chain.back();
    if (last == w) return true;
    if (m == max_len) return false;
    for (int v = 0; v < tbl.size(); ++v) {
        if (used[v] || v == x || v == z) continue;
        // v would sit at index m+1; check against all previous u_i.
        bool ok = true;
        for (int i = 0; i <= m && ok; ++i) {
            Rational want(m + 1 - i);
            if ((tbl.value(x, chain[i], z, v) - want).abs() > p) ok = false;
        }
        if (!ok) continue;
        chain.push_back(v);
        used[v] = 1;
        if (find_chain(tbl, p, x, z, w, chain, used, max_len)) return true;
        used[v] = 0;
        chain.pop_back();
    }
    return false;
}

}  // namespace

PathPropertyReport check_path_property(const CrossratioTable& tbl, const Rational& p) {
    PathPropertyReport rep;
    rep.satisfied = true;
    int n = tbl.size();
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            for (int z = 0; z < n; ++z)
                for (int w = 0; w < n; ++w) {
                    if (x == y || x == z || x == w || y == z || y == w || z == w) continue;
                    std::vector<int> chain{y};
                    std::vector<char> used(n, 0);
                    used[y] = 1;
                    bool found = find_chain(tbl, p, x, z, w, chain, used, n);
                    ChainWitness cw;
                    cw.tuple = {x, y, z, w};
                    cw.chain = found ? chain : std::vector<int>{};
                    rep.witnesses.push_back(cw);
                    if (!found) {
                        rep.satisfied = false;
                        if (!rep.first_failure) rep.first_failure = cw.tuple;
                    }
                }
    return rep;
}

QuasiUltrametric quasi_ultrametric_matrix(const CrossratioTable& tbl, int a, int b,
                                          const Rational& lambda) {
    if (a == b) throw std::invalid_argument("quasi_ultrametric: base points must differ");
    if (!(lambda > Rational(1))) throw std::invalid_argument("quasi_ultrametric: lambda must exceed 1");
    QuasiUltrametric qu;
    qu.lambda = lambda;
    std::vector<int> rest;
    for (int i = 0; i < tbl.size(); ++i)
        if (i != a && i != b) rest.push_back(i);
    int m = int(rest.size());
    qu.labels.reserve(m);
    for (int i : rest) qu.labels.push_back(tbl.ground()[i]);
    qu.exponent.assign(m, std::vector<Rational>(m, Rational(0)));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            if (i == j) continue;
            qu.exponent[i][j] = tbl.value(a, b, rest[i], rest[j]);
        }
    return qu;
}

Rational QuasiUltrametric::value(int i, int j) const {
    if (i == j) return Rational(0);
    if (!exponent[i][j].is_integer())
        throw std::domain_error("quasi_ultrametric: non-integer exponent " + exponent[i][j].str() +
                                "; value is irrational");
    return lambda.pow(-exponent[i][j].to_integer());
}

bool QuasiUltrametric::integral() const {
    for (size_t i = 0; i < exponent.size(); ++i)
        for (size_t j = 0; j < exponent.size(); ++j)
            if (i != j && !exponent[i][j].is_integer()) return false;
    return true;
}

std::vector<int> cr_ball(const CrossratioTable& tbl, int a, int b, int x, const Rational& r) {
    if (a == b || a == x || b == x)
        throw std::invalid_argument("cr_ball: a, b, x must be pairwise distinct");
    std::vector<int> out{x};
    for (int y = 0; y < tbl.size(); ++y) {
        if (y == a || y == b || y == x) continue;
        if (tbl.value(a, b, x, y) >= r) out.push_back(y);
    }
    return out;
}

namespace {

// Unrooted binary leaf-labeled topology on n leaves: leaves 0..n-1,
// internal nodes n..2n-3, built by sequential leaf insertion.
struct Topology {
    int n;
    std::vector<std::pair<int, int>> edges;
};

void enumerate_topologies(int n, const std::function<void(const Topology&)>& fn) {
    if (n < 4) throw std::invalid_argument("fit_tree: need at least 4 ground elements");
    Topology base;
    base.n = n;
    base.edges = {{0, n}, {1, n}, {2, n}};
    std::function<void(Topology&, int)> rec = [&](Topology& t, int leaf) {
        if (leaf == n) {
            fn(t);
            return;
        }
        int fresh = n + (leaf - 2);
        size_t m = t.edges.size();
        for (size_t e = 0; e < m; ++e) {
            auto [u, v] = t.edges[e];
            t.edges[e] = {u, fresh};
            t.edges.push_back({fresh, v});
            t.edges.push_back({leaf, fresh});
            rec(t, leaf + 1);
            t.edges.pop_back();
            t.edges.pop_back();
            t.edges[e] = {u, v};
        }
    };
    rec(base, 3);
}

// Leaf bitmask on one side of each internal edge.
struct SplitInfo {
    std::vector<int> internal_edges;        // indices into edges
    std::vector<uint32_t> side;             // leaf mask on the lower-endpoint side
};

SplitInfo edge_splits(const Topology& t) {
    int total = t.n * 2 - 2;
    std::vector<std::vector<int>> adj(total);
    for (size_t e = 0; e < t.edges.size(); ++e) {
        adj[t.edges[e].first].push_back(int(e));
        adj[t.edges[e].second].push_back(int(e));
    }
    SplitInfo info;
    for (size_t e = 0; e < t.edges.size(); ++e) {
        auto [u, v] = t.edges[e];
        if (u < t.n || v < t.n) continue;  // leaf edge: never on a bridge
        // Collect leaves on u's side after removing edge e.
        uint32_t mask = 0;
        std::vector<int> stack{u};
        std::vector<char> seen(total, 0);
        seen[u] = 1;
        while (!stack.empty()) {
            int a = stack.back();
            stack.pop_back();
            if (a < t.n) mask |= (1u << a);
            for (int ei : adj[a]) {
                if (ei == int(e)) continue;
                auto [p, q] = t.edges[ei];
                int b = (p == a) ? q : p;
                if (!seen[b]) {
                    seen[b] = 1;
                    stack.push_back(b);
                }
            }
        }
        info.internal_edges.push_back(int(e));
        info.side.push_back(mask);
    }
    return info;
}

}  // namespace

TreeEmbedding fit_tree(const CrossratioTable& tbl) {
    int n = tbl.size();
    if (n > 8) throw std::invalid_argument("fit_tree: exhaustive regime handles at most 8 elements");
    if (!tbl.total()) throw std::invalid_argument("fit_tree: table must be total");

    // Gather the three pairing values of every 4-subset once.
    struct Quartet {
        std::array<int, 4> q;
        std::array<Rational, 3> val;  // pairings (01|23), (02|13), (03|12)
    };
    std::vector<Quartet> quartets;
    for_each_subset(n, 4, [&](const std::vector<int>& f) {
        Quartet qq;
        qq.q = {f[0], f[1], f[2], f[3]};
        qq.val = {tbl.value(f[0], f[1], f[2], f[3]), tbl.value(f[0], f[2], f[1], f[3]),
                  tbl.value(f[0], f[3], f[1], f[2])};
        quartets.push_back(qq);
    });

    std::optional<Rational> best_dev;
    Topology best_topo;
    std::vector<Rational> best_lengths;

    enumerate_topologies(n, [&](const Topology& topo) {
        SplitInfo splits = edge_splits(topo);
        int ne = int(splits.internal_edges.size());

        // Constant part of the Chebyshev bound: values the topology pins to 0.
        Rational t_const(0);
        struct Row {
            std::vector<int> bridge;  // indices into splits arrays
            Rational v;
        };
        std::vector<Row> rows;
        for (const auto& qq : quartets) {
            static const int pairidx[3][4] = {{0, 1, 2, 3}, {0, 2, 1, 3}, {0, 3, 1, 2}};
            int split_pairing = -1;
            std::vector<int> bridge;
            for (int pi = 0; pi < 3 && split_pairing < 0; ++pi) {
                uint32_t m1 = (1u << qq.q[pairidx[pi][0]]) | (1u << qq.q[pairidx[pi][1]]);
                uint32_t m2 = (1u << qq.q[pairidx[pi][2]]) | (1u << qq.q[pairidx[pi][3]]);
                std::vector<int> b;
                for (int e = 0; e < ne; ++e) {
                    uint32_t s = splits.side[e];
                    bool separates = ((s & (m1 | m2)) == m1) || ((s & (m1 | m2)) == m2);
                    if (separates) b.push_back(e);
                }
                if (!b.empty()) {
                    split_pairing = pi;
                    bridge = b;
                }
            }
            for (int pi = 0; pi < 3; ++pi) {
                if (pi == split_pairing) continue;
                t_const = max(t_const, qq.val[pi]);
            }
            if (split_pairing >= 0) rows.push_back({bridge, qq.val[split_pairing]});
        }
        if (best_dev && !(t_const < *best_dev)) return;  // cannot strictly improve

        // LP variables: t, L_0..L_{ne-1}; minimize t subject to
        //   sum(L in bridge) - t <= v,  -sum + -t <= -v,  -t <= -t_const.
        std::vector<std::vector<Rational>> A;
        std::vector<Rational> b;
        for (const auto& row : rows) {
            std::vector<Rational> a1(ne + 1, Rational(0)), a2(ne + 1, Rational(0));
            a1[0] = Rational(-1);
            a2[0] = Rational(-1);
            for (int e : row.bridge) {
                a1[1 + e] = Rational(1);
                a2[1 + e] = Rational(-1);
            }
            A.push_back(a1);
            b.push_back(row.v);
            A.push_back(a2);
            b.push_back(-row.v);
        }
        {
            std::vector<Rational> a(ne + 1, Rational(0));
            a[0] = Rational(-1);
            A.push_back(a);
            b.push_back(-t_const);
        }
        std::vector<Rational> c(ne + 1, Rational(0));
        c[0] = Rational(1);
        auto sol = solve_lp_min(A, b, c);
        if (!sol) return;  // cannot happen: the LP is always feasible
        if (!best_dev || sol->objective < *best_dev) {
            best_dev = sol->objective;
            best_topo = topo;
            best_lengths.assign(ne, Rational(0));
            for (int e = 0; e < ne; ++e) best_lengths[e] = sol->x[1 + e];
        }
    });

    // Materialize the winning topology: unit leaf edges (crossratios are
    // insensitive to them), LP lengths on internal edges, zero-length
    // internal edges contracted.
    const Topology& topo = best_topo;
    SplitInfo splits = edge_splits(topo);
    std::map<int, Rational> internal_len;
    for (size_t i = 0; i < splits.internal_edges.size(); ++i)
        internal_len[splits.internal_edges[i]] = best_lengths[i];

    int total = topo.n * 2 - 2;
    // Union-find over contracted nodes.
    std::vector<int> rep(total);
    std::iota(rep.begin(), rep.end(), 0);
    std::function<int(int)> find = [&](int a) { return rep[a] == a ? a : rep[a] = find(rep[a]); };
    for (size_t e = 0; e < topo.edges.size(); ++e) {
        auto it = internal_len.find(int(e));
        if (it != internal_len.end() && it->second.is_zero())
            rep[find(topo.edges[e].first)] = find(topo.edges[e].second);
    }
    auto node_name = [&](int a) -> std::string {
        a = find(a);
        if (a < topo.n) return tbl.ground()[a];
        return "s" + std::to_string(a - topo.n);
    };
    std::vector<std::string> names;
    std::vector<MetricTree::Edge> edges;
    std::map<std::string, bool> seen;
    for (int a = 0; a < total; ++a) {
        std::string nm = node_name(a);
        if (!seen.count(nm)) {
            seen[nm] = true;
            names.push_back(nm);
        }
    }
    for (size_t e = 0; e < topo.edges.size(); ++e) {
        auto [u, v] = topo.edges[e];
        if (find(u) == find(v)) continue;
        auto it = internal_len.find(int(e));
        Rational len = (it != internal_len.end()) ? it->second : Rational(1);
        edges.push_back({node_name(u), node_name(v), len});
    }
    std::vector<std::string> leaf_labels = tbl.ground();
    TreeEmbedding emb{MetricTree(std::move(names), std::move(edges), leaf_labels), {}, *best_dev};
    for (const auto& g : tbl.ground()) emb.node_of[g] = g;
    return emb;
}

}  // namespace hypercross
