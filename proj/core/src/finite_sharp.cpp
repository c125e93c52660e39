#include "hypercross/finite_sharp.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace hypercross {

namespace {

Perm identity_perm(int n) {
    Perm p(n);
    std::iota(p.begin(), p.end(), 0);
    return p;
}

Perm compose(const Perm& f, const Perm& g) {  // (f o g)(x) = f(g(x))
    Perm h(f.size());
    for (size_t i = 0; i < f.size(); ++i) h[i] = f[g[i]];
    return h;
}

void check_perm(const Perm& p, int n) {
    if (int(p.size()) != n) throw std::invalid_argument("perm group: generator size mismatch");
    std::vector<char> hit(n, 0);
    for (int v : p) {
        if (v < 0 || v >= n || hit[v]) throw std::invalid_argument("perm group: not a bijection");
        hit[v] = 1;
    }
}

}  // namespace

FinitePermGroup::FinitePermGroup(int degree, std::vector<Perm> generators)
    : degree_(degree), gens_(std::move(generators)) {
    if (degree_ < 1) throw std::invalid_argument("perm group: degree must be positive");
    for (const auto& g : gens_) check_perm(g, degree_);
}

const std::vector<Perm>& FinitePermGroup::elements(size_t cap) const {
    if (!elements_.empty()) return elements_;
    std::set<Perm> seen;
    std::vector<Perm> frontier{identity_perm(degree_)};
    seen.insert(frontier[0]);
    while (!frontier.empty()) {
        Perm cur = frontier.back();
        frontier.pop_back();
        for (const auto& g : gens_) {
            Perm nxt = compose(g, cur);
            if (seen.insert(nxt).second) {
                if (seen.size() > cap)
                    throw std::runtime_error("perm group: materialization cap exceeded");
                frontier.push_back(nxt);
            }
        }
    }
    elements_.assign(seen.begin(), seen.end());
    return elements_;
}

FinitePermGroup FinitePermGroup::symmetric(int n) {
    std::vector<Perm> gens;
    if (n >= 2) {
        Perm t = identity_perm(n);
        std::swap(t[0], t[1]);
        gens.push_back(t);
        Perm c(n);
        for (int i = 0; i < n; ++i) c[i] = (i + 1) % n;
        gens.push_back(c);
    }
    return FinitePermGroup(n, gens);
}

FinitePermGroup FinitePermGroup::alternating(int n) {
    std::vector<Perm> gens;
    if (n >= 3) {
        Perm t = identity_perm(n);  // 3-cycle (0 1 2)
        t[0] = 1;
        t[1] = 2;
        t[2] = 0;
        gens.push_back(t);
        if (n > 3) {
            if (n % 2 == 1) {
                Perm c(n);  // full cycle is even for odd n
                for (int i = 0; i < n; ++i) c[i] = (i + 1) % n;
                gens.push_back(c);
            } else {
                Perm c(n);  // cycle on the last n-1 points is even
                c[0] = 0;
                for (int i = 1; i < n; ++i) c[i] = i % (n - 1) + 1;
                gens.push_back(c);
            }
        }
    }
    return FinitePermGroup(n, gens);
}

FinitePermGroup FinitePermGroup::from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    int n = j.at("n").get<int>();
    std::vector<Perm> gens;
    for (const auto& g : j.at("generators")) gens.push_back(g.get<Perm>());
    return FinitePermGroup(n, gens);
}

std::string FinitePermGroup::to_json() const {
    nlohmann::json j;
    j["n"] = degree_;
    j["generators"] = gens_;
    return j.dump();
}

SharpCertificate verify_sharp_transitive(const FinitePermGroup& g, int k, size_t cap) {
    if (k < 1 || k > g.degree())
        throw std::invalid_argument("verify_sharp_transitive: bad tuple size");
    const auto& elems = g.elements(cap);
    SharpCertificate cert{};
    cert.group_order = (long long)elems.size();
    cert.tuple_count = 1;
    for (int i = 0; i < k; ++i) cert.tuple_count *= (g.degree() - i);

    // Freeness: no nonidentity element fixes a distinct k-tuple.  It
    // suffices to scan elements fixing >= k points.
    cert.free = true;
    Perm id = identity_perm(g.degree());
    for (const auto& e : elems) {
        if (e == id) continue;
        int fixed = 0;
        for (int i = 0; i < g.degree(); ++i) fixed += (e[i] == i);
        if (fixed >= k) {
            cert.free = false;
            cert.fixing_element = e;
            break;
        }
    }

    // Transitivity: orbit of one base tuple reaches every distinct k-tuple.
    std::vector<int> base(k);
    std::iota(base.begin(), base.end(), 0);
    std::set<std::vector<int>> orbit;
    for (const auto& e : elems) {
        std::vector<int> t(k);
        for (int i = 0; i < k; ++i) t[i] = e[base[i]];
        orbit.insert(t);
    }
    cert.transitive = (long long)orbit.size() == cert.tuple_count;
    if (!cert.transitive) {
        // Exhibit an unreached tuple.
        std::vector<int> t(k);
        std::function<bool(int)> rec = [&](int pos) {
            if (pos == k) {
                if (!orbit.count(t)) {
                    cert.stuck_tuple = t;
                    return true;
                }
                return false;
            }
            for (int v = 0; v < g.degree(); ++v) {
                if (std::find(t.begin(), t.begin() + pos, v) != t.begin() + pos) continue;
                t[pos] = v;
                if (rec(pos + 1)) return true;
            }
            return false;
        };
        rec(0);
    }
    cert.sharp = cert.free && cert.transitive && cert.group_order == cert.tuple_count;
    return cert;
}

// ---------------------------------------------------------------------------
// GF(q) tables for prime powers up to 16

namespace {

struct FieldTable {
    int q;
    std::vector<std::vector<int>> add, mul;
};

FieldTable gf_table(int q) {
    static const std::map<int, std::pair<int, std::vector<int>>> poly = {
        // q -> {p, irreducible poly coefficients (low degree first, monic)}
        {4, {2, {1, 1}}},     // x^2 + x + 1
        {8, {2, {1, 1, 0}}},  // x^3 + x + 1
        {9, {3, {1, 0}}},     // x^2 + 1
        {16, {2, {1, 1, 0, 0}}},  // x^4 + x + 1
    };
    auto is_prime = [](int n) {
        if (n < 2) return false;
        for (int d = 2; d * d <= n; ++d)
            if (n % d == 0) return false;
        return true;
    };
    FieldTable t;
    t.q = q;
    t.add.assign(q, std::vector<int>(q, 0));
    t.mul.assign(q, std::vector<int>(q, 0));
    if (is_prime(q)) {
        for (int a = 0; a < q; ++a)
            for (int b = 0; b < q; ++b) {
                t.add[a][b] = (a + b) % q;
                t.mul[a][b] = (a * b) % q;
            }
        return t;
    }
    auto it = poly.find(q);
    if (it == poly.end()) throw std::invalid_argument("finite field: unsupported order");
    int p = it->second.first;
    const auto& red = it->second.second;  // x^m = -(red[0] + red[1] x + ...)
    int m = int(red.size());
    // Elements are base-p digit vectors encoded as integers.
    auto digits = [&](int a) {
        std::vector<int> d(m, 0);
        for (int i = 0; i < m; ++i) {
            d[i] = a % p;
            a /= p;
        }
        return d;
    };
    auto encode = [&](const std::vector<int>& d) {
        int a = 0;
        for (int i = m - 1; i >= 0; --i) a = a * p + d[i];
        return a;
    };
    for (int a = 0; a < q; ++a)
        for (int b = 0; b < q; ++b) {
            auto da = digits(a), db = digits(b);
            std::vector<int> s(m);
            for (int i = 0; i < m; ++i) s[i] = (da[i] + db[i]) % p;
            t.add[a][b] = encode(s);
            // polynomial multiplication then reduction
            std::vector<int> prod(2 * m - 1, 0);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) prod[i + j] = (prod[i + j] + da[i] * db[j]) % p;
            for (int i = 2 * m - 2; i >= m; --i) {
                int c = prod[i];
                if (c == 0) continue;
                prod[i] = 0;
                for (int j = 0; j < m; ++j)
                    prod[i - m + j] = ((prod[i - m + j] - c * red[j]) % p + p * p) % p;
            }
            t.mul[a][b] = encode(std::vector<int>(prod.begin(), prod.begin() + m));
        }
    return t;
}

}  // namespace

void NearField::verify() const {
    auto fail = [&](const std::string& what) {
        throw std::logic_error("near-field verification failed: " + what);
    };
    // (elements, +) abelian group with 0.
    for (int a = 0; a < q; ++a) {
        if (plus(a, 0) != a) fail("additive identity");
        bool inv = false;
        for (int b = 0; b < q; ++b) inv |= plus(a, b) == 0;
        if (!inv) fail("additive inverse");
        for (int b = 0; b < q; ++b) {
            if (plus(a, b) != plus(b, a)) fail("additive commutativity");
            for (int c = 0; c < q; ++c)
                if (plus(plus(a, b), c) != plus(a, plus(b, c))) fail("additive associativity");
        }
    }
    // Nonzero elements form a multiplicative group with 1.
    for (int a = 1; a < q; ++a) {
        if (times(a, 1) != a || times(1, a) != a) fail("multiplicative identity");
        bool inv = false;
        for (int b = 1; b < q; ++b) inv |= times(a, b) == 1;
        if (!inv) fail("multiplicative inverse");
        for (int b = 1; b < q; ++b)
            for (int c = 1; c < q; ++c)
                if (times(times(a, b), c) != times(a, times(b, c)))
                    fail("multiplicative associativity");
    }
    for (int a = 0; a < q; ++a)
        if (times(a, 0) != 0 || times(0, a) != 0) fail("zero absorbs");
    // Right distributivity: (a+b)c = ac + bc.
    for (int a = 0; a < q; ++a)
        for (int b = 0; b < q; ++b)
            for (int c = 0; c < q; ++c)
                if (times(plus(a, b), c) != plus(times(a, c), times(b, c)))
                    fail("right distributivity");
}

NearField dickson_near_field(int q) {
    if (q != 9)
        throw std::invalid_argument("dickson_near_field: only the order-9 structure is built");
    FieldTable f = gf_table(9);
    // Squares of GF(9)*.
    std::vector<char> is_square(9, 0);
    for (int a = 1; a < 9; ++a) is_square[f.mul[a][a]] = 1;
    auto cube = [&](int a) { return f.mul[a][f.mul[a][a]]; };  // Frobenius x -> x^3
    NearField nf;
    nf.q = 9;
    nf.add = f.add;
    nf.mul.assign(9, std::vector<int>(9, 0));
    for (int a = 0; a < 9; ++a)
        for (int b = 0; b < 9; ++b)
            nf.mul[a][b] = (b != 0 && !is_square[b]) ? f.mul[cube(a)][b] : f.mul[a][b];
    nf.verify();
    // Record a left-distributivity failure witness.
    for (int a = 0; a < 9 && !nf.left_distributivity_failure; ++a)
        for (int b = 0; b < 9 && !nf.left_distributivity_failure; ++b)
            for (int c = 0; c < 9; ++c)
                if (nf.times(a, nf.plus(b, c)) != nf.plus(nf.times(a, b), nf.times(a, c))) {
                    nf.left_distributivity_failure = std::array<int, 3>{a, b, c};
                    break;
                }
    return nf;
}

FinitePermGroup affine_group(const NearField& nf) {
    nf.verify();
    // x -> x*a + b; right distributivity makes composition close up.
    std::vector<Perm> gens;
    std::set<Perm> all;
    for (int a = 1; a < nf.q; ++a)
        for (int b = 0; b < nf.q; ++b) {
            Perm p(nf.q);
            for (int x = 0; x < nf.q; ++x) p[x] = nf.plus(nf.times(x, a), b);
            all.insert(p);
        }
    gens.assign(all.begin(), all.end());
    return FinitePermGroup(nf.q, gens);
}

FinitePermGroup pgl2_fq_action(int q) {
    if (q < 2 || q > 16) throw std::invalid_argument("pgl2_fq_action: unsupported order");
    FieldTable f = gf_table(q);
    // Projective points: 0..q-1 are (x : 1), q is (1 : 0).
    const int INF = q;
    auto inv = [&](int a) {
        for (int b = 1; b < q; ++b)
            if (f.mul[a][b] == 1) return b;
        throw std::logic_error("field inverse");
    };
    auto neg = [&](int a) {
        for (int b = 0; b < q; ++b)
            if (f.add[a][b] == 0) return b;
        throw std::logic_error("field negation");
    };
    // Generators: z + 1, z * g (g generating the unit group), 1/z.
    int gen = 0;
    for (int c = 2; c < q; ++c) {
        std::set<int> powers;
        int x = 1;
        for (int i = 0; i < q - 1; ++i) {
            x = f.mul[x][c];
            powers.insert(x);
        }
        if (int(powers.size()) == q - 1) {
            gen = c;
            break;
        }
    }
    std::vector<Perm> gens;
    {
        Perm t(q + 1);
        for (int x = 0; x < q; ++x) t[x] = f.add[x][1];
        t[INF] = INF;
        gens.push_back(t);
    }
    if (gen != 0) {
        Perm s(q + 1);
        for (int x = 0; x < q; ++x) s[x] = f.mul[x][gen];
        s[INF] = INF;
        gens.push_back(s);
    }
    {
        Perm r(q + 1);
        r[0] = INF;
        r[INF] = 0;
        for (int x = 1; x < q; ++x) r[x] = inv(x);
        gens.push_back(r);
        (void)neg;
    }
    return FinitePermGroup(q + 1, gens);
}

}  // namespace hypercross
