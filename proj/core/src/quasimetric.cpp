#include "hypercross/quasimetric.hpp"

#include <algorithm>

#include "json.hpp"

namespace hypercross {

Rational qm_defect(const std::vector<std::vector<Rational>>& m) {
    int n = int(m.size());
    for (int i = 0; i < n; ++i) {
        if (int(m[i].size()) != n) throw std::invalid_argument("quasimetric: matrix not square");
        if (!m[i][i].is_zero()) throw std::invalid_argument("quasimetric: nonzero diagonal");
        for (int j = 0; j < n; ++j) {
            if (m[i][j] < Rational(0)) throw std::invalid_argument("quasimetric: negative entry");
            if (m[i][j] != m[j][i]) throw std::invalid_argument("quasimetric: asymmetric matrix");
        }
    }
    Rational k(0);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            for (int z = 0; z < n; ++z)
                k = max(k, m[x][y] - m[x][z] - m[z][y]);
    return k;
}

QuasimetricSpace::QuasimetricSpace(std::vector<std::string> points,
                                   std::vector<std::vector<Rational>> rho)
    : points_(std::move(points)), rho_(std::move(rho)) {
    defect_ = qm_defect(rho_);
}

int QuasimetricSpace::index_of(const std::string& p) const {
    for (size_t i = 0; i < points_.size(); ++i)
        if (points_[i] == p) return int(i);
    throw std::invalid_argument("quasimetric: unknown point " + p);
}

QuasimetricSpace QuasimetricSpace::from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    std::vector<std::string> pts = j.at("points").get<std::vector<std::string>>();
    int n = int(pts.size());
    std::vector<std::vector<Rational>> m(n, std::vector<Rational>(n, Rational(0)));
    auto idx = [&](const std::string& s) {
        for (int i = 0; i < n; ++i)
            if (pts[i] == s) return i;
        throw std::invalid_argument("quasimetric: unknown point " + s);
    };
    for (const auto& e : j.at("rho")) {
        int a = idx(e.at(0).get<std::string>());
        int b = idx(e.at(1).get<std::string>());
        Rational v = Rational::parse(e.at(2).get<std::string>());
        m[a][b] = v;
        m[b][a] = v;
    }
    return QuasimetricSpace(std::move(pts), std::move(m));
}

QuasimetricSpace QuasimetricSpace::from_tree(const MetricTree& t,
                                             const std::vector<std::string>& points) {
    std::vector<std::string> pts = points.empty() ? t.leaves() : points;
    int n = int(pts.size());
    std::vector<std::vector<Rational>> m(n, std::vector<Rational>(n, Rational(0)));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) m[i][j] = m[j][i] = t.distance(pts[i], pts[j]);
    return QuasimetricSpace(std::move(pts), std::move(m));
}

std::string QuasimetricSpace::to_json() const {
    nlohmann::json j;
    j["points"] = points_;
    auto arr = nlohmann::json::array();
    for (int i = 0; i < size(); ++i)
        for (int k = i + 1; k < size(); ++k)
            arr.push_back({points_[i], points_[k], rho_[i][k].str()});
    j["rho"] = arr;
    j["defect"] = defect_.str();
    return j.dump();
}

CrossratioTable crossratio_from_qm(const QuasimetricSpace& q) {
    if (q.size() < 4) throw std::invalid_argument("crossratio_from_qm: need at least 4 points");
    CrossratioTable tbl(q.points());
    int n = q.size();
    for (int x = 0; x < n; ++x)
        for (int y = x + 1; y < n; ++y)
            for (int z = x; z < n; ++z)
                for (int w = z + 1; w < n; ++w) {
                    if (x == z || x == w || y == z || y == w) continue;
                    Rational s_xy = q.rho(x, y) + q.rho(z, w);
                    Rational s_xw = q.rho(x, w) + q.rho(y, z);
                    Rational s_yw = q.rho(y, w) + q.rho(x, z);
                    Rational m = max(s_xy, max(s_xw, s_yw));
                    tbl.set(x, y, z, w, CrValue{(m - s_xy) / Rational(2), false});
                }
    return tbl;
}

Rational rho_of_triples(const CrossratioTable& tbl, const Triple& X, const Triple& Y) {
    Rational r(0);
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            for (int m = 0; m < 3; ++m)
                for (int nn = m + 1; nn < 3; ++nn) {
                    int a = X[i], b = X[j], c = Y[m], d = Y[nn];
                    // Shared elements across the pairs fall under the
                    // degenerate convention and contribute 0.
                    if (a == c || a == d || b == c || b == d) continue;
                    r = max(r, tbl.value(a, b, c, d));
                }
    return r;
}

namespace {

std::string triple_label(const CrossratioTable& tbl, const Triple& t) {
    return "(" + tbl.ground()[t[0]] + "," + tbl.ground()[t[1]] + "," + tbl.ground()[t[2]] + ")";
}

}  // namespace

QuasimetricSpace rho_on_triples(const CrossratioTable& tbl, const std::vector<Triple>& sample) {
    if (tbl.size() < 3) throw std::invalid_argument("rho_on_triples: ground set too small");
    for (const auto& t : sample)
        if (t[0] == t[1] || t[0] == t[2] || t[1] == t[2])
            throw std::invalid_argument("rho_on_triples: triples must have distinct entries");
    int n = int(sample.size());
    std::vector<std::string> pts;
    pts.reserve(n);
    for (const auto& t : sample) pts.push_back(triple_label(tbl, t));
    std::vector<std::vector<Rational>> m(n, std::vector<Rational>(n, Rational(0)));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) m[i][j] = m[j][i] = rho_of_triples(tbl, sample[i], sample[j]);
    return QuasimetricSpace(std::move(pts), std::move(m));
}

namespace {

bool extend_segment(const QuasimetricSpace& q, const Rational& k, int y,
                    std::vector<int>& seg, long long max_len) {
    int m = int(seg.size()) - 1;
    if (seg.back() == y) return true;
    if (m >= max_len) return false;
    for (int v = 0; v < q.size(); ++v) {
        bool ok = true;
        for (int i = 0; i <= m && ok; ++i) {
            Rational want(m + 1 - i);
            if ((q.rho(seg[i], v) - want).abs() > k) ok = false;
        }
        if (!ok) continue;
        seg.push_back(v);
        if (extend_segment(q, k, y, seg, max_len)) return true;
        seg.pop_back();
    }
    return false;
}

}  // namespace

std::optional<GeodesicSegment> find_geodesic_segment(const QuasimetricSpace& q,
                                                     const Rational& k, int x, int y) {
    if (x < 0 || x >= q.size() || y < 0 || y >= q.size())
        throw std::invalid_argument("find_geodesic_segment: unknown point");
    if (x == y) return GeodesicSegment{{x}, k};
    // rho(x0, xn) must be within k of n, so n <= rho + k.
    Rational bound = q.rho(x, y) + k;
    long long max_len = 1;
    while (Rational(max_len) < bound) ++max_len;
    std::vector<int> seg{x};
    if (extend_segment(q, k, y, seg, max_len)) return GeodesicSegment{seg, k};
    return std::nullopt;
}

}  // namespace hypercross
