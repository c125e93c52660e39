#include "hypercross/tree_boundary.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace hypercross {

// ---------------------------------------------------------------------------
// Words

std::string word_str(const Word& w) {
    if (w.empty()) return "e";
    std::string s;
    for (auto l : w) s.push_back(char('0' + l));
    return s;
}

Word word_parse(const std::string& s) {
    if (s == "e") return {};
    Word w;
    for (char c : s) {
        if (c < '0' || c > '9') throw std::invalid_argument("word: bad letter in " + s);
        w.push_back(uint8_t(c - '0'));
    }
    return w;
}

int word_lcp(const Word& a, const Word& b) {
    size_t n = std::min(a.size(), b.size());
    size_t i = 0;
    while (i < n && a[i] == b[i]) ++i;
    return int(i);
}

long long word_distance(const Word& a, const Word& b) {
    return (long long)a.size() + (long long)b.size() - 2ll * word_lcp(a, b);
}

// ---------------------------------------------------------------------------
// Boundary points

BoundaryPoint BoundaryPoint::periodic(Word preperiod, Word period) {
    if (period.empty()) throw std::invalid_argument("boundary point: empty period");
    BoundaryPoint p;
    p.pre_ = std::move(preperiod);
    p.period_ = std::move(period);
    p.canonicalize();
    return p;
}

BoundaryPoint BoundaryPoint::truncated(Word prefix) {
    BoundaryPoint p;
    p.pre_ = std::move(prefix);
    return p;
}

void BoundaryPoint::canonicalize() {
    // Reduce the period to its primitive root.
    for (size_t d = 1; d <= period_.size() / 2; ++d) {
        if (period_.size() % d != 0) continue;
        bool ok = true;
        for (size_t i = d; i < period_.size() && ok; ++i)
            if (period_[i] != period_[i % d]) ok = false;
        if (ok) {
            period_.resize(d);
            break;
        }
    }
    // Absorb trailing preperiod letters that already match the period.
    while (!pre_.empty() && pre_.back() == period_.back()) {
        pre_.pop_back();
        std::rotate(period_.begin(), period_.end() - 1, period_.end());
    }
}

int BoundaryPoint::known_depth() const {
    return period_.empty() ? int(pre_.size()) : INT32_MAX;
}

int BoundaryPoint::letter(int i) const {
    if (i < int(pre_.size())) return pre_[i];
    if (period_.empty())
        throw depth_error("boundary point: truncated ray queried beyond depth " +
                          std::to_string(pre_.size()));
    return period_[(i - pre_.size()) % period_.size()];
}

Word BoundaryPoint::prefix(int n) const {
    Word w;
    w.reserve(n);
    for (int i = 0; i < n; ++i) w.push_back(uint8_t(letter(i)));
    return w;
}

std::string BoundaryPoint::str() const {
    std::string s = pre_.empty() && period_.empty() ? "" : "";
    for (auto l : pre_) s.push_back(char('0' + l));
    if (!period_.empty()) {
        s.push_back('(');
        for (auto l : period_) s.push_back(char('0' + l));
        s.push_back(')');
    }
    if (s.empty()) s = "e";
    return s;
}

BoundaryPoint BoundaryPoint::parse(const std::string& s) {
    auto open = s.find('(');
    if (open == std::string::npos) return truncated(word_parse(s == "e" ? "e" : s));
    auto close = s.find(')', open);
    if (close == std::string::npos) throw std::invalid_argument("boundary point: missing ')'");
    Word pre = open == 0 ? Word{} : word_parse(s.substr(0, open));
    Word per = word_parse(s.substr(open + 1, close - open - 1));
    return periodic(std::move(pre), std::move(per));
}

bool BoundaryPoint::operator==(const BoundaryPoint& o) const {
    return pre_ == o.pre_ && period_ == o.period_;
}

void BoundaryPoint::validate(const TreeShape& shape) const {
    for (size_t i = 0; i < pre_.size(); ++i)
        if (pre_[i] >= shape.letters_at(int(i)))
            throw std::invalid_argument("boundary point: letter out of range at depth " +
                                        std::to_string(i));
    for (auto l : period_)
        if (l >= shape.branching)
            throw std::invalid_argument("boundary point: period letter out of range");
    if (!period_.empty() && pre_.empty() && period_[0] >= shape.letters_at(0))
        throw std::invalid_argument("boundary point: first letter out of range");
}

int ray_lcp(const BoundaryPoint& x, const BoundaryPoint& y) {
    if (x == y) throw depth_error("ray_lcp: rays are equal");
    // Distinct canonical eventually periodic rays differ within one mixed
    // period; 4096 letters covers every desk-scale ray.
    long long bound = (!x.truncated_form() && !y.truncated_form())
                          ? 4096
                          : std::min(x.known_depth(), y.known_depth());
    for (long long i = 0; i < bound; ++i)
        if (x.letter(int(i)) != y.letter(int(i))) return int(i);
    throw depth_error("ray_lcp: rays indistinguishable at depth " + std::to_string(bound));
}

Rational visual_distance(const BoundaryPoint& x, const BoundaryPoint& y, const Rational& base) {
    if (x == y) return Rational(0);
    return base.pow(ray_lcp(x, y));
}

// ---------------------------------------------------------------------------
// RegularTreeModel

std::vector<Word> RegularTreeModel::atoms(int depth) const {
    std::vector<Word> out;
    Word w;
    std::function<void(int)> rec = [&](int d) {
        if (d == depth) {
            out.push_back(w);
            return;
        }
        for (int l = 0; l < shape.letters_at(d); ++l) {
            w.push_back(uint8_t(l));
            rec(d + 1);
            w.pop_back();
        }
    };
    rec(0);
    return out;
}

long long RegularTreeModel::boundary_crossratio(const BoundaryPoint& x, const BoundaryPoint& y,
                                                const BoundaryPoint& z,
                                                const BoundaryPoint& w) const {
    long long lxy = ray_lcp(x, y), lzw = ray_lcp(z, w), lxz = ray_lcp(x, z), lyw = ray_lcp(y, w);
    return std::max(0ll, lxy + lzw - lxz - lyw);
}

Word RegularTreeModel::median_vertex(const BoundaryPoint& x, const BoundaryPoint& y,
                                     const BoundaryPoint& z) const {
    int lxy = ray_lcp(x, y), lxz = ray_lcp(x, z), lyz = ray_lcp(y, z);
    int m = std::max(lxy, std::max(lxz, lyz));
    if (lxy == m) return x.prefix(m);
    if (lxz == m) return x.prefix(m);
    return y.prefix(m);
}

CrossratioTable RegularTreeModel::table_of_rays(const std::vector<BoundaryPoint>& rays) const {
    std::vector<std::string> labels;
    labels.reserve(rays.size());
    for (const auto& r : rays) labels.push_back(r.str());
    CrossratioTable tbl(labels);
    int n = int(rays.size());
    for (int x = 0; x < n; ++x)
        for (int y = x + 1; y < n; ++y)
            for (int z = x; z < n; ++z)
                for (int w = z + 1; w < n; ++w) {
                    if (x == z || x == w || y == z || y == w) continue;
                    tbl.set(x, y, z, w,
                            CrValue{Rational(boundary_crossratio(rays[x], rays[y], rays[z], rays[w])),
                                    false});
                }
    return tbl;
}

std::string RegularTreeModel::ball_dot(int depth) const {
    std::ostringstream os;
    os << "graph ball {\n";
    std::function<void(const Word&, int)> rec = [&](const Word& w, int d) {
        if (d == depth) return;
        for (int l = 0; l < shape.letters_at(d); ++l) {
            Word c = w;
            c.push_back(uint8_t(l));
            os << "  \"" << word_str(w) << "\" -- \"" << word_str(c) << "\";\n";
            rec(c, d + 1);
        }
    };
    Word root;
    rec(root, 0);
    os << "}\n";
    return os.str();
}

SubtreeEmbedding approximating_subtree(const RegularTreeModel& model,
                                       const std::vector<BoundaryPoint>& rays) {
    if (rays.size() < 2) throw std::invalid_argument("approximating_subtree: need at least 2 rays");
    if (rays.size() > 8) throw std::invalid_argument("approximating_subtree: at most 8 rays");
    int n = int(rays.size());
    // Divergence depths; throws depth_error when two rays cannot be separated.
    std::vector<std::vector<int>> lcp(n, std::vector<int>(n, 0));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            if (rays[i] == rays[j])
                throw std::invalid_argument("approximating_subtree: rays must be distinct");
            lcp[i][j] = lcp[j][i] = ray_lcp(rays[i], rays[j]);
        }
    // Span: prefix closure of all pairwise divergence vertices (plus root).
    std::set<Word> span;
    span.insert(Word{});
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            Word apex = rays[i].prefix(lcp[i][j]);
            for (int d = 0; d <= int(apex.size()); ++d) span.insert(Word(apex.begin(), apex.begin() + d));
        }
    // One leaf node per ray, hanging below its deepest span vertex.
    std::vector<std::string> node_of(n);
    std::vector<Word> leaf_words(n);
    for (int i = 0; i < n; ++i) {
        int deepest = 0;
        for (int j = 0; j < n; ++j)
            if (j != i) deepest = std::max(deepest, lcp[i][j]);
        leaf_words[i] = rays[i].prefix(deepest + 1);
    }
    std::vector<std::string> nodes;
    std::vector<MetricTree::Edge> edges;
    for (const auto& w : span) nodes.push_back(word_str(w));
    for (const auto& w : span) {
        if (w.empty()) continue;
        Word parent(w.begin(), w.end() - 1);
        edges.push_back({word_str(parent), word_str(w), Rational(1)});
    }
    for (int i = 0; i < n; ++i) {
        std::string leaf = word_str(leaf_words[i]) + "*";
        Word attach(leaf_words[i].begin(), leaf_words[i].end() - 1);
        nodes.push_back(leaf);
        edges.push_back({word_str(attach), leaf, Rational(1)});
        node_of[i] = leaf;
    }
    MetricTree tree(std::move(nodes), std::move(edges));
    // Achieved deviation against the geodesic crossratio.
    Rational dev(0);
    for (int x = 0; x < n; ++x)
        for (int y = x + 1; y < n; ++y)
            for (int z = x; z < n; ++z)
                for (int w = z + 1; w < n; ++w) {
                    if (x == z || x == w || y == z || y == w) continue;
                    Rational want(model.boundary_crossratio(rays[x], rays[y], rays[z], rays[w]));
                    Rational got = tree.crossratio(node_of[x], node_of[y], node_of[z], node_of[w]);
                    dev = max(dev, (want - got).abs());
                }
    return SubtreeEmbedding{std::move(tree), std::move(node_of), dev};
}

// ---------------------------------------------------------------------------
// Automorphisms

namespace {

// Direction at a vertex: -1 is the parent, otherwise a child letter.
using Dir = int;

Word step_word(const Word& w, Dir d) {
    Word out = w;
    if (d == -1) {
        if (out.empty()) throw std::logic_error("tree walk: cannot step above the root");
        out.pop_back();
    } else {
        out.push_back(uint8_t(d));
    }
    return out;
}

std::vector<Dir> available_dirs(const TreeShape& shape, const Word& v,
                                const std::vector<Dir>& excluded) {
    std::vector<Dir> out;
    auto excludedp = [&](Dir d) {
        return std::find(excluded.begin(), excluded.end(), d) != excluded.end();
    };
    if (!v.empty() && !excludedp(-1)) out.push_back(-1);
    for (int l = 0; l < shape.letters_at(int(v.size())); ++l)
        if (!excludedp(l)) out.push_back(l);
    return out;
}

class IdentityAuto : public TreeAutomorphism {
public:
    explicit IdentityAuto(TreeShape s) : shape_(s) {}
    const TreeShape& shape() const override { return shape_; }
    Word apply(const Word& w) const override { return w; }
    AutoPtr inverse() const override { return std::make_shared<IdentityAuto>(shape_); }
    std::string describe() const override { return "identity"; }

private:
    TreeShape shape_;
};

class TranslationAuto : public TreeAutomorphism {
public:
    TranslationAuto(TreeShape s, BoundaryPoint minus, BoundaryPoint plus, long long steps)
        : shape_(s), minus_(std::move(minus)), plus_(std::move(plus)), steps_(steps) {
        if (steps_ == 0) throw std::invalid_argument("translation: steps must be nonzero");
        minus_.validate(shape_);
        plus_.validate(shape_);
        apex_ = ray_lcp(minus_, plus_);
    }

    const TreeShape& shape() const override { return shape_; }

    Word axis_vertex(long long j) const {
        if (j >= 0) return plus_.prefix(int(apex_ + j));
        return minus_.prefix(int(apex_ - j));
    }

    // Direction from A(j) toward A(j+1) / A(j-1).
    Dir dir_plus(long long j) const { return j >= 0 ? plus_.letter(int(apex_ + j)) : -1; }
    Dir dir_minus(long long j) const { return j > 0 ? -1 : minus_.letter(int(apex_ - j)); }

    Word apply(const Word& w) const override {
        // Project w onto the axis, then replay the off-axis path from the
        // translated vertex with positional direction relabeling.
        Word apexWord = plus_.prefix(apex_);
        long long j0 = 0;
        std::vector<Dir> path;
        int la = word_lcp(w, apexWord);
        if (la == apex_ && int(w.size()) >= apex_) {
            int kp = apex_, km = apex_;
            while (kp < int(w.size()) && w[kp] == plus_.letter(kp)) ++kp;
            while (km < int(w.size()) && w[km] == minus_.letter(km)) ++km;
            int branch;
            if (kp > km) {
                j0 = kp - apex_;
                branch = kp;
            } else if (km > kp) {
                j0 = -(long long)(km - apex_);
                branch = km;
            } else {
                j0 = 0;
                branch = apex_;
            }
            for (int i = branch; i < int(w.size()); ++i) path.push_back(w[i]);
        } else {
            // w leaves through the apex parent side.
            j0 = 0;
            for (int i = 0; i < apex_ - la; ++i) path.push_back(-1);
            for (int i = la; i < int(w.size()); ++i) path.push_back(w[i]);
        }

        Word src = axis_vertex(j0);
        Word tgt = axis_vertex(j0 + steps_);
        std::vector<Dir> exc_src{dir_plus(j0), dir_minus(j0)};
        std::vector<Dir> exc_tgt{dir_plus(j0 + steps_), dir_minus(j0 + steps_)};
        for (size_t i = 0; i < path.size(); ++i) {
            auto avail_s = available_dirs(shape_, src, exc_src);
            auto avail_t = available_dirs(shape_, tgt, exc_tgt);
            if (avail_s.size() != avail_t.size())
                throw depth_error("translation: degree mismatch along the walk (axis through a "
                                  "root of unequal degree)");
            auto it = std::find(avail_s.begin(), avail_s.end(), path[i]);
            if (it == avail_s.end()) throw std::logic_error("translation: bad path direction");
            Dir ds = path[i];
            Dir dt = avail_t[size_t(it - avail_s.begin())];
            Word old_src = src;
            Word old_tgt = tgt;
            src = step_word(src, ds);
            tgt = step_word(tgt, dt);
            exc_src = {ds == -1 ? Dir(old_src.back()) : Dir(-1)};
            exc_tgt = {dt == -1 ? Dir(old_tgt.back()) : Dir(-1)};
        }
        return tgt;
    }

    AutoPtr inverse() const override {
        return std::make_shared<TranslationAuto>(shape_, minus_, plus_, -steps_);
    }

    std::string describe() const override {
        return "translation(" + minus_.str() + "->" + plus_.str() + ", " +
               std::to_string(steps_) + ")";
    }

    const BoundaryPoint& minus_end() const { return minus_; }
    const BoundaryPoint& plus_end() const { return plus_; }
    long long steps() const { return steps_; }

private:
    TreeShape shape_;
    BoundaryPoint minus_, plus_;
    long long steps_;
    int apex_ = 0;
};

class RaySwapAuto : public TreeAutomorphism {
public:
    RaySwapAuto(TreeShape s, BoundaryPoint x, BoundaryPoint y)
        : shape_(s), x_(std::move(x)), y_(std::move(y)) {
        x_.validate(shape_);
        y_.validate(shape_);
        apex_ = ray_lcp(x_, y_);
    }

    const TreeShape& shape() const override { return shape_; }

    Word apply(const Word& w) const override {
        Word apexWord = x_.prefix(apex_);
        if (word_lcp(w, apexWord) < apex_) return w;  // diverges above the apex
        if (int(w.size()) == apex_) return w;         // the apex itself
        int kx = apex_, ky = apex_;
        while (kx < int(w.size()) && w[kx] == x_.letter(kx)) ++kx;
        while (ky < int(w.size()) && w[ky] == y_.letter(ky)) ++ky;
        if (kx == apex_ && ky == apex_) return w;  // hangs off the apex elsewhere
        if (kx > ky) return rewrite(w, x_, y_, kx);
        return rewrite(w, y_, x_, ky);
    }

    AutoPtr inverse() const override { return std::make_shared<RaySwapAuto>(shape_, x_, y_); }

    std::string describe() const override { return "swap(" + x_.str() + "<->" + y_.str() + ")"; }

private:
    TreeShape shape_;
    BoundaryPoint x_, y_;
    int apex_ = 0;

    // w follows `from` through depth k; move it to the mirrored position
    // along `to`, relabeling the branch letter positionally.
    Word rewrite(const Word& w, const BoundaryPoint& from, const BoundaryPoint& to, int k) const {
        Word out = to.prefix(k);
        if (k < int(w.size())) {
            int lf = from.letter(k);
            int lt = to.letter(k);
            int branch = w[k];
            // letters != lf -> letters != lt, in ascending order
            std::vector<int> sfrom, sto;
            for (int l = 0; l < shape_.letters_at(k); ++l) {
                if (l != lf) sfrom.push_back(l);
                if (l != lt) sto.push_back(l);
            }
            auto it = std::find(sfrom.begin(), sfrom.end(), branch);
            out.push_back(uint8_t(sto[size_t(it - sfrom.begin())]));
            out.insert(out.end(), w.begin() + k + 1, w.end());
        }
        return out;
    }
};

class ExplicitAuto : public TreeAutomorphism {
public:
    ExplicitAuto(TreeShape s, std::vector<std::pair<Word, Word>> mapping) : shape_(s) {
        for (auto& [k, v] : mapping) {
            if (!map_.emplace(k, v).second)
                throw std::invalid_argument("explicit automorphism: duplicate source " + word_str(k));
        }
        // Injectivity and adjacency.
        std::map<Word, Word> inv;
        for (const auto& [k, v] : map_) {
            if (!inv.emplace(v, k).second)
                throw std::invalid_argument("explicit automorphism: not injective at " + word_str(v));
        }
        for (const auto& [k, v] : map_) {
            if (k.empty()) continue;
            Word parent(k.begin(), k.end() - 1);
            auto it = map_.find(parent);
            if (it != map_.end() && word_distance(it->second, v) != 1)
                throw std::invalid_argument("explicit automorphism: does not preserve adjacency at " +
                                            word_str(k));
        }
    }

    const TreeShape& shape() const override { return shape_; }

    Word apply(const Word& w) const override {
        auto it = map_.find(w);
        if (it == map_.end())
            throw depth_error("explicit automorphism: vertex outside materialized ball: " +
                              word_str(w));
        return it->second;
    }

    AutoPtr inverse() const override {
        std::vector<std::pair<Word, Word>> inv;
        inv.reserve(map_.size());
        for (const auto& [k, v] : map_) inv.push_back({v, k});
        return std::make_shared<ExplicitAuto>(shape_, std::move(inv));
    }

    std::string describe() const override {
        return "explicit(" + std::to_string(map_.size()) + " vertices)";
    }

private:
    TreeShape shape_;
    std::map<Word, Word> map_;
};

class ComposedAuto : public TreeAutomorphism {
public:
    explicit ComposedAuto(std::vector<AutoPtr> gs) : gs_(std::move(gs)) {
        if (gs_.empty()) throw std::invalid_argument("composition: empty list");
    }
    const TreeShape& shape() const override { return gs_.front()->shape(); }
    Word apply(const Word& w) const override {
        Word v = w;
        for (const auto& g : gs_) v = g->apply(v);
        return v;
    }
    AutoPtr inverse() const override {
        std::vector<AutoPtr> inv;
        for (auto it = gs_.rbegin(); it != gs_.rend(); ++it) inv.push_back((*it)->inverse());
        return std::make_shared<ComposedAuto>(std::move(inv));
    }
    std::string describe() const override {
        std::string s = "compose(";
        for (size_t i = 0; i < gs_.size(); ++i) s += (i ? ", " : "") + gs_[i]->describe();
        return s + ")";
    }

private:
    std::vector<AutoPtr> gs_;
};

}  // namespace

AutoPtr make_identity(const TreeShape& shape) { return std::make_shared<IdentityAuto>(shape); }

AutoPtr make_translation(const TreeShape& shape, const BoundaryPoint& minus,
                         const BoundaryPoint& plus, long long steps) {
    return std::make_shared<TranslationAuto>(shape, minus, plus, steps);
}

AutoPtr make_ray_swap(const TreeShape& shape, const BoundaryPoint& x, const BoundaryPoint& y) {
    return std::make_shared<RaySwapAuto>(shape, x, y);
}

AutoPtr make_explicit(const TreeShape& shape, std::vector<std::pair<Word, Word>> mapping) {
    return std::make_shared<ExplicitAuto>(shape, std::move(mapping));
}

AutoPtr make_composition(std::vector<AutoPtr> gs) {
    return std::make_shared<ComposedAuto>(std::move(gs));
}

AutoPtr make_power(const AutoPtr& g, long long k) {
    if (k == 0) return make_identity(g->shape());
    std::vector<AutoPtr> gs;
    AutoPtr base = k > 0 ? g : g->inverse();
    for (long long i = 0; i < (k > 0 ? k : -k); ++i) gs.push_back(base);
    return make_composition(std::move(gs));
}

BoundaryPoint TreeAutomorphism::apply_ray(const BoundaryPoint& x, int depth) const {
    // The image of a ray is a geodesic path; once successive vertex images
    // start extending each other the prefix is final.
    for (int D = depth; D <= depth + 96; ++D) {
        if (D + 1 > x.known_depth()) break;
        Word w1 = apply(x.prefix(D));
        Word w2 = apply(x.prefix(D + 1));
        if (w2.size() == w1.size() + 1 && word_lcp(w1, w2) == int(w1.size()) &&
            int(w1.size()) >= depth)
            return BoundaryPoint::truncated(Word(w1.begin(), w1.begin() + depth));
    }
    throw depth_error("apply_ray: image prefix did not stabilize at depth " +
                      std::to_string(depth));
}

std::vector<int> TreeAutomorphism::atom_permutation(int depth) const {
    RegularTreeModel model{shape()};
    auto atom_list = model.atoms(depth);
    std::map<Word, int> id;
    for (size_t i = 0; i < atom_list.size(); ++i) id[atom_list[i]] = int(i);
    std::vector<int> perm(atom_list.size(), -1);
    std::vector<char> hit(atom_list.size(), 0);
    for (size_t i = 0; i < atom_list.size(); ++i) {
        Word img = apply(atom_list[i]);
        auto it = id.find(img);
        if (it == id.end())
            throw depth_error("atom_permutation: image leaves the level (root not fixed)");
        perm[i] = it->second;
        if (hit[it->second]) throw std::logic_error("atom_permutation: not injective");
        hit[it->second] = 1;
    }
    return perm;
}

// ---------------------------------------------------------------------------
// Classification

std::string DynamicsClass::kind_str() const {
    switch (kind) {
        case Kind::elliptic: return "elliptic";
        case Kind::inversion: return "inversion";
        case Kind::loxodromic: return "loxodromic";
    }
    return "?";
}

DynamicsClass classify_automorphism(const AutoPtr& g, int depth) {
    if (depth < 3) throw std::invalid_argument("classify: need materialization depth >= 3");
    RegularTreeModel model{g->shape()};
    std::vector<Word> ball;
    for (int d = 0; d <= depth; ++d) {
        auto level = model.atoms(d);
        ball.insert(ball.end(), level.begin(), level.end());
    }

    std::map<Word, Word> img;
    for (const auto& w : ball) {
        try {
            img[w] = g->apply(w);
        } catch (const depth_error&) {
        }
    }
    if (img.empty()) throw depth_error("classify: no vertex image computable");

    for (const auto& [w, v] : img)
        if (w == v) {
            DynamicsClass dc;
            dc.kind = DynamicsClass::Kind::elliptic;
            dc.fixed_vertex = w;
            return dc;
        }
    for (const auto& [w, v] : img) {
        if (v.size() != w.size() + 1 || word_lcp(w, v) != int(w.size())) continue;
        auto it = img.find(v);
        if (it != img.end() && it->second == w) {
            DynamicsClass dc;
            dc.kind = DynamicsClass::Kind::inversion;
            dc.inverted_edge = std::make_pair(w, v);
            return dc;
        }
    }

    long long ell = -1;
    for (const auto& [w, v] : img) {
        long long d = word_distance(w, v);
        if (ell < 0 || d < ell) ell = d;
    }
    // Confirm the axis: some minimizer must be displaced by 2*ell under g^2.
    Word axis_vertex;
    bool confirmed = false;
    for (const auto& [w, v] : img) {
        if (word_distance(w, v) != ell) continue;
        auto it = img.find(v);
        if (it == img.end()) continue;
        if (word_distance(w, it->second) == 2 * ell) {
            axis_vertex = w;
            confirmed = true;
            break;
        }
    }
    if (!confirmed)
        throw depth_error("classify: displacement minimum not confirmable at this depth");

    DynamicsClass dc;
    dc.kind = DynamicsClass::Kind::loxodromic;
    dc.translation_length = ell;

    auto end_of_orbit = [&](const AutoPtr& h) -> std::optional<BoundaryPoint> {
        std::vector<Word> orbit{axis_vertex};
        try {
            for (int i = 0; i < depth + 8; ++i) {
                Word next = h->apply(orbit.back());
                orbit.push_back(next);
                if (int(next.size()) > depth + 4 * int(ell) + 8) break;
            }
        } catch (const depth_error&) {
        }
        if (orbit.size() < 3) return std::nullopt;
        // Find the deepest tail where images extend each other.
        const Word& w2 = orbit[orbit.size() - 1];
        const Word& w1 = orbit[orbit.size() - 2];
        const Word& w0 = orbit[orbit.size() - 3];
        if (w1.size() > w0.size() && w2.size() > w1.size() &&
            word_lcp(w0, w1) == int(w0.size()) && word_lcp(w1, w2) == int(w1.size())) {
            Word s1(w1.begin() + w0.size(), w1.end());
            Word s2(w2.begin() + w1.size(), w2.end());
            if (s1 == s2 && !s1.empty()) {
                BoundaryPoint cand = BoundaryPoint::periodic(w0, s1);
                try {
                    if (h->apply_ray(cand, int(w2.size())) ==
                        BoundaryPoint::truncated(cand.prefix(int(w2.size()))))
                        return cand;
                } catch (const depth_error&) {
                }
            }
            return BoundaryPoint::truncated(w2);
        }
        return std::nullopt;
    };

    dc.attracting = end_of_orbit(g);
    try {
        dc.repelling = end_of_orbit(g->inverse());
    } catch (...) {
        dc.repelling = std::nullopt;
    }
    if (!dc.attracting)
        throw depth_error("classify: attracting end not visible at this depth");

    // Strict nesting of an attracting cylinder under the map.
    try {
        Word cw = dc.attracting->prefix(std::min(depth - 1, dc.attracting->known_depth()));
        Word icw = g->apply(cw);
        dc.strict_nesting_checked =
            icw.size() > cw.size() && word_lcp(icw, cw) == int(cw.size());
    } catch (const depth_error&) {
        dc.strict_nesting_checked = false;
    }
    return dc;
}

// ---------------------------------------------------------------------------
// Graph limits

namespace {

Rational word_ray_dist(const Word& u, const BoundaryPoint& r, const Rational& base) {
    int L = 0;
    while (L < int(u.size()) && L < r.known_depth() && u[L] == r.letter(L)) ++L;
    return base.pow(L);
}

Rational word_word_dist(const Word& u, const Word& v, const Rational& base) {
    return base.pow(word_lcp(u, v));
}

struct GraphSample {
    std::vector<Word> src;  // depth-m atoms
    std::vector<Word> img;  // image prefixes at depth m
};

GraphSample graph_of(const AutoPtr& g, int depth) {
    RegularTreeModel model{g->shape()};
    GraphSample gs;
    gs.src = model.atoms(depth);
    gs.img.reserve(gs.src.size());
    for (const auto& u : gs.src) {
        BoundaryPoint ray = BoundaryPoint::periodic(u, Word{0});
        gs.img.push_back(g->apply_ray(ray, depth).prefix(depth));
    }
    return gs;
}

Word majority_word(const std::vector<Word>& ws) {
    std::map<Word, int> count;
    for (const auto& w : ws) ++count[w];
    Word best;
    int bestc = -1;
    for (const auto& [w, c] : count)
        if (c > bestc) {
            best = w;
            bestc = c;
        }
    return best;
}

std::vector<Word> top_words(const std::vector<Word>& ws, int k) {
    std::map<Word, int> count;
    for (const auto& w : ws) ++count[w];
    std::vector<std::pair<int, Word>> ranked;
    for (const auto& [w, c] : count) ranked.push_back({-c, w});
    std::sort(ranked.begin(), ranked.end());
    std::vector<Word> out;
    for (int i = 0; i < k && i < int(ranked.size()); ++i) out.push_back(ranked[i].second);
    return out;
}

// Full Hausdorff distance of a finite graph sample to ({a} x M) u (M x {c})
// in the max-product visual metric at atom resolution.
Rational hausdorff_to_spike(const GraphSample& gs, const BoundaryPoint& a, const BoundaryPoint& c,
                            const Rational& base) {
    Rational h(0);
    // graph -> target
    for (size_t i = 0; i < gs.src.size(); ++i)
        h = max(h, min(word_ray_dist(gs.src[i], a, base), word_ray_dist(gs.img[i], c, base)));
    // target -> graph, sampled on atoms
    for (size_t j = 0; j < gs.src.size(); ++j) {
        // (a, w_j) against all graph pairs
        Rational best1, best2;
        bool first = true;
        for (size_t i = 0; i < gs.src.size(); ++i) {
            Rational d1 = max(word_ray_dist(gs.src[i], a, base),
                              word_word_dist(gs.img[i], gs.src[j], base));
            Rational d2 = max(word_word_dist(gs.src[i], gs.src[j], base),
                              word_ray_dist(gs.img[i], c, base));
            if (first) {
                best1 = d1;
                best2 = d2;
                first = false;
            } else {
                best1 = min(best1, d1);
                best2 = min(best2, d2);
            }
        }
        h = max(h, max(best1, best2));
    }
    return h;
}

}  // namespace

std::optional<CollapsingLimit> collapsing_limit(const std::vector<AutoPtr>& seq, int depth,
                                                const Rational& base) {
    if (seq.empty()) throw std::invalid_argument("collapsing_limit: empty sequence");
    if (depth < 2) throw std::invalid_argument("collapsing_limit: depth must be at least 2");
    std::vector<GraphSample> graphs;
    graphs.reserve(seq.size());
    for (const auto& g : seq) graphs.push_back(graph_of(g, depth));

    const GraphSample& last = graphs.back();
    Word c_atom = majority_word(last.img);
    Word a_atom;
    bool have_a = false;
    try {
        GraphSample ginv = graph_of(seq.back()->inverse(), depth);
        a_atom = majority_word(ginv.img);
        have_a = true;
    } catch (...) {
    }
    if (!have_a) {
        // Sources whose image escapes the level-1 cylinder of c cluster at a.
        std::vector<Word> outs;
        for (size_t i = 0; i < last.src.size(); ++i)
            if (last.img[i].empty() || c_atom.empty() || last.img[i][0] != c_atom[0])
                outs.push_back(last.src[i]);
        if (outs.empty()) return std::nullopt;
        Word common = outs[0];
        for (const auto& w : outs) common.resize(word_lcp(common, w));
        a_atom = common;
        a_atom.resize(std::min(a_atom.size(), size_t(depth)));
        while (int(a_atom.size()) < depth) a_atom.push_back(0);
    }
    BoundaryPoint a = BoundaryPoint::truncated(a_atom);
    BoundaryPoint c = BoundaryPoint::truncated(c_atom);

    // Uniform convergence to c off the level-1 cylinder at a, with a
    // non-increasing tail.
    auto sup_out = [&](const GraphSample& gs) {
        Rational s(0);
        for (size_t i = 0; i < gs.src.size(); ++i) {
            if (!gs.src[i].empty() && !a_atom.empty() && gs.src[i][0] == a_atom[0]) continue;
            s = max(s, word_ray_dist(gs.img[i], c, base));
        }
        return s;
    };
    std::vector<Rational> outs;
    for (const auto& gs : graphs) outs.push_back(sup_out(gs));
    if (outs.back() > base.pow(depth - 1)) return std::nullopt;
    int tail = std::min<int>(3, int(outs.size()) - 1);
    for (int i = int(outs.size()) - tail; i < int(outs.size()); ++i)
        if (outs[i] > outs[i - 1]) return std::nullopt;

    CollapsingLimit lim{a, c, {}};
    for (const auto& gs : graphs) lim.trace.push_back(hausdorff_to_spike(gs, a, c, base));
    return lim;
}

std::optional<GerasimovLimit> gerasimov_limit(const std::vector<AutoPtr>& seq, int budget,
                                              int depth, const Rational& base) {
    if (budget < 2) throw std::invalid_argument("gerasimov_limit: budget must be at least 2");
    if (seq.empty()) throw std::invalid_argument("gerasimov_limit: empty sequence");
    std::vector<GraphSample> graphs;
    for (const auto& g : seq) graphs.push_back(graph_of(g, depth));

    // Candidate spikes: frequent image atoms of the tail elements forward
    // (for Q) and backward (for P).
    std::vector<Word> qcand = top_words(graphs.back().img, 2);
    if (graphs.size() >= 2)
        for (const auto& w : top_words(graphs[graphs.size() - 2].img, 1)) qcand.push_back(w);
    std::vector<Word> pcand;
    try {
        pcand = top_words(graph_of(seq.back()->inverse(), depth).img, 2);
        if (seq.size() >= 2)
            for (const auto& w : top_words(graph_of(seq[seq.size() - 2]->inverse(), depth).img, 1))
                pcand.push_back(w);
    } catch (...) {
        for (size_t i = 0; i < graphs.back().src.size(); ++i) pcand.push_back(graphs.back().src[i]);
    }
    auto dedup = [](std::vector<Word>& v) {
        std::vector<Word> out;
        for (const auto& w : v)
            if (std::find(out.begin(), out.end(), w) == out.end()) out.push_back(w);
        v = out;
        if (v.size() > 3) v.resize(3);
    };
    dedup(qcand);
    dedup(pcand);

    Rational tol = base.pow(depth - 1);
    auto one_sided_gap = [&](const GraphSample& gs, const std::vector<Word>& P,
                             const std::vector<Word>& Q) {
        Rational g(0);
        for (size_t i = 0; i < gs.src.size(); ++i) {
            Rational dp, dq;
            bool fp = true, fq = true;
            for (const auto& p : P) {
                Rational d = word_word_dist(gs.src[i], p, base);
                if (fp || d < dp) dp = d;
                fp = false;
            }
            for (const auto& q : Q) {
                Rational d = word_word_dist(gs.img[i], q, base);
                if (fq || d < dq) dq = d;
                fq = false;
            }
            g = max(g, min(dp, dq));
        }
        return g;
    };

    for (int total = 2; total <= budget - 1; ++total) {
        for (int sp = 1; sp < total; ++sp) {
            int sq = total - sp;
            // Enumerate subsets of the candidate lists.
            std::vector<std::vector<Word>> psets, qsets;
            std::function<void(std::vector<Word>&, const std::vector<Word>&, size_t, int,
                               std::vector<std::vector<Word>>&)>
                subsets = [&](std::vector<Word>& cur, const std::vector<Word>& cand, size_t from,
                              int want, std::vector<std::vector<Word>>& out) {
                    if (want == 0) {
                        out.push_back(cur);
                        return;
                    }
                    for (size_t i = from; i < cand.size(); ++i) {
                        cur.push_back(cand[i]);
                        subsets(cur, cand, i + 1, want - 1, out);
                        cur.pop_back();
                    }
                };
            std::vector<Word> cur;
            subsets(cur, pcand, 0, sp, psets);
            subsets(cur, qcand, 0, sq, qsets);
            for (const auto& P : psets)
                for (const auto& Q : qsets) {
                    std::vector<Rational> gaps;
                    for (const auto& gs : graphs) gaps.push_back(one_sided_gap(gs, P, Q));
                    if (gaps.back() <= tol) {
                        GerasimovLimit lim;
                        for (const auto& p : P) lim.P.push_back(BoundaryPoint::truncated(p));
                        for (const auto& q : Q) lim.Q.push_back(BoundaryPoint::truncated(q));
                        lim.residual = gaps.back();
                        lim.gaps = gaps;
                        return lim;
                    }
                }
        }
    }
    return std::nullopt;
}

ConicalWitness conical_witness(const BoundaryPoint& x, const AutoPtr& g, int depth,
                               const Rational& base) {
    DynamicsClass cls = classify_automorphism(g, depth);
    if (cls.kind != DynamicsClass::Kind::loxodromic)
        throw std::invalid_argument("conical_witness: automorphism must be loxodromic");
    if (!cls.repelling)
        throw depth_error("conical_witness: repelling end not available at this depth");

    auto same_at_depth = [&](const BoundaryPoint& p, const BoundaryPoint& q) {
        int d = std::min(std::min(p.known_depth(), q.known_depth()), depth);
        return p.prefix(d) == q.prefix(d);
    };

    AutoPtr b;
    bool conj = false;
    if (same_at_depth(*cls.repelling, x)) {
        b = g;
    } else if (same_at_depth(*cls.attracting, x)) {
        b = g->inverse();
    } else {
        // Conjugate so the repelling end lands on x; the swap is an
        // involution, so h g h^{-1} applies as h, g, h left-to-right.
        AutoPtr h = make_ray_swap(g->shape(), *cls.repelling, x);
        b = make_composition({h, g, h});
        conj = true;
    }
    DynamicsClass bc = classify_automorphism(b, depth);
    if (bc.kind != DynamicsClass::Kind::loxodromic || !bc.attracting)
        throw depth_error("conical_witness: conjugate not classifiable at this depth");
    BoundaryPoint c = *bc.attracting;

    ConicalWitness wit{x, x, c, conj, {}, Rational(0), false};

    // The repelling end is fixed, so gamma_i(x) = x = b for every power.
    int powers = depth + 3;
    std::vector<AutoPtr> seq;
    for (int i = 1; i <= powers; ++i) seq.push_back(make_power(b, i));

    Word xa = x.prefix(1);
    for (const auto& gi : seq) {
        GraphSample gs = graph_of(gi, depth);
        Rational s(0);
        for (size_t i = 0; i < gs.src.size(); ++i) {
            if (gs.src[i][0] == xa[0]) continue;
            s = max(s, word_ray_dist(gs.img[i], c, base));
        }
        wit.collapse_trace.push_back(s);
    }
    bool collapse_ok = wit.collapse_trace.back() <= base.pow(depth - 1);
    size_t tail_from = wit.collapse_trace.size() >= 4 ? wit.collapse_trace.size() - 3 : 1;
    for (size_t i = tail_from; i < wit.collapse_trace.size(); ++i)
        if (wit.collapse_trace[i] > wit.collapse_trace[i - 1]) collapse_ok = false;

    // The fixed end itself must stay put and differ from the limit.
    bool fixed_ok = same_at_depth(b->apply_ray(x, depth - 1), x);
    bool distinct_ok = !same_at_depth(x, c);

    // Compact-family form: the triples (x, z, x_i) with x_i = b^{-i}(y0)
    // normalize under b^i to (x, b^i z, y0), whose pairwise separation must
    // stay bounded below.  y0 and z are depth-2 cylinders away from x and c.
    RegularTreeModel model{g->shape()};
    std::vector<BoundaryPoint> generic;
    for (const auto& w : model.atoms(2)) {
        BoundaryPoint cand = BoundaryPoint::periodic(w, Word{0});
        if (!same_at_depth(cand, x) && !same_at_depth(cand, c) && cand.prefix(2) != x.prefix(2) &&
            cand.prefix(2) != c.prefix(2))
            generic.push_back(cand);
        if (generic.size() == 2) break;
    }
    if (generic.size() < 2) throw depth_error("conical_witness: no generic reference rays");
    BoundaryPoint y0 = generic[0], z = generic[1];
    Rational sep;
    bool first = true;
    for (int i = 1; i <= powers; ++i) {
        BoundaryPoint zi = make_power(b, i)->apply_ray(z, depth - 1);
        Rational m = min(visual_distance(x, zi, base),
                         min(visual_distance(x, y0, base), visual_distance(zi, y0, base)));
        if (first || m < sep) sep = m;
        first = false;
    }
    wit.triple_separation = sep;
    bool sep_ok = sep >= base.pow(depth);

    wit.ok = collapse_ok && fixed_ok && distinct_ok && sep_ok;
    return wit;
}

// ---------------------------------------------------------------------------
// Interpolation along an axis

namespace {

struct AxisContext {
    const TreeShape& shape;
    const BoundaryPoint& a;  // plus end
    const BoundaryPoint& b;  // minus end
    int apex;

    Word axis_vertex(long long q) const {
        return q >= 0 ? a.prefix(int(apex + q)) : b.prefix(int(apex - q));
    }

    // A ray branching off the axis at position q.
    BoundaryPoint branch(long long q) const {
        Word v = axis_vertex(q);
        std::vector<int> excluded;
        if (q > 0) excluded = {a.letter(int(apex + q))};
        else if (q < 0) excluded = {b.letter(int(apex - q))};
        else excluded = {a.letter(apex), b.letter(apex)};
        for (int l = 0; l < shape.letters_at(int(v.size())); ++l) {
            if (std::find(excluded.begin(), excluded.end(), l) != excluded.end()) continue;
            Word w = v;
            w.push_back(uint8_t(l));
            return BoundaryPoint::periodic(w, Word{0});
        }
        if (q == 0 && apex > 0) {
            // No free child at the apex: leave through the parent side.
            Word w = a.prefix(apex - 1);
            for (int l = 0; l < shape.letters_at(apex - 1); ++l) {
                if (l == a.letter(apex - 1)) continue;
                w.push_back(uint8_t(l));
                return BoundaryPoint::periodic(w, Word{0});
            }
        }
        throw depth_error("interpolation: no free direction at axis position " +
                          std::to_string(q));
    }
};

}  // namespace

InterpolatedRay interpolated_ray(const RegularTreeModel& model, const BoundaryPoint& a,
                                 const BoundaryPoint& b, const BoundaryPoint& c, int length) {
    if (a == b) throw std::invalid_argument("interpolated_ray: endpoints must differ");
    if (c == a || c == b) throw std::invalid_argument("interpolated_ray: c must differ from both ends");
    AxisContext ax{model.shape, a, b, ray_lcp(b, a)};
    // Position of c along the axis.
    int kp = ray_lcp(c, a), km = ray_lcp(c, b);
    long long j0 = 0;
    if (kp > ax.apex) j0 = kp - ax.apex;
    else if (km > ax.apex) j0 = -(long long)(km - ax.apex);

    InterpolatedRay out;
    out.max_deviation = Rational(0);
    for (int i = -length; i <= length; ++i)
        out.points.push_back(i == 0 ? c : ax.branch(j0 + i));
    for (int i = -length; i <= length; ++i)
        for (int j = i + 1; j <= length; ++j) {
            long long v = model.boundary_crossratio(b, out.points[i + length], a,
                                                    out.points[j + length]);
            out.max_deviation = max(out.max_deviation, (Rational(v) - Rational(j - i)).abs());
        }
    return out;
}

RayTripleReport ray_triple_geodesic(const RegularTreeModel& model, const BoundaryPoint& a,
                                    const BoundaryPoint& b, int window) {
    if (a == b) throw std::invalid_argument("ray_triple_geodesic: endpoints must differ");
    if (window < 1) throw std::invalid_argument("ray_triple_geodesic: window must be positive");
    AxisContext ax{model.shape, a, b, ray_lcp(b, a)};

    // Branch points from -window to +window; the report exposes 0..window.
    std::map<long long, BoundaryPoint> xs;
    for (long long q = -window; q <= window; ++q) xs.emplace(q, ax.branch(q));

    std::vector<BoundaryPoint> rays{a, b};
    for (long long q = -window; q <= window; ++q) rays.push_back(xs.at(q));
    // Deep witness for the third ideal point: a ray leaving x_0 far down.
    BoundaryPoint x0 = xs.at(0);
    Word deep = x0.prefix(ax.apex + 2 * window + 4);
    deep.push_back(uint8_t(x0.letter(ax.apex + 2 * window + 4) == 0 ? 1 : 0));
    BoundaryPoint zdeep = BoundaryPoint::periodic(deep, Word{0});
    rays.push_back(zdeep);

    CrossratioTable tbl = model.table_of_rays(rays);
    auto id = [&](const BoundaryPoint& r) { return tbl.index_of(r.str()); };
    int ia = id(a), ib = id(b);

    RayTripleReport rep;
    for (long long q = 0; q <= window; ++q) rep.points.push_back(xs.at(q));
    rep.rho.assign(window + 1, std::vector<Rational>(window + 1, Rational(0)));
    rep.max_rho_deviation = Rational(0);
    for (long long i = 0; i <= window; ++i)
        for (long long j = 0; j <= window; ++j) {
            Triple X{ib, ia, id(xs.at(i))};
            Triple Y{ib, ia, id(xs.at(j))};
            Rational r = rho_of_triples(tbl, X, Y);
            rep.rho[i][j] = r;
            rep.max_rho_deviation =
                max(rep.max_rho_deviation, (r - Rational(std::llabs(i - j))).abs());
        }

    // Centre quantities of the triple (a, b, x_0) against deep triples
    // representing the three ideal points.
    Triple c0{id(a), id(b), id(x0)};
    Triple A{ib, ia, id(xs.at(window))};        // toward a
    Triple B{ia, ib, id(xs.at(-window))};       // toward b
    Triple X0{ib, id(x0), id(zdeep)};           // toward x_0
    auto gromov = [&](const Triple& U, const Triple& V) {
        Rational s = rho_of_triples(tbl, U, c0) + rho_of_triples(tbl, V, c0) -
                     rho_of_triples(tbl, U, V);
        return max(Rational(0), s) / Rational(2);
    };
    rep.centre_gromov = {gromov(A, B), gromov(A, X0), gromov(B, X0)};

    Word med_c0 = model.median_vertex(a, b, x0);
    Word mA = model.median_vertex(b, a, xs.at(window));
    Word mB = model.median_vertex(a, b, xs.at(-window));
    Word mX = model.median_vertex(b, x0, zdeep);
    rep.median_deviation = {
        (rho_of_triples(tbl, A, c0) - Rational(word_distance(mA, med_c0))).abs(),
        (rho_of_triples(tbl, B, c0) - Rational(word_distance(mB, med_c0))).abs(),
        (rho_of_triples(tbl, X0, c0) - Rational(word_distance(mX, med_c0))).abs()};
    return rep;
}

}  // namespace hypercross
