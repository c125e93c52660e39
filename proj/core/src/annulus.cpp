#include "hypercross/annulus.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "json.hpp"

namespace hypercross {

int Region::count() const {
    int c = 0;
    for (char a : atoms) c += a != 0;
    return c;
}

bool Region::subset_of(const Region& o) const {
    for (size_t i = 0; i < atoms.size(); ++i)
        if (atoms[i] && !o.atoms[i]) return false;
    return true;
}

bool Region::disjoint(const Region& o) const {
    for (size_t i = 0; i < atoms.size(); ++i)
        if (atoms[i] && o.atoms[i]) return false;
    return true;
}

Region Region::of(int universe, const std::vector<int>& ids) {
    Region r;
    r.atoms.assign(universe, 0);
    for (int i : ids) {
        if (i < 0 || i >= universe) throw std::invalid_argument("region: atom id out of range");
        r.atoms[i] = 1;
    }
    return r;
}

Rational AtomMetric::diameter(const Region& r) const {
    Rational d(0);
    bool any = false;
    for (int i = 0; i < size(); ++i) {
        if (!r.contains(i)) continue;
        any = true;
        d = max(d, intra[i]);
        for (int j = i + 1; j < size(); ++j)
            if (r.contains(j)) d = max(d, pairwise[i][j]);
    }
    if (!any) throw std::invalid_argument("atom metric: diameter of an empty region");
    return d;
}

Rational AtomMetric::separation(const Region& a, const Region& b) const {
    std::optional<Rational> best;
    for (int i = 0; i < size(); ++i) {
        if (!a.contains(i)) continue;
        for (int j = 0; j < size(); ++j) {
            if (!b.contains(j)) continue;
            Rational d = i == j ? Rational(0) : pairwise[i][j];
            if (!best || d < *best) best = d;
        }
    }
    if (!best) throw std::invalid_argument("atom metric: separation of an empty region");
    return *best;
}

AtomMetric visual_atom_metric(const RegularTreeModel& model, int depth, const Rational& base) {
    auto words = model.atoms(depth);
    AtomMetric m;
    m.atom_names.reserve(words.size());
    for (const auto& w : words) m.atom_names.push_back(word_str(w));
    int n = int(words.size());
    m.pairwise.assign(n, std::vector<Rational>(n, Rational(0)));
    m.intra.assign(n, base.pow(depth));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            m.pairwise[i][j] = m.pairwise[j][i] = base.pow(word_lcp(words[i], words[j]));
    return m;
}

AnnulusSystem::AnnulusSystem(std::vector<std::string> universe, std::vector<Annulus> annuli,
                             bool symmetric_closure)
    : universe_(std::move(universe)) {
    for (const auto& a : annuli) add(a);
    if (symmetric_closure)
        for (const auto& a : annuli) add(a.negated());
}

void AnnulusSystem::validate(const Annulus& a) const {
    if (int(a.minus.atoms.size()) != int(universe_.size()) ||
        int(a.plus.atoms.size()) != int(universe_.size()))
        throw std::invalid_argument("annulus: universe mismatch");
    if (!a.minus.disjoint(a.plus)) throw std::invalid_argument("annulus: sides must be disjoint");
    for (size_t i = 0; i < universe_.size(); ++i)
        if (!a.minus.atoms[i] && !a.plus.atoms[i]) return;
    throw std::invalid_argument("annulus: sides must leave the complement nonempty");
}

void AnnulusSystem::add(const Annulus& a) {
    validate(a);
    if (std::find(annuli_.begin(), annuli_.end(), a) == annuli_.end()) annuli_.push_back(a);
}

int AnnulusSystem::atom_index(const std::string& name) const {
    for (size_t i = 0; i < universe_.size(); ++i)
        if (universe_[i] == name) return int(i);
    throw std::invalid_argument("annulus system: unknown atom " + name);
}

bool AnnulusSystem::symmetric() const {
    for (const auto& a : annuli_)
        if (std::find(annuli_.begin(), annuli_.end(), a.negated()) == annuli_.end()) return false;
    return true;
}

AnnulusSystem AnnulusSystem::from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    std::vector<std::string> universe = j.at("universe").get<std::vector<std::string>>();
    std::vector<Annulus> annuli;
    auto region_of = [&](const nlohmann::json& arr) {
        Region r;
        r.atoms.assign(universe.size(), 0);
        for (const auto& name : arr) {
            auto s = name.get<std::string>();
            auto it = std::find(universe.begin(), universe.end(), s);
            if (it == universe.end())
                throw std::invalid_argument("annulus system: unknown atom " + s);
            r.atoms[it - universe.begin()] = 1;
        }
        return r;
    };
    for (const auto& a : j.at("annuli"))
        annuli.push_back(Annulus{region_of(a.at("minus")), region_of(a.at("plus"))});
    return AnnulusSystem(std::move(universe), std::move(annuli));
}

std::string AnnulusSystem::to_json() const {
    nlohmann::json j;
    j["universe"] = universe_;
    auto arr = nlohmann::json::array();
    for (const auto& a : annuli_) {
        nlohmann::json ja;
        auto names = [&](const Region& r) {
            std::vector<std::string> out;
            for (size_t i = 0; i < universe_.size(); ++i)
                if (r.atoms[i]) out.push_back(universe_[i]);
            return out;
        };
        ja["minus"] = names(a.minus);
        ja["plus"] = names(a.plus);
        arr.push_back(ja);
    }
    j["annuli"] = arr;
    return j.dump();
}

bool region_lt_annulus(const Region& k, const Annulus& a) { return k.subset_of(a.minus); }
bool annulus_lt_region(const Annulus& a, const Region& k) { return k.subset_of(a.plus); }

bool nesting_lt(const Annulus& a, const Annulus& b) {
    if (a.minus.atoms.size() != b.minus.atoms.size())
        throw std::invalid_argument("nesting: universe mismatch");
    // complement(a.plus) subset of b.minus
    for (size_t i = 0; i < a.plus.atoms.size(); ++i)
        if (!a.plus.atoms[i] && !b.minus.atoms[i]) return false;
    return true;
}

long long separation_count(const Region& K, const Region& L, const AnnulusSystem& sys) {
    if (K.count() == 0 || L.count() == 0)
        throw std::invalid_argument("separation_count: regions must be nonempty");
    // Candidate annuli lie strictly between K and L; the nesting relation
    // restricted to them is a strict partial order, so the longest chain is
    // a longest path in a DAG.
    std::vector<int> cand;
    for (size_t i = 0; i < sys.annuli().size(); ++i)
        if (region_lt_annulus(K, sys.annuli()[i]) && annulus_lt_region(sys.annuli()[i], L))
            cand.push_back(int(i));
    int m = int(cand.size());
    if (m == 0) return 0;
    std::vector<std::vector<int>> succ(m);
    std::vector<int> indeg(m, 0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            if (i == j) continue;
            if (nesting_lt(sys.annuli()[cand[i]], sys.annuli()[cand[j]])) {
                succ[i].push_back(j);
                ++indeg[j];
            }
        }
    // Kahn order + longest-path DP.
    std::vector<int> order;
    std::vector<int> q;
    for (int i = 0; i < m; ++i)
        if (indeg[i] == 0) q.push_back(i);
    while (!q.empty()) {
        int v = q.back();
        q.pop_back();
        order.push_back(v);
        for (int s : succ[v])
            if (--indeg[s] == 0) q.push_back(s);
    }
    if (int(order.size()) != m) throw std::logic_error("separation_count: nesting relation cyclic");
    std::vector<long long> len(m, 1);
    long long best = 0;
    for (int v : order) {
        for (int s : succ[v]) len[s] = std::max(len[s], len[v] + 1);
        best = std::max(best, len[v]);
    }
    return best;
}

CrossratioTable induced_crossratio(const AnnulusSystem& sys, const std::vector<int>& sample) {
    if (sample.size() < 4) throw std::invalid_argument("induced_crossratio: sample too small");
    std::vector<std::string> labels;
    for (int i : sample) labels.push_back(sys.universe()[i]);
    CrossratioTable tbl(labels);
    int n = int(sample.size());
    int u = int(sys.universe().size());
    for (int x = 0; x < n; ++x)
        for (int y = x + 1; y < n; ++y)
            for (int z = x; z < n; ++z)
                for (int w = z + 1; w < n; ++w) {
                    if (x == z || x == w || y == z || y == w) continue;
                    long long v = separation_count(Region::of(u, {sample[x], sample[y]}),
                                                   Region::of(u, {sample[z], sample[w]}), sys);
                    tbl.set(x, y, z, w, CrValue{Rational(v), false});
                }
    return tbl;
}

AxiomReport check_axioms(const AnnulusSystem& sys, const std::vector<int>& sample,
                         long long a3_threshold) {
    AxiomReport rep{};
    rep.a1_all_finite = true;  // finite systems only produce finite chains
    rep.max_value = 0;
    rep.a2_least_k = Rational(0);
    int u = int(sys.universe().size());
    int n = int(sample.size());
    for (int x = 0; x < n; ++x)
        for (int y = x + 1; y < n; ++y)
            for (int z = y + 1; z < n; ++z)
                for (int w = z + 1; w < n; ++w) {
                    long long v1 = separation_count(Region::of(u, {sample[x], sample[y]}),
                                                    Region::of(u, {sample[z], sample[w]}), sys);
                    long long v2 = separation_count(Region::of(u, {sample[x], sample[z]}),
                                                    Region::of(u, {sample[y], sample[w]}), sys);
                    long long v3 = separation_count(Region::of(u, {sample[x], sample[w]}),
                                                    Region::of(u, {sample[y], sample[z]}), sys);
                    rep.max_value = std::max({rep.max_value, v1, v2, v3});
                    // (A2): no labeling may leave both dual values above k,
                    // so the least k is the second largest of the three.
                    long long second = v1 + v2 + v3 - std::max({v1, v2, v3}) -
                                       std::min({v1, v2, v3});
                    rep.a2_least_k = max(rep.a2_least_k, Rational(second));
                }
    rep.a3_threshold = a3_threshold;
    rep.a3_min_count = -1;
    rep.a3_met = true;
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            for (int z = y + 1; z < n; ++z) {
                if (x == y || x == z) continue;
                long long v = separation_count(Region::of(u, {sample[x]}),
                                               Region::of(u, {sample[y], sample[z]}), sys);
                if (rep.a3_min_count < 0 || v < rep.a3_min_count) rep.a3_min_count = v;
                if (v < a3_threshold) rep.a3_met = false;
            }
    rep.a4_met = true;
    for (int x = 0; x < n; ++x)
        for (int y = x + 1; y < n; ++y) {
            long long v = separation_count(Region::of(u, {sample[x]}),
                                           Region::of(u, {sample[y]}), sys);
            if (v <= 0) {
                rep.a4_met = false;
                rep.a4_failures.push_back({sample[x], sample[y]});
            }
        }
    return rep;
}

std::pair<Rational, Rational> annulus_metrics(const Annulus& a, const AtomMetric& d) {
    if (a.minus.count() == 0 || a.plus.count() == 0)
        throw std::invalid_argument("annulus_metrics: empty side");
    Rational lambda = min(d.diameter(a.minus), d.diameter(a.plus));
    Rational mu = d.separation(a.minus, a.plus);
    return {lambda, mu};
}

namespace {

// Region of all atoms extending a prefix.
Region cylinder_region(const std::vector<Word>& atoms, const Word& prefix) {
    Region r;
    r.atoms.assign(atoms.size(), 0);
    for (size_t i = 0; i < atoms.size(); ++i)
        if (word_lcp(atoms[i], prefix) == int(prefix.size())) r.atoms[i] = 1;
    return r;
}

Region apply_perm(const Region& r, const std::vector<int>& perm) {
    Region out;
    out.atoms.assign(r.atoms.size(), 0);
    for (size_t i = 0; i < r.atoms.size(); ++i)
        if (r.atoms[i]) out.atoms[perm[i]] = 1;
    return out;
}

}  // namespace

Annulus small_separating_annulus(int x, int y, const std::vector<std::vector<int>>& isometries,
                                 const Rational& s, const AtomMetric& d,
                                 const RegularTreeModel& model, int depth) {
    if (x == y) throw std::invalid_argument("small_separating_annulus: atoms must differ");
    if (!(s > Rational(0))) throw std::invalid_argument("small_separating_annulus: s must be positive");
    auto words = model.atoms(depth);
    int div = word_lcp(words[x], words[y]);
    std::vector<std::vector<int>> maps = isometries;
    if (maps.empty()) {
        std::vector<int> id(words.size());
        std::iota(id.begin(), id.end(), 0);
        maps.push_back(id);
    }
    for (int t = div + 1; t <= depth; ++t) {
        Word px(words[x].begin(), words[x].begin() + t);
        Word py(words[y].begin(), words[y].begin() + t);
        Annulus a{cylinder_region(words, px), cylinder_region(words, py)};
        bool complement_nonempty = false;
        for (size_t i = 0; i < words.size(); ++i)
            if (!a.minus.atoms[i] && !a.plus.atoms[i]) complement_nonempty = true;
        if (!complement_nonempty) continue;
        bool small = true;
        for (const auto& perm : maps) {
            Annulus ga{apply_perm(a.minus, perm), apply_perm(a.plus, perm)};
            if (!(annulus_metrics(ga, d).first < s)) {
                small = false;
                break;
            }
        }
        if (small) return a;
    }
    throw depth_error("small_separating_annulus: resolution too coarse for the requested bound");
}

AnnulusSystem build_cover_system(const std::vector<std::string>& universe,
                                 const std::vector<TripleNeighborhood>& neighborhoods,
                                 const std::vector<std::vector<int>>& group_sample) {
    std::vector<Annulus> annuli;
    for (const auto& nb : neighborhoods) {
        if (!nb.u.disjoint(nb.v) || !nb.u.disjoint(nb.w) || !nb.v.disjoint(nb.w))
            throw std::invalid_argument("build_cover_system: neighborhood closures overlap");
        if (!nb.u.contains(nb.triple[0]) || !nb.v.contains(nb.triple[1]) ||
            !nb.w.contains(nb.triple[2]))
            throw std::invalid_argument("build_cover_system: neighborhood misses its point");
        Annulus a{nb.u, nb.v};
        for (const auto& perm : group_sample) {
            Annulus ga{apply_perm(a.minus, perm), apply_perm(a.plus, perm)};
            annuli.push_back(ga);
            annuli.push_back(ga.negated());
        }
    }
    return AnnulusSystem(universe, annuli);
}

namespace {

// The two-zeros invariant: on every sampled 4-tuple at least two of the
// three dual chain counts vanish.
bool two_zeros_on_samples(const AnnulusSystem& sys, int cap) {
    int u = int(sys.universe().size());
    long long checked = 0;
    for (int x = 0; x < u && checked < cap; ++x)
        for (int y = x + 1; y < u && checked < cap; ++y)
            for (int z = y + 1; z < u && checked < cap; ++z)
                for (int w = z + 1; w < u && checked < cap; ++w) {
                    ++checked;
                    long long v1 = separation_count(Region::of(u, {x, y}), Region::of(u, {z, w}), sys);
                    long long v2 = separation_count(Region::of(u, {x, z}), Region::of(u, {y, w}), sys);
                    long long v3 = separation_count(Region::of(u, {x, w}), Region::of(u, {y, z}), sys);
                    int zeros = (v1 == 0) + (v2 == 0) + (v3 == 0);
                    if (zeros < 2) return false;
                }
    return true;
}

}  // namespace

RefineResult refine_system_step(const AnnulusSystem& sys_n, int n, const AtomMetric& d,
                                const std::vector<std::vector<int>>& group_sample,
                                const RegularTreeModel& model, int depth,
                                int four_tuple_sample_cap) {
    int u = int(sys_n.universe().size());
    if (u != d.size()) throw std::invalid_argument("refine_system_step: metric universe mismatch");

    // Input invariants.
    if (!two_zeros_on_samples(sys_n, four_tuple_sample_cap))
        throw std::invalid_argument("refine_system_step: input violates the two-zeros invariant");
    if (n > 0) {
        Rational level(1, n);
        for (int x = 0; x < u; ++x)
            for (int y = x + 1; y < u; ++y) {
                if (d.pairwise[x][y] < level) continue;
                if (separation_count(Region::of(u, {x}), Region::of(u, {y}), sys_n) <= 0)
                    throw std::invalid_argument(
                        "refine_system_step: input leaves a level-n pair unseparated");
            }
    }

    // Sampled surrogate for mu: min over the system of the max over the
    // sampled orbit of the side separation.
    std::optional<Rational> mu;
    for (const auto& a : sys_n.annuli()) {
        std::optional<Rational> orbit_sup;
        std::vector<std::vector<int>> maps = group_sample;
        if (maps.empty()) {
            std::vector<int> id(u);
            std::iota(id.begin(), id.end(), 0);
            maps.push_back(id);
        }
        for (const auto& perm : maps) {
            Annulus ga{apply_perm(a.minus, perm), apply_perm(a.plus, perm)};
            Rational m = annulus_metrics(ga, d).second;
            if (!orbit_sup || m > *orbit_sup) orbit_sup = m;
        }
        if (!mu || *orbit_sup < *mu) mu = orbit_sup;
    }

    Rational next_level(1, n + 2);
    Rational lambda_bound = mu ? min(*mu / Rational(2), next_level) : next_level;

    AnnulusSystem out = sys_n;
    Rational cover_level(1, n + 1);
    int covered = 0;
    auto words = model.atoms(depth);
    for (int x = 0; x < u; ++x)
        for (int y = x + 1; y < u; ++y) {
            if (d.pairwise[x][y] < cover_level) continue;
            if (separation_count(Region::of(u, {x}), Region::of(u, {y}), out) > 0) continue;
            Annulus a = small_separating_annulus(x, y, group_sample, lambda_bound, d, model, depth);
            Rational mu_a = annulus_metrics(a, d).second;
            if (!(mu_a > next_level))
                throw depth_error("refine_system_step: cannot keep the sides far enough apart "
                                  "at this resolution");
            std::vector<std::vector<int>> maps = group_sample;
            if (maps.empty()) {
                std::vector<int> id(u);
                std::iota(id.begin(), id.end(), 0);
                maps.push_back(id);
            }
            for (const auto& perm : maps) {
                Annulus ga{apply_perm(a.minus, perm), apply_perm(a.plus, perm)};
                out.add(ga);
                out.add(ga.negated());
            }
            ++covered;
        }

    RefineResult res{out, mu ? *mu : Rational(0), covered,
                     two_zeros_on_samples(out, four_tuple_sample_cap)};
    return res;
}

AnnulusSystem cylinder_shell_system(const RegularTreeModel& model, int depth, int shell_depth) {
    auto words = model.atoms(depth);
    std::vector<std::string> universe;
    for (const auto& w : words) universe.push_back(word_str(w));
    std::vector<Annulus> annuli;
    for (int t = 2; t <= shell_depth; ++t) {
        for (const auto& p : model.atoms(t)) {
            Word parent(p.begin(), p.end() - 1);
            Region inside = cylinder_region(words, p);
            Region outer = cylinder_region(words, parent);
            Region outside;
            outside.atoms.assign(words.size(), 0);
            for (size_t i = 0; i < words.size(); ++i)
                outside.atoms[i] = outer.atoms[i] ? 0 : 1;
            if (inside.count() == 0 || outside.count() == 0) continue;
            bool complement_nonempty = false;
            for (size_t i = 0; i < words.size(); ++i)
                if (!inside.atoms[i] && !outside.atoms[i]) complement_nonempty = true;
            if (!complement_nonempty) continue;
            Annulus a{inside, outside};
            annuli.push_back(a);
            annuli.push_back(a.negated());
        }
    }
    return AnnulusSystem(universe, annuli);
}

AnnulusSystem cylinder_pair_system(const RegularTreeModel& model, int depth, int pair_depth) {
    auto words = model.atoms(depth);
    std::vector<std::string> universe;
    for (const auto& w : words) universe.push_back(word_str(w));
    std::vector<Word> prefixes;
    for (int t = 1; t <= pair_depth; ++t) {
        auto level = model.atoms(t);
        prefixes.insert(prefixes.end(), level.begin(), level.end());
    }
    std::vector<Annulus> annuli;
    for (size_t i = 0; i < prefixes.size(); ++i)
        for (size_t j = 0; j < prefixes.size(); ++j) {
            if (i == j) continue;
            int l = word_lcp(prefixes[i], prefixes[j]);
            if (l == int(prefixes[i].size()) || l == int(prefixes[j].size())) continue;  // nested
            Region minus = cylinder_region(words, prefixes[i]);
            Region plus = cylinder_region(words, prefixes[j]);
            if (minus.count() == 0 || plus.count() == 0) continue;
            bool complement_nonempty = false;
            for (size_t k = 0; k < words.size(); ++k)
                if (!minus.atoms[k] && !plus.atoms[k]) complement_nonempty = true;
            if (!complement_nonempty) continue;
            annuli.push_back(Annulus{minus, plus});
        }
    return AnnulusSystem(universe, annuli);
}

}  // namespace hypercross
