#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hypercross/crossratio.hpp"
#include "hypercross/rational.hpp"
#include "hypercross/tree_boundary.hpp"

namespace hypercross {

// A clopen subset at finite resolution: a set of atoms, stored as a mask.
struct Region {
    std::vector<char> atoms;  // size = universe size
    int count() const;
    bool contains(int atom) const { return atoms[atom] != 0; }
    bool subset_of(const Region& o) const;
    bool disjoint(const Region& o) const;
    static Region of(int universe, const std::vector<int>& ids);
};

struct Annulus {
    Region minus, plus;
    Annulus negated() const { return Annulus{plus, minus}; }
    bool operator==(const Annulus& o) const {
        return minus.atoms == o.minus.atoms && plus.atoms == o.plus.atoms;
    }
};

// Distances at atom resolution: pairwise atom distances plus the intrinsic
// diameter hiding inside each atom.
struct AtomMetric {
    std::vector<std::string> atom_names;
    std::vector<std::vector<Rational>> pairwise;
    std::vector<Rational> intra;
    int size() const { return int(atom_names.size()); }
    Rational diameter(const Region& r) const;
    Rational separation(const Region& a, const Region& b) const;  // min cross distance
};

AtomMetric visual_atom_metric(const RegularTreeModel& model, int depth,
                              const Rational& base = Rational(1, 2));

class AnnulusSystem {
public:
    AnnulusSystem(std::vector<std::string> universe, std::vector<Annulus> annuli,
                  bool symmetric_closure = false);

    static AnnulusSystem from_json(const std::string& text);
    std::string to_json() const;

    const std::vector<std::string>& universe() const { return universe_; }
    const std::vector<Annulus>& annuli() const { return annuli_; }
    int atom_index(const std::string& name) const;
    bool symmetric() const;

    void add(const Annulus& a);  // dedups

private:
    std::vector<std::string> universe_;
    std::vector<Annulus> annuli_;
    void validate(const Annulus& a) const;
};

// Nesting: A < B iff the complement of A.plus is inside B.minus.
bool nesting_lt(const Annulus& a, const Annulus& b);
bool region_lt_annulus(const Region& k, const Annulus& a);  // K < A
bool annulus_lt_region(const Annulus& a, const Region& k);  // A < K

// Length of the longest chain K < A_1 < ... < A_n < L; longest path in the
// nesting DAG.  Finite systems cannot produce an infinite value, so the
// sentinel is reserved for interface compatibility.
long long separation_count(const Region& K, const Region& L, const AnnulusSystem& sys);

// (xy|zw) = separation count of {x,y} against {z,w} over all 4-tuples of
// the sample.
CrossratioTable induced_crossratio(const AnnulusSystem& sys, const std::vector<int>& sample);

struct AxiomReport {
    bool a1_all_finite;
    long long max_value;
    Rational a2_least_k;
    bool a3_met;           // (x|yz) counts meet the threshold on the sample
    long long a3_threshold;
    long long a3_min_count;
    bool a4_met;           // (x|y) > 0 for all sampled pairs
    std::vector<std::pair<int, int>> a4_failures;
};

AxiomReport check_axioms(const AnnulusSystem& sys, const std::vector<int>& sample,
                         long long a3_threshold);

// lambda = min side diameter, mu = separation between the sides.
std::pair<Rational, Rational> annulus_metrics(const Annulus& a, const AtomMetric& d);

// Cylinder-side annulus separating atoms x and y with lambda(gamma A) < s
// for every sampled isometry; sides shrink until the bound is met.
Annulus small_separating_annulus(int x, int y, const std::vector<std::vector<int>>& isometries,
                                 const Rational& s, const AtomMetric& d,
                                 const RegularTreeModel& model, int depth);

// Symmetric system {gamma A_i, -gamma A_i} from per-triple disjoint
// neighborhoods, over the sampled maps (atom permutations).
struct TripleNeighborhood {
    std::array<int, 3> triple;
    Region u, v, w;
};

AnnulusSystem build_cover_system(const std::vector<std::string>& universe,
                                 const std::vector<TripleNeighborhood>& neighborhoods,
                                 const std::vector<std::vector<int>>& group_sample);

// One step of the inductive construction: extends sys_n with annuli
// covering the pairs at distance >= 1/(n+1), with lambda(gamma A) <
// min(mu/2, 1/(n+2)) over the sample and mu(A) > 1/(n+2).
struct RefineResult {
    AnnulusSystem system;
    Rational mu_estimate;       // sampled surrogate; may overestimate the true value
    int pairs_covered;
    bool two_zeros_verified;    // output invariant on sampled 4-tuples
};

RefineResult refine_system_step(const AnnulusSystem& sys_n, int n, const AtomMetric& d,
                                const std::vector<std::vector<int>>& group_sample,
                                const RegularTreeModel& model, int depth,
                                int four_tuple_sample_cap = 2000);

// Shell systems around cylinder vertices: A_w = (cyl(w), complement of
// cyl(parent w)); the induced chain counts track geodesic crossratios up
// to an additive constant.
AnnulusSystem cylinder_shell_system(const RegularTreeModel& model, int depth, int shell_depth);
// Plain disjoint cylinder pairs up to a given word length.
AnnulusSystem cylinder_pair_system(const RegularTreeModel& model, int depth, int pair_depth);

}  // namespace hypercross
