#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hypercross/crossratio.hpp"
#include "hypercross/metric_tree.hpp"
#include "hypercross/quasimetric.hpp"
#include "hypercross/rational.hpp"

namespace hypercross {

// Raised when a query cannot be answered at the available depth.
struct depth_error : std::runtime_error {
    explicit depth_error(const std::string& what) : std::runtime_error(what) {}
};

// Rooted, level-regular, locally finite tree: the root has root_degree
// children, every other vertex has branching children.  (3,2) is the
// 3-regular tree, (2,2) the rooted binary tree, (p+1,p) the tree acted on
// by 2x2 projective matrices over the p-adics.
struct TreeShape {
    int root_degree;
    int branching;
    int depth_cap;
    int letters_at(int depth) const { return depth == 0 ? root_degree : branching; }
};

using Word = std::vector<uint8_t>;

std::string word_str(const Word& w);         // "" -> "e"
Word word_parse(const std::string& s);
long long word_distance(const Word& a, const Word& b);
int word_lcp(const Word& a, const Word& b);

// A boundary ray: eventually periodic word, or a truncation known only to
// finite depth.  Periodic points are canonicalized so equality is exact.
class BoundaryPoint {
public:
    static BoundaryPoint periodic(Word preperiod, Word period);
    static BoundaryPoint truncated(Word prefix);
    static BoundaryPoint parse(const std::string& s);

    bool truncated_form() const { return period_.empty(); }
    // Depth through which letters are available.
    int known_depth() const;
    int letter(int i) const;
    Word prefix(int n) const;
    std::string str() const;

    bool operator==(const BoundaryPoint& o) const;
    bool operator!=(const BoundaryPoint& o) const { return !(*this == o); }

    void validate(const TreeShape& shape) const;

private:
    Word pre_, period_;
    void canonicalize();
};

// Longest common prefix of two rays; throws depth_error when the rays are
// indistinguishable at the available depth.
int ray_lcp(const BoundaryPoint& x, const BoundaryPoint& y);

Rational visual_distance(const BoundaryPoint& x, const BoundaryPoint& y,
                         const Rational& base = Rational(1, 2));

struct RegularTreeModel {
    TreeShape shape;

    std::vector<Word> atoms(int depth) const;  // all words of a given length

    // Graph distance between the bi-infinite geodesics [x,y] and [z,w].
    long long boundary_crossratio(const BoundaryPoint& x, const BoundaryPoint& y,
                                  const BoundaryPoint& z, const BoundaryPoint& w) const;

    // The vertex on all three pairwise geodesics.
    Word median_vertex(const BoundaryPoint& x, const BoundaryPoint& y,
                       const BoundaryPoint& z) const;

    CrossratioTable table_of_rays(const std::vector<BoundaryPoint>& rays) const;

    std::string ball_dot(int depth) const;
};

// Finite subtree spanned by the root and the pairwise divergence vertices
// of F, with one extra unit edge per point so the embedding is injective.
struct SubtreeEmbedding {
    MetricTree tree;
    std::vector<std::string> node_of;  // node name per input ray
    Rational deviation;                // max |table value - tree value|
};
SubtreeEmbedding approximating_subtree(const RegularTreeModel& model,
                                       const std::vector<BoundaryPoint>& rays);

// ---------------------------------------------------------------------------
// Automorphisms

class TreeAutomorphism;
using AutoPtr = std::shared_ptr<const TreeAutomorphism>;

class TreeAutomorphism {
public:
    virtual ~TreeAutomorphism() = default;
    virtual const TreeShape& shape() const = 0;
    virtual Word apply(const Word& w) const = 0;
    virtual AutoPtr inverse() const = 0;  // throws when not available
    virtual std::string describe() const = 0;

    // Image ray truncated at the requested depth.
    BoundaryPoint apply_ray(const BoundaryPoint& x, int depth) const;
    // Induced map on depth-m atoms; throws unless every image stays at
    // depth m (root-fixing automorphisms).
    std::vector<int> atom_permutation(int depth) const;
};

// Translation by `steps` along the axis from `minus` to `plus`.
AutoPtr make_translation(const TreeShape& shape, const BoundaryPoint& minus,
                         const BoundaryPoint& plus, long long steps);
// Elliptic involution fixing the divergence vertex of x and y and
// exchanging the two rays.
AutoPtr make_ray_swap(const TreeShape& shape, const BoundaryPoint& x, const BoundaryPoint& y);
// Explicit vertex map on the depth-N ball (bijective onto its image).
AutoPtr make_explicit(const TreeShape& shape, std::vector<std::pair<Word, Word>> mapping);
AutoPtr make_composition(std::vector<AutoPtr> gs);  // gs[0] applied first
AutoPtr make_power(const AutoPtr& g, long long k);
AutoPtr make_identity(const TreeShape& shape);

// ---------------------------------------------------------------------------
// Dynamics

struct DynamicsClass {
    enum class Kind { elliptic, inversion, loxodromic };
    Kind kind;
    long long translation_length = 0;                // loxodromic only
    std::optional<Word> fixed_vertex;                // elliptic
    std::optional<std::pair<Word, Word>> inverted_edge;  // inversion
    std::optional<BoundaryPoint> attracting;
    std::optional<BoundaryPoint> repelling;          // absent when the inverse is not walkable
    bool strict_nesting_checked = false;  // image of an attracting cylinder nests strictly
    std::string kind_str() const;
};

DynamicsClass classify_automorphism(const AutoPtr& g, int depth);

struct CollapsingLimit {
    BoundaryPoint a;  // the puncture
    BoundaryPoint c;  // the constant limit
    std::vector<Rational> trace;  // Hausdorff distance of each graph to ({a} x M) u (M x {c})
};

std::optional<CollapsingLimit> collapsing_limit(const std::vector<AutoPtr>& seq, int depth,
                                                const Rational& base = Rational(1, 2));

struct GerasimovLimit {
    std::vector<BoundaryPoint> P, Q;
    Rational residual;  // final one-sided gap of the last graph to (P x M) u (M x Q)
    std::vector<Rational> gaps;
};

std::optional<GerasimovLimit> gerasimov_limit(const std::vector<AutoPtr>& seq, int budget,
                                              int depth, const Rational& base = Rational(1, 2));

struct ConicalWitness {
    BoundaryPoint x, b, c;
    bool conjugated;                 // witness built from a conjugate of g
    std::vector<Rational> collapse_trace;  // sup distance to c off the level-1 cylinder at x
    Rational triple_separation;      // min pairwise visual distance over normalized triples
    bool ok;
};

ConicalWitness conical_witness(const BoundaryPoint& x, const AutoPtr& g, int depth,
                               const Rational& base = Rational(1, 2));

// Window of points x_{-length}..x_{+length} with x_0 = c branching off the
// axis from b to a at unit crossratio steps: (b x_i | a x_j) = j - i.
struct InterpolatedRay {
    std::vector<BoundaryPoint> points;  // index i + length
    Rational max_deviation;
};

InterpolatedRay interpolated_ray(const RegularTreeModel& model, const BoundaryPoint& a,
                                 const BoundaryPoint& b, const BoundaryPoint& c, int length);

// Triples X_i = (b, a, x_i) along the axis, their pairwise triple-space
// quasimetric values, and the centre quantities of (a, b, x_0).
struct RayTripleReport {
    std::vector<BoundaryPoint> points;           // x_0..x_window
    std::vector<std::vector<Rational>> rho;      // rho(X_i, X_j)
    std::vector<Rational> centre_gromov;         // three values, expected 0
    std::vector<Rational> median_deviation;      // |rho(U, c0) - d(med U, med c0)|, expected 0
    Rational max_rho_deviation;                  // max |rho(X_i,X_j) - |i-j||
};

RayTripleReport ray_triple_geodesic(const RegularTreeModel& model, const BoundaryPoint& a,
                                    const BoundaryPoint& b, int window);

}  // namespace hypercross
