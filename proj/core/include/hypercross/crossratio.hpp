#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hypercross/metric_tree.hpp"
#include "hypercross/rational.hpp"

namespace hypercross {

// A crossratio value; "infinite" is a sentinel used by annulus-style
// tables where a pair fails to be separated by finitely many annuli.
struct CrValue {
    Rational v;
    bool infinite = false;
    std::string str() const { return infinite ? "inf" : v.str(); }
};

// Symmetric table (xy|zw) over a finite labeled ground set.  Keys are
// normalized so (xy|zw) = (yx|zw) = (zw|xy) by construction.  Entries are
// stored for distinct 4-tuples; degenerate tuples where the two pairs
// share an element evaluate to 0 by convention.
class CrossratioTable {
public:
    explicit CrossratioTable(std::vector<std::string> ground);

    static CrossratioTable from_tree(const MetricTree& t,
                                     const std::vector<std::string>& ground = {});
    static CrossratioTable from_json(const std::string& text);
    std::string to_json() const;

    const std::vector<std::string>& ground() const { return ground_; }
    int size() const { return int(ground_.size()); }
    int index_of(const std::string& label) const;

    void set(int x, int y, int z, int w, CrValue value);
    // Throws on a missing distinct entry; degenerate tuples return 0.
    CrValue get(int x, int y, int z, int w) const;
    Rational value(int x, int y, int z, int w) const;  // finite entries only
    bool total() const;  // every distinct 4-tuple present

    using Key = std::array<int, 4>;
    static Key normal_key(int x, int y, int z, int w);
    const std::map<Key, CrValue>& entries() const { return entries_; }

private:
    std::vector<std::string> ground_;
    std::map<std::string, int> index_;
    std::map<Key, CrValue> entries_;
};

// Result of the exhaustive hyperbolicity search: the least k such that
// every 4-subset admits a labeling with the two dual values within k of 0
// and every 5-subset admits a labeling satisfying the three interlocking
// relations with all remaining distinct values within k of 0.
struct SubsetWitness {
    std::vector<int> subset;    // ground indices, ascending
    std::vector<int> labeling;  // the subset ordered as (x,y,z,w[,u])
    Rational k;                 // best achievable constant on this subset
};

struct HyperbolicityCertificate {
    Rational k;
    std::vector<SubsetWitness> witnesses;
    std::optional<SubsetWitness> violation;       // set when k exceeds the caller bound
    std::vector<std::vector<int>> skipped_infinite;  // 4-tuples containing an inf entry
    bool bounded_ok(const Rational& bound) const { return k <= bound; }
};

HyperbolicityCertificate hyperbolicity_constant(
    const CrossratioTable& tbl, std::optional<Rational> caller_bound = std::nullopt);

// Discrete geodesic interpolation test: for every ordered distinct
// (x,y,z,w) searches for a chain y=u0,...,un=w with (x ui | z uj) within p
// of j-i for all i<j.  Chains are element-disjoint, avoid x and z, and
// have at least one step.
struct ChainWitness {
    std::array<int, 4> tuple;
    std::vector<int> chain;  // empty when no chain exists
};

struct PathPropertyReport {
    bool satisfied;
    std::vector<ChainWitness> witnesses;    // one per ordered tuple checked
    std::optional<std::array<int, 4>> first_failure;
};

PathPropertyReport check_path_property(const CrossratioTable& tbl, const Rational& p);

// Entries lambda^{-(ab|xy)} for x != y in ground \ {a,b}.  Exponents are
// exact; value() materializes a rational and requires integer exponents.
struct QuasiUltrametric {
    Rational lambda;
    std::vector<std::string> labels;
    std::vector<std::vector<Rational>> exponent;  // exponent[i][j] = (ab|x_i x_j)
    Rational value(int i, int j) const;
    bool integral() const;
};

QuasiUltrametric quasi_ultrametric_matrix(const CrossratioTable& tbl, int a, int b,
                                          const Rational& lambda);

// D_ab(x, r) = {x} union {y : (ab|xy) >= r}, as ground indices.
std::vector<int> cr_ball(const CrossratioTable& tbl, int a, int b, int x, const Rational& r);

// Best tree approximation of a table: enumerates unrooted leaf-labeled
// binary topologies, solves a Chebyshev LP for the internal edge lengths
// of each, and returns the embedding with the least max deviation over
// distinct 4-tuples.  Exhaustive regime: ground size <= 8.
struct TreeEmbedding {
    MetricTree tree;
    std::map<std::string, std::string> node_of;  // ground label -> tree node
    Rational deviation;
};

TreeEmbedding fit_tree(const CrossratioTable& tbl);

}  // namespace hypercross
