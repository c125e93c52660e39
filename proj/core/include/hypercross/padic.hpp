#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "hypercross/rational.hpp"
#include "hypercross/tree_boundary.hpp"

namespace hypercross {

struct precision_error : std::runtime_error {
    explicit precision_error(const std::string& what) : std::runtime_error(what) {}
};

// Truncated-unit p-adic scalar: an exact valuation plus `rel` known digits
// of the unit part.  Operations that would cancel every known digit report
// the loss instead of rounding.
class PadicScalar {
public:
    // The largest usable relative precision for a prime (p^rel < 2^62).
    static int max_precision(long long p);

    static PadicScalar zero(long long p);  // exact zero
    static PadicScalar from_integer(long long p, long long n, int precision);
    static PadicScalar from_rational(long long p, const Rational& r, int precision);

    long long prime() const { return p_; }
    bool is_zero() const { return zero_; }
    bool exact_zero() const { return zero_ && abs_known_ == INT64_MAX; }
    long long valuation() const;  // throws on zero
    unsigned long long unit() const;
    int precision() const { return rel_; }

    PadicScalar operator+(const PadicScalar& o) const;
    PadicScalar operator-(const PadicScalar& o) const;
    PadicScalar operator*(const PadicScalar& o) const;
    PadicScalar operator/(const PadicScalar& o) const;
    PadicScalar operator-() const;
    PadicScalar shift(long long e) const;  // multiply by p^e

    // c mod p^n: drops all digits at or above p^n.
    PadicScalar truncate_mod(long long n) const;

    // Digit of the expansion at p^i (0 when below the valuation).
    int digit(long long i) const;

    std::string str() const;
    std::string json_str() const;  // {"num":..,"den":..,"val":..} for exact inputs

private:
    long long p_ = 2;
    bool zero_ = true;
    long long val_ = 0;
    unsigned long long unit_ = 0;  // < p^rel, coprime to p
    int rel_ = 0;
    long long abs_known_ = INT64_MAX;  // digits known below p^abs_known (zero only)

    void normalize();
};

// A point of the projective line, normalized so the smaller valuation is 0
// and the distinguished coordinate is 1.
class ProjPoint {
public:
    ProjPoint(PadicScalar u, PadicScalar v);
    static ProjPoint infinity(long long p, int precision);
    static ProjPoint from_rational(long long p, const Rational& r, int precision);

    const PadicScalar& u() const { return u_; }
    const PadicScalar& v() const { return v_; }
    bool is_infinity() const { return v_.is_zero(); }

    bool same_point(const ProjPoint& o) const;  // projective equality at precision
    std::string str() const;

private:
    PadicScalar u_, v_;
};

class Mobius {
public:
    Mobius(PadicScalar a, PadicScalar b, PadicScalar c, PadicScalar d);
    static Mobius from_integers(long long p, long long a, long long b, long long c, long long d,
                                int precision);

    const PadicScalar& a() const { return a_; }
    const PadicScalar& b() const { return b_; }
    const PadicScalar& c() const { return c_; }
    const PadicScalar& d() const { return d_; }
    PadicScalar det() const;
    long long det_valuation() const;
    long long trace_valuation() const;  // INT64_MAX when the trace vanishes at precision

    Mobius compose(const Mobius& o) const;  // this after o
    Mobius inverse() const;                 // projective inverse (adjugate)
    Mobius power(long long k) const;

    bool same_projective(const Mobius& o) const;
    std::string str() const;

private:
    PadicScalar a_, b_, c_, d_;
};

ProjPoint mobius_act(const Mobius& m, const ProjPoint& x);

// The unique projective matrix sending (0, 1, oo) to (p1, p2, p3).
Mobius solve_sharply3(const ProjPoint& p1, const ProjPoint& p2, const ProjPoint& p3);

// Valuation of (x1-x3)(x2-x4) / ((x1-x4)(x2-x3)), computed projectively.
long long classical_crossratio_valuation(const ProjPoint& x1, const ProjPoint& x2,
                                         const ProjPoint& x3, const ProjPoint& x4);

// ---------------------------------------------------------------------------
// Tree correspondence

// Vertex of the (p+1)-regular tree, as the ball c + p^n Z_p.
struct BtVertex {
    PadicScalar c;
    long long n;
};

struct BtCorrespondence {
    long long p;
    int precision;
    RegularTreeModel model;  // shape (p+1, p)

    BtVertex vertex_of_word(const Word& w) const;
    Word word_of_vertex(const BtVertex& v) const;
    BtVertex act(const Mobius& m, const BtVertex& v) const;

    Word end_word(const ProjPoint& x, int depth) const;
    BoundaryPoint end_point(const ProjPoint& x, int depth) const;

    AutoPtr automorphism(const Mobius& m) const;
};

BtCorrespondence bt_correspondence(long long p, int depth, int precision);

// Forward/backward orbit limits of the induced boundary action; loxodromic
// maps have exactly two fixed ends with distinct attraction.
struct FixedEndCount {
    int count;  // distinct limit ends observed
    std::optional<BoundaryPoint> attracting, repelling;
};
FixedEndCount boundary_fixed_ends(const BtCorrespondence& bt, const Mobius& m, int depth);

}  // namespace hypercross
