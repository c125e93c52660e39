#include "hypercross/padic.hpp"

#include <algorithm>
#include <sstream>

namespace hypercross {

namespace {

using u64 = unsigned long long;
using u128 = unsigned __int128;

u64 pow_u64(long long p, int e) {
    u64 r = 1;
    for (int i = 0; i < e; ++i) r *= u64(p);
    return r;
}

u64 mulmod(u64 a, u64 b, u64 m) { return u64((u128(a) * b) % m); }

u64 modinv(u64 a, u64 m) {
    // extended euclid; gcd(a, m) = 1 expected
    long long t = 0, newt = 1;
    long long r = (long long)m, newr = (long long)(a % m);
    while (newr != 0) {
        long long q = r / newr;
        std::swap(t, newt);
        newt -= q * t;
        std::swap(r, newr);
        newr -= q * r;
    }
    if (r != 1) throw std::domain_error("padic: unit not invertible");
    if (t < 0) t += (long long)m;
    return u64(t);
}

long long vp_int128(__int128 n, long long p) {
    if (n == 0) throw std::domain_error("padic: valuation of zero");
    long long v = 0;
    if (n < 0) n = -n;
    while (n % p == 0) {
        n /= p;
        ++v;
    }
    return v;
}

}  // namespace

int PadicScalar::max_precision(long long p) {
    int e = 0;
    u64 pw = 1;
    while (pw <= (u64(1) << 62) / u64(p)) {
        pw *= u64(p);
        ++e;
    }
    return e;
}

void PadicScalar::normalize() {
    if (zero_) {
        val_ = 0;
        unit_ = 0;
        rel_ = 0;
        return;
    }
    u64 mod = pow_u64(p_, rel_);
    unit_ %= mod;
    if (unit_ == 0) throw std::logic_error("padic: unit part vanished");
    while (unit_ % u64(p_) == 0) {
        // Keep the invariant that the unit is coprime to p; digits shift
        // into the valuation and precision shrinks accordingly.
        unit_ /= u64(p_);
        ++val_;
        --rel_;
        if (rel_ <= 0) throw precision_error("padic: all significant digits lost");
    }
}

PadicScalar PadicScalar::zero(long long p) {
    PadicScalar s;
    s.p_ = p;
    s.zero_ = true;
    s.abs_known_ = INT64_MAX;
    return s;
}

PadicScalar PadicScalar::from_integer(long long p, long long n, int precision) {
    return from_rational(p, Rational(n), precision);
}

PadicScalar PadicScalar::from_rational(long long p, const Rational& r, int precision) {
    if (p < 2) throw std::invalid_argument("padic: prime must be at least 2");
    if (precision < 1 || precision > max_precision(p))
        throw std::invalid_argument("padic: unusable precision");
    if (r.is_zero()) return zero(p);
    __int128 num = r.num(), den = r.den();
    long long vn = vp_int128(num, p), vd = vp_int128(den, p);
    for (long long i = 0; i < vn; ++i) num /= p;
    for (long long i = 0; i < vd; ++i) den /= p;
    u64 mod = pow_u64(p, precision);
    __int128 nm = num % (__int128)mod;
    if (nm < 0) nm += (__int128)mod;
    __int128 dm = den % (__int128)mod;
    if (dm < 0) dm += (__int128)mod;
    PadicScalar s;
    s.p_ = p;
    s.zero_ = false;
    s.val_ = vn - vd;
    s.rel_ = precision;
    s.unit_ = mulmod(u64(nm), modinv(u64(dm), mod), mod);
    s.normalize();
    return s;
}

long long PadicScalar::valuation() const {
    if (zero_) {
        if (exact_zero()) throw std::domain_error("padic: valuation of exact zero");
        throw precision_error("padic: valuation unknown (zero at precision)");
    }
    return val_;
}

unsigned long long PadicScalar::unit() const {
    if (zero_) throw std::domain_error("padic: unit of zero");
    return unit_;
}

PadicScalar PadicScalar::operator*(const PadicScalar& o) const {
    if (p_ != o.p_) throw std::invalid_argument("padic: prime mismatch");
    if (zero_ || o.zero_) {
        PadicScalar s = zero(p_);
        // Multiplying an inexact zero keeps it inexact; the bound shifts by
        // the partner's valuation when that is known.
        if (!exact_zero() || !o.exact_zero()) {
            long long bound = INT64_MAX;
            if (zero_ && !exact_zero()) bound = abs_known_ + (o.zero_ ? 0 : o.val_);
            if (o.zero_ && !o.exact_zero())
                bound = std::min(bound, o.abs_known_ + (zero_ ? 0 : val_));
            s.abs_known_ = bound;
        }
        return s;
    }
    PadicScalar s;
    s.p_ = p_;
    s.zero_ = false;
    s.val_ = val_ + o.val_;
    s.rel_ = std::min(rel_, o.rel_);
    u64 mod = pow_u64(p_, s.rel_);
    s.unit_ = mulmod(unit_ % mod, o.unit_ % mod, mod);
    s.normalize();
    return s;
}

PadicScalar PadicScalar::operator/(const PadicScalar& o) const {
    if (o.zero_) throw std::domain_error("padic: division by zero (at precision)");
    PadicScalar inv;
    inv.p_ = p_;
    inv.zero_ = false;
    inv.val_ = -o.val_;
    inv.rel_ = o.rel_;
    u64 mod = pow_u64(p_, o.rel_);
    inv.unit_ = modinv(o.unit_ % mod, mod);
    return *this * inv;
}

PadicScalar PadicScalar::operator-() const {
    if (zero_) return *this;
    PadicScalar s = *this;
    u64 mod = pow_u64(p_, rel_);
    s.unit_ = (mod - unit_ % mod) % mod;
    s.normalize();
    return s;
}

PadicScalar PadicScalar::operator-(const PadicScalar& o) const { return *this + (-o); }

PadicScalar PadicScalar::operator+(const PadicScalar& o) const {
    if (p_ != o.p_) throw std::invalid_argument("padic: prime mismatch");
    long long abs1 = zero_ ? abs_known_ : (rel_ >= INT32_MAX ? INT64_MAX : val_ + rel_);
    long long abs2 = o.zero_ ? o.abs_known_ : o.val_ + o.rel_;
    if (zero_ && exact_zero()) return o;
    if (o.zero_ && o.exact_zero()) return *this;
    long long A = std::min(abs1, abs2);
    if (zero_ && o.zero_) {
        PadicScalar s = zero(p_);
        s.abs_known_ = A;
        return s;
    }
    if (zero_ || o.zero_) {
        // One side is an inexact zero: the other survives up to precision A.
        const PadicScalar& live = zero_ ? o : *this;
        if (live.val_ >= A) {
            PadicScalar s = zero(p_);
            s.abs_known_ = A;
            return s;
        }
        PadicScalar s = live;
        s.rel_ = int(std::min<long long>(s.rel_, A - s.val_));
        u64 mod = pow_u64(p_, s.rel_);
        s.unit_ %= mod;
        s.normalize();
        return s;
    }
    long long v = std::min(val_, o.val_);
    long long digits = A - v;
    if (digits <= 0) {
        PadicScalar s = zero(p_);
        s.abs_known_ = A;
        return s;
    }
    if (digits > max_precision(p_)) digits = max_precision(p_);
    u64 mod = pow_u64(p_, int(digits));
    u64 t1 = mulmod(unit_ % mod, pow_u64(p_, int(val_ - v)) % mod, mod);
    u64 t2 = mulmod(o.unit_ % mod, pow_u64(p_, int(o.val_ - v)) % mod, mod);
    u64 sum = (t1 + t2) % mod;
    if (sum == 0) {
        PadicScalar s = zero(p_);
        s.abs_known_ = v + digits;
        return s;
    }
    long long t = 0;
    while (sum % u64(p_) == 0) {
        sum /= u64(p_);
        ++t;
    }
    PadicScalar s;
    s.p_ = p_;
    s.zero_ = false;
    s.val_ = v + t;
    s.rel_ = int(digits - t);
    s.unit_ = sum;
    s.normalize();
    return s;
}

PadicScalar PadicScalar::shift(long long e) const {
    if (zero_) {
        PadicScalar s = *this;
        if (!exact_zero()) s.abs_known_ += e;
        return s;
    }
    PadicScalar s = *this;
    s.val_ += e;
    return s;
}

PadicScalar PadicScalar::truncate_mod(long long n) const {
    if (zero_) return *this;
    if (val_ >= n) return zero(p_);
    long long digits = std::min<long long>(rel_, n - val_);
    PadicScalar s = *this;
    s.rel_ = int(digits);
    u64 mod = pow_u64(p_, s.rel_);
    s.unit_ %= mod;
    if (s.unit_ == 0) return zero(p_);
    s.normalize();
    return s;
}

int PadicScalar::digit(long long i) const {
    if (zero_) return 0;
    if (i < val_) return 0;
    if (i - val_ >= rel_)
        throw precision_error("padic: digit beyond known precision");
    u64 q = unit_;
    for (long long k = 0; k < i - val_; ++k) q /= u64(p_);
    return int(q % u64(p_));
}

std::string PadicScalar::str() const {
    if (zero_) return exact_zero() ? "0" : "O(p^" + std::to_string(abs_known_) + ")";
    std::ostringstream os;
    os << unit_ << "*" << p_ << "^" << val_ << " (mod p^" << (val_ + rel_) << ")";
    return os.str();
}

std::string PadicScalar::json_str() const {
    if (zero_) return "0";
    return std::to_string((long long)unit_) + "*" + std::to_string(p_) + "^" +
           std::to_string(val_);
}

// ---------------------------------------------------------------------------

ProjPoint::ProjPoint(PadicScalar u, PadicScalar v) : u_(std::move(u)), v_(std::move(v)) {
    if (u_.is_zero() && v_.is_zero())
        throw precision_error("projective point: both coordinates vanish at precision");
    // Scale so min valuation is 0, then lead with 1.
    long long vu = u_.is_zero() ? INT64_MAX : u_.valuation();
    long long vv = v_.is_zero() ? INT64_MAX : v_.valuation();
    long long m = std::min(vu, vv);
    u_ = u_.shift(-m);
    v_ = v_.shift(-m);
    if (!v_.is_zero() && v_.valuation() == 0) {
        PadicScalar inv = PadicScalar::from_integer(v_.prime(), 1, v_.precision()) / v_;
        u_ = u_ * inv;
        v_ = v_ * inv;
    } else {
        PadicScalar inv = PadicScalar::from_integer(u_.prime(), 1, u_.precision()) / u_;
        v_ = v_ * inv;
        u_ = u_ * inv;
    }
}

ProjPoint ProjPoint::infinity(long long p, int precision) {
    return ProjPoint(PadicScalar::from_integer(p, 1, precision), PadicScalar::zero(p));
}

ProjPoint ProjPoint::from_rational(long long p, const Rational& r, int precision) {
    return ProjPoint(PadicScalar::from_rational(p, r, precision),
                     PadicScalar::from_integer(p, 1, precision));
}

bool ProjPoint::same_point(const ProjPoint& o) const {
    PadicScalar det = u_ * o.v_ - v_ * o.u_;
    return det.is_zero();
}

std::string ProjPoint::str() const {
    return "(" + u_.json_str() + " : " + v_.json_str() + ")";
}

// ---------------------------------------------------------------------------

Mobius::Mobius(PadicScalar a, PadicScalar b, PadicScalar c, PadicScalar d)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), d_(std::move(d)) {
    if (det().is_zero())
        throw std::invalid_argument("mobius: determinant vanishes at precision");
}

Mobius Mobius::from_integers(long long p, long long a, long long b, long long c, long long d,
                             int precision) {
    return Mobius(PadicScalar::from_integer(p, a, precision),
                  PadicScalar::from_integer(p, b, precision),
                  PadicScalar::from_integer(p, c, precision),
                  PadicScalar::from_integer(p, d, precision));
}

PadicScalar Mobius::det() const { return a_ * d_ - b_ * c_; }
long long Mobius::det_valuation() const { return det().valuation(); }

long long Mobius::trace_valuation() const {
    PadicScalar t = a_ + d_;
    if (t.is_zero()) return INT64_MAX;
    return t.valuation();
}

Mobius Mobius::compose(const Mobius& o) const {
    return Mobius(a_ * o.a_ + b_ * o.c_, a_ * o.b_ + b_ * o.d_, c_ * o.a_ + d_ * o.c_,
                  c_ * o.b_ + d_ * o.d_);
}

Mobius Mobius::inverse() const { return Mobius(d_, -b_, -c_, a_); }

Mobius Mobius::power(long long k) const {
    if (k == 0) {
        int prec = std::max({1, a_.precision(), b_.precision(), c_.precision(), d_.precision()});
        return Mobius::from_integers(a_.prime(), 1, 0, 0, 1, prec);
    }
    Mobius base = k > 0 ? *this : inverse();
    long long e = k > 0 ? k : -k;
    std::optional<Mobius> acc;
    Mobius sq = base;
    while (e > 0) {
        if (e & 1) acc = acc ? acc->compose(sq) : sq;
        e >>= 1;
        if (e > 0) sq = sq.compose(sq);
    }
    return *acc;
}

bool Mobius::same_projective(const Mobius& o) const {
    // Rows proportional: cross products vanish pairwise.
    PadicScalar x1 = a_ * o.b_ - b_ * o.a_;
    PadicScalar x2 = a_ * o.c_ - c_ * o.a_;
    PadicScalar x3 = a_ * o.d_ - d_ * o.a_;
    PadicScalar x4 = b_ * o.c_ - c_ * o.b_;
    PadicScalar x5 = b_ * o.d_ - d_ * o.b_;
    PadicScalar x6 = c_ * o.d_ - d_ * o.c_;
    return x1.is_zero() && x2.is_zero() && x3.is_zero() && x4.is_zero() && x5.is_zero() &&
           x6.is_zero();
}

std::string Mobius::str() const {
    return "[" + a_.json_str() + ", " + b_.json_str() + "; " + c_.json_str() + ", " +
           d_.json_str() + "]";
}

ProjPoint mobius_act(const Mobius& m, const ProjPoint& x) {
    return ProjPoint(m.a() * x.u() + m.b() * x.v(), m.c() * x.u() + m.d() * x.v());
}

namespace {

PadicScalar det2(const ProjPoint& p, const ProjPoint& q) {
    return p.u() * q.v() - p.v() * q.u();
}

}  // namespace

Mobius solve_sharply3(const ProjPoint& p1, const ProjPoint& p2, const ProjPoint& p3) {
    // Columns: D(p2,p1) * p3 and D(p3,p2) * p1; then M(0:1) ~ p1,
    // M(1:1) ~ p2, M(1:0) ~ p3.
    PadicScalar l = det2(p2, p1);
    PadicScalar r = det2(p3, p2);
    if (l.is_zero() || r.is_zero())
        throw precision_error("solve_sharply3: points coincide at precision");
    return Mobius(l * p3.u(), r * p1.u(), l * p3.v(), r * p1.v());
}

long long classical_crossratio_valuation(const ProjPoint& x1, const ProjPoint& x2,
                                         const ProjPoint& x3, const ProjPoint& x4) {
    PadicScalar d13 = det2(x1, x3), d24 = det2(x2, x4), d14 = det2(x1, x4), d23 = det2(x2, x3);
    if (d13.is_zero() || d24.is_zero() || d14.is_zero() || d23.is_zero())
        throw precision_error("crossratio valuation: points coincide at precision");
    return d13.valuation() + d24.valuation() - d14.valuation() - d23.valuation();
}

// ---------------------------------------------------------------------------
// Tree correspondence

BtVertex BtCorrespondence::act(const Mobius& m, const BtVertex& v) const {
    // Lattice basis [[p^n, c], [0, 1]] transformed by m, then column
    // reduced back to that shape.
    PadicScalar A = m.a().shift(v.n), B = m.a() * v.c + m.b();
    PadicScalar C = m.c().shift(v.n), D = m.c() * v.c + m.d();
    // Bottom row: (C, D).  Scale so its minimum valuation is 0.
    long long vc = C.is_zero() ? INT64_MAX : C.valuation();
    long long vd = D.is_zero() ? INT64_MAX : D.valuation();
    if (vc == INT64_MAX && vd == INT64_MAX)
        throw precision_error("bt act: bottom row vanished at precision");
    long long s = std::min(vc, vd);
    A = A.shift(-s);
    B = B.shift(-s);
    C = C.shift(-s);
    D = D.shift(-s);
    if (D.is_zero() || D.valuation() != 0) {
        std::swap(A, B);
        std::swap(C, D);
    }
    // Clear the bottom-left entry: col1 -= C * col2 (after col2 /= D).
    PadicScalar one = PadicScalar::from_integer(p, 1, precision);
    PadicScalar dinv = one / D;
    B = B * dinv;
    A = A - C * B;
    if (A.is_zero()) throw precision_error("bt act: lattice collapsed at precision");
    return BtVertex{B.truncate_mod(A.valuation()), A.valuation()};
}

Word BtCorrespondence::word_of_vertex(const BtVertex& v) const {
    long long vc = v.c.is_zero() ? INT64_MAX : v.c.valuation();
    long long j = std::min<long long>(0, std::min(v.n, vc));
    Word w;
    // Outward spine: letter p leaves the root, letter p-1 keeps going out.
    for (long long t = 0; t > j; --t) w.push_back(uint8_t(w.empty() ? p : p - 1));
    bool from_below = j < 0;
    for (long long t = j; t < v.n; ++t) {
        int d = v.c.is_zero() ? 0 : v.c.digit(t);
        if (from_below) {
            // Sibling labels skip the ball we came from (digit 0).
            if (d == 0) throw std::logic_error("bt word: descent digit vanished on the spine");
            w.push_back(uint8_t(d - 1));
            from_below = false;
        } else {
            w.push_back(uint8_t(d));
        }
    }
    return w;
}

BtVertex BtCorrespondence::vertex_of_word(const Word& w) const {
    PadicScalar c = PadicScalar::zero(p);
    long long n = 0;
    bool from_below = false;
    for (size_t i = 0; i < w.size(); ++i) {
        int l = w[i];
        if (i == 0) {
            if (l == p) {
                n = -1;
                from_below = true;
            } else {
                c = c + PadicScalar::from_integer(p, l, precision);
                n = 1;
            }
            continue;
        }
        if (from_below) {
            if (l == p - 1) {
                --n;
            } else {
                c = c + PadicScalar::from_integer(p, l + 1, precision).shift(n);
                ++n;
                from_below = false;
            }
        } else {
            if (l != 0) c = c + PadicScalar::from_integer(p, l, precision).shift(n);
            ++n;
        }
    }
    return BtVertex{c.truncate_mod(n), n};
}

Word BtCorrespondence::end_word(const ProjPoint& x, int depth) const {
    if (x.is_infinity()) {
        Word w{uint8_t(p)};
        while (int(w.size()) < depth) w.push_back(uint8_t(p - 1));
        return w;
    }
    // Affine coordinate z = u/v.
    PadicScalar z = x.u() / x.v();
    Word w;
    if (z.is_zero()) {
        w.assign(depth, 0);
        return w;
    }
    long long vz = z.valuation();
    if (vz >= 0) {
        for (long long i = 0; int(w.size()) < depth; ++i) w.push_back(uint8_t(z.digit(i)));
        return w;
    }
    w.push_back(uint8_t(p));
    for (long long t = -2; t >= vz; --t)
        if (int(w.size()) < depth) w.push_back(uint8_t(p - 1));
    if (int(w.size()) < depth) w.push_back(uint8_t(z.digit(vz) - 1));
    for (long long i = vz + 1; int(w.size()) < depth; ++i) w.push_back(uint8_t(z.digit(i)));
    return w;
}

BoundaryPoint BtCorrespondence::end_point(const ProjPoint& x, int depth) const {
    return BoundaryPoint::truncated(end_word(x, depth));
}

namespace {

class MobiusAuto : public TreeAutomorphism {
public:
    MobiusAuto(BtCorrespondence bt, Mobius m) : bt_(std::move(bt)), m_(std::move(m)) {}
    const TreeShape& shape() const override { return bt_.model.shape; }
    Word apply(const Word& w) const override {
        try {
            return bt_.word_of_vertex(bt_.act(m_, bt_.vertex_of_word(w)));
        } catch (const precision_error& e) {
            throw depth_error(std::string("mobius automorphism: ") + e.what());
        }
    }
    AutoPtr inverse() const override {
        return std::make_shared<MobiusAuto>(bt_, m_.inverse());
    }
    std::string describe() const override { return "mobius " + m_.str(); }

private:
    BtCorrespondence bt_;
    Mobius m_;
};

}  // namespace

AutoPtr BtCorrespondence::automorphism(const Mobius& m) const {
    return std::make_shared<MobiusAuto>(*this, m);
}

BtCorrespondence bt_correspondence(long long p, int depth, int precision) {
    if (depth > precision)
        throw std::invalid_argument("bt_correspondence: depth exceeds precision");
    if (precision > PadicScalar::max_precision(p))
        throw std::invalid_argument("bt_correspondence: precision too large for the prime");
    BtCorrespondence bt{p, precision, RegularTreeModel{TreeShape{int(p) + 1, int(p), depth}}};
    return bt;
}

FixedEndCount boundary_fixed_ends(const BtCorrespondence& bt, const Mobius& m, int depth) {
    // Iterate the action on a spread of sample points; limits of forward
    // orbits give the attracting end, backward orbits the repelling end.
    std::vector<ProjPoint> samples;
    for (long long k = 0; k < 4; ++k)
        samples.push_back(ProjPoint::from_rational(bt.p, Rational(2 * k + 1), bt.precision));
    samples.push_back(ProjPoint::infinity(bt.p, bt.precision));
    samples.push_back(ProjPoint::from_rational(bt.p, Rational(1, bt.p), bt.precision));

    auto limit_of = [&](const Mobius& g) -> std::optional<Word> {
        Mobius acc = g;
        for (int it = 0; it < 2 * depth + 8; ++it) acc = acc.compose(g);
        std::optional<Word> common;
        int agree = 0;
        for (const auto& s : samples) {
            try {
                ProjPoint img = mobius_act(acc, s);
                Word w = bt.end_word(img, depth);
                if (!common) {
                    common = w;
                    agree = 1;
                } else if (*common == w) {
                    ++agree;
                }
            } catch (const precision_error&) {
            }
        }
        if (common && agree >= 3) return common;
        return std::nullopt;
    };

    FixedEndCount out{0, std::nullopt, std::nullopt};
    auto fwd = limit_of(m);
    auto bwd = limit_of(m.inverse());
    if (fwd) out.attracting = BoundaryPoint::truncated(*fwd);
    if (bwd) out.repelling = BoundaryPoint::truncated(*bwd);
    if (fwd && bwd) out.count = (*fwd == *bwd) ? 1 : 2;
    else if (fwd || bwd) out.count = 1;
    return out;
}

}  // namespace hypercross
