#include "hypercross/rational.hpp"

namespace hypercross {

namespace {

using int128 = __int128;

int128 checked_mul(int128 a, int128 b) {
    int128 r;
    if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("rational: mul overflow");
    return r;
}

int128 checked_add(int128 a, int128 b) {
    int128 r;
    if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("rational: add overflow");
    return r;
}

int128 gcd128(int128 a, int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        int128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

}  // namespace

void Rational::normalize() {
    if (den_ == 0) throw std::domain_error("rational: zero denominator");
    if (den_ < 0) {
        num_ = -num_;
        den_ = -den_;
    }
    if (num_ == 0) {
        den_ = 1;
        return;
    }
    int128 g = gcd128(num_, den_);
    num_ /= g;
    den_ /= g;
}

Rational Rational::from_int128(int128 n, int128 d) {
    Rational r;
    r.num_ = n;
    r.den_ = d;
    r.normalize();
    return r;
}

long long Rational::to_integer() const {
    if (den_ != 1) throw std::domain_error("rational: not an integer: " + str());
    if (num_ > int128(INT64_MAX) || num_ < int128(INT64_MIN))
        throw std::overflow_error("rational: integer out of range");
    return static_cast<long long>(num_);
}

Rational Rational::operator-() const { return from_int128(-num_, den_); }

Rational Rational::operator+(const Rational& o) const {
    int128 g = gcd128(den_, o.den_);
    int128 da = den_ / g;
    int128 db = o.den_ / g;
    int128 n = checked_add(checked_mul(num_, db), checked_mul(o.num_, da));
    int128 d = checked_mul(den_, db);
    return from_int128(n, d);
}

Rational Rational::operator-(const Rational& o) const { return *this + (-o); }

Rational Rational::operator*(const Rational& o) const {
    int128 g1 = gcd128(num_, o.den_);
    int128 g2 = gcd128(o.num_, den_);
    return from_int128(checked_mul(num_ / g1, o.num_ / g2),
                       checked_mul(den_ / g2, o.den_ / g1));
}

Rational Rational::operator/(const Rational& o) const {
    if (o.num_ == 0) throw std::domain_error("rational: division by zero");
    return *this * from_int128(o.den_, o.num_);
}

bool Rational::operator<(const Rational& o) const {
    return checked_mul(num_, o.den_) < checked_mul(o.num_, den_);
}

Rational Rational::pow(long long e) const {
    if (e < 0) {
        if (num_ == 0) throw std::domain_error("rational: 0 to negative power");
        return from_int128(den_, num_).pow(-e);
    }
    Rational r(1);
    Rational base = *this;
    while (e > 0) {
        if (e & 1) r = r * base;
        base = base * base;
        e >>= 1;
    }
    return r;
}

std::string int128_to_string(int128 v) {
    if (v == 0) return "0";
    bool neg = v < 0;
    // Careful with INT128_MIN: negate via unsigned.
    unsigned __int128 u = neg ? (unsigned __int128)(-(v + 1)) + 1 : (unsigned __int128)v;
    std::string s;
    while (u > 0) {
        s.push_back(char('0' + int(u % 10)));
        u /= 10;
    }
    if (neg) s.push_back('-');
    std::string rev(s.rbegin(), s.rend());
    return rev;
}

__int128 int128_parse(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("rational: empty integer literal");
    size_t i = 0;
    bool neg = false;
    if (s[0] == '-' || s[0] == '+') {
        neg = s[0] == '-';
        i = 1;
    }
    if (i == s.size()) throw std::invalid_argument("rational: bad integer literal: " + s);
    int128 v = 0;
    for (; i < s.size(); ++i) {
        if (s[i] < '0' || s[i] > '9')
            throw std::invalid_argument("rational: bad integer literal: " + s);
        v = checked_mul(v, 10);
        v = checked_add(v, s[i] - '0');
    }
    return neg ? -v : v;
}

std::string Rational::str() const {
    std::string s = int128_to_string(num_);
    if (den_ != 1) s += "/" + int128_to_string(den_);
    return s;
}

Rational Rational::parse(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) return from_int128(int128_parse(s), 1);
    return from_int128(int128_parse(s.substr(0, slash)), int128_parse(s.substr(slash + 1)));
}

Rational min(const Rational& a, const Rational& b) { return a < b ? a : b; }
Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }

}  // namespace hypercross
