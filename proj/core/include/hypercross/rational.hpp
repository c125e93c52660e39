#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hypercross {

// Exact rational arithmetic over 128-bit integers.  All operations
// normalize by gcd and throw std::overflow_error instead of wrapping,
// so a result is either exact or an exception.  Desk-scale inputs never
// get anywhere near the 2^127 ceiling.
class Rational {
public:
    using int128 = __int128;

    Rational() : num_(0), den_(1) {}
    Rational(long long n) : num_(n), den_(1) {}
    Rational(long long n, long long d) : num_(n), den_(d) { normalize(); }
    static Rational from_int128(int128 n, int128 d);

    // Parses "p", "p/q" or "-p/q".
    static Rational parse(const std::string& s);

    int128 num() const { return num_; }
    int128 den() const { return den_; }

    bool is_zero() const { return num_ == 0; }
    bool is_integer() const { return den_ == 1; }
    bool is_nonnegative() const { return num_ >= 0; }

    // Valid only when den == 1 and the value fits in long long.
    long long to_integer() const;

    Rational operator-() const;
    Rational operator+(const Rational& o) const;
    Rational operator-(const Rational& o) const;
    Rational operator*(const Rational& o) const;
    Rational operator/(const Rational& o) const;
    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
    bool operator!=(const Rational& o) const { return !(*this == o); }
    bool operator<(const Rational& o) const;
    bool operator<=(const Rational& o) const { return *this < o || *this == o; }
    bool operator>(const Rational& o) const { return o < *this; }
    bool operator>=(const Rational& o) const { return o <= *this; }

    Rational abs() const { return num_ < 0 ? -*this : *this; }
    Rational pow(long long e) const;  // integer exponent, e may be negative

    std::string str() const;  // "p" or "p/q"

private:
    int128 num_;
    int128 den_;  // > 0 after normalize
    void normalize();
};

Rational min(const Rational& a, const Rational& b);
Rational max(const Rational& a, const Rational& b);

std::string int128_to_string(__int128 v);
__int128 int128_parse(const std::string& s);

}  // namespace hypercross
