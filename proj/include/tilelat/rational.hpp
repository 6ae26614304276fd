#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tilelat {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

// |v|^p for integer p >= 1. Exact: rationals are closed under integer powers.
inline Rat abs_pow(const Rat& v, unsigned p) {
    Int n = boost::multiprecision::abs(numerator(v));
    Int d = denominator(v);
    if (p == 1) return Rat(n, d);
    return Rat(boost::multiprecision::pow(n, p), boost::multiprecision::pow(d, p));
}

// Canonical wire form is always "num/den" with den >= 1 and gcd(num, den) = 1.
inline std::string format_rat(const Rat& v) {
    return numerator(v).str() + "/" + denominator(v).str();
}

// Accepts "num/den" or a bare integer "num". Rejects empty input, a zero
// denominator, and trailing garbage.
inline std::optional<Rat> parse_rat(std::string_view s) {
    auto parse_int = [](std::string_view t) -> std::optional<Int> {
        if (t.empty()) return std::nullopt;
        std::size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
        if (i == t.size()) return std::nullopt;
        for (std::size_t k = i; k < t.size(); ++k)
            if (t[k] < '0' || t[k] > '9') return std::nullopt;
        return Int(std::string(t));
    };
    auto slash = s.find('/');
    if (slash == std::string_view::npos) {
        auto n = parse_int(s);
        if (!n) return std::nullopt;
        return Rat(*n);
    }
    auto n = parse_int(s.substr(0, slash));
    auto d = parse_int(s.substr(slash + 1));
    if (!n || !d || *d == 0) return std::nullopt;
    return Rat(*n, *d);  // normalized on construction
}

// floor(a/b) for exact integer walks; rounds toward negative infinity.
inline Int floor_div(const Int& a, const Int& b) {
    Int q = a / b, r = a % b;
    if (r != 0 && ((r < 0) != (b < 0))) --q;
    return q;
}

inline Int floor_rat(const Rat& v) { return floor_div(numerator(v), denominator(v)); }

// floor(n^(1/p)) for n >= 0, by bisection on bit length.
inline Int iroot_floor(const Int& n, unsigned p) {
    if (n < 0) throw std::invalid_argument("iroot_floor of a negative value");
    if (p == 0) throw std::invalid_argument("iroot_floor with p = 0");
    if (n <= 1 || p == 1) return n;
    if (p == 2) return boost::multiprecision::sqrt(n);
    Int lo = 1, hi = Int(1) << (boost::multiprecision::msb(n) / p + 1);
    while (lo < hi) {  // invariant: lo^p <= n < (hi+1)^p
        Int mid = (lo + hi + 1) / 2;
        if (boost::multiprecision::pow(mid, p) <= n)
            lo = mid;
        else
            hi = mid - 1;
    }
    return lo;
}

// Exact p-th root of a nonnegative rational when it is itself rational.
inline std::optional<Rat> rat_root_exact(const Rat& v, unsigned p) {
    Int rn = iroot_floor(numerator(v), p);
    if (boost::multiprecision::pow(rn, p) != numerator(v)) return std::nullopt;
    Int rd = iroot_floor(denominator(v), p);
    if (boost::multiprecision::pow(rd, p) != denominator(v)) return std::nullopt;
    return Rat(rn, rd);
}

}  // namespace tilelat
