#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tilelat/rational.hpp"

namespace tilelat {

// Integer exponent of an l_p norm; p >= 1 so that the triangle inequality
// holds and x -> x^p is strictly increasing on [0, inf).
struct PNorm {
    unsigned p = 2;
};

// A norm threshold t is stored as its p-th power c = t^p, which is rational
// whenever t^p is; thresholds are never rooted.
struct PowThreshold {
    Rat c;
};

enum class NormOrder { Less, Equal, Greater };

// Finitely supported rational vector. Terms are sorted by coordinate index
// and never hold a zero value, so equality of term lists is equality of
// vectors and serialization is canonical.
class SparseVector {
  public:
    using Term = std::pair<std::uint64_t, Rat>;

    SparseVector() = default;

    static SparseVector unit(std::uint64_t i) {
        SparseVector v;
        v.terms_.emplace_back(i, Rat(1));
        return v;
    }

    // Accepts unsorted terms with duplicates and zeros; normalizes.
    static SparseVector from_terms(std::vector<Term> terms) {
        std::sort(terms.begin(), terms.end(),
                  [](const Term& a, const Term& b) { return a.first < b.first; });
        SparseVector v;
        for (auto& t : terms) {
            if (!v.terms_.empty() && v.terms_.back().first == t.first)
                v.terms_.back().second += t.second;
            else
                v.terms_.push_back(std::move(t));
        }
        std::erase_if(v.terms_, [](const Term& t) { return t.second == 0; });
        return v;
    }

    const std::vector<Term>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t support_size() const { return terms_.size(); }

    Rat coeff(std::uint64_t i) const {
        auto it = std::lower_bound(
            terms_.begin(), terms_.end(), i,
            [](const Term& t, std::uint64_t k) { return t.first < k; });
        if (it != terms_.end() && it->first == i) return it->second;
        return Rat(0);
    }

    // *this += k * other, merging supports in one pass.
    SparseVector& add_scaled(const SparseVector& other, const Rat& k) {
        if (k == 0 || other.terms_.empty()) return *this;
        std::vector<Term> merged;
        merged.reserve(terms_.size() + other.terms_.size());
        auto a = terms_.begin(), ae = terms_.end();
        auto b = other.terms_.begin(), be = other.terms_.end();
        while (a != ae || b != be) {
            if (b == be || (a != ae && a->first < b->first)) {
                merged.push_back(*a++);
            } else if (a == ae || b->first < a->first) {
                Rat v = k * b->second;
                if (v != 0) merged.emplace_back(b->first, std::move(v));
                ++b;
            } else {
                Rat v = a->second + k * b->second;
                if (v != 0) merged.emplace_back(a->first, std::move(v));
                ++a, ++b;
            }
        }
        terms_ = std::move(merged);
        return *this;
    }

    friend SparseVector operator+(SparseVector a, const SparseVector& b) {
        a.add_scaled(b, Rat(1));
        return a;
    }
    friend SparseVector operator-(SparseVector a, const SparseVector& b) {
        a.add_scaled(b, Rat(-1));
        return a;
    }
    friend SparseVector operator-(SparseVector a) {
        for (auto& t : a.terms_) t.second = -t.second;
        return a;
    }
    friend SparseVector operator*(const Rat& k, const SparseVector& v) {
        SparseVector r;
        if (k == 0) return r;
        r.terms_.reserve(v.terms_.size());
        for (const auto& t : v.terms_) r.terms_.emplace_back(t.first, k * t.second);
        return r;
    }

    friend bool operator==(const SparseVector& a, const SparseVector& b) {
        return a.terms_ == b.terms_;
    }

  private:
    std::vector<Term> terms_;
};

inline Rat norm_pow(const SparseVector& v, PNorm p) {
    Rat s(0);
    for (const auto& t : v.terms()) s += abs_pow(t.second, p.p);
    return s;
}

inline Rat dot(const SparseVector& a, const SparseVector& b) {
    Rat s(0);
    auto i = a.terms().begin(), ie = a.terms().end();
    auto j = b.terms().begin(), je = b.terms().end();
    while (i != ie && j != je) {
        if (i->first < j->first) ++i;
        else if (j->first < i->first) ++j;
        else s += i->second * (j++)->second, ++i;
    }
    return s;
}

inline Rat distance_pow(const SparseVector& a, const SparseVector& b, PNorm p) {
    Rat s(0);
    auto i = a.terms().begin(), ie = a.terms().end();
    auto j = b.terms().begin(), je = b.terms().end();
    while (i != ie || j != je) {
        if (j == je || (i != ie && i->first < j->first))
            s += abs_pow((i++)->second, p.p);
        else if (i == ie || j->first < i->first)
            s += abs_pow((j++)->second, p.p);
        else
            s += abs_pow(i->second - j->second, p.p), ++i, ++j;
    }
    return s;
}

// Orders ||v||_p against c^(1/p) by comparing p-th powers; both sides are
// nonnegative and x -> x^p is strictly increasing there, so the order is the
// order of norm_pow(v) against c.
inline NormOrder compare_norm(const SparseVector& v, PNorm p, const PowThreshold& t) {
    Rat n = norm_pow(v, p);
    if (n < t.c) return NormOrder::Less;
    if (n > t.c) return NormOrder::Greater;
    return NormOrder::Equal;
}

// "idx:num/den,..." — the same syntax command-line point arguments use, so
// printed vectors can be pasted back in; the zero vector prints as "0".
inline std::string to_string(const SparseVector& v) {
    if (v.is_zero()) return "0";
    std::string s;
    for (const auto& [i, c] : v.terms()) {
        if (!s.empty()) s += ',';
        s += std::to_string(i) + ":" + format_rat(c);
    }
    return s;
}

// Canonical total order: coordinatewise-lexicographic, missing indices read
// as zero. Used wherever results must be listed deterministically.
inline bool vec_less(const SparseVector& a, const SparseVector& b) {
    auto i = a.terms().begin(), ie = a.terms().end();
    auto j = b.terms().begin(), je = b.terms().end();
    while (i != ie || j != je) {
        if (j == je || (i != ie && i->first < j->first)) {
            if (i->second != 0) return i->second < 0;
            ++i;
        } else if (i == ie || j->first < i->first) {
            if (j->second != 0) return j->second > 0;
            ++j;
        } else {
            if (i->second != j->second) return i->second < j->second;
            ++i, ++j;
        }
    }
    return false;
}

}  // namespace tilelat
