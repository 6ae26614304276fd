#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "tilelat/sparse_vector.hpp"

namespace tilelat {

enum class SchemeKind { Grid, Stream };

// Deterministic injective candidate sequence starting at the zero vector.
//
// Grid: level L ranges over vectors with denominator dividing 2^L, support
// inside {0, ..., support_base + L - 1} and coordinates bounded by
// magnitude_base + L; a level emits only vectors absent from all earlier
// levels, ordered by (l1 norm, support size, coordinatewise-lex), so every
// finitely supported dyadic vector appears at exactly one finite index.
// seed != 0 shuffles each level in place (zero stays first).
//
// Stream: seeded random dyadic draws, deduplicated, zero first. Injective and
// deterministic but with no covering promise.
struct EnumerationScheme {
    SchemeKind kind = SchemeKind::Grid;
    std::uint64_t seed = 0;
    std::uint32_t support_base = 2;
    std::uint32_t magnitude_base = 2;
    std::uint32_t stream_max_index = 16;
    std::uint32_t stream_max_den_log2 = 3;
};

inline bool operator==(const EnumerationScheme& a, const EnumerationScheme& b) {
    return a.kind == b.kind && a.seed == b.seed && a.support_base == b.support_base &&
           a.magnitude_base == b.magnitude_base && a.stream_max_index == b.stream_max_index &&
           a.stream_max_den_log2 == b.stream_max_den_log2;
}

namespace detail {

// Closed level-L grid set, as a predicate on raw numerators n_i (value
// n_i / 2^L at coordinate i): support fits, |n_i| <= (magnitude_base+L)*2^L.
// A vector of level L is new iff it fails membership in level L-1: some odd
// numerator, or support hitting the last allowed coordinate, or magnitude
// beyond the previous bound.
inline bool grid_new_at_level(const std::vector<long long>& n, std::uint32_t L,
                              const EnumerationScheme& s) {
    if (L == 0) return true;
    long long prev_bound =
        static_cast<long long>(s.magnitude_base + L - 1) * (1LL << (L - 1));
    std::size_t prev_support = s.support_base + L - 1;
    for (std::size_t i = 0; i < n.size(); ++i) {
        if (n[i] == 0) continue;
        if (i >= prev_support) return true;
        if (n[i] % 2 != 0) return true;
        if (std::abs(n[i]) / 2 > prev_bound) return true;
    }
    return false;
}

struct GridEntry {
    long long l1 = 0;  // sum |n_i|, i.e. l1 norm scaled by 2^L
    int support = 0;
    SparseVector v;
};

inline std::vector<SparseVector> grid_level(const EnumerationScheme& s, std::uint32_t L) {
    if (L > 20) throw std::length_error("grid scheme level out of range");
    const std::size_t S = s.support_base + L;
    const long long den = 1LL << L;
    const long long bound = static_cast<long long>(s.magnitude_base + L) * den;

    std::vector<GridEntry> entries;
    std::vector<long long> n(S, -bound);
    for (;;) {
        if (grid_new_at_level(n, L, s)) {
            GridEntry e;
            std::vector<SparseVector::Term> terms;
            for (std::size_t i = 0; i < S; ++i)
                if (n[i] != 0) {
                    e.l1 += std::abs(n[i]);
                    ++e.support;
                    terms.emplace_back(i, Rat(n[i], den));
                }
            e.v = SparseVector::from_terms(std::move(terms));
            entries.push_back(std::move(e));
        }
        std::size_t i = 0;
        while (i < S && n[i] == bound) n[i++] = -bound;
        if (i == S) break;
        ++n[i];
    }
    std::sort(entries.begin(), entries.end(), [](const GridEntry& a, const GridEntry& b) {
        if (a.l1 != b.l1) return a.l1 < b.l1;
        if (a.support != b.support) return a.support < b.support;
        return vec_less(a.v, b.v);
    });

    std::vector<SparseVector> out;
    out.reserve(entries.size());
    for (auto& e : entries) out.push_back(std::move(e.v));

    if (s.seed != 0) {
        std::mt19937_64 rng(s.seed ^ (0x9E3779B97F4A7C15ULL * (L + 1)));
        std::size_t lo = (L == 0) ? 1 : 0;  // the zero vector stays at index 0
        for (std::size_t i = out.size(); i > lo + 1; --i) {
            std::size_t j = lo + static_cast<std::size_t>(rng() % (i - lo));
            std::swap(out[i - 1], out[j]);
        }
    }
    return out;
}

inline std::vector<SparseVector> stream_candidates(const EnumerationScheme& s,
                                                   std::size_t count) {
    std::vector<SparseVector> out;
    out.emplace_back();  // zero first
    auto cmp = [](const SparseVector& a, const SparseVector& b) { return vec_less(a, b); };
    std::set<SparseVector, decltype(cmp)> seen(cmp);
    seen.insert(SparseVector{});
    std::mt19937_64 rng(s.seed * 0x2545F4914F6CDD1DULL + 0x9E3779B97F4A7C15ULL);
    std::size_t attempts = 0, limit = 1000 + 64 * count;
    while (out.size() < count) {
        if (++attempts > limit) throw std::length_error("stream scheme exhausted");
        std::size_t sup = 1 + static_cast<std::size_t>(rng() % 4);
        std::set<std::uint64_t> idx;
        while (idx.size() < sup) idx.insert(rng() % s.stream_max_index);
        std::vector<SparseVector::Term> terms;
        for (std::uint64_t i : idx) {
            std::uint32_t e = static_cast<std::uint32_t>(rng() % (s.stream_max_den_log2 + 1));
            long long mag = static_cast<long long>(s.magnitude_base) << e;
            long long num = 1 + static_cast<long long>(rng() % mag);
            if (rng() & 1) num = -num;
            terms.emplace_back(i, Rat(num, 1LL << e));
        }
        SparseVector v = SparseVector::from_terms(std::move(terms));
        if (seen.insert(v).second) out.push_back(std::move(v));
    }
    out.resize(count);
    return out;
}

}  // namespace detail

inline std::vector<SparseVector> enumerate_candidates(const EnumerationScheme& s,
                                                      std::size_t count) {
    if (count == 0) return {};
    if (s.kind == SchemeKind::Stream) return detail::stream_candidates(s, count);
    std::vector<SparseVector> out;
    out.reserve(count);
    for (std::uint32_t L = 0; out.size() < count; ++L) {
        auto level = detail::grid_level(s, L);
        for (auto& v : level) {
            out.push_back(std::move(v));
            if (out.size() == count) break;
        }
    }
    return out;
}

// Reproducible sample points for probes and spot checks: the grid generator
// reseeded with a salted copy of the scheme seed, so samples are scattered
// but fully determined by (scheme, count, salt).
inline std::vector<SparseVector> sample_points(EnumerationScheme s, std::size_t count,
                                               std::uint64_t salt) {
    s.kind = SchemeKind::Grid;
    s.seed ^= 0x53414D50ULL + salt;
    if (s.seed == 0) s.seed = 0x53414D50ULL + salt;
    return enumerate_candidates(s, count);
}

}  // namespace tilelat
