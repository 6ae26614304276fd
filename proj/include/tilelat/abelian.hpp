#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "tilelat/sparse_vector.hpp"

namespace tilelat {

// Dense integer matrix, row-major. Rows act as group generators; all normal
// forms below use row operations so the row lattice is preserved.
struct IntegerMatrix {
    std::size_t rows = 0, cols = 0;
    std::vector<Int> a;

    IntegerMatrix() = default;
    IntegerMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c) {}

    Int& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
    const Int& at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }

    static IntegerMatrix identity(std::size_t n) {
        IntegerMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1;
        return m;
    }

    friend bool operator==(const IntegerMatrix& x, const IntegerMatrix& y) {
        return x.rows == y.rows && x.cols == y.cols && x.a == y.a;
    }
};

// H = U * A (Hermite) or S = U * A * V (Smith; V and its inverse present).
struct NormalFormResult {
    IntegerMatrix H;
    IntegerMatrix U;
    std::optional<IntegerMatrix> V;
    std::optional<IntegerMatrix> V_inv;
    std::size_t rank = 0;
    std::vector<Int> invariant_factors;  // Smith only; each divides the next
};

namespace detail {

inline void row_axpy(IntegerMatrix& m, std::size_t dst, std::size_t src, const Int& q) {
    if (q == 0) return;
    for (std::size_t c = 0; c < m.cols; ++c) m.at(dst, c) -= q * m.at(src, c);
}

inline void row_swap(IntegerMatrix& m, std::size_t i, std::size_t j) {
    if (i == j) return;
    for (std::size_t c = 0; c < m.cols; ++c) std::swap(m.at(i, c), m.at(j, c));
}

inline void row_negate(IntegerMatrix& m, std::size_t i) {
    for (std::size_t c = 0; c < m.cols; ++c) m.at(i, c) = -m.at(i, c);
}

inline void col_axpy(IntegerMatrix& m, std::size_t dst, std::size_t src, const Int& q) {
    if (q == 0) return;
    for (std::size_t r = 0; r < m.rows; ++r) m.at(r, dst) -= q * m.at(r, src);
}

inline void col_swap(IntegerMatrix& m, std::size_t i, std::size_t j) {
    if (i == j) return;
    for (std::size_t r = 0; r < m.rows; ++r) std::swap(m.at(r, i), m.at(r, j));
}

inline void col_negate(IntegerMatrix& m, std::size_t i) {
    for (std::size_t r = 0; r < m.rows; ++r) m.at(r, i) = -m.at(r, i);
}

}  // namespace detail

// Row-style Hermite normal form. H has its nonzero rows first with strictly
// increasing pivot columns, positive pivots, entries above each pivot reduced
// into [0, pivot), and zeros below. U is the product of the row operations,
// so U * A = H and |det U| = 1.
inline NormalFormResult hnf(const IntegerMatrix& A) {
    NormalFormResult res;
    res.H = A;
    res.U = IntegerMatrix::identity(A.rows);
    IntegerMatrix& H = res.H;
    IntegerMatrix& U = res.U;
    std::size_t r = 0;
    for (std::size_t c = 0; c < A.cols && r < A.rows; ++c) {
        // Euclidean gcd pass over rows r.. in column c.
        while (true) {
            std::size_t best = H.rows;
            for (std::size_t i = r; i < H.rows; ++i) {
                if (H.at(i, c) == 0) continue;
                if (best == H.rows ||
                    boost::multiprecision::abs(H.at(i, c)) <
                        boost::multiprecision::abs(H.at(best, c)))
                    best = i;
            }
            if (best == H.rows) break;  // column is zero below r
            detail::row_swap(H, r, best);
            detail::row_swap(U, r, best);
            bool cleared = true;
            for (std::size_t i = r + 1; i < H.rows; ++i) {
                if (H.at(i, c) == 0) continue;
                Int q = floor_div(H.at(i, c), H.at(r, c));
                detail::row_axpy(H, i, r, q);
                detail::row_axpy(U, i, r, q);
                if (H.at(i, c) != 0) cleared = false;
            }
            if (cleared) break;
        }
        if (H.at(r, c) == 0) continue;
        if (H.at(r, c) < 0) {
            detail::row_negate(H, r);
            detail::row_negate(U, r);
        }
        for (std::size_t i = 0; i < r; ++i) {
            Int q = floor_div(H.at(i, c), H.at(r, c));
            detail::row_axpy(H, i, r, q);
            detail::row_axpy(U, i, r, q);
        }
        ++r;
    }
    res.rank = r;
    return res;
}

// Smith normal form: S = U * A * V with S diagonal, nonnegative, and each
// diagonal entry dividing the next. V_inv tracks the inverses of the column
// operations, so V * V_inv = I.
inline NormalFormResult smith(const IntegerMatrix& A) {
    NormalFormResult res;
    res.H = A;
    res.U = IntegerMatrix::identity(A.rows);
    res.V = IntegerMatrix::identity(A.cols);
    res.V_inv = IntegerMatrix::identity(A.cols);
    IntegerMatrix& S = res.H;
    IntegerMatrix& U = res.U;
    IntegerMatrix& V = *res.V;
    IntegerMatrix& W = *res.V_inv;  // maintains W = V^{-1}

    auto cswap = [&](std::size_t i, std::size_t j) {
        detail::col_swap(S, i, j);
        detail::col_swap(V, i, j);
        detail::row_swap(W, i, j);
    };
    auto caxpy = [&](std::size_t dst, std::size_t src, const Int& q) {
        // col_dst -= q * col_src  <=>  on the inverse, row_src += q * row_dst
        detail::col_axpy(S, dst, src, q);
        detail::col_axpy(V, dst, src, q);
        detail::row_axpy(W, src, dst, -q);
    };
    auto cneg = [&](std::size_t i) {
        detail::col_negate(S, i);
        detail::col_negate(V, i);
        detail::row_negate(W, i);
    };

    std::size_t n = std::min(A.rows, A.cols);
    std::size_t t = 0;
    for (; t < n; ++t) {
        // Find a nonzero pivot in the trailing submatrix.
        std::size_t pr = S.rows, pc = S.cols;
        for (std::size_t i = t; i < S.rows && pr == S.rows; ++i)
            for (std::size_t j = t; j < S.cols; ++j)
                if (S.at(i, j) != 0) {
                    pr = i;
                    pc = j;
                    break;
                }
        if (pr == S.rows) break;
        detail::row_swap(S, t, pr);
        detail::row_swap(U, t, pr);
        cswap(t, pc);

        while (true) {
            // Clear column t below the pivot.
            bool dirty = false;
            for (std::size_t i = t + 1; i < S.rows; ++i) {
                if (S.at(i, t) == 0) continue;
                Int q = floor_div(S.at(i, t), S.at(t, t));
                detail::row_axpy(S, i, t, q);
                detail::row_axpy(U, i, t, q);
                if (S.at(i, t) != 0) {
                    detail::row_swap(S, t, i);
                    detail::row_swap(U, t, i);
                    dirty = true;
                }
            }
            if (dirty) continue;
            // Clear row t right of the pivot.
            for (std::size_t j = t + 1; j < S.cols; ++j) {
                if (S.at(t, j) == 0) continue;
                Int q = floor_div(S.at(t, j), S.at(t, t));
                caxpy(j, t, q);
                if (S.at(t, j) != 0) {
                    cswap(t, j);
                    dirty = true;
                }
            }
            if (dirty) continue;
            // Enforce divisibility of the trailing submatrix by the pivot.
            bool fixed = true;
            for (std::size_t i = t + 1; i < S.rows && fixed; ++i)
                for (std::size_t j = t + 1; j < S.cols && fixed; ++j)
                    if (S.at(i, j) % S.at(t, t) != 0) {
                        detail::row_axpy(S, t, i, Int(-1));  // row_t += row_i
                        detail::row_axpy(U, t, i, Int(-1));
                        fixed = false;
                    }
            if (fixed) break;
        }
        if (S.at(t, t) < 0) cneg(t);
    }
    res.rank = t;
    for (std::size_t i = 0; i < t; ++i) res.invariant_factors.push_back(S.at(i, i));
    return res;
}

// Exact determinant by fraction-free (Bareiss) elimination.
inline Int det(const IntegerMatrix& A) {
    if (A.rows != A.cols) return 0;
    std::size_t n = A.rows;
    if (n == 0) return 1;
    IntegerMatrix m = A;
    Int prev(1);
    int sign = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (m.at(k, k) == 0) {
            std::size_t s = k + 1;
            while (s < n && m.at(s, k) == 0) ++s;
            if (s == n) return 0;
            detail::row_swap(m, k, s);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j)
                m.at(i, j) = (m.at(i, j) * m.at(k, k) - m.at(i, k) * m.at(k, j)) / prev;
        prev = m.at(k, k);
    }
    return sign > 0 ? m.at(n - 1, n - 1) : -m.at(n - 1, n - 1);
}

namespace detail {

// Shared coordinate frame for a rational generator set: sorted support
// indices and the common denominator that clears every entry to an integer.
struct CoordinateFrame {
    std::vector<std::uint64_t> coords;
    Int den{1};

    static CoordinateFrame of(const std::vector<SparseVector>& vs) {
        CoordinateFrame f;
        for (const auto& v : vs)
            for (const auto& [i, c] : v.terms()) {
                f.coords.push_back(i);
                f.den = boost::multiprecision::lcm(f.den, denominator(c));
            }
        std::sort(f.coords.begin(), f.coords.end());
        f.coords.erase(std::unique(f.coords.begin(), f.coords.end()), f.coords.end());
        return f;
    }

    std::optional<std::size_t> col(std::uint64_t idx) const {
        auto it = std::lower_bound(coords.begin(), coords.end(), idx);
        if (it == coords.end() || *it != idx) return std::nullopt;
        return std::size_t(it - coords.begin());
    }

    // Integer row of v scaled by den; nullopt if v has support outside the
    // frame or a denominator not dividing den.
    std::optional<std::vector<Int>> row(const SparseVector& v) const {
        std::vector<Int> r(coords.size());
        for (const auto& [i, c] : v.terms()) {
            auto j = col(i);
            if (!j) return std::nullopt;
            Rat scaled = Rat(den) * c;
            if (denominator(scaled) != 1) return std::nullopt;
            r[*j] = numerator(scaled);
        }
        return r;
    }

    SparseVector vector_of(const std::vector<Int>& r) const {
        std::vector<SparseVector::Term> terms;
        for (std::size_t j = 0; j < r.size(); ++j)
            if (r[j] != 0) terms.emplace_back(coords[j], Rat(r[j], den));
        return SparseVector::from_terms(std::move(terms));
    }
};

}  // namespace detail

// Integer coefficients n with sum n_i * gens_i = v, or nullopt when v is not
// in the generated group. Works over the shared frame: scale by the common
// denominator, then back-substitute through the Hermite form's pivots.
inline std::optional<std::vector<Int>> subgroup_membership(
    const std::vector<SparseVector>& gens, const SparseVector& v) {
    if (gens.empty()) {
        if (v.is_zero()) return std::vector<Int>{};
        return std::nullopt;
    }
    std::vector<SparseVector> all = gens;
    all.push_back(v);
    auto frame = detail::CoordinateFrame::of(all);
    IntegerMatrix A(gens.size(), frame.coords.size());
    for (std::size_t i = 0; i < gens.size(); ++i) {
        auto r = *frame.row(gens[i]);
        for (std::size_t j = 0; j < A.cols; ++j) A.at(i, j) = r[j];
    }
    std::vector<Int> w = *frame.row(v);

    NormalFormResult nf = hnf(A);
    std::vector<Int> y(nf.rank);
    std::vector<Int> resid = w;
    for (std::size_t i = 0; i < nf.rank; ++i) {
        std::size_t pc = 0;
        while (pc < nf.H.cols && nf.H.at(i, pc) == 0) ++pc;
        if (resid[pc] % nf.H.at(i, pc) != 0) return std::nullopt;
        y[i] = resid[pc] / nf.H.at(i, pc);
        if (y[i] != 0)
            for (std::size_t j = pc; j < nf.H.cols; ++j)
                resid[j] -= y[i] * nf.H.at(i, j);
    }
    for (const Int& x : resid)
        if (x != 0) return std::nullopt;
    std::vector<Int> n(gens.size());
    for (std::size_t i = 0; i < nf.rank; ++i)
        if (y[i] != 0)
            for (std::size_t j = 0; j < gens.size(); ++j)
                n[j] += y[i] * nf.U.at(i, j);
    return n;
}

// Canonical independent basis of the generated group: the nonzero Hermite
// rows scaled back by the common denominator.
inline std::vector<SparseVector> free_basis(const std::vector<SparseVector>& gens) {
    if (gens.empty()) return {};
    auto frame = detail::CoordinateFrame::of(gens);
    if (frame.coords.empty()) return {};
    IntegerMatrix A(gens.size(), frame.coords.size());
    for (std::size_t i = 0; i < gens.size(); ++i) {
        auto r = *frame.row(gens[i]);
        for (std::size_t j = 0; j < A.cols; ++j) A.at(i, j) = r[j];
    }
    NormalFormResult nf = hnf(A);
    std::vector<SparseVector> basis;
    for (std::size_t i = 0; i < nf.rank; ++i) {
        std::vector<Int> row(nf.H.cols);
        for (std::size_t j = 0; j < nf.H.cols; ++j) row[j] = nf.H.at(i, j);
        basis.push_back(frame.vector_of(row));
    }
    return basis;
}

// Torsion in a quotient G_{i+1}/G_i, reported with the offending invariant
// factor, or a link of the chain that is not actually nested.
struct ChainError {
    enum class Kind { NotNested, TorsionQuotient } kind;
    std::size_t level = 0;  // index i of the failing inclusion G_i ⊆ G_{i+1}
    Int factor{0};          // invariant factor > 1 (TorsionQuotient only)
};

using ExtendResult = std::variant<std::vector<std::vector<SparseVector>>, ChainError>;

// Bases B_0 ⊂ B_1 ⊂ … with B_i a prefix of B_{i+1} and span(B_i) = G_i,
// for a chain of groups given by generator lists with torsion-free quotients.
// Each step writes B_i in a basis C of G_{i+1}, brings that coefficient
// matrix M to Smith form U M V = [I 0], and extends by the tail of V^{-1} C.
inline ExtendResult extend_basis(const std::vector<std::vector<SparseVector>>& chain) {
    std::vector<std::vector<SparseVector>> bases;
    if (chain.empty()) return bases;
    bases.push_back(free_basis(chain[0]));
    for (std::size_t lvl = 1; lvl < chain.size(); ++lvl) {
        const auto& prev = bases.back();
        std::vector<SparseVector> C = free_basis(chain[lvl]);
        IntegerMatrix M(prev.size(), C.size());
        for (std::size_t i = 0; i < prev.size(); ++i) {
            auto coef = subgroup_membership(C, prev[i]);
            if (!coef)
                return ChainError{ChainError::Kind::NotNested, lvl - 1, Int(0)};
            for (std::size_t j = 0; j < C.size(); ++j) M.at(i, j) = (*coef)[j];
        }
        NormalFormResult nf = smith(M);
        for (const Int& s : nf.invariant_factors)
            if (s != 1)
                return ChainError{ChainError::Kind::TorsionQuotient, lvl - 1, s};
        if (nf.rank != prev.size())  // independent rows cannot drop rank
            return ChainError{ChainError::Kind::TorsionQuotient, lvl - 1, Int(0)};
        // C' = V^{-1} C; rows rank.. extend the previous basis.
        std::vector<SparseVector> next = prev;
        const IntegerMatrix& W = *nf.V_inv;
        for (std::size_t r = nf.rank; r < C.size(); ++r) {
            SparseVector row;
            for (std::size_t j = 0; j < C.size(); ++j)
                row.add_scaled(C[j], Rat(W.at(r, j)));
            next.push_back(std::move(row));
        }
        bases.push_back(std::move(next));
    }
    return bases;
}

}  // namespace tilelat
