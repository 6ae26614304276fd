#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "tilelat/triangular.hpp"

namespace tilelat {

// Exact l_2 route: factor the rational Gram matrix G of an independent
// generator set as G = U^T D U with U unit upper-triangular and D positive
// diagonal (no square roots), so the squared distance
//   ||sum n_j g_j - t||^2 = sum_i D_i (n_i - w_i + sum_{j>i} U_ij (n_j - w_j))^2 + rho
// with G w = <g_i, t> and rho = ||t||^2 - w^T <g,t> = dist^2(t, span) is a
// sum of exact rational terms that prunes on the true quadratic form.
struct GramSystem {
    std::vector<SparseVector> gens;
    std::vector<Rat> D;
    std::vector<std::vector<Rat>> U;  // rows; U[i][j] defined for j >= i
};

// Fails (nullopt) when the generators are dependent: some elimination pivot
// hits zero, i.e. the Gram matrix is only positive semidefinite.
inline std::optional<GramSystem> gram_factor(std::vector<SparseVector> gens) {
    const std::size_t m = gens.size();
    std::vector<std::vector<Rat>> G(m, std::vector<Rat>(m));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i; j < m; ++j) G[i][j] = G[j][i] = dot(gens[i], gens[j]);
    GramSystem sys;
    sys.gens = std::move(gens);
    sys.D.assign(m, Rat(0));
    sys.U.assign(m, {});
    for (std::size_t i = 0; i < m; ++i) {
        Rat di = G[i][i];
        for (std::size_t k = 0; k < i; ++k)
            di -= sys.D[k] * sys.U[k][i - k] * sys.U[k][i - k];
        if (di <= 0) return std::nullopt;
        sys.D[i] = di;
        sys.U[i].assign(m - i, Rat(0));
        sys.U[i][0] = 1;
        for (std::size_t j = i + 1; j < m; ++j) {
            Rat v = G[i][j];
            for (std::size_t k = 0; k < i; ++k)
                v -= sys.D[k] * sys.U[k][i - k] * sys.U[k][j - k];
            sys.U[i][j - i] = v / di;
        }
    }
    return sys;
}

namespace detail {
inline const Rat& gram_u(const GramSystem& s, std::size_t i, std::size_t j) {
    return s.U[i][j - i];
}
}  // namespace detail

// Extends the factorization by one generator in O(m^2): one new column of U
// and one new pivot. False when the new generator is dependent on the old.
inline bool gram_append(GramSystem& sys, SparseVector g) {
    const std::size_t m = sys.gens.size();
    std::vector<Rat> col(m);
    for (std::size_t i = 0; i < m; ++i) {
        Rat v = dot(sys.gens[i], g);
        for (std::size_t k = 0; k < i; ++k)
            v -= sys.D[k] * sys.U[k][i - k] * sys.U[k][m - k];
        col[i] = v / sys.D[i];
        sys.U[i].push_back(col[i]);
    }
    Rat dm = norm_pow(g, PNorm{2});
    for (std::size_t k = 0; k < m; ++k) dm -= sys.D[k] * col[k] * col[k];
    if (dm <= 0) {
        for (std::size_t i = 0; i < m; ++i) sys.U[i].pop_back();
        return false;
    }
    sys.D.push_back(std::move(dm));
    sys.U.push_back({Rat(1)});
    sys.gens.push_back(std::move(g));
    return true;
}

// All x = sum n_j g_j with squared distance to target <= c (< c in strict
// mode). Complete: the level terms are exact and nonnegative, and each
// coefficient walks outward from its real minimizer until the budget
// overflows.
inline BallOutcome gram_enumerate(const GramSystem& sys, const SparseVector& target,
                                  const PowThreshold& radius, bool strict = false,
                                  BallMode mode = BallMode::Collect) {
    const std::size_t m = sys.gens.size();
    BallOutcome out;
    PNorm p2{2};

    // Solve G w = cvec through the factorization: U^T z = cvec (forward),
    // y = D^{-1} z, U w = y (backward).
    std::vector<Rat> cvec(m), w(m), y(m);
    for (std::size_t i = 0; i < m; ++i) cvec[i] = dot(sys.gens[i], target);
    for (std::size_t i = 0; i < m; ++i) {
        y[i] = cvec[i];
        for (std::size_t k = 0; k < i; ++k)
            y[i] -= detail::gram_u(sys, k, i) * y[k];
    }
    for (std::size_t i = 0; i < m; ++i) y[i] /= sys.D[i];
    for (std::size_t ii = m; ii-- > 0;) {
        w[ii] = y[ii];
        for (std::size_t j = ii + 1; j < m; ++j)
            w[ii] -= detail::gram_u(sys, ii, j) * w[j];
    }
    Rat rho = norm_pow(target, p2);
    for (std::size_t i = 0; i < m; ++i) rho -= w[i] * cvec[i];

    auto within = [&](const Rat& v) { return strict ? v < radius.c : v <= radius.c; };
    if (!within(rho)) return out;  // every distance is at least rho

    // Per-level constant shift: what_i = w_i + sum_{j>i} U_ij w_j.
    std::vector<Rat> what(m);
    for (std::size_t i = 0; i < m; ++i) {
        what[i] = w[i];
        for (std::size_t j = i + 1; j < m; ++j)
            what[i] += detail::gram_u(sys, i, j) * w[j];
    }

    std::vector<Int> coeffs(m, Int(0));
    bool stop = false;

    std::function<void(std::size_t, const Rat&)> rec = [&](std::size_t lvl_plus,
                                                           const Rat& used) {
        if (stop) return;
        ++out.nodes;
        if (lvl_plus == 0) {
            SparseVector x;
            for (std::size_t j = 0; j < m; ++j)
                if (coeffs[j] != 0) x.add_scaled(sys.gens[j], Rat(coeffs[j]));
            Rat d = distance_pow(x, target, p2);
            if (!within(d)) return;
            if (mode == BallMode::ExistNonzero &&
                std::all_of(coeffs.begin(), coeffs.end(),
                            [](const Int& n) { return n == 0; }))
                return;
            ++out.count;
            if (mode != BallMode::Count)
                out.hits.push_back(BallHit{coeffs, std::move(x), std::move(d)});
            if (mode == BallMode::Exist || mode == BallMode::ExistNonzero) stop = true;
            return;
        }
        std::size_t i = lvl_plus - 1;
        Rat carry(0);
        for (std::size_t j = i + 1; j < m; ++j)
            if (coeffs[j] != 0) carry += detail::gram_u(sys, i, j) * Rat(coeffs[j]);
        Rat base = carry - what[i];  // term = D_i * (n + base)^2
        auto try_coeff = [&](const Int& n) -> bool {
            Rat v = Rat(n) + base;
            Rat nb = used + sys.D[i] * v * v;
            if (strict ? nb >= radius.c : nb > radius.c) return false;
            coeffs[i] = n;
            rec(i, nb);
            coeffs[i] = 0;
            return true;
        };
        Int n0 = floor_rat(-base);
        for (Int n = n0; !stop; --n)
            if (!try_coeff(n)) break;
        for (Int n = n0 + 1; !stop; ++n)
            if (!try_coeff(n)) break;
    };

    rec(m, rho);
    return out;
}

}  // namespace tilelat
