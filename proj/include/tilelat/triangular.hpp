#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <vector>

#include "tilelat/sparse_vector.hpp"

namespace tilelat {

// Basis with one control coordinate per vector such that later vectors
// vanish there: basis[j].coeff(control[i]) == 0 for j > i, and
// basis[i].coeff(control[i]) != 0. Then coordinate control[i] of any
// combination sum m_j basis_j is fixed once m_0..m_i are, which yields exact
// integer bounds level by level: the control coordinates are a subset of all
// coordinates, so sum_i |x[control_i] - t[control_i]|^p never exceeds the
// p-th power of the full distance.
struct TriangularSystem {
    std::vector<SparseVector> basis;
    std::vector<std::uint64_t> control;
};

struct BallHit {
    std::vector<Int> coeffs;  // in basis order
    SparseVector element;
    Rat dist_pow;
};

// ExistNonzero stops at the first hit whose coefficient vector is nonzero;
// with the query centered at a group element this asks for a second element
// in the ball without enumerating the whole ball.
enum class BallMode { Collect, Exist, ExistNonzero, Count };

struct BallOutcome {
    std::vector<BallHit> hits;   // Collect mode
    std::uint64_t count = 0;     // accepted leaves (all modes)
    std::uint64_t nodes = 0;     // search-tree size, for diagnostics
};

// Every x = sum m_j basis_j with distance_pow(x, target) <= c (or < c in
// strict mode). The search walks each coefficient outward from the real
// minimizer of its control-coordinate term, so both directions stop at the
// first budget overflow; a final exact full-distance check filters leaves
// (control-coordinate pruning is necessary, not sufficient).
inline BallOutcome enumerate_triangular(const TriangularSystem& sys,
                                        const SparseVector& target, PNorm p,
                                        const PowThreshold& radius,
                                        bool strict = false,
                                        BallMode mode = BallMode::Collect) {
    const std::size_t m = sys.basis.size();
    BallOutcome out;

    std::vector<Rat> diag(m);
    std::vector<std::vector<std::pair<std::size_t, Rat>>> touch(m);
    for (std::size_t j = 0; j < m; ++j) {
        diag[j] = sys.basis[j].coeff(sys.control[j]);
        for (std::size_t i = j + 1; i < m; ++i) {
            Rat cij = sys.basis[j].coeff(sys.control[i]);
            if (cij != 0) touch[j].emplace_back(i, std::move(cij));
        }
    }
    std::vector<Rat> tf(m);
    for (std::size_t i = 0; i < m; ++i) tf[i] = target.coeff(sys.control[i]);

    // Target mass outside the basis frame is a constant part of every
    // distance; charging it upfront tightens pruning.
    Rat budget0(0);
    {
        std::vector<std::uint64_t> frame;
        for (const auto& b : sys.basis)
            for (const auto& [i, c] : b.terms()) frame.push_back(i);
        std::sort(frame.begin(), frame.end());
        frame.erase(std::unique(frame.begin(), frame.end()), frame.end());
        for (const auto& [i, c] : target.terms())
            if (!std::binary_search(frame.begin(), frame.end(), i))
                budget0 += abs_pow(c, p.p);
    }

    std::vector<Rat> s(m, Rat(0));
    std::vector<Int> coeffs(m, Int(0));
    bool stop = false;

    auto within = [&](const Rat& v) { return strict ? v < radius.c : v <= radius.c; };

    std::function<void(std::size_t, const Rat&)> rec = [&](std::size_t lvl,
                                                           const Rat& used) {
        if (stop) return;
        ++out.nodes;
        if (lvl == m) {
            SparseVector x;
            for (std::size_t j = 0; j < m; ++j)
                if (coeffs[j] != 0) x.add_scaled(sys.basis[j], Rat(coeffs[j]));
            Rat d = distance_pow(x, target, p);
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
        Rat base = s[lvl] - tf[lvl];
        auto try_coeff = [&](const Int& n) -> bool {  // false: over budget
            Rat term = abs_pow(Rat(n) * diag[lvl] + base, p.p);
            Rat nb = used + term;
            if (strict ? nb >= radius.c : nb > radius.c) return false;
            coeffs[lvl] = n;
            if (n != 0)
                for (const auto& [i, c] : touch[lvl]) s[i] += Rat(n) * c;
            rec(lvl + 1, nb);
            if (n != 0)
                for (const auto& [i, c] : touch[lvl]) s[i] -= Rat(n) * c;
            coeffs[lvl] = 0;
            return true;
        };
        Int n0 = floor_rat(-base / diag[lvl]);
        for (Int n = n0; !stop; --n)
            if (!try_coeff(n)) break;
        for (Int n = n0 + 1; !stop; ++n)
            if (!try_coeff(n)) break;
    };

    // Every distance is at least budget0, so an overfull constant part rules
    // the whole query out.
    if (within(budget0)) rec(0, budget0);
    return out;
}

}  // namespace tilelat
